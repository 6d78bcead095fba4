//! Zero level set extraction by marching squares.
//!
//! Corners with `u > 0` count as inside. Each cell contributes segments
//! oriented so the inside lies to their left; saddle cells are split by the
//! sign of the cell average. Segments are chained through shared edge
//! crossings into closed polylines.

use std::f64::consts::TAU;

use crate::grid::{Domain, ScalarField};

#[derive(Debug, Clone, PartialEq)]
pub struct ContourComponent {
    /// Closed polyline; the last vertex connects back to the first.
    pub vertices: Vec<[f64; 2]>,
}

impl ContourComponent {
    pub fn length(&self) -> f64 {
        closed_edges(&self.vertices)
            .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
            .sum()
    }

    /// Shoelace area, positive for counter-clockwise traversal.
    pub fn signed_area(&self) -> f64 {
        0.5 * closed_edges(&self.vertices)
            .map(|(a, b)| a[0] * b[1] - b[0] * a[1])
            .sum::<f64>()
    }

    /// `Σ exterior angles / 2π`, rounded to the nearest integer.
    pub fn turning_number(&self) -> i32 {
        (self.total_turning() / TAU).round() as i32
    }

    /// Sum of signed exterior angles in radians.
    pub fn total_turning(&self) -> f64 {
        // drop coincident vertices so every edge has a direction
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(self.vertices.len());
        for &v in &self.vertices {
            if pts
                .last()
                .map_or(true, |p: &[f64; 2]| (p[0] - v[0]).hypot(p[1] - v[1]) > 1e-14)
            {
                pts.push(v);
            }
        }
        while pts.len() > 1 {
            let (a, b) = (pts[0], pts[pts.len() - 1]);
            if (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-14 {
                break;
            }
            pts.pop();
        }
        let n = pts.len();
        if n < 3 {
            return 0.0;
        }
        (0..n)
            .map(|i| {
                let (p, q, r) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
                let (ax, ay) = (q[0] - p[0], q[1] - p[1]);
                let (bx, by) = (r[0] - q[0], r[1] - q[1]);
                (ax * by - ay * bx).atan2(ax * bx + ay * by)
            })
            .sum()
    }

    /// +1 when traversed counter-clockwise (the `u > 0` side is enclosed),
    /// -1 when the component bounds a hole.
    pub fn orientation(&self) -> i32 {
        if self.signed_area() >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn max_radius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0].hypot(v[1]))
            .fold(0.0, f64::max)
    }
}

fn closed_edges(v: &[[f64; 2]]) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Contour {
    pub components: Vec<ContourComponent>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContourMetrics {
    pub length: f64,
    pub turning_numbers: Vec<i32>,
    pub component_count: usize,
    pub max_radius: f64,
}

pub fn contour_metrics(c: &Contour) -> ContourMetrics {
    ContourMetrics {
        length: c.components.iter().map(|k| k.length()).sum(),
        turning_numbers: c.components.iter().map(|k| k.turning_number()).collect(),
        component_count: c.components.len(),
        max_radius: c
            .components
            .iter()
            .map(|k| k.max_radius())
            .fold(0.0, f64::max),
    }
}

const NONE: u32 = u32::MAX;

/// Extracts the zero level set of `u` as closed, oriented polylines.
pub fn extract_contour(domain: &Domain, u: &ScalarField) -> Contour {
    let grid = domain.grid();
    let n = grid.n();
    let v = &u.values;
    let inside = |k: usize| v[k] > 0.0;
    // edge ids: 2k for (i,j)-(i+1,j), 2k+1 for (i,j)-(i,j+1), k = j n + i
    let mut next = vec![NONE; 2 * n * n];
    let mut starts = Vec::new();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let c = [
                grid.index(i, j),
                grid.index(i + 1, j),
                grid.index(i + 1, j + 1),
                grid.index(i, j + 1),
            ];
            let mask = c.iter().enumerate().fold(0u8, |m, (b, &k)| m | ((inside(k) as u8) << b));
            if mask == 0 || mask == 15 {
                continue;
            }
            // cell edges in counter-clockwise order: bottom, right, top, left
            let edge = [2 * c[0], 2 * c[1] + 1, 2 * c[3], 2 * c[0] + 1];
            let is_in = |q: usize| mask >> q & 1 == 1;
            let saddle = mask == 5 || mask == 10;
            let center_in = saddle && c.iter().map(|&k| v[k]).sum::<f64>() > 0.0;
            for e in 0..4 {
                // a segment starts where the ccw walk goes from inside to outside
                if !(is_in(e) && !is_in((e + 1) % 4)) {
                    continue;
                }
                let end = if saddle {
                    if center_in {
                        (e + 1) % 4
                    } else {
                        (e + 3) % 4
                    }
                } else {
                    (1..4)
                        .map(|s| (e + s) % 4)
                        .find(|&q| !is_in(q) && is_in((q + 1) % 4))
                        .expect("non-saddle cell has one entry edge")
                };
                next[edge[e]] = edge[end] as u32;
                starts.push(edge[e]);
            }
        }
    }

    let point = |id: usize| -> [f64; 2] {
        let k = id / 2;
        let (i, j) = grid.coord(k);
        let other = if id % 2 == 0 { k + 1 } else { k + n };
        let (a, b) = (v[k], v[other]);
        let t = if a != b { a / (a - b) } else { 0.5 };
        let (x, y) = (grid.x(i), grid.x(j));
        if id % 2 == 0 {
            [x + t * grid.h(), y]
        } else {
            [x, y + t * grid.h()]
        }
    };

    let mut visited = vec![false; 2 * n * n];
    let mut components = Vec::new();
    for &s in &starts {
        if visited[s] {
            continue;
        }
        let mut vertices = Vec::new();
        let mut cur = s;
        loop {
            visited[cur] = true;
            vertices.push(point(cur));
            let nx = next[cur];
            if nx == NONE {
                break;
            }
            cur = nx as usize;
            if cur == s || visited[cur] {
                break;
            }
        }
        components.push(ContourComponent { vertices });
    }
    Contour { components }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::recovery::{build_recovery_field, Component, CurveSpec, CutoffWidth, Orientation, RecoveryParams};
    use std::f64::consts::PI;

    #[test]
    fn square_polyline_metrics() {
        let s = 0.4;
        let sq = ContourComponent {
            vertices: vec![[0.0, 0.0], [s, 0.0], [s, s], [0.0, s]],
        };
        assert!((sq.length() - 4.0 * s).abs() < 1e-15);
        assert_eq!(sq.turning_number(), 1);
        let rev = ContourComponent {
            vertices: sq.vertices.iter().rev().cloned().collect(),
        };
        assert_eq!(rev.turning_number(), -1);
        assert_eq!(rev.orientation(), -1);
    }

    #[test]
    fn empty_contour() {
        let d = Domain::new(GridSpec::new(32, 1.25).unwrap());
        let c = extract_contour(&d, &d.filled(-1.0));
        assert!(c.components.is_empty());
        let m = contour_metrics(&c);
        assert_eq!(m, ContourMetrics::default());
    }

    #[test]
    fn circle_contour() {
        let d = Domain::new(GridSpec::new(256, 1.25).unwrap());
        let spec = CurveSpec::new(vec![Component::circle([0.0, 0.0], 0.5, Orientation::Positive)]).unwrap();
        let u = build_recovery_field(&spec, &RecoveryParams::new(0.025), &d).unwrap();
        let c = extract_contour(&d, &u);
        let m = contour_metrics(&c);
        assert_eq!(m.component_count, 1);
        assert!((m.length - PI).abs() / PI < 0.01);
        assert_eq!(m.turning_numbers, vec![1]);
        assert!((m.max_radius - 0.5).abs() < 1e-3);
    }

    #[test]
    fn appendix_set_components() {
        let d = Domain::new(GridSpec::new(401, 1.25).unwrap());
        let spec = CurveSpec::new(vec![
            Component::circle([0.0, 0.0], 0.5, Orientation::Positive),
            Component::circle([0.0, 0.75], 0.2, Orientation::Positive),
            Component::circle([0.0, 0.0], 0.25, Orientation::Negative),
        ])
        .unwrap();
        let p = RecoveryParams::new(0.01).with_cutoff(CutoffWidth::None);
        let u = build_recovery_field(&spec, &p, &d).unwrap();
        let c = extract_contour(&d, &u);
        let m = contour_metrics(&c);
        assert_eq!(m.component_count, 3);
        let mut turning = m.turning_numbers.clone();
        turning.sort();
        assert_eq!(turning, vec![-1, 1, 1]);
        assert_eq!(turning.iter().sum::<i32>(), 1);
    }

    #[test]
    fn saddle_resolution_by_average() {
        // 2x2 checkerboard block in the middle of a negative field
        let d = Domain::new(GridSpec::new(16, 1.25).unwrap());
        let g = *d.grid();
        let mut u = d.filled(-1.0);
        u.values[g.index(7, 7)] = 1.0;
        u.values[g.index(8, 8)] = 1.0;
        // average (1 + 1 - 1 - 1)/4 = 0: not > 0, so the two blobs stay apart
        let c = extract_contour(&d, &u);
        assert_eq!(c.components.len(), 2);
        u.values[g.index(7, 7)] = 2.0;
        let c = extract_contour(&d, &u);
        assert_eq!(c.components.len(), 1);
        assert!(c.components.iter().all(|k| k.turning_number() == 1));
    }
}
