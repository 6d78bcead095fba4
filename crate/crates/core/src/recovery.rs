//! Optimal-profile phase fields built from oriented curve collections.
//!
//! A [`CurveSpec`] describes the boundary of a region `E` in the unit disk as
//! disjoint closed components. The recovery field is `q_ε(d(x))`, with `d`
//! the signed distance to `∂E` (positive in `E`) and `q_ε` the tanh profile
//! blended to `±1` by a smooth cutoff.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::grid::{Domain, ScalarField, CLAMP_VALUE};

/// Heteroclinic profile `tanh(r/√2)` of the quartic double well.
pub fn optimal_profile(r: f64) -> f64 {
    (r / SQRT_2).tanh()
}

/// Derivative of [`optimal_profile`].
pub fn optimal_profile_slope(r: f64) -> f64 {
    let c = (r / SQRT_2).cosh();
    1.0 / (SQRT_2 * c * c)
}

/// Surface-tension constant `∫_{-1}^{1} √(2W(s)) ds = 2√2/3`.
pub fn c0_constant() -> f64 {
    2.0 * SQRT_2 / 3.0
}

/// Smooth cutoff: 1 on `[-1, 1]`, 0 for `|r| ≥ 2`, quintic smoothstep in
/// between (C², nonincreasing in `|r|`).
pub fn cutoff(r: f64) -> f64 {
    let a = r.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let s = a - 1.0;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// The enclosed region belongs to the phase `u = +1`.
    Positive,
    /// The enclosed region is a hole of the phase.
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Orientation::Positive)
        } else if s == -1.0 {
            Ok(Orientation::Negative)
        } else {
            Err(Error::InvalidCurve(format!("orientation must be +1 or -1, got {s}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    Circle { center: [f64; 2], radius: f64 },
    /// Closed polygon; the last vertex connects back to the first.
    Polyline { vertices: Vec<[f64; 2]> },
}

impl Primitive {
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match self {
            Primitive::Circle { center, radius } => {
                ((p[0] - center[0]).hypot(p[1] - center[1]) - radius).abs()
            }
            Primitive::Polyline { vertices } => edges(vertices)
                .map(|(a, b)| segment_distance(p, a, b))
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            Primitive::Circle { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) < *radius
            }
            Primitive::Polyline { vertices } => {
                // even-odd crossing rule
                let mut inside = false;
                for (a, b) in edges(vertices) {
                    if (a[1] > p[1]) != (b[1] > p[1]) {
                        let t = (p[1] - a[1]) / (b[1] - a[1]);
                        if p[0] < a[0] + t * (b[0] - a[0]) {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Largest distance of the curve from the origin.
    fn max_norm(&self) -> f64 {
        match self {
            Primitive::Circle { center, radius } => center[0].hypot(center[1]) + radius,
            Primitive::Polyline { vertices } => vertices
                .iter()
                .map(|v| v[0].hypot(v[1]))
                .fold(0.0, f64::max),
        }
    }

    /// A point on the curve.
    fn anchor(&self) -> [f64; 2] {
        match self {
            Primitive::Circle { center, radius } => [center[0] + radius, center[1]],
            Primitive::Polyline { vertices } => vertices[0],
        }
    }

    /// Scale below which the signed distance stops being smooth near the curve.
    fn curvature_scale(&self) -> f64 {
        match self {
            Primitive::Circle { radius, .. } => *radius,
            Primitive::Polyline { vertices } => {
                0.5 * edges(vertices)
                    .map(|(a, b)| (b[0] - a[0]).hypot(b[1] - a[1]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    fn separation(&self, other: &Primitive) -> f64 {
        match (self, other) {
            (
                Primitive::Circle {
                    center: c1,
                    radius: r1,
                },
                Primitive::Circle {
                    center: c2,
                    radius: r2,
                },
            ) => {
                let d = (c1[0] - c2[0]).hypot(c1[1] - c2[1]);
                if d >= r1 + r2 {
                    d - r1 - r2
                } else if d <= (r1 - r2).abs() {
                    (r1 - r2).abs() - d
                } else {
                    0.0
                }
            }
            _ => {
                let a = sample_points(self);
                let b = sample_points(other);
                let ab = a.iter().map(|&p| other.distance(p)).fold(f64::INFINITY, f64::min);
                let ba = b.iter().map(|&p| self.distance(p)).fold(f64::INFINITY, f64::min);
                ab.min(ba)
            }
        }
    }
}

fn edges(v: &[[f64; 2]]) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

fn sample_points(p: &Primitive) -> Vec<[f64; 2]> {
    match p {
        Primitive::Circle { center, radius } => (0..720)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 720.0;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect(),
        Primitive::Polyline { vertices } => vertices.clone(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub shape: Primitive,
    pub orientation: Orientation,
}

impl Component {
    pub fn circle(center: [f64; 2], radius: f64, orientation: Orientation) -> Self {
        Self {
            shape: Primitive::Circle { center, radius },
            orientation,
        }
    }
}

/// Validated collection of disjoint, consistently oriented closed curves in
/// the open unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    components: Vec<Component>,
    /// For each component, the index of the innermost component containing it.
    parent: Vec<Option<usize>>,
}

impl CurveSpec {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidCurve("no components".into()));
        }
        for (i, c) in components.iter().enumerate() {
            match &c.shape {
                Primitive::Circle { radius, .. } if !(*radius > 0.0) => {
                    return Err(Error::InvalidCurve(format!(
                        "component {i}: radius must be positive"
                    )))
                }
                Primitive::Polyline { vertices } if vertices.len() < 3 => {
                    return Err(Error::InvalidCurve(format!(
                        "component {i}: polyline needs at least 3 vertices"
                    )))
                }
                _ => {}
            }
            if c.shape.max_norm() >= 1.0 {
                return Err(Error::InvalidCurve(format!(
                    "component {i} leaves the open unit disk"
                )));
            }
        }
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                if components[i].shape.separation(&components[j].shape) <= 0.0 {
                    return Err(Error::InvalidCurve(format!(
                        "components {i} and {j} intersect"
                    )));
                }
            }
        }
        // Nesting: innermost container = the containing component with the
        // largest nesting depth.
        let contains = |outer: usize, inner: usize| {
            outer != inner && components[outer].shape.contains(components[inner].shape.anchor())
        };
        let depth: Vec<usize> = (0..components.len())
            .map(|i| (0..components.len()).filter(|&o| contains(o, i)).count())
            .collect();
        let parent: Vec<Option<usize>> = (0..components.len())
            .map(|i| {
                (0..components.len())
                    .filter(|&o| contains(o, i))
                    .max_by_key(|&o| depth[o])
            })
            .collect();
        for (i, c) in components.iter().enumerate() {
            let expected = if depth[i] % 2 == 0 {
                Orientation::Positive
            } else {
                Orientation::Negative
            };
            if c.orientation != expected {
                return Err(Error::InvalidCurve(format!(
                    "component {i} at nesting depth {} must have orientation {:+}",
                    depth[i],
                    expected.sign()
                )));
            }
        }
        Ok(Self { components, parent })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Whether `p` lies in the phase region `E`.
    pub fn in_phase(&self, p: [f64; 2]) -> bool {
        // innermost component containing p decides
        let mut best: Option<(usize, usize)> = None;
        for (i, c) in self.components.iter().enumerate() {
            if c.shape.contains(p) {
                let depth = self.depth(i);
                if best.map_or(true, |(_, d)| depth > d) {
                    best = Some((i, depth));
                }
            }
        }
        match best {
            Some((i, _)) => self.components[i].orientation == Orientation::Positive,
            None => false,
        }
    }

    fn depth(&self, mut i: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent[i] {
            d += 1;
            i = p;
        }
        d
    }

    /// Signed distance to the union of all components, positive inside `E`.
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        let dist = self
            .components
            .iter()
            .map(|c| c.shape.distance(p))
            .fold(f64::INFINITY, f64::min);
        if self.in_phase(p) {
            dist
        } else {
            -dist
        }
    }

    /// Distance between the curve collection and the unit circle.
    pub fn boundary_clearance(&self) -> f64 {
        1.0 - self
            .components
            .iter()
            .map(|c| c.shape.max_norm())
            .fold(0.0, f64::max)
    }

    /// Smallest length scale of the configuration: curvature radii, half the
    /// pairwise separations and the clearance from the unit circle.
    pub fn reach(&self) -> f64 {
        let mut r = self.boundary_clearance();
        for (i, a) in self.components.iter().enumerate() {
            r = r.min(a.shape.curvature_scale());
            for b in &self.components[i + 1..] {
                r = r.min(0.5 * a.shape.separation(&b.shape));
            }
        }
        r
    }

    pub fn translated(&self, shift: [f64; 2]) -> Result<Self> {
        let components = self
            .components
            .iter()
            .map(|c| Component {
                orientation: c.orientation,
                shape: match &c.shape {
                    Primitive::Circle { center, radius } => Primitive::Circle {
                        center: [center[0] + shift[0], center[1] + shift[1]],
                        radius: *radius,
                    },
                    Primitive::Polyline { vertices } => Primitive::Polyline {
                        vertices: vertices
                            .iter()
                            .map(|v| [v[0] + shift[0], v[1] + shift[1]])
                            .collect(),
                    },
                },
            })
            .collect();
        Self::new(components)
    }
}

/// Half-width of the cutoff layer outside which the field is exactly `±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffWidth {
    /// `min(20 ε, 0.9 reach)`.
    Auto,
    Fixed(f64),
    /// Pure `q(d/ε)` without blending to the wells.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryParams {
    pub epsilon: f64,
    pub cutoff: CutoffWidth,
}

impl RecoveryParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            cutoff: CutoffWidth::Auto,
        }
    }

    pub fn with_cutoff(mut self, cutoff: CutoffWidth) -> Self {
        self.cutoff = cutoff;
        self
    }

    /// Resolves the cutoff half-width for `spec`, checking `0 < ε < δ/4`,
    /// `δ` below half the feature separation and `δ` below the clearance to
    /// the unit circle. `None` means no cutoff.
    pub fn delta_for(&self, spec: &CurveSpec) -> Result<Option<f64>> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        let reach = spec.reach();
        let delta = match self.cutoff {
            CutoffWidth::None => return Ok(None),
            CutoffWidth::Auto => (20.0 * self.epsilon).min(0.9 * reach),
            CutoffWidth::Fixed(d) => d,
        };
        if !(delta > 4.0 * self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "cutoff width {delta:.4} must exceed 4 epsilon = {:.4}",
                4.0 * self.epsilon
            )));
        }
        if delta > reach {
            return Err(Error::InvalidParameter(format!(
                "cutoff width {delta:.4} exceeds the curve reach {reach:.4}"
            )));
        }
        Ok(Some(delta))
    }
}

/// Blended profile `η(2r/δ) q(r/ε) + sgn(r)(1 - η(2r/δ))`.
pub fn cutoff_profile(r: f64, epsilon: f64, delta: Option<f64>) -> f64 {
    let q = optimal_profile(r / epsilon);
    match delta {
        None => q,
        Some(d) => {
            let e = cutoff(2.0 * r / d);
            if e == 1.0 {
                q
            } else {
                let s = if r > 0.0 {
                    1.0
                } else if r < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                e * q + s * (1.0 - e)
            }
        }
    }
}

/// Nodal recovery field `q_ε(d(x))`, clamped to −1 on the collar.
pub fn build_recovery_field(
    spec: &CurveSpec,
    params: &RecoveryParams,
    domain: &Domain,
) -> Result<ScalarField> {
    let delta = params.delta_for(spec)?;
    if let Some(d) = delta {
        if spec.boundary_clearance() < d {
            return Err(Error::InvalidCurve(format!(
                "curves come within {:.4} of the unit circle, cutoff needs {d:.4}",
                spec.boundary_clearance()
            )));
        }
    }
    let grid = *domain.grid();
    let mut u = ScalarField::constant(grid, CLAMP_VALUE);
    for k in domain.free_nodes() {
        let d = spec.signed_distance(grid.position(k));
        u.values[k] = cutoff_profile(d, params.epsilon, delta);
    }
    Ok(u)
}
