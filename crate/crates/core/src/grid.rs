//! Uniform tensor grid on `[-extent, extent]²` with a clamped collar outside
//! the unit disk, plus the finite-difference stencils and nodal quadrature
//! every energy is built from.
//!
//! Nodes are stored row-major: node `(i, j)` sits at
//! `x = -extent + i h`, `y = -extent + j h` and has flat index `j n + i`.
//! A node is FREE iff `|x| < 1 - h`; all other nodes are CLAMPED. Since
//! `extent > 1`, every FREE node has its four axis neighbours on the grid.

use crate::error::{Error, Result};

/// Smallest admissible node count per axis.
pub const MIN_NODES: usize = 16;

/// Value the phase field is frozen to on the clamped collar.
pub const CLAMP_VALUE: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    extent: f64,
    h: f64,
}

impl GridSpec {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!(
                "node count {n} below minimum {MIN_NODES}"
            )));
        }
        if !(extent.is_finite() && extent > 1.0) {
            return Err(Error::InvalidGrid(format!(
                "extent {extent} does not contain the unit disk"
            )));
        }
        Ok(Self {
            n,
            extent,
            h: spacing(n, extent),
        })
    }

    /// Grid with the given spacing (rounded to the nearest node count).
    pub fn with_spacing(h: f64, extent: f64) -> Result<Self> {
        let n = (2.0 * extent / h).round() as usize + 1;
        Self::new(n, extent)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        j * self.n + i
    }

    #[inline]
    pub fn coord(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.h
    }

    #[inline]
    pub fn position(&self, k: usize) -> [f64; 2] {
        let (i, j) = self.coord(k);
        [self.x(i), self.x(j)]
    }
}

/// Node spacing `2 extent / (n - 1)`; no validation.
pub fn spacing(n: usize, extent: f64) -> f64 {
    2.0 * extent / (n as f64 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Free,
    Clamped,
}

/// Grid together with its node classification.
///
/// FREE nodes of each row form one contiguous run (the disk is convex), which
/// the stencil loops below exploit.
#[derive(Debug, Clone)]
pub struct Domain {
    grid: GridSpec,
    free: Vec<bool>,
    rows: Vec<(usize, usize)>,
    free_count: usize,
}

impl Domain {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let r = 1.0 - grid.h();
        let mut free = vec![false; grid.len()];
        let mut rows = Vec::with_capacity(n);
        let mut free_count = 0;
        for j in 0..n {
            let y = grid.x(j);
            let mut span = (0, 0);
            for i in 0..n {
                let x = grid.x(i);
                if (x * x + y * y).sqrt() < r {
                    free[grid.index(i, j)] = true;
                    if span.1 == 0 {
                        span.0 = i;
                    }
                    span.1 = i + 1;
                    free_count += 1;
                }
            }
            rows.push(span);
        }
        Self {
            grid,
            free,
            rows,
            free_count,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn free_count(&self) -> usize {
        self.free_count
    }

    #[inline]
    pub fn is_free(&self, k: usize) -> bool {
        self.free[k]
    }

    pub fn class(&self, k: usize) -> NodeClass {
        if self.free[k] {
            NodeClass::Free
        } else {
            NodeClass::Clamped
        }
    }

    /// `[start, end)` column range of FREE nodes in row `j` (empty if none).
    #[inline]
    pub fn row_span(&self, j: usize) -> (usize, usize) {
        self.rows[j]
    }

    /// Iterates flat indices of FREE nodes in row-major order.
    pub fn free_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.grid.n();
        self.rows
            .iter()
            .enumerate()
            .flat_map(move |(j, &(a, b))| (a..b).map(move |i| j * n + i))
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    /// Field with `value` on FREE nodes and the clamp value elsewhere.
    pub fn filled(&self, value: f64) -> ScalarField {
        let mut f = ScalarField::constant(self.grid, CLAMP_VALUE);
        for k in self.free_nodes() {
            f.values[k] = value;
        }
        f
    }

    /// Resets every CLAMPED node to `value`.
    pub fn clamp(&self, values: &mut [f64], value: f64) {
        for (v, &free) in values.iter_mut().zip(&self.free) {
            if !free {
                *v = value;
            }
        }
    }

    /// Zeroes every CLAMPED entry.
    pub fn mask_free(&self, values: &mut [f64]) {
        self.clamp(values, 0.0)
    }

    /// Five-point Laplacian at FREE nodes, 0 on CLAMPED nodes.
    pub fn laplacian_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.grid.n();
        let inv_h2 = 1.0 / (self.h() * self.h());
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let (a, b) = self.rows[j];
            for i in a..b {
                let k = j * n + i;
                out[k] = (u[k + 1] + u[k - 1] + u[k + n] + u[k - n] - 4.0 * u[k]) * inv_h2;
            }
        }
    }

    /// Central-difference gradient at FREE nodes, 0 on CLAMPED nodes.
    pub fn gradient_into(&self, u: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let n = self.grid.n();
        let s = 0.5 / self.h();
        gx.iter_mut().for_each(|v| *v = 0.0);
        gy.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let (a, b) = self.rows[j];
            for i in a..b {
                let k = j * n + i;
                gx[k] = (u[k + 1] - u[k - 1]) * s;
                gy[k] = (u[k + n] - u[k - n]) * s;
            }
        }
    }

    /// Adjoint of [`Domain::gradient_into`] over FREE nodes: given nodal
    /// vector data `(wx, wy)` supported on FREE nodes, returns
    /// `out_j = Σ_i wx_i ∂(Dx u)_i/∂u_j + wy_i ∂(Dy u)_i/∂u_j` at FREE `j`.
    pub fn gradient_adjoint_into(&self, wx: &[f64], wy: &[f64], out: &mut [f64]) {
        let n = self.grid.n();
        let s = 0.5 / self.h();
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..n {
            let (a, b) = self.rows[j];
            for i in a..b {
                let k = j * n + i;
                // wx, wy vanish on clamped nodes, so reading them is safe.
                out[k] = (wx[k - 1] - wx[k + 1] + wy[k - n] - wy[k + n]) * s;
            }
        }
    }

    /// Nodal quadrature `h² Σ_FREE f`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let n = self.grid.n();
        let mut sum = 0.0;
        for j in 0..n {
            let (a, b) = self.rows[j];
            sum += f[j * n + a..j * n + b].iter().sum::<f64>();
        }
        sum * self.h() * self.h()
    }

    /// `h² Σ_FREE f(k)` for a nodal integrand given as a closure.
    pub fn integrate_with(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        let n = self.grid.n();
        let mut sum = 0.0;
        for j in 0..n {
            let (a, b) = self.rows[j];
            for i in a..b {
                sum += f(j * n + i);
            }
        }
        sum * self.h() * self.h()
    }

    /// Euclidean inner product restricted to FREE nodes.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.grid.n();
        let mut sum = 0.0;
        for j in 0..n {
            let (s, e) = self.rows[j];
            let r = j * n + s..j * n + e;
            sum += a[r.clone()].iter().zip(&b[r]).map(|(x, y)| x * y).sum::<f64>();
        }
        sum
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).sqrt()
    }

    pub fn max_abs(&self, a: &[f64]) -> f64 {
        self.free_nodes().map(|k| a[k].abs()).fold(0.0, f64::max)
    }

    pub fn laplacian(&self, u: &ScalarField) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid);
        self.laplacian_into(&u.values, &mut out.values);
        out
    }

    pub fn gradient(&self, u: &ScalarField) -> VectorField {
        let mut g = VectorField::zeros(self.grid);
        self.gradient_into(&u.values, &mut g.x, &mut g.y);
        g
    }
}

/// Nodal scalar data on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let [x, y] = grid.position(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub grid: GridSpec,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            x: vec![0.0; grid.len()],
            y: vec![0.0; grid.len()],
        }
    }

    pub fn norm_at(&self, k: usize) -> f64 {
        self.x[k].hypot(self.y[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn domain(n: usize) -> Domain {
        Domain::new(GridSpec::new(n, 1.25).unwrap())
    }

    #[test]
    fn spacing_arithmetic() {
        assert_eq!(spacing(3, 1.25), 1.25);
        assert!(GridSpec::new(3, 1.25).is_err());
        assert!((GridSpec::new(201, 1.25).unwrap().h() - 0.0125).abs() < 1e-15);
        assert!((GridSpec::new(256, 1.25).unwrap().h() - 0.009804).abs() < 1e-6);
        assert!(GridSpec::new(64, 1.0).is_err());
        assert!(GridSpec::new(64, 0.5).is_err());
    }

    #[test]
    fn classification() {
        let d = domain(201);
        let g = *d.grid();
        assert_eq!(d.class(g.index(100, 100)), NodeClass::Free);
        assert_eq!(d.class(g.index(200, 100)), NodeClass::Clamped);
        assert!(d.free_count() >= 1);
        for k in 0..d.len() {
            let [x, y] = g.position(k);
            assert_eq!(d.is_free(k), x.hypot(y) < 1.0 - g.h());
        }
        assert_eq!(d.free_nodes().count(), d.free_count());
        // grid boundary is always clamped
        for i in 0..g.n() {
            assert!(!d.is_free(g.index(i, 0)) && !d.is_free(g.index(0, i)));
        }
    }

    #[test]
    fn free_fraction_matches_area_ratio() {
        let d = domain(256);
        let frac = d.free_count() as f64 / d.len() as f64;
        // FREE nodes fill the disc of radius 1 - h
        let r = 1.0 - d.h();
        let expected = PI * r * r / (4.0 * 1.25 * 1.25);
        assert!((frac - expected).abs() / expected < 0.01, "{frac}");
    }

    #[test]
    fn laplacian_of_constant_and_quadratic() {
        let d = domain(101);
        let g = *d.grid();
        let u = d.filled(-1.0);
        assert!(d.laplacian(&u).values.iter().all(|&v| v == 0.0));
        let q = ScalarField::from_fn(g, |x, y| x * x + y * y);
        let l = d.laplacian(&q);
        for k in d.free_nodes() {
            assert!((l.values[k] - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn laplacian_sine_is_second_order() {
        let err = |n: usize| {
            let d = domain(n);
            let g = *d.grid();
            let u = ScalarField::from_fn(g, |x, _| (PI * x).sin());
            let l = d.laplacian(&u);
            d.free_nodes()
                .map(|k| {
                    let [x, _] = g.position(k);
                    (l.values[k] + PI * PI * (PI * x).sin()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(101), err(201));
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn gradient_exact_on_linear() {
        let d = domain(64);
        let g = *d.grid();
        let u = ScalarField::from_fn(g, |x, _| 3.0 * x);
        let gr = d.gradient(&u);
        for k in 0..d.len() {
            if d.is_free(k) {
                assert!((gr.x[k] - 3.0).abs() < 1e-12 && gr.y[k].abs() < 1e-12);
            } else {
                assert_eq!((gr.x[k], gr.y[k]), (0.0, 0.0));
            }
        }
        let c = d.gradient(&d.filled(-1.0));
        assert!(c.x.iter().chain(&c.y).all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_adjoint_identity() {
        let d = domain(40);
        let g = *d.grid();
        let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() * (2.0 * y).cos() + x * y);
        let mut wx = ScalarField::from_fn(g, |x, y| x - y * y).values;
        let mut wy = ScalarField::from_fn(g, |x, y| (x * y).exp()).values;
        d.mask_free(&mut wx);
        d.mask_free(&mut wy);
        let mut u = u.values;
        d.mask_free(&mut u);
        let (mut gx, mut gy) = (d.zeros(), d.zeros());
        d.gradient_into(&u, &mut gx, &mut gy);
        let lhs = d.dot(&gx, &wx) + d.dot(&gy, &wy);
        let mut adj = d.zeros();
        d.gradient_adjoint_into(&wx, &wy, &mut adj);
        let rhs = d.dot(&u, &adj);
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn integrate_area_and_symmetry() {
        let d = domain(256);
        let g = *d.grid();
        let area = d.integrate(&vec![1.0; d.len()]);
        let disc = PI * (1.0 - g.h()).powi(2);
        assert!((area - disc).abs() / disc < 0.005, "{area}");
        assert_eq!(d.integrate(&d.zeros()), 0.0);
        let x = ScalarField::from_fn(g, |x, _| x);
        assert!(d.integrate(&x.values).abs() < 10.0 * g.h());
    }
}
