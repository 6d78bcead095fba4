//! Discrete energies of the relaxed elastica functional and their exact
//! derivatives.
//!
//! Everything here differentiates the *discrete* energy: the nodal values at
//! FREE nodes are the unknowns, CLAMPED nodes are constants. With `m` the
//! diffuse mean curvature `-ε Δu + W'(u)/ε` and the 5-point / central
//! stencils of [`Domain`], the terms are
//!
//! ```text
//! B  = (1/c0) Σ h² m²/ε
//! L  = (1/c0) Σ h² (ε/2 |∇u|² + W(u)/ε)
//! T  = (1/c0) Σ h² m |∇u|                      (diagnostic only)
//! T̄  = (1/c0) Σ h² m (1 - u²)/(√2 ε)
//! M  = σ Σ h² (ε/2 |∇u|² - W(u)/ε)²
//! F̄  = B + ε^-α (L - L*)² + c_β ε^-β (T̄ - T*)² + M
//! ```

use std::f64::consts::{SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::grid::{Domain, ScalarField};
use crate::recovery::c0_constant;

pub fn double_well(r: f64) -> f64 {
    let a = 1.0 - r * r;
    0.25 * a * a
}

pub fn d_double_well(r: f64) -> f64 {
    r * r * r - r
}

pub fn dd_double_well(r: f64) -> f64 {
    3.0 * r * r - 1.0
}

pub fn ddd_double_well(r: f64) -> f64 {
    6.0 * r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: f64,
    pub c_beta: f64,
    pub sigma_mis: f64,
    pub length_target: f64,
    pub winding_target: f64,
    pub length_on: bool,
    pub winding_on: bool,
    pub mismatch_on: bool,
    /// Multiplier in `[0, 1]` on both penalty prefactors (ramped during relaxation).
    pub penalty_scale: f64,
}

impl Default for EnergyParams {
    /// ε = 0.025, α = β = 2, c_β = 3, σ_mis = 0.02 ε⁻², L* = 8.7838, T* = 2π,
    /// all terms on.
    fn default() -> Self {
        let epsilon = 0.025;
        Self {
            epsilon,
            alpha: 2.0,
            beta: 2.0,
            c_beta: 3.0,
            sigma_mis: 0.02 / (epsilon * epsilon),
            length_target: 8.7838,
            winding_target: TAU,
            length_on: true,
            winding_on: true,
            mismatch_on: true,
            penalty_scale: 1.0,
        }
    }
}

impl EnergyParams {
    /// Pure elastica energy: every penalty switched off.
    pub fn elastica_only(epsilon: f64) -> Self {
        Self {
            epsilon,
            sigma_mis: 0.02 / (epsilon * epsilon),
            length_on: false,
            winding_on: false,
            mismatch_on: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("energy.epsilon must be positive");
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return bad("energy.alpha and energy.beta must be nonnegative");
        }
        if !(self.c_beta >= 0.0 && self.sigma_mis >= 0.0) {
            return bad("energy.c_beta and energy.sigma_mis must be nonnegative");
        }
        if !(self.length_target > 0.0 && self.length_target.is_finite()) {
            return bad("energy.length_target must be positive");
        }
        if !self.winding_target.is_finite() {
            return bad("energy.winding_target must be finite");
        }
        if !(0.0..=1.0).contains(&self.penalty_scale) {
            return bad("penalty scale must lie in [0, 1]");
        }
        Ok(())
    }

    /// `ε^-α`, times the ramp, or 0 when the length penalty is off.
    pub fn length_prefactor(&self) -> f64 {
        if self.length_on {
            self.penalty_scale * self.epsilon.powf(-self.alpha)
        } else {
            0.0
        }
    }

    /// `c_β ε^-β`, times the ramp, or 0 when the winding penalty is off.
    pub fn winding_prefactor(&self) -> f64 {
        if self.winding_on {
            self.penalty_scale * self.c_beta * self.epsilon.powf(-self.beta)
        } else {
            0.0
        }
    }
}

/// Per-term energy values for one field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub b: f64,
    pub l: f64,
    pub t_abs: f64,
    pub t_bar: f64,
    pub m: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    /// Recomputes `total` from the parts.
    pub fn assemble(&self, p: &EnergyParams) -> f64 {
        let dl = self.l - p.length_target;
        let dt = self.t_bar - p.winding_target;
        let mut total = self.b + p.length_prefactor() * dl * dl + p.winding_prefactor() * dt * dt;
        if p.mismatch_on {
            total += self.m;
        }
        total
    }
}

/// Nodal quantities of one field that the energy, its gradient and its
/// Hessian share. Arrays are zero on CLAMPED nodes.
#[derive(Debug, Clone)]
pub struct EnergyState<'a> {
    domain: &'a Domain,
    params: EnergyParams,
    u: Vec<f64>,
    m: Vec<f64>,
    gx: Vec<f64>,
    gy: Vec<f64>,
    /// equipartition defect ε/2 |∇u|² - W(u)/ε
    defect: Vec<f64>,
    /// winding density weight (1-u²)/(√2ε), times φ when a frozen sign field is used
    s: Vec<f64>,
    ds: Vec<f64>,
    dds: Vec<f64>,
    breakdown: EnergyBreakdown,
    grad_l: Option<Vec<f64>>,
    grad_t: Option<Vec<f64>>,
}

impl<'a> EnergyState<'a> {
    pub fn new(domain: &'a Domain, params: &EnergyParams, u: &[f64]) -> Self {
        Self::with_winding_weight(domain, params, u, None)
    }

    /// As [`EnergyState::new`], with the smoothed winding density multiplied
    /// by a frozen nodal weight (the sign field of the improved functional).
    pub fn with_winding_weight(
        domain: &'a Domain,
        params: &EnergyParams,
        u: &[f64],
        weight: Option<&[f64]>,
    ) -> Self {
        let eps = params.epsilon;
        let c0 = c0_constant();
        let len = domain.len();
        let mut lap = vec![0.0; len];
        let mut gx = vec![0.0; len];
        let mut gy = vec![0.0; len];
        domain.laplacian_into(u, &mut lap);
        domain.gradient_into(u, &mut gx, &mut gy);
        let mut m = vec![0.0; len];
        let mut defect = vec![0.0; len];
        let mut s = vec![0.0; len];
        let mut ds = vec![0.0; len];
        let mut dds = vec![0.0; len];
        let k_s = 1.0 / (SQRT_2 * eps);
        let (mut b, mut l, mut t_abs, mut t_bar, mut mis) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in domain.free_nodes() {
            let x = u[k];
            let w = double_well(x);
            m[k] = -eps * lap[k] + d_double_well(x) / eps;
            let g2 = gx[k] * gx[k] + gy[k] * gy[k];
            let phi = weight.map_or(1.0, |wt| wt[k]);
            defect[k] = 0.5 * eps * g2 - w / eps;
            s[k] = phi * (1.0 - x * x) * k_s;
            ds[k] = -2.0 * phi * x * k_s;
            dds[k] = -2.0 * phi * k_s;
            b += m[k] * m[k];
            l += 0.5 * eps * g2 + w / eps;
            t_abs += m[k] * g2.sqrt();
            t_bar += m[k] * s[k];
            mis += defect[k] * defect[k];
        }
        let h2 = domain.h() * domain.h();
        let mut breakdown = EnergyBreakdown {
            b: h2 * b / (c0 * eps),
            l: h2 * l / c0,
            t_abs: h2 * t_abs / c0,
            t_bar: h2 * t_bar / c0,
            m: h2 * mis * params.sigma_mis,
            total: 0.0,
        };
        breakdown.total = breakdown.assemble(params);
        Self {
            domain,
            params: *params,
            u: u.to_vec(),
            m,
            gx,
            gy,
            defect,
            s,
            ds,
            dds,
            breakdown,
            grad_l: None,
            grad_t: None,
        }
    }

    pub fn breakdown(&self) -> EnergyBreakdown {
        self.breakdown
    }

    pub fn total(&self) -> f64 {
        self.breakdown.total
    }

    pub fn params(&self) -> &EnergyParams {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        self.domain
    }

    pub fn field(&self) -> &[f64] {
        &self.u
    }

    /// Diffuse mean curvature at each node (0 on CLAMPED nodes).
    pub fn mean_curvature(&self) -> &[f64] {
        &self.m
    }

    /// `(∂x u, ∂y u)` at each node.
    pub fn gradient_field(&self) -> (&[f64], &[f64]) {
        (&self.gx, &self.gy)
    }

    /// `M w = -ε Δw + W''(u) w / ε` for `w` vanishing on CLAMPED nodes.
    fn apply_curvature_jacobian(&self, w: &[f64], out: &mut [f64]) {
        let eps = self.params.epsilon;
        self.domain.laplacian_into(w, out);
        for k in self.domain.free_nodes() {
            out[k] = -eps * out[k] + dd_double_well(self.u[k]) * w[k] / eps;
        }
    }

    fn elastica_gradient(&self) -> Vec<f64> {
        let eps = self.params.epsilon;
        let h2 = self.domain.h().powi(2);
        let mut g = self.domain.zeros();
        self.apply_curvature_jacobian(&self.m, &mut g);
        let f = 2.0 * h2 / (c0_constant() * eps);
        g.iter_mut().for_each(|v| *v *= f);
        g
    }

    fn length_gradient(&self) -> Vec<f64> {
        let eps = self.params.epsilon;
        let h2 = self.domain.h().powi(2);
        let mut g = self.domain.zeros();
        self.domain.gradient_adjoint_into(&self.gx, &self.gy, &mut g);
        let f = h2 / c0_constant();
        for k in self.domain.free_nodes() {
            g[k] = f * (eps * g[k] + d_double_well(self.u[k]) / eps);
        }
        g
    }

    fn winding_gradient(&self) -> Vec<f64> {
        let h2 = self.domain.h().powi(2);
        let mut g = self.domain.zeros();
        self.apply_curvature_jacobian(&self.s, &mut g);
        let f = h2 / c0_constant();
        for k in self.domain.free_nodes() {
            g[k] = f * (g[k] + self.m[k] * self.ds[k]);
        }
        g
    }

    fn mismatch_gradient(&self) -> Vec<f64> {
        let eps = self.params.epsilon;
        let h2 = self.domain.h().powi(2);
        let d = self.domain;
        let mut wx = d.zeros();
        let mut wy = d.zeros();
        for k in d.free_nodes() {
            wx[k] = self.defect[k] * self.gx[k];
            wy[k] = self.defect[k] * self.gy[k];
        }
        let mut g = d.zeros();
        d.gradient_adjoint_into(&wx, &wy, &mut g);
        let f = 2.0 * self.params.sigma_mis * h2;
        for k in d.free_nodes() {
            g[k] = f * (eps * g[k] - self.defect[k] * d_double_well(self.u[k]) / eps);
        }
        g
    }

    /// Gradients of the scalar penalty functionals; needed before
    /// [`EnergyState::hessian_vec`] when those penalties are active.
    pub fn prepare_hessian(&mut self) {
        if self.params.length_prefactor() != 0.0 && self.grad_l.is_none() {
            self.grad_l = Some(self.length_gradient());
        }
        if self.params.winding_prefactor() != 0.0 && self.grad_t.is_none() {
            self.grad_t = Some(self.winding_gradient());
        }
    }

    /// `∂F̄/∂u_i` at FREE nodes, 0 on CLAMPED nodes.
    pub fn gradient(&mut self) -> Vec<f64> {
        self.prepare_hessian();
        let p = self.params;
        let mut g = self.elastica_gradient();
        let al = p.length_prefactor();
        if al != 0.0 {
            let c = 2.0 * al * (self.breakdown.l - p.length_target);
            axpy(c, self.grad_l.as_ref().unwrap(), &mut g);
        }
        let at = p.winding_prefactor();
        if at != 0.0 {
            let c = 2.0 * at * (self.breakdown.t_bar - p.winding_target);
            axpy(c, self.grad_t.as_ref().unwrap(), &mut g);
        }
        if p.mismatch_on && p.sigma_mis != 0.0 {
            axpy(1.0, &self.mismatch_gradient(), &mut g);
        }
        g
    }

    /// Exact Hessian-vector product of F̄ at this state. `v` must vanish on
    /// CLAMPED nodes. Call [`EnergyState::prepare_hessian`] first.
    pub fn hessian_vec(&self, v: &[f64], out: &mut [f64], work: &mut HessianWork) {
        let p = &self.params;
        let d = self.domain;
        let eps = p.epsilon;
        let h2 = d.h().powi(2);
        let c0 = c0_constant();
        work.ensure(d.len());
        let HessianWork { a, b, c, e } = work;

        // elastica: (2h²/(c0 ε)) [M M v + W''' m / ε v]
        self.apply_curvature_jacobian(v, a);
        self.apply_curvature_jacobian(a, out);
        let fb = 2.0 * h2 / (c0 * eps);
        for k in d.free_nodes() {
            out[k] = fb * (out[k] + ddd_double_well(self.u[k]) * self.m[k] / eps * v[k]);
        }

        let al = p.length_prefactor();
        if al != 0.0 {
            let gl = self
                .grad_l
                .as_ref()
                .expect("prepare_hessian must run before hessian_vec");
            // H_L v = (h²/c0) [ε Gᵀ G v + W'' v / ε]
            d.gradient_into(v, b, c);
            d.gradient_adjoint_into(b, c, e);
            let r = self.breakdown.l - p.length_target;
            let dot = d.dot(gl, v);
            let f = 2.0 * al * r * h2 / c0;
            for k in d.free_nodes() {
                let hl = eps * e[k] + dd_double_well(self.u[k]) * v[k] / eps;
                out[k] += 2.0 * al * gl[k] * dot + f * hl;
            }
        }

        let at = p.winding_prefactor();
        if at != 0.0 {
            let gt = self
                .grad_t
                .as_ref()
                .expect("prepare_hessian must run before hessian_vec");
            // H_T v = (h²/c0) [M (s' v) + s' (M v) + (s W''' / ε + m s'') v]
            // a still holds M v
            for k in d.free_nodes() {
                b[k] = self.ds[k] * v[k];
            }
            self.apply_curvature_jacobian(b, e);
            let r = self.breakdown.t_bar - p.winding_target;
            let dot = d.dot(gt, v);
            let f = 2.0 * at * r * h2 / c0;
            for k in d.free_nodes() {
                let x = self.u[k];
                let ht = e[k]
                    + self.ds[k] * a[k]
                    + (self.s[k] * ddd_double_well(x) / eps + self.m[k] * self.dds[k]) * v[k];
                out[k] += 2.0 * at * gt[k] * dot + f * ht;
            }
        }

        if p.mismatch_on && p.sigma_mis != 0.0 {
            // H_M v = 2σh² [Jᵀ J v + ε Gᵀ(e G v) - e W'' / ε v],
            // J v = ε g·G v - W' v / ε
            d.gradient_into(v, b, c);
            let mut jv = std::mem::take(a);
            for k in d.free_nodes() {
                let x = self.u[k];
                jv[k] = eps * (self.gx[k] * b[k] + self.gy[k] * c[k])
                    - d_double_well(x) * v[k] / eps;
            }
            // ε Gᵀ(g Jv + e Gv) collects both gradient-adjoint pieces
            for k in d.free_nodes() {
                let ek = self.defect[k];
                b[k] = self.gx[k] * jv[k] + ek * b[k];
                c[k] = self.gy[k] * jv[k] + ek * c[k];
            }
            d.gradient_adjoint_into(b, c, e);
            let f = 2.0 * p.sigma_mis * h2;
            for k in d.free_nodes() {
                let x = self.u[k];
                out[k] += f
                    * (eps * e[k]
                        - d_double_well(x) / eps * jv[k]
                        - self.defect[k] * dd_double_well(x) / eps * v[k]);
            }
            *a = jv;
        }
        d.mask_free(out);
    }

    /// Positive diagonal estimate of the Hessian used for preconditioning.
    pub fn hessian_diagonal(&self) -> Vec<f64> {
        let p = &self.params;
        let d = self.domain;
        let eps = p.epsilon;
        let h2 = d.h().powi(2);
        let c0 = c0_constant();
        let n = d.grid().n();
        let off = eps / h2;
        let fb = 2.0 * h2 / (c0 * eps);
        let mut diag = d.zeros();
        for k in d.free_nodes() {
            let x = self.u[k];
            let nbrs = [k - 1, k + 1, k - n, k + n]
                .iter()
                .filter(|&&q| d.is_free(q))
                .count() as f64;
            let mjj = 4.0 * off + dd_double_well(x) / eps;
            let mut v = fb * (mjj * mjj + nbrs * off * off + ddd_double_well(x) * self.m[k] / eps);
            if let Some(gl) = &self.grad_l {
                v += 2.0 * p.length_prefactor() * gl[k] * gl[k];
            }
            if let Some(gt) = &self.grad_t {
                v += 2.0 * p.winding_prefactor() * gt[k] * gt[k];
            }
            diag[k] = v.max(0.0);
        }
        diag
    }
}

/// Scratch buffers for [`EnergyState::hessian_vec`].
#[derive(Debug, Default, Clone)]
pub struct HessianWork {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    e: Vec<f64>,
}

impl HessianWork {
    fn ensure(&mut self, len: usize) {
        for buf in [&mut self.a, &mut self.b, &mut self.c, &mut self.e] {
            if buf.len() != len {
                *buf = vec![0.0; len];
            }
        }
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `m(u) = -ε Δu + W'(u)/ε` at FREE nodes, 0 on CLAMPED nodes.
pub fn diffuse_mean_curvature(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> ScalarField {
    let state = EnergyState::new(domain, p, &u.values);
    ScalarField {
        grid: u.grid,
        values: state.m,
    }
}

pub fn energy_total(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> EnergyBreakdown {
    EnergyState::new(domain, p, &u.values).breakdown()
}

pub fn energy_length(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> f64 {
    energy_total(domain, u, p).l
}

pub fn energy_elastica(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> f64 {
    energy_total(domain, u, p).b
}

pub fn winding_abs(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> f64 {
    energy_total(domain, u, p).t_abs
}

pub fn winding_smooth(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> f64 {
    energy_total(domain, u, p).t_bar
}

/// `σ_mis Σ h² (ε/2|∇u|² - W/ε)²`, independent of the mismatch flag.
pub fn energy_mismatch(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> f64 {
    energy_total(domain, u, p).m
}

pub fn gradient_total(domain: &Domain, u: &ScalarField, p: &EnergyParams) -> ScalarField {
    let mut state = EnergyState::new(domain, p, &u.values);
    ScalarField {
        grid: u.grid,
        values: state.gradient(),
    }
}

pub fn hessian_vec(domain: &Domain, u: &ScalarField, p: &EnergyParams, v: &ScalarField) -> ScalarField {
    let mut state = EnergyState::new(domain, p, &u.values);
    state.prepare_hessian();
    let mut dir = v.values.clone();
    domain.mask_free(&mut dir);
    let mut out = domain.zeros();
    state.hessian_vec(&dir, &mut out, &mut HessianWork::default());
    ScalarField {
        grid: u.grid,
        values: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::recovery::{build_recovery_field, Component, CurveSpec, Orientation, RecoveryParams};
    use std::f64::consts::PI;

    fn circle_field(domain: &Domain, r: f64, eps: f64) -> ScalarField {
        let spec = CurveSpec::new(vec![Component::circle([0.0, 0.0], r, Orientation::Positive)]).unwrap();
        build_recovery_field(&spec, &RecoveryParams::new(eps), domain).unwrap()
    }

    #[test]
    fn double_well_values() {
        for r in [-1.0, 1.0] {
            assert_eq!(double_well(r), 0.0);
            assert_eq!(d_double_well(r), 0.0);
        }
        assert_eq!(double_well(0.0), 0.25);
        assert_eq!(dd_double_well(0.0), -1.0);
    }

    #[test]
    fn constant_well_is_zero_energy_critical_point() {
        let d = Domain::new(GridSpec::new(48, 1.25).unwrap());
        let u = d.filled(-1.0);
        let p = EnergyParams {
            length_target: 1.0,
            winding_target: 0.0,
            ..EnergyParams::default()
        };
        let e = energy_total(&d, &u, &p);
        assert_eq!((e.b, e.l, e.t_abs, e.t_bar, e.m), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert!((e.total - p.length_prefactor()).abs() < 1e-9);
        let g = gradient_total(&d, &u, &p);
        assert!(g.values.iter().all(|&v| v == 0.0));
        let m = diffuse_mean_curvature(&d, &u, &p);
        assert!(m.values.iter().all(|&v| v == 0.0));
        let off = EnergyParams::elastica_only(0.025);
        assert_eq!(energy_total(&d, &u, &off).total, 0.0);
    }

    #[test]
    fn zero_field_mismatch_closed_form() {
        let d = Domain::new(GridSpec::new(256, 1.25).unwrap());
        let u = d.filled(0.0);
        let p = EnergyParams::default();
        assert!((p.sigma_mis - 32.0).abs() < 1e-12);
        // interior nodes see W(0)/ε = 1/(4ε); the ring next to the clamp
        // also sees the jump to -1
        let g = *d.grid();
        let (h, eps) = (g.h(), p.epsilon);
        let mut sum = 0.0;
        for k in d.free_nodes() {
            let (i, j) = g.coord(k);
            let at = |i: usize, j: usize| u.values[g.index(i, j)];
            let gx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
            let gy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * h);
            let e = 0.5 * eps * (gx * gx + gy * gy) - 0.25 / eps;
            sum += e * e;
        }
        let expected = p.sigma_mis * h * h * sum;
        let got = energy_mismatch(&d, &u, &p);
        assert!((got - expected).abs() < 1e-9 * expected);
        let interior = p.sigma_mis * d.integrate(&vec![1.0; d.len()]) / (16.0 * eps * eps);
        assert!(got > interior);
    }

    #[test]
    fn circle_energies() {
        let eps = 0.025;
        // h = ε/4
        let d = Domain::new(GridSpec::new(401, 1.25).unwrap());
        let u = circle_field(&d, 0.5, eps);
        let p = EnergyParams::elastica_only(eps);
        let e = energy_total(&d, &u, &p);
        assert!((e.l - PI).abs() / PI < 0.01, "L = {}", e.l);
        assert!((e.b - 4.0 * PI).abs() / (4.0 * PI) < 0.02, "B = {}", e.b);
        assert!((e.t_abs - TAU).abs() / TAU < 0.01, "T = {}", e.t_abs);
        assert!((e.t_bar - TAU).abs() / TAU < 0.01, "Tbar = {}", e.t_bar);
        assert!((e.t_abs - e.t_bar).abs() < 1e-1);
        assert_eq!(e.total, e.b);
    }

    #[test]
    fn penalty_assembly() {
        let eps = 0.025;
        let d = Domain::new(GridSpec::new(401, 1.25).unwrap());
        let u = circle_field(&d, 0.5, eps);
        let mut p = EnergyParams {
            length_target: PI,
            ..EnergyParams::default()
        };
        let e = energy_total(&d, &u, &p);
        let lp = p.length_prefactor() * (e.l - PI).powi(2);
        let wp = p.winding_prefactor() * (e.t_bar - TAU).powi(2);
        assert!(lp < 0.1 * e.b && wp < 0.1 * e.b, "{lp} {wp} {}", e.b);
        assert!((e.total - (e.b + lp + wp + e.m)).abs() < 1e-12 * e.total);
        p.length_target = 8.7838;
        let e2 = energy_total(&d, &u, &p);
        let big = (e2.l - 8.7838).powi(2) / (eps * eps);
        assert!(e2.total > big && big > 10.0 * e2.b);
    }

    #[test]
    fn mean_curvature_of_circle() {
        // on the interface m ≈ q'(0)/R = 1/(√2 R)
        let eps = 0.025;
        let d = Domain::new(GridSpec::new(401, 1.25).unwrap());
        let u = circle_field(&d, 0.5, eps);
        let m = diffuse_mean_curvature(&d, &u, &EnergyParams::elastica_only(eps));
        let g = *d.grid();
        // node (0.5, 0): h = 0.00625, i = 280
        let k = g.index(280, 200);
        let expected = 1.0 / (SQRT_2 * 0.5);
        assert!((m.values[k] - expected).abs() / expected < 0.05, "{}", m.values[k]);
    }
}
