//! Orientation-insensitive winding functional.
//!
//! For a phase field `u` the convex functional
//!
//! ```text
//! A(φ) = ε^γ Σ h²|D⁺φ| + Σ h² a |b·D⁺φ| - Σ h² c φ
//! a = ε^(1-γ)|∇u|,  b = ∇u⊥ = (∂y u, -∂x u),  c = m(u)|∇u|/c₀
//! ```
//!
//! is minimized over nodal `φ ∈ [-1, 1]` with a diagonally preconditioned
//! primal-dual (Chambolle-Pock) iteration. `φ` lives on FREE nodes; forward
//! differences reaching a CLAMPED node are dropped (natural boundary), and
//! CLAMPED entries are stored as -1.

use crate::error::{Error, Result};
use crate::functionals::{EnergyParams, EnergyState};
use crate::grid::{Domain, ScalarField};
use crate::recovery::c0_constant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvSolveParams {
    pub gamma: f64,
    pub max_iters: usize,
    /// Stop once `(P - D) / max(1, |P|) <= gap_tol`.
    pub gap_tol: f64,
}

impl Default for TvSolveParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            max_iters: 5000,
            gap_tol: 1e-6,
        }
    }
}

impl TvSolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.gap_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("gap_tol must be positive, got {}", self.gap_tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PhiSolution {
    pub phi: ScalarField,
    /// `A(φ)` at the returned iterate.
    pub objective: f64,
    /// Best dual bound found.
    pub dual: f64,
    /// Relative gap `(objective - dual) / max(1, |objective|)`.
    pub gap: f64,
    /// Work spent, in full-grid sweeps.
    pub iterations: usize,
    pub converged: bool,
    /// `(1/c₀) Σ h² m φ |∇u|`.
    pub t_tilde: f64,
}

/// Coefficients of the functional for a fixed `u`.
struct Problem<'a> {
    domain: &'a Domain,
    n: usize,
    /// ε^γ
    tv: f64,
    /// `a b`, per node
    ax: Vec<f64>,
    ay: Vec<f64>,
    c: Vec<f64>,
    /// `1/h` where the forward neighbour is FREE, else 0
    ex: Vec<f64>,
    ny: Vec<f64>,
    /// flat index ranges of FREE nodes, one per nonempty row
    spans: Vec<(usize, usize)>,
}

impl<'a> Problem<'a> {
    fn new(domain: &'a Domain, u: &ScalarField, p: &EnergyParams, t: &TvSolveParams) -> Self {
        let eps = p.epsilon;
        let state = EnergyState::new(domain, p, &u.values);
        let (gx, gy) = state.gradient_field();
        let m = state.mean_curvature();
        let len = domain.len();
        let n = domain.grid().n();
        let ih = 1.0 / domain.h();
        let c0 = c0_constant();
        let scale = eps.powf(1.0 - t.gamma);
        let mut ax = vec![0.0; len];
        let mut ay = vec![0.0; len];
        let mut c = vec![0.0; len];
        let mut ex = vec![0.0; len];
        let mut ny = vec![0.0; len];
        for k in domain.free_nodes() {
            let g = gx[k].hypot(gy[k]);
            ax[k] = scale * g * gy[k];
            ay[k] = -scale * g * gx[k];
            c[k] = m[k] * g / c0;
            if domain.is_free(k + 1) {
                ex[k] = ih;
            }
            if domain.is_free(k + n) {
                ny[k] = ih;
            }
        }
        let spans = (0..n)
            .map(|j| domain.row_span(j))
            .enumerate()
            .filter(|(_, (a, b))| b > a)
            .map(|(j, (a, b))| (j * n + a, j * n + b))
            .collect();
        Self {
            domain,
            n,
            tv: eps.powf(t.gamma),
            ax,
            ay,
            c,
            ex,
            ny,
            spans,
        }
    }

    fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.spans.iter().flat_map(|&(a, b)| a..b)
    }

    #[inline]
    fn diff(&self, phi: &[f64], k: usize) -> (f64, f64) {
        ((phi[k + 1] - phi[k]) * self.ex[k], (phi[k + self.n] - phi[k]) * self.ny[k])
    }

    fn objective(&self, phi: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.nodes() {
            let (dx, dy) = self.diff(phi, k);
            s += self.tv * dx.hypot(dy) + (self.ax[k] * dx + self.ay[k] * dy).abs() - self.c[k] * phi[k];
        }
        s * self.domain.h() * self.domain.h()
    }
}

/// Dual variables: `(x, y)` paired with `ε^γ D⁺φ` (unit disc), `z` with
/// `a b·D⁺φ` (unit interval).
#[derive(Clone)]
struct Dual {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
}

impl Dual {
    fn zeros(len: usize) -> Self {
        Self {
            x: vec![0.0; len],
            y: vec![0.0; len],
            z: vec![0.0; len],
        }
    }
}

/// Evaluates `A(φ)` for the field `u`.
pub fn assemble_a(domain: &Domain, phi: &ScalarField, u: &ScalarField, p: &EnergyParams, t: &TvSolveParams) -> f64 {
    Problem::new(domain, u, p, t).objective(&phi.values)
}

/// Minimizes `A(·)` over the box `[-1, 1]`.
pub fn minimize_phi(domain: &Domain, u: &ScalarField, p: &EnergyParams, t: &TvSolveParams) -> PhiSolution {
    minimize_phi_from(domain, u, p, t, None)
}

const CHECK_EVERY: usize = 64;
const THRESHOLDS: [f64; 3] = [-0.5, 0.0, 0.5];

/// Primal-dual iteration state with diagonal step sizes.
struct Solver<'p, 'a> {
    prob: &'p Problem<'a>,
    /// node ranges for every grid row, empty where the row has no FREE node
    rows: Vec<(usize, usize)>,
    t_phi: Vec<f64>,
    s_z: Vec<f64>,
    s_xy: f64,
    omega: f64,
    phi: Vec<f64>,
    bar: Vec<f64>,
    y: Dual,
    /// `(ε^γ y_x + a_x z, ε^γ y_y + a_y z)` masked by the edge weights
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl<'p, 'a> Solver<'p, 'a> {
    fn new(prob: &'p Problem<'a>, phi: Vec<f64>) -> Self {
        let domain = prob.domain;
        let len = domain.len();
        let n = prob.n;
        let h = domain.h();
        // diagonal preconditioners from absolute row and column sums of K
        let mut col = vec![0.0; len];
        let mut s_z = vec![0.0; len];
        for k in prob.nodes() {
            let (ex, ny) = (prob.ex[k], prob.ny[k]);
            let (bx, by) = (prob.ax[k].abs() * ex, prob.ay[k].abs() * ny);
            let diag = (prob.ax[k] * ex + prob.ay[k] * ny).abs();
            col[k] += prob.tv * (ex + ny) + diag;
            col[k + 1] += prob.tv * ex + bx;
            col[k + n] += prob.tv * ny + by;
            let row = bx + by + diag;
            s_z[k] = if row > 0.0 { 1.0 / row } else { 0.0 };
        }
        let t_phi = col.iter().map(|&s| if s > 0.0 { 1.0 / s } else { 0.0 }).collect();
        let rows = (0..n)
            .map(|j| {
                let (a, b) = domain.row_span(j);
                (j * n + a, j * n + b.max(a))
            })
            .collect();
        Self {
            prob,
            rows,
            t_phi,
            s_z,
            s_xy: h / (2.0 * prob.tv),
            omega: 1.0,
            bar: phi.clone(),
            phi,
            y: Dual::zeros(len),
            wx: vec![0.0; len],
            wy: vec![0.0; len],
        }
    }

    /// One iteration as a single sweep: the dual update of row `j` only needs
    /// the extrapolated primal on rows `j` and `j+1`, and the primal update of
    /// row `j-1` only needs duals on rows `j-1` and `j-2`.
    fn iterate(&mut self) {
        let n = self.prob.n;
        for j in 0..=n {
            if j < n {
                self.dual_row(self.rows[j]);
            }
            if j >= 1 {
                self.primal_row(self.rows[j - 1]);
            }
        }
    }

    fn dual_row(&mut self, (a, b): (usize, usize)) {
        if a == b {
            return;
        }
        let p = self.prob;
        let n = p.n;
        let m = b - a;
        let sxy = self.s_xy * self.omega * p.tv;
        let om = self.omega;
        let (bar, bar_e, bar_n) = (&self.bar[a..b], &self.bar[a + 1..b + 1], &self.bar[a + n..b + n]);
        let (ex, ny, ax, ay) = (&p.ex[a..b], &p.ny[a..b], &p.ax[a..b], &p.ay[a..b]);
        let s_z = &self.s_z[a..b];
        let (yx, yy, yz) = (&mut self.y.x[a..b], &mut self.y.y[a..b], &mut self.y.z[a..b]);
        let (wx, wy) = (&mut self.wx[a..b], &mut self.wy[a..b]);
        for i in 0..m {
            let dx = (bar_e[i] - bar[i]) * ex[i];
            let dy = (bar_n[i] - bar[i]) * ny[i];
            let mut px = yx[i] + sxy * dx;
            let mut py = yy[i] + sxy * dy;
            let r2 = px * px + py * py;
            if r2 > 1.0 {
                let r = r2.sqrt();
                px /= r;
                py /= r;
            }
            let pz = (yz[i] + om * s_z[i] * (ax[i] * dx + ay[i] * dy)).clamp(-1.0, 1.0);
            yx[i] = px;
            yy[i] = py;
            yz[i] = pz;
            wx[i] = (p.tv * px + ax[i] * pz) * ex[i];
            wy[i] = (p.tv * py + ay[i] * pz) * ny[i];
        }
    }

    /// `(Kᵀy)_k` from the cached fluxes.
    #[inline]
    fn adjoint_at(&self, k: usize) -> f64 {
        self.wx[k - 1] + self.wy[k - self.prob.n] - self.wx[k] - self.wy[k]
    }

    fn primal_row(&mut self, (a, b): (usize, usize)) {
        if a == b {
            return;
        }
        let n = self.prob.n;
        let m = b - a;
        let inv = 1.0 / self.omega;
        let (w_x, w_xw) = (&self.wx[a..b], &self.wx[a - 1..b - 1]);
        let (w_y, w_ys) = (&self.wy[a..b], &self.wy[a - n..b - n]);
        let (t, c) = (&self.t_phi[a..b], &self.prob.c[a..b]);
        let (phi, bar) = (&mut self.phi[a..b], &mut self.bar[a..b]);
        for i in 0..m {
            let kt = w_xw[i] + w_ys[i] - w_x[i] - w_y[i];
            let old = phi[i];
            let next = (old - t[i] * inv * (kt - c[i])).clamp(-1.0, 1.0);
            bar[i] = 2.0 * next - old;
            phi[i] = next;
        }
    }

    /// One iteration touching only the nodes in `band`; everything else is
    /// held fixed, which makes this an exact iteration for the subproblem.
    fn iterate_band(&mut self, band: &Band) {
        let n = self.prob.n;
        for j in 0..=n {
            if j < n {
                for &r in &band.dual[j] {
                    self.dual_row(r);
                }
            }
            if j >= 1 {
                for &r in &band.primal[j - 1] {
                    self.primal_row(r);
                }
            }
        }
    }

    fn dual_value(&self) -> f64 {
        let h = self.prob.domain.h();
        -h * h
            * self
                .prob
                .nodes()
                .map(|k| (self.adjoint_at(k) - self.prob.c[k]).abs())
                .sum::<f64>()
    }

    /// Weighted squared distances of the primal and dual iterates from an anchor.
    fn motion(&self, phi0: &[f64], y0: &Dual) -> (f64, f64) {
        let (mut dx2, mut dy2) = (0.0, 0.0);
        for k in self.prob.nodes() {
            if self.t_phi[k] > 0.0 {
                dx2 += (self.phi[k] - phi0[k]).powi(2) / self.t_phi[k];
            }
            dy2 += ((self.y.x[k] - y0.x[k]).powi(2) + (self.y.y[k] - y0.y[k]).powi(2)) / self.s_xy;
            if self.s_z[k] > 0.0 {
                dy2 += (self.y.z[k] - y0.z[k]).powi(2) / self.s_z[k];
            }
        }
        (dx2, dy2)
    }
}

/// Nodes near the fractional or jumping part of `φ`, where late iterations
/// still change anything. Stored as node ranges per grid row.
struct Band {
    primal: Vec<Vec<(usize, usize)>>,
    dual: Vec<Vec<(usize, usize)>>,
    size: usize,
}

impl Band {
    fn around(prob: &Problem, phi: &[f64], radius: usize) -> Self {
        let n = prob.n;
        let len = phi.len();
        let free = |k: usize| prob.domain.is_free(k);
        let mut mark = vec![false; len];
        for k in prob.nodes() {
            let jump = (prob.ex[k] > 0.0 && phi[k + 1] != phi[k]) || (prob.ny[k] > 0.0 && phi[k + n] != phi[k]);
            if jump || phi[k].abs() < 1.0 - 1e-9 {
                mark[k] = true;
                if jump {
                    mark[k + 1] |= free(k + 1);
                    mark[k + n] |= free(k + n);
                }
            }
        }
        for _ in 0..radius {
            let prev = mark.clone();
            for k in prob.nodes() {
                if !prev[k] && (prev[k - 1] || prev[k + 1] || prev[k - n] || prev[k + n]) {
                    mark[k] = true;
                }
            }
        }
        let mut primal = vec![Vec::new(); n];
        let mut dual = vec![Vec::new(); n];
        let mut size = 0;
        let push = |runs: &mut Vec<(usize, usize)>, k: usize| match runs.last_mut() {
            Some(r) if r.1 == k => r.1 = k + 1,
            _ => runs.push((k, k + 1)),
        };
        for k in prob.nodes() {
            if mark[k] {
                push(&mut primal[k / n], k);
                size += 1;
            }
            // owners of every edge that touches a band node
            if mark[k] || mark[k + 1] || mark[k + n] {
                push(&mut dual[k / n], k);
            }
        }
        Self { primal, dual, size }
    }
}

/// Total work is counted in full sweeps; a band sweep costs its share.
const BAND_BLOCK: usize = 256;
const BAND_RADIUS: usize = 2;
/// Band sweeps start once the relative gap is below this.
const BAND_START: f64 = 1e-3;

/// As [`minimize_phi`], starting the primal iterate from `start`.
///
/// The iteration restarts whenever the primal-dual gap of the current pair
/// has dropped enough since the last restart, and rebalances the primal and
/// dual step sizes at each restart. Level sets of `φ` supply extra binary
/// primal candidates. Once the gap is small, most sweeps are restricted to a
/// band around the fractional part of `φ`.
pub fn minimize_phi_from(
    domain: &Domain,
    u: &ScalarField,
    p: &EnergyParams,
    t: &TvSolveParams,
    start: Option<&ScalarField>,
) -> PhiSolution {
    let prob = Problem::new(domain, u, p, t);
    let len = domain.len();
    let h = domain.h();

    let mut phi: Vec<f64> = match start {
        Some(s) => s.values.iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
        None => vec![0.0; len],
    };
    domain.clamp(&mut phi, -1.0);
    let mut s = Solver::new(&prob, phi);

    let mut anchor_phi = s.phi.clone();
    let mut anchor_y = s.y.clone();
    let mut anchor_gap = f64::INFINITY;
    let mut last_gap = f64::INFINITY;
    let mut since_restart = 0usize;

    let mut best_phi = s.phi.clone();
    let mut best_obj = prob.objective(&s.phi);
    let mut best_dual = f64::NEG_INFINITY;
    let rel = |obj: f64, dual: f64| (obj - dual) / obj.abs().max(1.0);
    let mut rounded = vec![-1.0; len];
    let total = prob.nodes().count().max(1) as f64;
    let budget = t.max_iters as f64;
    let mut work = 0.0;
    let mut sweeps = 0usize;
    let mut band: Option<Band> = None;

    while work < budget {
        match &band {
            None => {
                let block = CHECK_EVERY.min((budget - work).ceil() as usize);
                for _ in 0..block {
                    s.iterate();
                }
                work += block as f64;
                sweeps += block;
                since_restart += block;
            }
            Some(b) => {
                // frozen nodes must not carry an extrapolation
                s.bar.copy_from_slice(&s.phi);
                for _ in 0..BAND_BLOCK {
                    s.iterate_band(b);
                }
                // one full sweep lets frozen nodes react before the next check
                s.iterate();
                work += BAND_BLOCK as f64 * b.size as f64 / total + 1.0;
                sweeps += BAND_BLOCK + 1;
                since_restart += BAND_BLOCK + 1;
            }
        }
        let obj = prob.objective(&s.phi);
        let dual = s.dual_value();
        if obj < best_obj {
            best_obj = obj;
            best_phi.copy_from_slice(&s.phi);
        }
        // level sets of φ as binary candidates; they stop paying off late
        for level in THRESHOLDS.iter().filter(|_| band.is_none()) {
            for k in prob.nodes() {
                rounded[k] = if s.phi[k] > *level { 1.0 } else { -1.0 };
            }
            let o = prob.objective(&rounded);
            if o < best_obj {
                best_obj = o;
                best_phi.copy_from_slice(&rounded);
            }
        }
        best_dual = best_dual.max(dual);
        let best_gap = rel(best_obj, best_dual);
        if best_gap <= t.gap_tol {
            break;
        }
        if best_gap <= BAND_START {
            band = Some(Band::around(&prob, &s.phi, BAND_RADIUS));
        }

        let gap = obj - dual;
        let restart = gap <= 0.2 * anchor_gap
            || (gap <= 0.8 * anchor_gap && gap > last_gap)
            || since_restart >= 36 * sweeps / 100;
        last_gap = gap;
        if !restart {
            continue;
        }
        let (dx2, dy2) = s.motion(&anchor_phi, &anchor_y);
        if dx2 > 1e-300 && dy2 > 1e-300 {
            s.omega = (0.5 * (dy2 / dx2).sqrt().ln() + 0.5 * s.omega.ln()).exp();
        }
        s.bar.copy_from_slice(&s.phi);
        anchor_phi.copy_from_slice(&s.phi);
        anchor_y = s.y.clone();
        anchor_gap = gap;
        last_gap = f64::INFINITY;
        since_restart = 0;
    }
    let iterations = work.ceil() as usize;
    domain.clamp(&mut best_phi, -1.0);
    let t_tilde = h * h * prob.nodes().map(|k| prob.c[k] * best_phi[k]).sum::<f64>();
    let gap = rel(best_obj, best_dual);
    PhiSolution {
        phi: ScalarField {
            grid: *domain.grid(),
            values: best_phi,
        },
        objective: best_obj,
        dual: best_dual,
        gap,
        iterations,
        converged: gap <= t.gap_tol,
        t_tilde,
    }
}

/// `T̃(u)` together with the solver report.
pub fn winding_improved(domain: &Domain, u: &ScalarField, p: &EnergyParams, t: &TvSolveParams) -> PhiSolution {
    minimize_phi(domain, u, p, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::recovery::{build_recovery_field, Component, CurveSpec, Orientation, RecoveryParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    const EPS: f64 = 0.04;

    fn setup(circles: &[([f64; 2], f64)]) -> (Domain, ScalarField, EnergyParams) {
        let d = Domain::new(GridSpec::with_spacing(EPS / 4.0, 1.02).unwrap());
        let comps = circles
            .iter()
            .map(|&(c, r)| Component::circle(c, r, Orientation::Positive))
            .collect();
        let spec = CurveSpec::new(comps).unwrap();
        let u = build_recovery_field(&spec, &RecoveryParams::new(EPS), &d).unwrap();
        let p = EnergyParams {
            epsilon: EPS,
            ..Default::default()
        };
        (d, u, p)
    }

    const ONE: [([f64; 2], f64); 1] = [([0.0, 0.0], 0.5)];
    const THREE: [([f64; 2], f64); 3] = [([-0.45, -0.3], 0.25), ([0.45, -0.3], 0.25), ([0.0, 0.45], 0.25)];

    #[test]
    fn trivial_field_gives_zero() {
        let d = Domain::new(GridSpec::new(48, 1.1).unwrap());
        let u = d.filled(-1.0);
        let p = EnergyParams::default();
        let sol = minimize_phi(&d, &u, &p, &TvSolveParams::default());
        assert_eq!(sol.objective, 0.0);
        assert!(sol.gap <= 1e-6 && sol.converged);
        assert_eq!(sol.t_tilde, 0.0);
    }

    #[test]
    fn zero_phi_has_zero_energy() {
        let (d, u, p) = setup(&ONE);
        let zero = d.filled(0.0);
        assert_eq!(assemble_a(&d, &zero, &u, &p, &TvSolveParams::default()), 0.0);
    }

    #[test]
    fn constant_phi_is_minus_diffuse_winding() {
        // φ ≡ 1 on FREE nodes has no jumps, so A = -Σ h² c ≈ -2π
        let (d, u, p) = setup(&ONE);
        let mut one = d.filled(1.0);
        d.clamp(&mut one.values, -1.0);
        let a = assemble_a(&d, &one, &u, &p, &TvSolveParams::default());
        assert!((a + 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{a}");
    }

    #[test]
    fn single_circle_minimizer() {
        let (d, u, p) = setup(&ONE);
        let t = TvSolveParams {
            max_iters: 20_000,
            ..Default::default()
        };
        let sol = minimize_phi(&d, &u, &p, &t);
        assert!(sol.converged, "gap {}", sol.gap);
        assert!(sol.objective >= sol.dual);
        assert!((sol.objective + 2.0 * PI).abs() < 0.05 * 2.0 * PI, "{}", sol.objective);
        assert!((sol.t_tilde - 2.0 * PI).abs() < 0.02 * 2.0 * PI, "{}", sol.t_tilde);
        // saturated near the interface
        for k in d.free_nodes() {
            if u.values[k].abs() < 0.9 {
                assert!(sol.phi.values[k] > 1.0 - 1e-3, "{}", sol.phi.values[k]);
            }
        }
    }

    #[test]
    fn random_probes_respect_lower_bound() {
        let t = TvSolveParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for circles in [&ONE[..], &THREE[..]] {
            let (d, u, p) = setup(circles);
            let bound = -2.0 * PI * circles.len() as f64 - 0.1;
            for probe in 0..12 {
                let (a, b, s) = (rng.gen_range(1.0..8.0), rng.gen_range(1.0..8.0), rng.gen_range(0.5..4.0));
                let noise = if probe % 2 == 0 { 0.0 } else { 0.5 };
                let mut phi = ScalarField::from_fn(*d.grid(), |x, y| s * (a * x).sin() * (b * y).cos());
                for v in phi.values.iter_mut() {
                    *v = (*v + noise * rng.gen_range(-1.0..1.0)).clamp(-1.0, 1.0);
                }
                d.clamp(&mut phi.values, -1.0);
                let val = assemble_a(&d, &phi, &u, &p, &t);
                assert!(val >= bound, "probe {probe}: {val} < {bound}");
            }
        }
    }

    #[test]
    fn winding_counts_components() {
        let t = TvSolveParams {
            max_iters: 20_000,
            ..Default::default()
        };
        let mut last = 0.0;
        for k in 1..=3 {
            let (d, u, p) = setup(&THREE[..k]);
            let tt = winding_improved(&d, &u, &p, &t).t_tilde;
            assert!((tt - 2.0 * PI * k as f64).abs() < 0.05 * 2.0 * PI * k as f64, "K={k}: {tt}");
            assert!(tt > last);
            last = tt;
        }
    }

    #[test]
    fn warm_start_keeps_the_answer() {
        let (d, u, p) = setup(&ONE);
        let t = TvSolveParams {
            max_iters: 20_000,
            ..Default::default()
        };
        let cold = minimize_phi(&d, &u, &p, &t);
        let warm = minimize_phi_from(&d, &u, &p, &t, Some(&cold.phi));
        assert!(warm.converged);
        assert!(warm.iterations <= cold.iterations);
        assert!((warm.objective - cold.objective).abs() <= 2e-6 * cold.objective.abs());
    }

    #[test]
    fn invalid_params() {
        let bad = [
            TvSolveParams { gamma: 0.0, ..Default::default() },
            TvSolveParams { gap_tol: 0.0, ..Default::default() },
            TvSolveParams { max_iters: 0, ..Default::default() },
        ];
        for t in bad {
            assert!(t.validate().is_err());
        }
        assert!(TvSolveParams::default().validate().is_ok());
    }
}
