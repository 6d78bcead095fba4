//! Viscous L² gradient flow of the penalized energy by fully implicit Euler.
//!
//! Each step solves `h²(u⁺ - u)/τ + ∇F̄(u⁺) = 0` on FREE nodes with Newton's
//! method; the linear systems `(h²/τ) I + ∇²F̄` are solved matrix-free by
//! CG, preconditioned with the inverse of the constant-coefficient bulk
//! operator. A step is accepted only if
//! `F̄(u⁺) + ‖u⁺ - u‖²_w / τ ≤ F̄(u) + 1e-10 (1 + |F̄(u)|)` (optionally with a
//! fraction of the dissipation term); otherwise τ is halved and the step
//! retried.

use crate::contour::{contour_metrics, extract_contour};
use crate::error::{Error, Result};
use crate::functionals::{EnergyBreakdown, EnergyParams, EnergyState, HessianWork};
use crate::grid::{Domain, ScalarField};
use crate::recovery::c0_constant;
use crate::spectral::BulkPreconditioner;
use crate::topology::{minimize_phi, TvSolveParams};

/// Ramps applied by [`run_simulation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSpec {
    /// Steps over which the length and winding prefactors grow linearly from 0 to 1.
    pub penalty_ramp_steps: usize,
    /// Steps (after relaxation) over which the length target moves linearly
    /// from the relaxed length to the configured target.
    pub l_ramp_steps: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self {
            penalty_ramp_steps: 200,
            l_ramp_steps: 500,
        }
    }
}

impl ScheduleSpec {
    /// Penalty multiplier for 1-based step `step`.
    pub fn penalty_scale(&self, step: usize) -> f64 {
        if self.penalty_ramp_steps == 0 {
            1.0
        } else {
            (step as f64 / self.penalty_ramp_steps as f64).min(1.0)
        }
    }

    /// Length target for the `main_step`-th (1-based) step after relaxation.
    pub fn length_target(&self, start: f64, target: f64, main_step: usize) -> f64 {
        if self.l_ramp_steps == 0 {
            target
        } else {
            let s = (main_step as f64 / self.l_ramp_steps as f64).min(1.0);
            start + s * (target - start)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub tau_relax: f64,
    pub tau_main: f64,
    pub relax_steps: usize,
    /// Absolute bound on the Euclidean residual norm; `None` means
    /// `1e-8 √N_free`.
    pub newton_tol: Option<f64>,
    pub newton_max: usize,
    /// Relative CG tolerance (forcing term) for each Newton correction.
    pub cg_tol: f64,
    pub cg_max: usize,
    pub max_halvings: usize,
    /// Share of `‖u⁺ - u‖²_w / τ` that a step must dissipate to be accepted.
    /// 1 is the strict test; 0.5 is the classical bound for a minimizing
    /// step, which lets the flow cross regions where F̄ is locally concave
    /// at full speed.
    pub dissipation_factor: f64,
    /// Once every ramp has finished, τ is multiplied by this after each step
    /// that needed no halving (1: fixed steps).
    pub tau_growth: f64,
    /// Upper bound for the grown τ; `None` means `tau_main`.
    pub tau_max: Option<f64>,
    pub schedule: ScheduleSpec,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            tau_relax: 1e-6,
            tau_main: 1e-5,
            relax_steps: 200,
            newton_tol: None,
            newton_max: 25,
            cg_tol: 1e-3,
            cg_max: 2000,
            max_halvings: 6,
            dissipation_factor: 1.0,
            tau_growth: 1.0,
            tau_max: None,
            schedule: ScheduleSpec::default(),
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.tau_relax > 0.0 && self.tau_main > 0.0) {
            return bad("time steps must be positive");
        }
        if self.tau_relax > self.tau_main {
            return bad("flow.tau_relax must not exceed flow.tau_main");
        }
        if self.newton_max == 0 || self.cg_max == 0 {
            return bad("iteration limits must be positive");
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return bad("flow.cg_tol must lie in (0, 1)");
        }
        if !(self.dissipation_factor > 0.0 && self.dissipation_factor <= 1.0) {
            return bad("flow.dissipation_factor must lie in (0, 1]");
        }
        if !(self.tau_growth >= 1.0 && self.tau_growth.is_finite()) {
            return bad("flow.tau_growth must be at least 1");
        }
        if let Some(t) = self.tau_max {
            if !(t >= self.tau_main && t.is_finite()) {
                return bad("flow.tau_max must not be below flow.tau_main");
            }
        }
        if let Some(t) = self.newton_tol {
            if !(t > 0.0) {
                return bad("flow.newton_tol must be positive");
            }
        }
        Ok(())
    }

    pub fn largest_tau(&self) -> f64 {
        self.tau_max.unwrap_or(self.tau_main)
    }

    pub fn newton_tolerance(&self, free_nodes: usize) -> f64 {
        self.newton_tol
            .unwrap_or(1e-8 * (free_nodes as f64).sqrt())
    }
}

// ---------------------------------------------------------------------------
// Linear and nonlinear solvers

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgStatus {
    Converged,
    MaxIterations,
    /// Direction of nonpositive curvature met; the current iterate is returned.
    NegativeCurvature,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub status: CgStatus,
}

/// Preconditioned conjugate gradients for `A x = b` from `x = 0`, with a
/// caller-supplied SPD preconditioner `z = P⁻¹ r` and inner product (entries
/// outside its support are ignored). Stops when `‖r‖ ≤ tol`.
pub fn pcg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
    dot: impl Fn(&[f64], &[f64]) -> f64,
) -> CgOutcome {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rnorm = dot(&r, &r).sqrt();
    let mut status = CgStatus::MaxIterations;
    let mut it = 0;
    if rnorm <= tol {
        status = CgStatus::Converged;
    }
    while status == CgStatus::MaxIterations && it < max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            if it == 0 {
                // steepest-descent fallback so the caller still gets a direction
                let s = rz / dot(&p, &p).max(f64::MIN_POSITIVE);
                x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi = 1e-3 * s * pi);
            }
            status = CgStatus::NegativeCurvature;
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        it += 1;
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= tol {
            status = CgStatus::Converged;
            break;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        x,
        iterations: it,
        residual_norm: rnorm,
        status,
    }
}

/// A nonlinear system `R(x) = 0` with a symmetric Jacobian available as an
/// operator.
pub trait NewtonSystem {
    /// Linearizes at `x` and returns `R(x)`.
    fn linearize(&mut self, x: &[f64]) -> Vec<f64>;
    /// Jacobian at the last linearization point applied to `v`.
    fn apply_jacobian(&mut self, v: &[f64], out: &mut [f64]);
    /// SPD approximation of the inverse Jacobian at the last linearization.
    fn precondition(&mut self, r: &[f64], z: &mut [f64]);
    fn dot(&self, a: &[f64], b: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub cg_tol: f64,
    pub cg_max: usize,
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub cg_iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Full-step Newton with inexact CG inner solves. Fails (without line
/// search) when the residual is not finite or the iteration budget runs out.
pub fn newton_solve<S: NewtonSystem>(sys: &mut S, x0: Vec<f64>, opts: &NewtonOptions) -> NewtonOutcome {
    let mut x = x0;
    let mut cg_total = 0;
    let mut iterations = 0;
    loop {
        let r = sys.linearize(&x);
        let rnorm = sys.dot(&r, &r).sqrt();
        if !rnorm.is_finite() {
            return NewtonOutcome {
                x,
                iterations,
                cg_iterations: cg_total,
                residual_norm: rnorm,
                converged: false,
            };
        }
        if rnorm <= opts.tol || iterations >= opts.max_iter {
            return NewtonOutcome {
                x,
                iterations,
                cg_iterations: cg_total,
                residual_norm: rnorm,
                converged: rnorm <= opts.tol,
            };
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let cg_target = (opts.cg_tol * rnorm).max(0.1 * opts.tol);
        // both closures need the system; CG calls them strictly in turn
        let sys = std::cell::RefCell::new(&mut *sys);
        let out = pcg(
            |v, o| sys.borrow_mut().apply_jacobian(v, o),
            |r, z| sys.borrow_mut().precondition(r, z),
            &rhs,
            cg_target,
            opts.cg_max,
            |a, b| a.iter().zip(b).map(|(x, y)| x * y).sum(),
        );
        cg_total += out.iterations;
        for (xi, di) in x.iter_mut().zip(&out.x) {
            *xi += di;
        }
        iterations += 1;
    }
}

/// Residual `w (x - u)/τ + ∇F̄(x)` of one implicit Euler step.
struct EulerSystem<'a> {
    domain: &'a Domain,
    params: EnergyParams,
    weight: Option<&'a [f64]>,
    previous: &'a [f64],
    shift: f64,
    state: Option<EnergyState<'a>>,
    work: HessianWork,
    bulk: BulkPreconditioner,
}

impl<'a> NewtonSystem for EulerSystem<'a> {
    fn linearize(&mut self, x: &[f64]) -> Vec<f64> {
        let mut state = EnergyState::with_winding_weight(self.domain, &self.params, x, self.weight);
        let mut r = state.gradient();
        for k in self.domain.free_nodes() {
            r[k] += self.shift * (x[k] - self.previous[k]);
        }
        let al = self.params.length_prefactor();
        let kappa = if al != 0.0 {
            2.0 * al * (state.breakdown().l - self.params.length_target) / c0_constant()
        } else {
            0.0
        };
        let h = self.domain.h();
        self.bulk
            .set_coefficients(h, self.params.epsilon, self.shift / (h * h), kappa);
        self.state = Some(state);
        r
    }

    fn apply_jacobian(&mut self, v: &[f64], out: &mut [f64]) {
        let state = self.state.as_ref().expect("linearize first");
        state.hessian_vec(v, out, &mut self.work);
        for k in self.domain.free_nodes() {
            out[k] += self.shift * v[k];
        }
    }

    fn precondition(&mut self, r: &[f64], z: &mut [f64]) {
        self.bulk.apply(r, z);
        self.domain.mask_free(z);
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.domain.dot(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub accepted: bool,
    pub newton_iters: usize,
    pub cg_iters: usize,
    pub energy_before: f64,
    pub energy_after: f64,
    /// `‖u⁺ - u‖²_w / τ` with `w = h²`.
    pub dissipation: f64,
    pub residual_norm: f64,
    pub tau_used: f64,
    pub halvings: usize,
}

impl StepResult {
    /// The strict per-step energy inequality, whatever factor was used for
    /// acceptance.
    pub fn satisfies_dissipation(&self) -> bool {
        dissipation_holds(self.energy_before, self.energy_after, self.dissipation)
    }
}

pub fn dissipation_holds(before: f64, after: f64, dissipation: f64) -> bool {
    after + dissipation <= before + 1e-10 * (1.0 + before.abs())
}

/// One implicit Euler step with step-halving control.
pub fn implicit_euler_step(
    domain: &Domain,
    u: &ScalarField,
    p: &EnergyParams,
    f: &FlowParams,
    tau: f64,
) -> (ScalarField, StepResult) {
    implicit_euler_step_weighted(domain, u, p, None, f, tau, None)
}

/// [`implicit_euler_step`] with a frozen winding weight (see
/// [`EnergyState::with_winding_weight`]) and an optional Newton starting
/// point `guess` (used for the first attempt only).
pub fn implicit_euler_step_weighted(
    domain: &Domain,
    u: &ScalarField,
    p: &EnergyParams,
    weight: Option<&[f64]>,
    f: &FlowParams,
    tau: f64,
    guess: Option<&[f64]>,
) -> (ScalarField, StepResult) {
    let before = EnergyState::with_winding_weight(domain, p, &u.values, weight).total();
    let h2 = domain.h() * domain.h();
    let opts = NewtonOptions {
        tol: f.newton_tolerance(domain.free_count()),
        max_iter: f.newton_max,
        cg_tol: f.cg_tol,
        cg_max: f.cg_max,
    };
    let mut tau_try = tau;
    let mut total_newton = 0;
    let mut total_cg = 0;
    let mut last = StepResult {
        accepted: false,
        newton_iters: 0,
        cg_iters: 0,
        energy_before: before,
        energy_after: f64::NAN,
        dissipation: f64::NAN,
        residual_norm: f64::NAN,
        tau_used: tau,
        halvings: 0,
    };
    for halvings in 0..=f.max_halvings {
        let mut sys = EulerSystem {
            domain,
            params: *p,
            weight,
            previous: &u.values,
            shift: h2 / tau_try,
            state: None,
            work: HessianWork::default(),
            bulk: BulkPreconditioner::new(domain.grid(), p.epsilon, 1.0 / tau_try, 0.0),
        };
        let x0 = match guess {
            Some(g) if halvings == 0 => g.to_vec(),
            _ => u.values.clone(),
        };
        let out = newton_solve(&mut sys, x0, &opts);
        total_newton += out.iterations;
        total_cg += out.cg_iterations;
        let mut x = out.x;
        domain.clamp(&mut x, crate::grid::CLAMP_VALUE);
        let after = EnergyState::with_winding_weight(domain, p, &x, weight).total();
        let dist2: f64 = domain.integrate_with(|k| (x[k] - u.values[k]).powi(2));
        let dissipation = dist2 / tau_try;
        last = StepResult {
            accepted: false,
            newton_iters: total_newton,
            cg_iters: total_cg,
            energy_before: before,
            energy_after: after,
            dissipation,
            residual_norm: out.residual_norm,
            tau_used: tau_try,
            halvings,
        };
        if out.converged && after.is_finite() && dissipation_holds(before, after, f.dissipation_factor * dissipation)
        {
            last.accepted = true;
            return (
                ScalarField {
                    grid: u.grid,
                    values: x,
                },
                last,
            );
        }
        tau_try *= 0.5;
    }
    (u.clone(), last)
}

// ---------------------------------------------------------------------------
// Simulation driver

/// Per-step diagnostics written to the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSeriesRecord {
    pub step: usize,
    pub time: f64,
    pub energy: EnergyBreakdown,
    pub components: usize,
    pub length: f64,
    pub max_radius: f64,
    pub t_tilde: Option<f64>,
}

/// Settings of the orientation-insensitive winding diagnostic and penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovedWinding {
    pub tv: TvSolveParams,
    /// Compute T̃ every this many steps (0: never).
    pub every: usize,
    /// Use the frozen sign field as a weight in the winding penalty.
    pub penalize: bool,
}

impl Default for ImprovedWinding {
    fn default() -> Self {
        Self {
            tv: TvSolveParams::default(),
            every: 0,
            penalize: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Total number of steps, relaxation included.
    pub n_steps: usize,
    /// Store a snapshot every this many steps (0: initial and final only).
    pub snapshot_every: usize,
    pub improved: ImprovedWinding,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: ScalarField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TimeSeriesRecord>,
    pub steps: Vec<StepResult>,
    /// Energy parameters in force at each step (targets and ramps included).
    pub step_params: Vec<EnergyParams>,
    pub snapshots: Vec<Snapshot>,
    pub final_field: ScalarField,
    /// First step whose energy parameters are final; records from this step
    /// on all use the same functional.
    pub ramps_complete_at: usize,
}

/// Receives records and snapshots as they are produced.
pub trait TrajectorySink {
    fn record(&mut self, _record: &TimeSeriesRecord) -> Result<()> {
        Ok(())
    }
    fn snapshot(&mut self, _snapshot: &Snapshot) -> Result<()> {
        Ok(())
    }
}

impl TrajectorySink for () {}

pub fn make_record(
    domain: &Domain,
    u: &ScalarField,
    energy: EnergyBreakdown,
    step: usize,
    time: f64,
    t_tilde: Option<f64>,
) -> TimeSeriesRecord {
    let contour = extract_contour(domain, u);
    let metrics = contour_metrics(&contour);
    TimeSeriesRecord {
        step,
        time,
        energy,
        components: metrics.component_count,
        length: metrics.length,
        max_radius: metrics.max_radius,
        t_tilde,
    }
}

const MAX_CONSECUTIVE_REJECTIONS: usize = 10;

/// Relaxation phase (`relax_steps` at `tau_relax`, penalties ramped, length
/// target frozen at the current length) followed by the main phase at
/// `tau_main` with the length target ramped from the relaxed length.
pub fn run_simulation(
    domain: &Domain,
    u0: &ScalarField,
    p: &EnergyParams,
    f: &FlowParams,
    opts: &RunOptions,
    sink: &mut dyn TrajectorySink,
) -> Result<Trajectory> {
    p.validate()?;
    f.validate()?;
    let mut u = u0.clone();
    domain.clamp(&mut u.values, crate::grid::CLAMP_VALUE);
    let improved = opts.improved;
    let mut time = 0.0;
    let mut weight: Option<Vec<f64>> = None;
    let mut t_tilde = None;
    let refresh_phi = |u: &ScalarField, weight: &mut Option<Vec<f64>>, t_tilde: &mut Option<f64>| {
        let sol = minimize_phi(domain, u, p, &improved.tv);
        *t_tilde = Some(sol.t_tilde);
        if improved.penalize {
            *weight = Some(sol.phi.values);
        }
    };
    if improved.every > 0 {
        refresh_phi(&u, &mut weight, &mut t_tilde);
    }

    let initial_params = params_at(p, f, 0, f64::NAN, &u, domain);
    let initial_energy =
        EnergyState::with_winding_weight(domain, &initial_params, &u.values, weight.as_deref()).breakdown();
    let mut records = vec![make_record(domain, &u, initial_energy, 0, 0.0, t_tilde)];
    sink.record(&records[0])?;
    let mut snapshots = vec![Snapshot {
        step: 0,
        time: 0.0,
        field: u.clone(),
    }];
    sink.snapshot(&snapshots[0])?;

    let mut steps = Vec::with_capacity(opts.n_steps);
    let mut step_params = Vec::with_capacity(opts.n_steps);
    let mut relaxed_length = f64::NAN;
    let mut rejections = 0;
    // the length target is held at the current length while relaxing
    let length_final = if p.length_on {
        f.relax_steps + f.schedule.l_ramp_steps.max(1)
    } else {
        0
    };
    let ramps_complete_at = f.schedule.penalty_ramp_steps.max(length_final).max(1);
    let mut step = 1;
    let mut tau_override: Option<f64> = None;
    let mut grown: Option<f64> = None;
    let mut previous: Option<(Vec<f64>, f64)> = None;
    while step <= opts.n_steps {
        if step == f.relax_steps + 1 || (step == 1 && f.relax_steps == 0) {
            relaxed_length = EnergyState::new(domain, p, &u.values).breakdown().l;
        }
        let params = params_at(p, f, step, relaxed_length, &u, domain);
        let nominal = if step <= f.relax_steps {
            f.tau_relax
        } else if step > ramps_complete_at {
            grown.unwrap_or(f.tau_main)
        } else {
            f.tau_main
        };
        let tau = tau_override.unwrap_or(nominal);
        // linear extrapolation in time as the Newton starting point
        let guess = previous.as_ref().map(|(prev, prev_tau): &(Vec<f64>, f64)| {
            let r = tau / prev_tau;
            u.values.iter().zip(prev).map(|(a, b)| a + r * (a - b)).collect::<Vec<f64>>()
        });
        let (next, result) =
            implicit_euler_step_weighted(domain, &u, &params, weight.as_deref(), f, tau, guess.as_deref());
        if !result.accepted {
            rejections += 1;
            if rejections > MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::Aborted {
                    step,
                    reason: format!(
                        "{rejections} consecutive rejected steps (last tau {:.3e}, residual {:.3e})",
                        result.tau_used, result.residual_norm
                    ),
                });
            }
            tau_override = Some(result.tau_used * 0.5);
            continue;
        }
        rejections = 0;
        tau_override = None;
        if step >= ramps_complete_at && f.tau_growth > 1.0 {
            // keep a reduced step, grow a clean one
            grown = Some(if result.halvings == 0 {
                (result.tau_used * f.tau_growth).min(f.largest_tau())
            } else {
                result.tau_used
            });
        }
        previous = Some((std::mem::replace(&mut u, next).values, result.tau_used));
        time += result.tau_used;
        steps.push(result);
        step_params.push(params);

        if improved.every > 0 && step % improved.every == 0 {
            refresh_phi(&u, &mut weight, &mut t_tilde);
        } else if improved.every > 0 {
            t_tilde = None;
        }
        let energy =
            EnergyState::with_winding_weight(domain, &params, &u.values, weight.as_deref()).breakdown();
        let rec = make_record(domain, &u, energy, step, time, t_tilde);
        sink.record(&rec)?;
        records.push(rec);
        if (opts.snapshot_every > 0 && step % opts.snapshot_every == 0) || step == opts.n_steps {
            let snap = Snapshot {
                step,
                time,
                field: u.clone(),
            };
            sink.snapshot(&snap)?;
            snapshots.push(snap);
        }
        step += 1;
    }
    Ok(Trajectory {
        records,
        steps,
        step_params,
        snapshots,
        final_field: u,
        ramps_complete_at,
    })
}

/// Energy parameters in force at 1-based `step` (0 for the initial record).
fn params_at(
    p: &EnergyParams,
    f: &FlowParams,
    step: usize,
    relaxed_length: f64,
    u: &ScalarField,
    domain: &Domain,
) -> EnergyParams {
    let mut q = *p;
    q.penalty_scale = f.schedule.penalty_scale(step);
    if p.length_on {
        if step <= f.relax_steps {
            // no target yet: hold the current length
            q.length_target = EnergyState::new(domain, p, &u.values).breakdown().l;
        } else {
            q.length_target =
                f.schedule
                    .length_target(relaxed_length, p.length_target, step - f.relax_steps);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    /// `R(x) = x - b` with identity Jacobian, optionally scaled.
    struct Quadratic {
        b: Vec<f64>,
        scale: f64,
    }

    impl NewtonSystem for Quadratic {
        fn linearize(&mut self, x: &[f64]) -> Vec<f64> {
            x.iter().zip(&self.b).map(|(x, b)| self.scale * (x - b)).collect()
        }
        fn apply_jacobian(&mut self, v: &[f64], out: &mut [f64]) {
            out.iter_mut().zip(v).for_each(|(o, v)| *o = self.scale * v);
        }
        fn precondition(&mut self, r: &[f64], z: &mut [f64]) {
            z.copy_from_slice(r);
        }
        fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
            a.iter().zip(b).map(|(x, y)| x * y).sum()
        }
    }

    #[test]
    fn newton_exact_on_quadratic() {
        let mut sys = Quadratic {
            b: (0..50).map(|i| (i as f64).sin()).collect(),
            scale: 1.0,
        };
        let out = newton_solve(
            &mut sys,
            vec![0.0; 50],
            &NewtonOptions {
                tol: 1e-12,
                max_iter: 5,
                cg_tol: 1e-3,
                cg_max: 10,
            },
        );
        assert!(out.converged);
        assert_eq!(out.iterations, 1);
        assert!(out.cg_iterations <= 2);
    }

    #[test]
    fn pcg_solves_spd_system() {
        // tridiagonal SPD matrix
        let n = 40;
        let apply = |v: &[f64], o: &mut [f64]| {
            for i in 0..n {
                o[i] = 3.0 * v[i] - if i > 0 { v[i - 1] } else { 0.0 } - if i + 1 < n { v[i + 1] } else { 0.0 };
            }
        };
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
        let jacobi = |r: &[f64], z: &mut [f64]| z.iter_mut().zip(r).for_each(|(z, r)| *z = r / 3.0);
        let out = pcg(apply, jacobi, &b, 1e-12, 200, |a, b| {
            a.iter().zip(b).map(|(x, y)| x * y).sum()
        });
        assert_eq!(out.status, CgStatus::Converged);
        let mut r = vec![0.0; n];
        apply(&out.x, &mut r);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn pcg_flags_negative_curvature() {
        let out = pcg(
            |v, o| o.iter_mut().zip(v).for_each(|(o, v)| *o = -v),
            |r, z| z.copy_from_slice(r),
            &[1.0, 0.5],
            1e-12,
            10,
            |a, b| a.iter().zip(b).map(|(x, y)| x * y).sum(),
        );
        assert_eq!(out.status, CgStatus::NegativeCurvature);
    }

    #[test]
    fn well_state_is_a_fixed_point() {
        let d = Domain::new(GridSpec::new(40, 1.25).unwrap());
        let u = d.filled(-1.0);
        let p = EnergyParams::elastica_only(0.025);
        let (next, res) = implicit_euler_step(&d, &u, &p, &FlowParams::default(), 1e-5);
        assert!(res.accepted);
        assert!(res.newton_iters <= 1);
        assert_eq!(next.values, u.values);
    }

    #[test]
    fn schedules() {
        let s = ScheduleSpec {
            penalty_ramp_steps: 4,
            l_ramp_steps: 10,
        };
        assert_eq!(s.penalty_scale(1), 0.25);
        assert_eq!(s.penalty_scale(9), 1.0);
        assert_eq!(s.length_target(2.0, 4.0, 5), 3.0);
        assert_eq!(s.length_target(2.0, 4.0, 50), 4.0);
        let none = ScheduleSpec {
            penalty_ramp_steps: 0,
            l_ramp_steps: 0,
        };
        assert_eq!(none.penalty_scale(1), 1.0);
        assert_eq!(none.length_target(2.0, 4.0, 1), 4.0);
    }

    #[test]
    fn zero_steps_gives_initial_record_only() {
        let d = Domain::new(GridSpec::new(32, 1.25).unwrap());
        let u = d.filled(-1.0);
        let traj = run_simulation(
            &d,
            &u,
            &EnergyParams::elastica_only(0.025),
            &FlowParams::default(),
            &RunOptions {
                n_steps: 0,
                snapshot_every: 0,
                improved: ImprovedWinding::default(),
            },
            &mut (),
        )
        .unwrap();
        assert_eq!(traj.records.len(), 1);
        assert_eq!(traj.records[0].step, 0);
        assert!(traj.steps.is_empty());
    }
}
