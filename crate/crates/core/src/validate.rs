//! Built-in oracle checks and the bundled experiments behind `validate`.
//!
//! Each check returns a [`CheckReport`]; a failed check is a result, not an
//! error. Only a simulation that cannot run at all surfaces as `Err`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SimulationConfig;
use crate::contour::{contour_metrics, extract_contour};
use crate::error::Result;
use crate::flow::{dissipation_holds, run_simulation, Trajectory};
use crate::functionals::{EnergyParams, EnergyState, HessianWork};
use crate::grid::{Domain, GridSpec, ScalarField};
use crate::recovery::{
    build_recovery_field, c0_constant, Component, CurveSpec, CutoffWidth, Orientation, RecoveryParams,
};
use crate::topology::{minimize_phi, TvSolveParams};

/// The five bundled experiment configs, by file name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("circle1.cfg", include_str!("../configs/circle1.cfg")),
    ("circle2.cfg", include_str!("../configs/circle2.cfg")),
    ("relaxation.cfg", include_str!("../configs/relaxation.cfg")),
    ("topology1.cfg", include_str!("../configs/topology1.cfg")),
    ("topology2.cfg", include_str!("../configs/topology2.cfg")),
];

/// Paper value of the final Relaxation energy; different discretization, so
/// reported next to ours rather than compared.
pub const RELAXATION_REFERENCE_ENERGY: f64 = 33.6;

pub struct SuiteOptions {
    /// Also run the bundled experiments and their checks.
    pub full: bool,
    /// Step limit for the dissipation check on the user's config.
    pub config_steps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub id: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(id: &str, passed: bool, detail: String) -> Self {
        Self {
            id: id.to_string(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.detail)
    }
}

fn failed_run(id: &str, e: crate::error::Error) -> CheckReport {
    CheckReport::new(id, false, format!("run failed: {e}"))
}

/// Least-squares line through `(x, y)`: slope, intercept and R².
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// ---------------------------------------------------------------------------
// Oracle checks on prescribed fields

/// Recovery fields of the circle of radius 1/2 reproduce the sharp values
/// `L = π`, `B = 4π` and `T = 2π`.
pub fn check_recovery() -> CheckReport {
    let id = "1 recovery quadrature";
    let start = Instant::now();
    let spec = CurveSpec::new(vec![Component::circle([0.0, 0.0], 0.5, Orientation::Positive)])
        .expect("valid circle");
    let energies = |eps: f64, ratio: f64| {
        let d = Domain::new(GridSpec::with_spacing(eps / ratio, 1.1).expect("valid grid"));
        let u = build_recovery_field(&spec, &RecoveryParams::new(eps), &d).expect("circle fits");
        EnergyState::new(&d, &EnergyParams::elastica_only(eps), &u.values).breakdown()
    };
    let epsilons = [0.05, 0.025, 0.0125];
    let coarse: Vec<_> = epsilons.iter().map(|&e| energies(e, 4.0)).collect();
    let l_err: Vec<f64> = coarse.iter().map(|e| rel(e.l, PI)).collect();
    let t_err = coarse
        .iter()
        .map(|e| rel(e.t_bar, TAU).max(rel(e.t_abs, TAU)))
        .fold(0.0, f64::max);
    let b_err = rel(coarse[1].b, 2.0 * TAU);
    // at fixed h/ε the grid error of B does not shrink with ε, so the order
    // in ε is read off on a grid fine enough to resolve the profile
    let fine: Vec<f64> = epsilons.iter().map(|&e| rel(energies(e, 12.0).b, 2.0 * TAU)).collect();
    let order = (fine[0] / fine[1]).log2().min((fine[1] / fine[2]).log2());
    let l_ok = l_err.iter().all(|&e| e < 0.01) && l_err.windows(2).all(|w| w[1] < w[0]);
    let passed = l_ok && b_err < 0.02 && order >= 1.5 && t_err < 0.01;
    CheckReport::new(
        id,
        passed,
        format!(
            "L err {:.2e}/{:.2e}/{:.2e}, B err {:.2e} at eps 0.025, B order {:.2} (h = eps/12), T err {:.2e} ({:.1?})",
            l_err[0],
            l_err[1],
            l_err[2],
            b_err,
            order,
            t_err,
            start.elapsed()
        ),
    )
}

/// Grid and solver settings shared by the sign-field checks: `h = ε/4` on a
/// square just covering the disk.
fn tv_domain(eps: f64) -> Domain {
    Domain::new(GridSpec::with_spacing(eps / 4.0, 1.02).expect("valid grid"))
}

fn tv_params() -> TvSolveParams {
    TvSolveParams {
        max_iters: 20_000,
        ..Default::default()
    }
}

/// Oppositely oriented components cancel in the winding number but not in
/// the improved functional.
pub fn check_counterexample() -> CheckReport {
    let id = "2 winding counterexample";
    let start = Instant::now();
    let eps = 0.01;
    let spec = CurveSpec::new(vec![
        Component::circle([0.0, 0.0], 0.5, Orientation::Positive),
        Component::circle([0.0, 0.75], 0.2, Orientation::Positive),
        Component::circle([0.0, 0.0], 0.25, Orientation::Negative),
    ])
    .expect("valid set");
    let d = tv_domain(eps);
    // the two outer circles are only 0.05 apart, too close for a cutoff layer
    let rp = RecoveryParams::new(eps).with_cutoff(CutoffWidth::None);
    let u = build_recovery_field(&spec, &rp, &d).expect("set fits");
    let p = EnergyParams::elastica_only(eps);
    let e = EnergyState::new(&d, &p, &u.values).breakdown();
    let comps = contour_metrics(&extract_contour(&d, &u)).component_count;
    let sol = minimize_phi(&d, &u, &p, &tv_params());
    let t_err = rel(e.t_abs, TAU).max(rel(e.t_bar, TAU));
    let tt_err = rel(sol.t_tilde, 3.0 * TAU);
    let passed = t_err < 0.02 && comps == 3 && tt_err < 0.05 && sol.gap <= 1e-6;
    CheckReport::new(
        id,
        passed,
        format!(
            "T/2pi {:.4}, components {comps}, T~/2pi {:.4}, gap {:.2e}, n = {} ({:.1?})",
            e.t_abs / TAU,
            sol.t_tilde / TAU,
            sol.gap,
            d.grid().n(),
            start.elapsed()
        ),
    )
}

/// The improved functional counts `2π` per disjoint circle.
pub fn check_counting() -> CheckReport {
    let id = "3 component counting";
    let start = Instant::now();
    let eps = 0.025;
    let d = tv_domain(eps);
    let p = EnergyParams::elastica_only(eps);
    let mut parts = Vec::new();
    let mut passed = true;
    for count in 1..=3usize {
        let comps: Vec<Component> = match count {
            1 => vec![Component::circle([0.0, 0.0], 0.5, Orientation::Positive)],
            _ => (0..count)
                .map(|i| {
                    let th = TAU * i as f64 / count as f64;
                    let r = if count == 2 { 0.3 } else { 0.22 };
                    Component::circle([0.45 * th.cos(), 0.45 * th.sin()], r, Orientation::Positive)
                })
                .collect(),
        };
        let spec = CurveSpec::new(comps).expect("disjoint circles");
        let u = build_recovery_field(&spec, &RecoveryParams::new(eps), &d).expect("circles fit");
        let sol = minimize_phi(&d, &u, &p, &tv_params());
        let expected = TAU * count as f64;
        passed &= rel(sol.t_tilde, expected) < 0.05;
        parts.push(format!("N={count}: {:.4}", sol.t_tilde / TAU));
    }
    CheckReport::new(
        id,
        passed,
        format!("T~/2pi {} ({:.1?})", parts.join(", "), start.elapsed()),
    )
}

/// Wavy closed interface with a little noise on top, clamped on the collar.
fn random_smooth_field(domain: &Domain, eps: f64, rng: &mut ChaCha8Rng) -> ScalarField {
    let r0 = rng.gen_range(0.35..0.5);
    let waves: Vec<(f64, f64, f64)> = (2..=4)
        .map(|k| (k as f64, rng.gen_range(0.0..0.06), rng.gen_range(0.0..TAU)))
        .collect();
    let bumps: Vec<[f64; 4]> = (0..4)
        .map(|_| {
            [
                rng.gen_range(-0.08..0.08),
                rng.gen_range(1.0..5.0),
                rng.gen_range(1.0..5.0),
                rng.gen_range(0.0..TAU),
            ]
        })
        .collect();
    let grid = *domain.grid();
    let mut u = ScalarField::from_fn(grid, |x, y| {
        let th = y.atan2(x);
        let r = r0 + waves.iter().map(|(k, a, ph)| a * (k * th + ph).cos()).sum::<f64>();
        let noise: f64 = bumps.iter().map(|b| b[0] * (b[1] * x + b[2] * y + b[3]).sin()).sum();
        ((r - x.hypot(y)) / (std::f64::consts::SQRT_2 * eps)).tanh() + noise
    });
    domain.clamp(&mut u.values, crate::grid::CLAMP_VALUE);
    u
}

fn random_direction(domain: &Domain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..domain.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    domain.mask_free(&mut v);
    v
}

fn rel_norm(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Analytic gradient and Hessian products of the full penalized energy
/// against finite differences, plus Hessian symmetry.
pub fn check_derivatives() -> CheckReport {
    let id = "4 exact derivatives";
    let start = Instant::now();
    let eps = 0.1;
    let domain = Domain::new(GridSpec::new(48, 1.1).expect("valid grid"));
    let free: Vec<usize> = domain.free_nodes().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut grad_err, mut sym_err, mut hess_err) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let u = random_smooth_field(&domain, eps, &mut rng);
        let base = EnergyState::new(&domain, &EnergyParams::elastica_only(eps), &u.values).breakdown();
        // targets away from the current values so every penalty has a slope
        let p = EnergyParams {
            epsilon: eps,
            sigma_mis: 0.02 / (eps * eps),
            length_target: 1.2 * base.l,
            ..Default::default()
        };
        let energy = |v: &[f64]| EnergyState::new(&domain, &p, v).total();
        let mut state = EnergyState::new(&domain, &p, &u.values);
        let g = state.gradient();

        let delta = 1e-5;
        let mut fd = Vec::new();
        let mut exact = Vec::new();
        let mut probe = u.values.clone();
        for _ in 0..50 {
            let k = free[rng.gen_range(0..free.len())];
            probe[k] = u.values[k] + delta;
            let plus = energy(&probe);
            probe[k] = u.values[k] - delta;
            let minus = energy(&probe);
            probe[k] = u.values[k];
            fd.push((plus - minus) / (2.0 * delta));
            exact.push(g[k]);
        }
        grad_err = grad_err.max(rel_norm(&fd, &exact));

        let v = random_direction(&domain, &mut rng);
        let w = random_direction(&domain, &mut rng);
        let mut work = HessianWork::default();
        let (mut hv, mut hw) = (domain.zeros(), domain.zeros());
        state.hessian_vec(&v, &mut hv, &mut work);
        state.hessian_vec(&w, &mut hw, &mut work);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (a, b) = (dot(&hv, &w), dot(&hw, &v));
        sym_err = sym_err.max((a - b).abs() / a.abs().max(b.abs()));

        let step = 1e-6;
        let shifted = |s: f64| {
            let x: Vec<f64> = u.values.iter().zip(&v).map(|(a, b)| a + s * b).collect();
            EnergyState::new(&domain, &p, &x).gradient()
        };
        let (gp, gm) = (shifted(step), shifted(-step));
        let fd_hv: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * step)).collect();
        hess_err = hess_err.max(rel_norm(&fd_hv, &hv));
    }
    let passed = grad_err < 1e-5 && sym_err < 1e-10 && hess_err < 1e-4;
    CheckReport::new(
        id,
        passed,
        format!(
            "gradient rel err {grad_err:.2e}, Hessian asymmetry {sym_err:.2e}, Hessian rel err {hess_err:.2e} ({:.1?})",
            start.elapsed()
        ),
    )
}

// ---------------------------------------------------------------------------
// Flow experiments

pub fn bundled_config(file: &str) -> Result<SimulationConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(name, _)| *name == file)
        .ok_or_else(|| crate::error::Error::InvalidParameter(format!("no bundled config `{file}`")))?;
    SimulationConfig::parse(text, file, Path::new("configs"))
}

pub struct Experiment {
    pub config: SimulationConfig,
    pub domain: Domain,
    pub trajectory: Trajectory,
    pub seconds: f64,
}

/// Runs a config in memory, writing nothing.
pub fn run_experiment(config: SimulationConfig) -> Result<Experiment> {
    let start = Instant::now();
    let domain = config.domain();
    let u0 = config.initial_field(&domain)?;
    let trajectory = run_simulation(&domain, &u0, &config.energy, &config.flow, &config.run, &mut ())?;
    Ok(Experiment {
        config,
        domain,
        trajectory,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn run_bundled(file: &str) -> Result<Experiment> {
    run_experiment(bundled_config(file)?)
}

/// Number of accepted steps violating the dissipation inequality, and of
/// post-ramp records where the energy went up.
pub fn dissipation_violations(t: &Trajectory) -> (usize, usize) {
    let steps = t.steps.iter().filter(|s| !s.satisfies_dissipation()).count();
    let rises = t
        .records
        .windows(2)
        .filter(|w| w[0].step >= t.ramps_complete_at)
        .filter(|w| !dissipation_holds(w[0].energy.total, w[1].energy.total, 0.0))
        .count();
    (steps, rises)
}

pub fn check_dissipation(runs: &[(&str, &Experiment)]) -> CheckReport {
    let id = "5 dissipation";
    let mut passed = !runs.is_empty();
    let mut parts = Vec::new();
    for (name, e) in runs {
        let (bad, rises) = dissipation_violations(&e.trajectory);
        passed &= bad == 0 && rises == 0;
        parts.push(format!("{name}: {} steps, {bad} violations, {rises} rises", e.trajectory.steps.len()));
    }
    CheckReport::new(id, passed, parts.join("; "))
}

fn radius_series(e: &Experiment) -> (Vec<f64>, Vec<f64>) {
    let start = e.config.flow.relax_steps;
    e.trajectory
        .records
        .iter()
        .filter(|r| r.step >= start)
        .map(|r| (r.time, r.length / TAU))
        .unzip()
}

/// Expanding circle with and without the winding and mismatch penalties.
pub fn check_circles(c1: &Experiment, c2: &Experiment) -> CheckReport {
    let id = "6 expanding circle";
    let all: Vec<f64> = c1.trajectory.records.iter().map(|r| r.length / TAU).collect();
    let increasing = all.windows(2).all(|w| w[1] > w[0]);
    let fit = |e: &Experiment| {
        let (t, r) = radius_series(e);
        let r4: Vec<f64> = r.iter().map(|r| r.powi(4)).collect();
        linear_fit(&t, &r4)
    };
    let (s1, _, r2_1) = fit(c1);
    let (s2, _, r2_2) = fit(c2);
    let slope_diff = rel(s2, s1);
    let mut max_dev = 0.0f64;
    let mut matched = 0;
    for a in &c1.trajectory.snapshots {
        if let Some(b) = c2.trajectory.snapshots.iter().find(|b| b.step == a.step) {
            if (a.time - b.time).abs() <= 1e-12 * a.time.max(1.0) {
                max_dev = max_dev.max(a.field.max_abs_diff(&b.field));
                matched += 1;
            }
        }
    }
    let (first, last) = (all[0], *all.last().unwrap_or(&all[0]));
    let passed = increasing && r2_1 > 0.99 && matched > 1 && max_dev < 0.1 && slope_diff < 0.02;
    CheckReport::new(
        id,
        passed,
        format!(
            "r {first:.4} -> {last:.4} {}, R2 {r2_1:.5}/{r2_2:.5}, r^4 slopes {s1:.5}/{s2:.5} (diff {:.2}%), max |du| {max_dev:.3e} over {matched} frames ({:.0}s + {:.0}s)",
            if increasing { "increasing" } else { "NOT increasing" },
            100.0 * slope_diff,
            c1.seconds,
            c2.seconds
        ),
    )
}

/// Pinch-off without the winding penalty, none with it.
pub fn check_topology(t1: &Experiment, t2: &Experiment) -> CheckReport {
    let id = "7 topological transition";
    let first_split = t1.trajectory.records.iter().find(|r| r.components >= 2);
    let max1 = t1.trajectory.records.iter().map(|r| r.components).max().unwrap_or(0);
    let max2 = t2.trajectory.records.iter().map(|r| r.components).max().unwrap_or(0);
    let min2 = t2.trajectory.records.iter().map(|r| r.components).min().unwrap_or(0);
    let passed = first_split.is_some() && max2 == 1 && min2 == 1;
    let split = match first_split {
        Some(r) => format!("splits at step {} (t = {:.3e}) into up to {max1}", r.step, r.time),
        None => "never splits".to_string(),
    };
    CheckReport::new(
        id,
        passed,
        format!(
            "Topology 1 {split}; Topology 2 components in [{min2}, {max2}] over {} steps ({:.0}s + {:.0}s)",
            t2.trajectory.steps.len(),
            t1.seconds,
            t2.seconds
        ),
    )
}

fn gradient_sup(e: &Experiment, u: &ScalarField) -> f64 {
    let params = e.trajectory.step_params.last().copied().unwrap_or(e.config.energy);
    let g = EnergyState::new(&e.domain, &params, &u.values).gradient();
    e.domain.max_abs(&g)
}

/// Relaxation ends on the length and winding targets near a critical point.
pub fn check_relaxation(e: &Experiment) -> CheckReport {
    let id = "8 relaxation";
    let t = &e.trajectory;
    let last = t.records.last().expect("initial record");
    let target = e.config.energy.length_target;
    let l_err = rel(last.energy.l, target);
    let t_err = rel(last.energy.t_bar, TAU);
    let post = t.snapshots.iter().find(|s| s.step >= t.ramps_complete_at);
    let (reduction, post_step) = match post {
        Some(s) => (gradient_sup(e, &s.field) / gradient_sup(e, &t.final_field), s.step),
        None => (f64::NAN, 0),
    };
    let passed = l_err < 0.01 && t_err < 0.01 && reduction >= 1e3;
    CheckReport::new(
        id,
        passed,
        format!(
            "L {:.4} (err {:.2e}), T/2pi {:.4}, grad reduction {reduction:.3e} since step {post_step}, final B {:.4}, F {:.4} (reference {RELAXATION_REFERENCE_ENERGY}) ({:.0}s)",
            last.energy.l,
            l_err,
            last.energy.t_bar / TAU,
            last.energy.b,
            last.energy.total,
            e.seconds
        ),
    )
}

/// The equipartition defect integral does not grow along Relaxation.
pub fn check_mismatch(e: &Experiment) -> CheckReport {
    let id = "9 mismatch control";
    let sigma = e.config.energy.sigma_mis;
    let eps = e.config.energy.epsilon;
    let t = &e.trajectory;
    let relax = e.config.flow.relax_steps;
    let start = t.records.iter().find(|r| r.step >= relax).expect("relaxed record");
    let defect = |m: f64| if sigma > 0.0 { m / sigma } else { m };
    let base = defect(start.energy.m);
    let peak = t
        .records
        .iter()
        .filter(|r| r.step >= relax)
        .map(|r| defect(r.energy.m))
        .fold(0.0, f64::max);
    let scale = start.energy.l * c0_constant() / eps;
    let passed = e.config.energy.mismatch_on && peak < 2.0 * base;
    CheckReport::new(
        id,
        passed,
        format!(
            "defect integral {base:.4e} after relaxation, peak {peak:.4e} ({:.2}x), peak / (L c0/eps) {:.2e}",
            peak / base,
            peak / scale
        ),
    )
}

/// Runs the config (optionally shortened) and checks every step dissipates.
pub fn check_config_dissipation(cfg: &SimulationConfig, steps: Option<usize>) -> CheckReport {
    let id = format!("dissipation on {}", cfg.name);
    let mut cfg = cfg.clone();
    if let Some(n) = steps {
        cfg.run.n_steps = n;
    }
    match run_experiment(cfg) {
        Ok(e) => {
            let (bad, rises) = dissipation_violations(&e.trajectory);
            CheckReport::new(
                &id,
                bad == 0 && rises == 0,
                format!(
                    "{} steps, {bad} violations, {rises} post-ramp rises ({:.0}s)",
                    e.trajectory.steps.len(),
                    e.seconds
                ),
            )
        }
        Err(err) => failed_run(&id, err),
    }
}

/// Checks 1 to 4 and a dissipation check on `cfg`; with `full`, also the
/// bundled experiments and checks 5 to 9.
pub fn run_suite(cfg: &SimulationConfig, opts: &SuiteOptions, emit: &mut dyn FnMut(&CheckReport)) -> Vec<CheckReport> {
    let mut out = Vec::new();
    let mut push = |r: CheckReport| {
        emit(&r);
        out.push(r);
    };
    push(check_recovery());
    push(check_counterexample());
    push(check_counting());
    push(check_derivatives());
    push(check_config_dissipation(cfg, opts.config_steps));
    if opts.full {
        for r in full_checks() {
            push(r);
        }
    }
    out
}

/// Runs the five bundled experiments and checks 5 to 9.
pub fn full_checks() -> Vec<CheckReport> {
    let names = ["circle1.cfg", "circle2.cfg", "topology1.cfg", "topology2.cfg", "relaxation.cfg"];
    let runs: Vec<Result<Experiment>> = names.iter().map(|n| run_bundled(n)).collect();
    let failed: Vec<String> = names
        .iter()
        .zip(&runs)
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    let ok: Vec<(&str, &Experiment)> = names
        .iter()
        .zip(&runs)
        .filter_map(|(n, r)| r.as_ref().ok().map(|e| (*n, e)))
        .collect();
    let get = |n: &str| ok.iter().find(|(m, _)| *m == n).map(|(_, e)| *e);
    let mut out = Vec::new();
    let mut diss = check_dissipation(&ok);
    if !failed.is_empty() {
        diss.passed = false;
        diss.detail = format!("{}; failed runs: {}", diss.detail, failed.join("; "));
    }
    out.push(diss);
    let missing = |id: &str| CheckReport::new(id, false, "experiment did not run".into());
    out.push(match (get("circle1.cfg"), get("circle2.cfg")) {
        (Some(a), Some(b)) => check_circles(a, b),
        _ => missing("6 expanding circle"),
    });
    out.push(match (get("topology1.cfg"), get("topology2.cfg")) {
        (Some(a), Some(b)) => check_topology(a, b),
        _ => missing("7 topological transition"),
    });
    match get("relaxation.cfg") {
        Some(e) => {
            out.push(check_relaxation(e));
            out.push(check_mismatch(e));
        }
        None => {
            out.push(missing("8 relaxation"));
            out.push(missing("9 mismatch control"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_a_line_is_exact() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let (s, c, r2) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bundled_configs_parse() {
        let names = ["Circle 1", "Circle 2", "Relaxation", "Topology 1", "Topology 2"];
        for ((file, _), name) in BUNDLED.iter().zip(names) {
            assert_eq!(bundled_config(file).unwrap().name, name);
        }
        assert!(bundled_config("nope.cfg").is_err());
    }

    #[test]
    fn derivative_suite_passes() {
        let r = check_derivatives();
        assert!(r.passed, "{r}");
    }
}
