use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use elastica::config::SimulationConfig;
use elastica::contour::{contour_metrics, extract_contour};
use elastica::flow::{run_simulation, Snapshot, TimeSeriesRecord, TrajectorySink};
use elastica::functionals::EnergyState;
use elastica::io::{read_snapshot, DirectorySink};
use elastica::topology::minimize_phi;
use elastica::validate::{self, SuiteOptions};
use elastica::{Domain, Error, ScalarField};

#[derive(Parser)]
#[command(name = "elastica", version, about = "Phase-field elastica flows in the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulation described by a config file.
    Run {
        config: PathBuf,
        /// Override `run.steps`.
        #[arg(long)]
        steps: Option<usize>,
        /// Override `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print a progress line every this many steps (0: never).
        #[arg(long, default_value_t = 100)]
        progress: usize,
    },
    /// Print the energy terms of a snapshot under a config's parameters.
    Energy { snapshot: PathBuf, config: PathBuf },
    /// Print zero-level-set metrics of a snapshot.
    Contour { snapshot: PathBuf },
    /// Solve for the sign field of a snapshot and print the component count estimate.
    Tvsolve {
        snapshot: PathBuf,
        config: PathBuf,
        /// Override `topology.max_iters`.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Run the built-in oracle checks, plus a dissipation check on the config's run.
    Validate {
        config: PathBuf,
        /// Also run the long flow experiments with the bundled configs.
        #[arg(long)]
        full: bool,
        /// Limit the number of flow steps taken for the config's own check.
        #[arg(long)]
        steps: Option<usize>,
    },
}

/// Errors split by exit code: 1 for failed runs and checks, 2 for bad input.
enum Failure {
    Run(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::InvalidParameter(_) | Error::InvalidCurve(_) | Error::InvalidGrid(_) => {
                Failure::Usage(e.to_string())
            }
            Error::Io { .. } | Error::Snapshot(_) | Error::Image(_) | Error::Shape { .. } => {
                Failure::Usage(e.to_string())
            }
            Error::Aborted { .. } => Failure::Run(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            config,
            steps,
            out,
            progress,
        } => run(&config, steps, out, progress),
        Command::Energy { snapshot, config } => energy(&snapshot, &config),
        Command::Contour { snapshot } => contour(&snapshot),
        Command::Tvsolve {
            snapshot,
            config,
            max_iters,
        } => tvsolve(&snapshot, &config, max_iters),
        Command::Validate { config, full, steps } => {
            let cfg = SimulationConfig::load(&config)?;
            let opts = SuiteOptions {
                full,
                config_steps: steps,
            };
            let reports = validate::run_suite(&cfg, &opts, &mut |r| println!("{r}"));
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} checks, {} failed", reports.len(), failed);
            if failed == 0 {
                Ok(())
            } else {
                Err(Failure::Run(format!("{failed} checks failed")))
            }
        }
    }
}

/// Forwards to the directory sink and prints progress.
struct Progress {
    inner: Option<DirectorySink>,
    every: usize,
    start: Instant,
}

impl TrajectorySink for Progress {
    fn record(&mut self, r: &TimeSeriesRecord) -> elastica::Result<()> {
        if self.every > 0 && r.step % self.every == 0 {
            println!(
                "step {:>6}  t {:.4e}  F {:.6}  B {:.4}  L {:.4}  T {:.4}  comps {}  ({:.1?})",
                r.step,
                r.time,
                r.energy.total,
                r.energy.b,
                r.energy.l,
                r.energy.t_bar,
                r.components,
                self.start.elapsed()
            );
        }
        match self.inner.as_mut() {
            Some(s) => s.record(r),
            None => Ok(()),
        }
    }

    fn snapshot(&mut self, s: &Snapshot) -> elastica::Result<()> {
        match self.inner.as_mut() {
            Some(d) => d.snapshot(s),
            None => Ok(()),
        }
    }
}

fn run(config: &Path, steps: Option<usize>, out: Option<PathBuf>, progress: usize) -> Result<(), Failure> {
    let mut cfg = SimulationConfig::load(config)?;
    if let Some(n) = steps {
        cfg.run.n_steps = n;
    }
    let dir = out.or_else(|| cfg.output_dir.clone());
    let domain = cfg.domain();
    let u0 = cfg.initial_field(&domain)?;
    let mut sink = Progress {
        inner: dir.as_deref().map(DirectorySink::create).transpose()?,
        every: progress,
        start: Instant::now(),
    };
    println!("{}: n = {}, {} steps", cfg.name, cfg.grid.n(), cfg.run.n_steps);
    let traj = run_simulation(&domain, &u0, &cfg.energy, &cfg.flow, &cfg.run, &mut sink)?;
    if let Some(s) = sink.inner.take() {
        s.finish()?;
    }
    let last = traj.records.last().expect("initial record");
    let halvings: usize = traj.steps.iter().map(|s| s.halvings).sum();
    let newton: usize = traj.steps.iter().map(|s| s.newton_iters).sum();
    let cg: usize = traj.steps.iter().map(|s| s.cg_iters).sum();
    let taken = traj.steps.len().max(1) as f64;
    println!(
        "done in {:.1?}: t = {:.4e}, F = {:.6}, components = {}",
        sink.start.elapsed(),
        last.time,
        last.energy.total,
        last.components,
    );
    println!(
        "per step: {:.1} Newton, {:.1} CG iterations; {halvings} step halvings",
        newton as f64 / taken,
        cg as f64 / taken
    );
    if let Some(d) = dir {
        println!("output written to {}", d.display());
    }
    Ok(())
}

fn load_field(snapshot: &Path) -> Result<(Domain, ScalarField), Failure> {
    let (_, u) = read_snapshot(snapshot)?;
    Ok((Domain::new(u.grid), u))
}

fn check_grid(cfg: &SimulationConfig, u: &ScalarField) {
    if cfg.grid != u.grid {
        eprintln!(
            "note: snapshot grid (n = {}) differs from the config's (n = {}); using the snapshot's",
            u.grid.n(),
            cfg.grid.n()
        );
    }
}

fn energy(snapshot: &Path, config: &Path) -> Result<(), Failure> {
    let cfg = SimulationConfig::load(config)?;
    let (domain, u) = load_field(snapshot)?;
    check_grid(&cfg, &u);
    let e = EnergyState::new(&domain, &cfg.energy, &u.values).breakdown();
    println!("B       {:.10}", e.b);
    println!("L       {:.10}", e.l);
    println!("T_abs   {:.10}", e.t_abs);
    println!("T_bar   {:.10}", e.t_bar);
    println!("M       {:.10}", e.m);
    println!("total   {:.10}", e.total);
    Ok(())
}

fn contour(snapshot: &Path) -> Result<(), Failure> {
    let (domain, u) = load_field(snapshot)?;
    let m = contour_metrics(&extract_contour(&domain, &u));
    println!("components      {}", m.component_count);
    println!("length          {:.10}", m.length);
    println!("turning_numbers {:?}", m.turning_numbers);
    println!("max_radius      {:.10}", m.max_radius);
    Ok(())
}

fn tvsolve(snapshot: &Path, config: &Path, max_iters: Option<usize>) -> Result<(), Failure> {
    let cfg = SimulationConfig::load(config)?;
    let (domain, u) = load_field(snapshot)?;
    check_grid(&cfg, &u);
    let mut t = cfg.run.improved.tv;
    if let Some(m) = max_iters {
        t.max_iters = m;
    }
    t.validate()?;
    let start = Instant::now();
    let sol = minimize_phi(&domain, &u, &cfg.energy, &t);
    println!("T_tilde     {:.10}", sol.t_tilde);
    println!("T_tilde/2pi {:.6}", sol.t_tilde / std::f64::consts::TAU);
    println!("objective   {:.10}", sol.objective);
    println!("dual        {:.10}", sol.dual);
    println!("gap         {:.3e}", sol.gap);
    println!("sweeps      {}", sol.iterations);
    println!("converged   {}", sol.converged);
    println!("time        {:.1?}", start.elapsed());
    Ok(())
}
