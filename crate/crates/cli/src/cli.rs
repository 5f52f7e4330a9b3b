//! Argument parsing and the three subcommands.
//!
//! Exit codes: 0 converged (or valid), 1 input or configuration error,
//! 2 iteration cap reached.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stochsplit_core::cvar::{augment, extract_solution, CvarProblem};
use stochsplit_core::operators::validate_range_condition;
use stochsplit_core::solver::{
    init_state, progressive_hedging_run, run, solve_reduced_run, IterationRecord, Relaxation, StepRule,
};
use stochsplit_core::{ActivationSchedule, Problem, Solution, SolverConfig, Status};

use crate::format::{Instance, LoadError, ProblemFile};
use crate::parallel::RayonExecutor;
use crate::solution::SolutionFile;
use crate::trace::write_trace;

#[derive(Debug, Parser)]
#[command(
    name = "stochsplit",
    version,
    about = "Scenario-decomposition solvers for multistage stochastic problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a problem file, then print a summary.
    Validate { path: PathBuf },
    /// Solve an equilibrium problem.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Block)]
        method: Method,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Solve a CVaR problem through the lifted equilibrium problem.
    SolveCvar {
        path: PathBuf,
        /// Override the risk level in the file.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[command(flatten)]
        opts: SolveOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Block-activated projective splitting.
    Block,
    /// Progressive hedging (closed-form composite resolvents only).
    Ph,
    /// Projective splitting without constraint sets.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleKind {
    Full,
    RoundRobin,
    SeededRandom,
}

#[derive(Debug, Clone, Args)]
pub struct SolveOpts {
    #[arg(long, value_enum, default_value_t = ScheduleKind::Full)]
    pub schedule: ScheduleKind,
    #[arg(long, default_value_t = 1)]
    pub block_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Window for forced activation; defaults to the number of scenarios.
    #[arg(long)]
    pub cover_window: Option<usize>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1)]
    pub trace_every: usize,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub solution_out: Option<PathBuf>,
    /// Worker threads for the per-scenario updates.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Record real elapsed times in the trace instead of zeros.
    #[arg(long)]
    pub wall_clock: bool,
}

impl SolveOpts {
    pub fn config(&self, scenarios: usize) -> SolverConfig {
        let schedule = match self.schedule {
            ScheduleKind::Full => ActivationSchedule::Full,
            ScheduleKind::RoundRobin => ActivationSchedule::RoundRobin {
                block_size: self.block_size,
            },
            ScheduleKind::SeededRandom => ActivationSchedule::SeededRandom {
                block_size: self.block_size,
                cover_window: self.cover_window.unwrap_or(scenarios),
                seed: self.seed,
            },
        };
        SolverConfig {
            epsilon: self.epsilon,
            gamma: StepRule::Constant(self.gamma),
            mu: StepRule::Constant(self.mu),
            lambda: Relaxation::Constant(self.lambda),
            schedule,
            tol: self.tol,
            max_iter: self.max_iter,
            trace_every: self.trace_every,
        }
    }
}

/// A failure reported as `{kind}: {message}` with exit code 1.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<stochsplit_core::Error> for Failure {
    fn from(e: stochsplit_core::Error) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        kind: "IoError",
        message: format!("{}: {e}", path.display()),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}: {}", f.kind, f.message);
            ExitCode::from(1)
        }
    }
}

pub fn execute(command: &Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Validate { path } => validate(path),
        Command::Solve { path, method, opts } => solve(path, *method, opts),
        Command::SolveCvar { path, alpha, opts } => solve_cvar(path, *alpha, opts),
    }
}

fn validate(path: &Path) -> Result<ExitCode, Failure> {
    let file = ProblemFile::load(path)?;
    let instance = file.instance()?;
    let tree = instance.tree();
    println!("scenarios: {}", tree.len());
    println!("stages: {}", tree.stages());
    println!("stage dims: {:?}", tree.stage_dims());
    println!("dimension: {}", tree.dim());
    let counts: Vec<usize> = (0..tree.stages())
        .map(|k| tree.equivalence_classes(k).map_or(0, <[_]>::len))
        .collect();
    println!("classes per stage: {counts:?}");
    match &instance {
        Instance::Equilibrium(p) => {
            let ok = p
                .constraints()
                .iter()
                .zip(p.subspaces())
                .filter(|(c, u)| validate_range_condition(c, u, tree.dim()))
                .count();
            println!("range condition: {ok}/{} scenarios ok", tree.len());
        }
        Instance::Cvar(cp) => println!("cvar alpha: {}", cp.alpha()),
    }
    Ok(ExitCode::SUCCESS)
}

fn equilibrium(path: &Path) -> Result<Problem, Failure> {
    match ProblemFile::load(path)?.instance()? {
        Instance::Equilibrium(p) => Ok(p),
        Instance::Cvar(_) => Err(LoadError::Kind("file holds a cvar instance; use solve-cvar".into()).into()),
    }
}

/// Elapsed milliseconds per iteration, or zeros without `--wall-clock`.
struct Clock {
    start: Option<Instant>,
    marks: Vec<f64>,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Self {
            start: enabled.then(Instant::now),
            marks: Vec::new(),
        }
    }

    fn mark(&mut self, record: &IterationRecord) {
        if let Some(start) = self.start {
            self.marks.resize(record.n + 1, 0.0);
            self.marks[record.n] = start.elapsed().as_secs_f64() * 1e3;
        }
    }

    fn at(&self, n: usize) -> f64 {
        self.marks.get(n).copied().unwrap_or(0.0)
    }
}

fn executor(opts: &SolveOpts) -> Result<RayonExecutor, Failure> {
    if opts.threads == 0 {
        return Err(Failure {
            kind: "InvalidSpec",
            message: "--threads must be at least 1".into(),
        });
    }
    RayonExecutor::new(opts.threads).map_err(|e| Failure {
        kind: "ThreadPoolError",
        message: e.to_string(),
    })
}

fn solve(path: &Path, method: Method, opts: &SolveOpts) -> Result<ExitCode, Failure> {
    let problem = equilibrium(path)?;
    let config = opts.config(problem.tree().len());
    config.validate(problem.tree().len())?;
    let exec = executor(opts)?;
    let mut clock = Clock::new(opts.wall_clock);
    let mut sol = match method {
        Method::Block => {
            let state = init_state(&problem, &config, None, None, None)?;
            run(state, &problem, &config, &exec, |_, r| clock.mark(r))?
        }
        Method::Reduced => solve_reduced_run(&problem, &config, &exec, |_, r| clock.mark(r))?,
        Method::Ph => progressive_hedging_run(&problem, opts.gamma, opts.tol, opts.max_iter, |r| clock.mark(r))?,
    };
    if method == Method::Ph {
        let last = sol.iterations;
        sol.trace.retain(|r| r.n % opts.trace_every == 0 || r.n == last);
    }
    let name = match method {
        Method::Block => "block",
        Method::Ph => "ph",
        Method::Reduced => "reduced",
    };
    finish(&sol, SolutionFile::from_solution(name, &sol), opts, &clock)
}

fn solve_cvar(path: &Path, alpha: Option<f64>, opts: &SolveOpts) -> Result<ExitCode, Failure> {
    let mut cp: CvarProblem = match ProblemFile::load(path)?.instance()? {
        Instance::Cvar(cp) => cp,
        Instance::Equilibrium(_) => return Err(LoadError::Kind("file has no \"cvar\" section".into()).into()),
    };
    if let Some(alpha) = alpha {
        cp = cp.with_alpha(alpha)?;
    }
    let aug = augment(&cp)?;
    let config = opts.config(cp.tree().len());
    config.validate(cp.tree().len())?;
    let exec = executor(opts)?;
    let mut clock = Clock::new(opts.wall_clock);
    let state = init_state(&aug.base, &config, None, None, None)?;
    let sol = run(state, &aug.base, &config, &exec, |_, r| clock.mark(r))?;
    let out = extract_solution(&aug, sol)?;
    println!("objective: {}", out.objective);
    println!("threshold: {}", out.y_bar);
    finish(&out.inner, SolutionFile::from_cvar(cp.alpha(), &out), opts, &clock)
}

fn finish(sol: &Solution, file: SolutionFile, opts: &SolveOpts, clock: &Clock) -> Result<ExitCode, Failure> {
    if let Some(path) = &opts.trace_out {
        let out = File::create(path).map_err(|e| io_failure(path, e))?;
        write_trace(BufWriter::new(out), &sol.trace, |n| clock.at(n)).map_err(|e| io_failure(path, e))?;
    }
    if let Some(path) = &opts.solution_out {
        file.write(path).map_err(|e| io_failure(path, e))?;
    }
    let status = match sol.status {
        Status::Converged => "converged",
        Status::MaxIter => "max_iter",
    };
    println!("status: {status}");
    println!("iterations: {}", sol.iterations);
    println!("residual: {:e}", sol.residual);
    Ok(match sol.status {
        Status::Converged => ExitCode::SUCCESS,
        Status::MaxIter => ExitCode::from(2),
    })
}
