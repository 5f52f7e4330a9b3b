//! Block-activated projective splitting for
//!
//! ```text
//! find x ∈ V, v* ∈ V⊥ such that −v*(ξ) ∈ A(ξ, x(ξ)) + N_{C(ξ)} x(ξ) for all ξ,
//! ```
//!
//! together with the reduced variant for unconstrained problems and the
//! progressive hedging baseline.
//!
//! Each iteration evaluates `J_{γA(ξ,·)}`, `proj_{C(ξ)}` and `proj_{U(ξ)}`
//! separately for the scenarios in the active block, then moves the primal
//! and dual iterates `(x, x*, v*)` onto a separating half-space built from the
//! latest (possibly stale) per-scenario points. `x` stays in `V` and `v*` in
//! `V⊥` at every iteration.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operators::{validate_range_condition, ConstraintSpec, OperatorSpec, SubspaceSpec};
use crate::policy::{norm_sq_unchecked, project_complement_unchecked, project_nonanticipative_unchecked, Policy};
use crate::tree::ScenarioTree;

mod exec;
mod hedging;
mod schedule;

pub use exec::{ScenarioExecutor, Sequential};
pub use hedging::{progressive_hedging_run, progressive_hedging_solve};
pub use schedule::ActivationSchedule;

/// A validated instance: one operator, constraint set and residual subspace
/// per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    tree: ScenarioTree,
    operators: Vec<OperatorSpec>,
    constraints: Vec<ConstraintSpec>,
    subspaces: Vec<SubspaceSpec>,
}

impl Problem {
    /// Validates every spec against the tree dimension and checks
    /// `ran(Id − proj_{C(ξ)}) ⊂ U(ξ)` for each scenario.
    pub fn new(
        tree: ScenarioTree,
        operators: Vec<OperatorSpec>,
        constraints: Vec<ConstraintSpec>,
        subspaces: Vec<SubspaceSpec>,
    ) -> Result<Self> {
        let count = tree.len();
        for (what, found) in [
            ("operators", operators.len()),
            ("constraints", constraints.len()),
            ("subspaces", subspaces.len()),
        ] {
            if found != count {
                return Err(Error::SpecCount {
                    what,
                    expected: count,
                    found,
                });
            }
        }
        let d = tree.dim();
        for s in 0..count {
            operators[s].validate()?;
            if operators[s].dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: operators[s].dim(),
                });
            }
            constraints[s].validate(d)?;
            subspaces[s].validate(d)?;
            if !validate_range_condition(&constraints[s], &subspaces[s], d) {
                return Err(Error::RangeConditionViolated { scenario: s });
            }
        }
        Ok(Self {
            tree,
            operators,
            constraints,
            subspaces,
        })
    }

    /// Same as [`Problem::new`] with `U(ξ) = R^d` everywhere.
    pub fn with_full_subspaces(
        tree: ScenarioTree,
        operators: Vec<OperatorSpec>,
        constraints: Vec<ConstraintSpec>,
    ) -> Result<Self> {
        let n = tree.len();
        Self::new(tree, operators, constraints, vec![SubspaceSpec::Full; n])
    }

    pub fn tree(&self) -> &ScenarioTree {
        &self.tree
    }

    pub fn operators(&self) -> &[OperatorSpec] {
        &self.operators
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    pub fn subspaces(&self) -> &[SubspaceSpec] {
        &self.subspaces
    }
}

/// Per-scenario step sizes `γ_{ξ,n}` or `μ_{ξ,n}`.
#[derive(Debug, Clone, PartialEq)]
pub enum StepRule {
    Constant(f64),
    /// One constant per scenario.
    PerScenario(Vec<f64>),
    /// A periodic sequence in `n`, shared by all scenarios.
    Cyclic(Vec<f64>),
}

impl StepRule {
    pub fn value(&self, scenario: usize, n: usize) -> f64 {
        match self {
            StepRule::Constant(v) => *v,
            StepRule::PerScenario(v) => v[scenario],
            StepRule::Cyclic(v) => v[n % v.len()],
        }
    }

    fn validate(&self, what: &'static str, scenarios: usize, lo: f64, hi: f64) -> Result<()> {
        let values: &[f64] = match self {
            StepRule::Constant(v) => core::slice::from_ref(v),
            StepRule::PerScenario(v) => {
                if v.len() != scenarios {
                    return Err(Error::SpecCount {
                        what,
                        expected: scenarios,
                        found: v.len(),
                    });
                }
                v
            }
            StepRule::Cyclic(v) => {
                if v.is_empty() {
                    return Err(Error::SpecCount {
                        what,
                        expected: 1,
                        found: 0,
                    });
                }
                v
            }
        };
        check_range(what, values, lo, hi)
    }
}

/// Relaxation parameters `λ_n`.
#[derive(Debug, Clone, PartialEq)]
pub enum Relaxation {
    Constant(f64),
    Cyclic(Vec<f64>),
}

impl Relaxation {
    pub fn value(&self, n: usize) -> f64 {
        match self {
            Relaxation::Constant(v) => *v,
            Relaxation::Cyclic(v) => v[n % v.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Bound parameter: steps lie in `[ε, 1/ε]`, relaxations in `[ε, 2 − ε]`.
    pub epsilon: f64,
    pub gamma: StepRule,
    pub mu: StepRule,
    pub lambda: Relaxation,
    pub schedule: ActivationSchedule,
    /// Stop once the KKT residual drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Record every k-th iteration in the trace (the last one is always kept).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            gamma: StepRule::Constant(1.0),
            mu: StepRule::Constant(1.0),
            lambda: Relaxation::Constant(1.0),
            schedule: ActivationSchedule::Full,
            tol: 1e-8,
            max_iter: 100_000,
            trace_every: 1,
        }
    }
}

impl SolverConfig {
    /// Checks every parameter against its admissible range. Out-of-range
    /// values are errors, never clamped.
    pub fn validate(&self, scenarios: usize) -> Result<()> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::BadEpsilon(eps));
        }
        self.gamma.validate("gamma", scenarios, eps, 1.0 / eps)?;
        self.mu.validate("mu", scenarios, eps, 1.0 / eps)?;
        match &self.lambda {
            Relaxation::Constant(v) => check_range("lambda", core::slice::from_ref(v), eps, 2.0 - eps)?,
            Relaxation::Cyclic(v) => {
                if v.is_empty() {
                    return Err(Error::SpecCount {
                        what: "lambda",
                        expected: 1,
                        found: 0,
                    });
                }
                check_range("lambda", v, eps, 2.0 - eps)?
            }
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::ToleranceError(self.tol));
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidSpec {
                what: "solver config",
                reason: "trace_every must be at least 1".into(),
            });
        }
        self.schedule.validate()
    }
}

fn check_range(what: &'static str, values: &[f64], lo: f64, hi: f64) -> Result<()> {
    match values.iter().find(|v| !(**v >= lo && **v <= hi)) {
        None => Ok(()),
        Some(&value) => Err(Error::StepOutOfRange { what, value, lo, hi }),
    }
}

/// The full iterate `(x_n, x*_n, v*_n)` with the persisted per-scenario
/// points `(a_n, a*_n, b_n, b*_n, u_n)`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub n: usize,
    pub x: Policy,
    pub x_star: Policy,
    pub v_star: Policy,
    pub a: Policy,
    pub a_star: Policy,
    pub b: Policy,
    pub b_star: Policy,
    pub u: Policy,
    /// Iteration at which each scenario was last activated.
    pub last_activated: Vec<Option<usize>>,
    rng: ChaCha8Rng,
}

/// The per-scenario points computed when a scenario is activated.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioUpdate {
    pub a: Vec<f64>,
    pub a_star: Vec<f64>,
    pub b: Vec<f64>,
    pub b_star: Vec<f64>,
    pub u: Vec<f64>,
}

/// Half-space projection data of one coordination step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub kappa: f64,
    pub tau: f64,
    pub theta: f64,
}

/// One trace entry. For progressive hedging `kappa`, `tau` and `theta` are
/// not defined and are recorded as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Number of completed iterations.
    pub n: usize,
    pub kappa: f64,
    pub tau: f64,
    pub theta: f64,
    pub residual: f64,
    pub active: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIter,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x_bar: Policy,
    /// The multiplier of the constraint sets; for progressive hedging the one
    /// implied by the last composite resolvent.
    pub x_star_bar: Policy,
    pub v_star_bar: Policy,
    pub status: Status,
    pub iterations: usize,
    pub residual: f64,
    pub trace: Vec<IterationRecord>,
}

/// Builds the starting state, projecting the optional initial points onto
/// `V`, `U` and `V⊥` respectively.
pub fn init_state(
    problem: &Problem,
    config: &SolverConfig,
    x0: Option<&Policy>,
    x0_star: Option<&Policy>,
    v0_star: Option<&Policy>,
) -> Result<SolverState> {
    let tree = &problem.tree;
    let zeros = Policy::zeros_for(tree);
    for p in [x0, x0_star, v0_star].into_iter().flatten() {
        p.check_shape(tree)?;
    }
    let x = x0.map_or_else(|| zeros.clone(), |p| project_nonanticipative_unchecked(tree, p));
    let v_star = v0_star.map_or_else(|| zeros.clone(), |p| project_complement_unchecked(tree, p));
    let mut x_star = zeros.clone();
    if let Some(p) = x0_star {
        for s in 0..tree.len() {
            let row = problem.subspaces[s].project(p.row(s))?;
            x_star.row_mut(s).copy_from_slice(&row);
        }
    }
    Ok(SolverState {
        n: 0,
        x,
        x_star,
        v_star,
        a: zeros.clone(),
        a_star: zeros.clone(),
        b: zeros.clone(),
        b_star: zeros.clone(),
        u: zeros,
        last_activated: vec![None; tree.len()],
        rng: ChaCha8Rng::seed_from_u64(config.schedule.seed()),
    })
}

/// Resolvent, projector and subspace evaluations for one scenario.
pub fn scenario_update(
    state: &SolverState,
    problem: &Problem,
    scenario: usize,
    gamma: f64,
    mu: f64,
) -> Result<ScenarioUpdate> {
    let x = state.x.row(scenario);
    let x_star = state.x_star.row(scenario);
    let v_star = state.v_star.row(scenario);

    let l_star: Vec<f64> = x_star.iter().zip(v_star).map(|(p, q)| p + q).collect();
    let shifted: Vec<f64> = x.iter().zip(&l_star).map(|(x, l)| x - gamma * l).collect();
    let a = problem.operators[scenario].resolvent(gamma, &shifted)?;
    let a_star: Vec<f64> = x
        .iter()
        .zip(&a)
        .zip(&l_star)
        .map(|((x, a), l)| (x - a) / gamma - l)
        .collect();

    let pushed: Vec<f64> = x.iter().zip(x_star).map(|(x, s)| x + mu * s).collect();
    let b = problem.constraints[scenario].project(&pushed)?;
    let b_star: Vec<f64> = x_star
        .iter()
        .zip(x.iter().zip(&b))
        .map(|(s, (x, b))| s + (x - b) / mu)
        .collect();

    let gap: Vec<f64> = b.iter().zip(&a).map(|(b, a)| b - a).collect();
    let u = problem.subspaces[scenario].project(&gap)?;
    Ok(ScenarioUpdate {
        a,
        a_star,
        b,
        b_star,
        u,
    })
}

/// `κ = ⟨x, t*⟩ − ⟨a, a*⟩ + ⟨u, x*⟩ − ⟨b, b*⟩ + ⟨t, v*⟩`, evaluated as
///
/// ```text
/// κ = ⟨x − a, a* + x* + v*⟩ + ⟨x − b, b* − x*⟩,
/// ```
///
/// which is equal for `x ∈ V`, `v* ∈ V⊥`, `x* ∈ U`. Near a solution both
/// factors are small, whereas the five-term form cancels O(1) products and
/// loses κ to rounding once it falls below about `1e-16 ‖x‖²`.
fn separation(state: &SolverState, tree: &ScenarioTree) -> f64 {
    let mut kappa = 0.0;
    for s in 0..tree.len() {
        let (x, xs, vs) = (state.x.row(s), state.x_star.row(s), state.v_star.row(s));
        let (a, a_star, b, b_star) = (state.a.row(s), state.a_star.row(s), state.b.row(s), state.b_star.row(s));
        let mut local = 0.0;
        for i in 0..x.len() {
            local += (x[i] - a[i]) * (a_star[i] + xs[i] + vs[i]) + (x[i] - b[i]) * (b_star[i] - xs[i]);
        }
        kappa += tree.probability(s) * local;
    }
    kappa
}

/// Projects `(x, x*, v*)` onto the half-space built from the stored
/// per-scenario points and advances `n`.
pub fn coordination_step(state: &mut SolverState, problem: &Problem, config: &SolverConfig) -> Step {
    let tree = &problem.tree;
    let mut sum = state.a_star.clone();
    sum.axpy(1.0, &state.b_star).expect("state shapes are fixed at init");
    let t_star = project_nonanticipative_unchecked(tree, &sum);
    let mut t = project_complement_unchecked(tree, &state.a);
    t.scale(-1.0);

    let tau = norm_sq_unchecked(tree, &t_star) + norm_sq_unchecked(tree, &state.u) + norm_sq_unchecked(tree, &t);
    let (kappa, theta) = if tau > 0.0 {
        let kappa = separation(state, tree);
        (kappa, config.lambda.value(state.n) * kappa.max(0.0) / tau)
    } else {
        (0.0, 0.0)
    };

    if theta > 0.0 {
        state.x.axpy(-theta, &t_star).expect("fixed shapes");
        state.x_star.axpy(-theta, &state.u).expect("fixed shapes");
        state.v_star.axpy(-theta, &t).expect("fixed shapes");
    }
    state.n += 1;
    Step { kappa, tau, theta }
}

/// One full iteration on the calling thread.
pub fn iterate(state: &mut SolverState, problem: &Problem, config: &SolverConfig) -> Result<IterationRecord> {
    iterate_with(state, problem, config, &Sequential)
}

/// One full iteration: pick the block, refresh its scenarios (other
/// scenarios keep their previous points) and coordinate.
pub fn iterate_with<E: ScenarioExecutor>(
    state: &mut SolverState,
    problem: &Problem,
    config: &SolverConfig,
    exec: &E,
) -> Result<IterationRecord> {
    let n = state.n;
    let active = config.schedule.select(n, &state.last_activated, &mut state.rng);
    let updates = {
        let snapshot: &SolverState = state;
        exec.map(&active, |s| {
            scenario_update(snapshot, problem, s, config.gamma.value(s, n), config.mu.value(s, n))
        })
    };
    for (&s, update) in active.iter().zip(updates) {
        let update = update?;
        state.a.row_mut(s).copy_from_slice(&update.a);
        state.a_star.row_mut(s).copy_from_slice(&update.a_star);
        state.b.row_mut(s).copy_from_slice(&update.b);
        state.b_star.row_mut(s).copy_from_slice(&update.b_star);
        state.u.row_mut(s).copy_from_slice(&update.u);
        state.last_activated[s] = Some(n);
    }
    let step = coordination_step(state, problem, config);
    Ok(IterationRecord {
        n: state.n,
        kappa: step.kappa,
        tau: step.tau,
        theta: step.theta,
        residual: f64::NAN,
        active,
    })
}

/// Fixed-point residual of the coupled inclusions
///
/// ```text
/// x(ξ) = J_{A(ξ,·)}(x(ξ) − x*(ξ) − v*(ξ)),  x(ξ) = proj_{C(ξ)}(x(ξ) + x*(ξ)),
/// x ∈ V,  v* ∈ V⊥,
/// ```
///
/// measured in the `H` norm. It vanishes exactly at solutions.
pub fn kkt_residual(problem: &Problem, x: &Policy, x_star: &Policy, v_star: &Policy) -> Result<f64> {
    let tree = &problem.tree;
    for p in [x, x_star, v_star] {
        p.check_shape(tree)?;
    }
    let mut total = 0.0;
    for s in 0..tree.len() {
        let (xs, ps, vs) = (x.row(s), x_star.row(s), v_star.row(s));
        let shifted: Vec<f64> = xs.iter().zip(ps.iter().zip(vs)).map(|(x, (p, v))| x - p - v).collect();
        let j = problem.operators[s].resolvent(1.0, &shifted)?;
        let pushed: Vec<f64> = xs.iter().zip(ps).map(|(x, p)| x + p).collect();
        let c = problem.constraints[s].project(&pushed)?;
        let local: f64 = xs
            .iter()
            .zip(j.iter().zip(&c))
            .map(|(x, (j, c))| (x - j) * (x - j) + (x - c) * (x - c))
            .sum();
        total += tree.probability(s) * local;
    }
    total += norm_sq_unchecked(tree, &project_complement_unchecked(tree, x));
    total += norm_sq_unchecked(tree, &project_nonanticipative_unchecked(tree, v_star));
    Ok(libm::sqrt(total))
}

/// Runs the iteration from the zero state until the KKT residual reaches
/// `config.tol` or `config.max_iter` iterations have run.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<Solution> {
    solve_with(problem, config, &Sequential)
}

pub fn solve_with<E: ScenarioExecutor>(problem: &Problem, config: &SolverConfig, exec: &E) -> Result<Solution> {
    config.validate(problem.tree.len())?;
    let state = init_state(problem, config, None, None, None)?;
    run(state, problem, config, exec, |_, _| {})
}

/// Drives an existing state, calling `observer` after every iteration with
/// the new state and its record.
pub fn run<E, O>(
    mut state: SolverState,
    problem: &Problem,
    config: &SolverConfig,
    exec: &E,
    mut observer: O,
) -> Result<Solution>
where
    E: ScenarioExecutor,
    O: FnMut(&SolverState, &IterationRecord),
{
    config.validate(problem.tree.len())?;
    let mut trace = Vec::new();
    let mut status = Status::MaxIter;
    let mut residual = kkt_residual(problem, &state.x, &state.x_star, &state.v_star)?;
    for _ in 0..config.max_iter {
        let mut record = iterate_with(&mut state, problem, config, exec)?;
        residual = kkt_residual(problem, &state.x, &state.x_star, &state.v_star)?;
        record.residual = residual;
        observer(&state, &record);
        let done = residual <= config.tol;
        if done || record.n % config.trace_every == 0 || record.n == config.max_iter {
            trace.push(record);
        }
        if done {
            status = Status::Converged;
            break;
        }
    }
    Ok(Solution {
        x_bar: state.x,
        x_star_bar: state.x_star,
        v_star_bar: state.v_star,
        status,
        iterations: state.n,
        residual,
        trace,
    })
}

/// The variant for problems without constraint sets: `U(ξ) = {0}`,
/// `x*_0 = 0` and `μ ≡ 1`, so `u_n = x*_n = 0` throughout and each iteration
/// only evaluates resolvents.
pub fn solve_reduced(problem: &Problem, config: &SolverConfig) -> Result<Solution> {
    solve_reduced_with(problem, config, &Sequential)
}

pub fn solve_reduced_with<E: ScenarioExecutor>(problem: &Problem, config: &SolverConfig, exec: &E) -> Result<Solution> {
    solve_reduced_run(problem, config, exec, |_, _| {})
}

/// [`solve_reduced_with`] with an observer, as in [`run`].
pub fn solve_reduced_run<E, O>(problem: &Problem, config: &SolverConfig, exec: &E, mut observer: O) -> Result<Solution>
where
    E: ScenarioExecutor,
    O: FnMut(&SolverState, &IterationRecord),
{
    if let Some(scenario) = problem
        .constraints
        .iter()
        .position(|c| *c != ConstraintSpec::WholeSpace)
    {
        return Err(Error::NonTrivialConstraint { scenario });
    }
    let reduced = Problem {
        subspaces: vec![SubspaceSpec::Zero; problem.tree.len()],
        ..problem.clone()
    };
    let config = SolverConfig {
        mu: StepRule::Constant(1.0),
        ..config.clone()
    };
    config.validate(reduced.tree.len())?;
    let state = init_state(&reduced, &config, None, None, None)?;
    run(state, &reduced, &config, exec, |state, record| {
        assert!(
            state.x_star.is_zero() && state.u.is_zero(),
            "reduced iteration left the zero subspace"
        );
        observer(state, record);
    })
}
