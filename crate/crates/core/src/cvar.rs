//! Multi-stage programs with a CVaR objective,
//!
//! ```text
//! minimize cvar_α(f(·, x(·)))  over x ∈ V with x(ξ) ∈ C(ξ),
//! ```
//!
//! solved by adding the CVaR threshold `y` as an extra first-stage decision.
//! The augmented problem has operators `∂𝐟(ξ, ·)` with
//! `𝐟(ξ, y, x) = y + max{f(ξ, x) − y, 0} / (1 − α)`, constraints `R × C(ξ)`
//! and nonanticipativity `W × V`, where `W` holds the constant thresholds.
//! Since `y` joins the first stage, whose information class is all of `Ξ`,
//! projecting onto the augmented `V` averages `y` over every scenario.
//!
//! The threshold is stored as the leading coordinate of the augmented
//! first-stage block, and therefore of the whole augmented decision vector.
//!
//! The constraint qualification (some nonanticipative `x` with each `x(ξ)` in
//! the relative interior of `C(ξ)`) is assumed, not checked.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::operators::{check_alpha, ConstraintSpec, CostSpec, OperatorSpec};
use crate::policy::{project_nonanticipative, AugmentedPolicy, Policy};
use crate::solver::{self, Problem, ScenarioExecutor, Sequential, Solution, SolverConfig};
use crate::tree::ScenarioTree;

/// Largest spread of the recovered threshold across scenarios.
pub const THRESHOLD_SPREAD_TOL: f64 = 1e-6;

/// `cvar_α` of a discrete loss: `min_y y + E[max{loss − y, 0}] / (1 − α)`.
///
/// The minimum of this piecewise-linear convex function sits at an
/// α-quantile; the smallest loss whose cumulative probability reaches `α` is
/// used.
pub fn cvar_value(tree: &ScenarioTree, alpha: f64, losses: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    if losses.len() != tree.len() {
        return Err(Error::DimensionMismatch {
            expected: tree.len(),
            found: losses.len(),
        });
    }
    let mut order: Vec<usize> = (0..losses.len()).collect();
    order.sort_by(|&i, &j| losses[i].total_cmp(&losses[j]));
    let mut cumulative = 0.0;
    let mut threshold = losses[order[order.len() - 1]];
    for &i in &order {
        cumulative += tree.probability(i);
        if cumulative >= alpha {
            threshold = losses[i];
            break;
        }
    }
    let tail: f64 = tree
        .probabilities()
        .zip(losses)
        .map(|(p, l)| p * (l - threshold).max(0.0))
        .sum();
    Ok(threshold + tail / (1.0 - alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvarProblem {
    tree: ScenarioTree,
    alpha: f64,
    costs: Vec<CostSpec>,
    constraints: Vec<ConstraintSpec>,
}

impl CvarProblem {
    pub fn new(tree: ScenarioTree, alpha: f64, costs: Vec<CostSpec>, constraints: Vec<ConstraintSpec>) -> Result<Self> {
        check_alpha(alpha)?;
        for (what, found) in [("costs", costs.len()), ("constraints", constraints.len())] {
            if found != tree.len() {
                return Err(Error::SpecCount {
                    what,
                    expected: tree.len(),
                    found,
                });
            }
        }
        for (f, c) in costs.iter().zip(&constraints) {
            f.validate()?;
            if f.dim() != tree.dim() {
                return Err(Error::DimensionMismatch {
                    expected: tree.dim(),
                    found: f.dim(),
                });
            }
            c.validate(tree.dim())?;
        }
        Ok(Self {
            tree,
            alpha,
            costs,
            constraints,
        })
    }

    pub fn tree(&self) -> &ScenarioTree {
        &self.tree
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn costs(&self) -> &[CostSpec] {
        &self.costs
    }

    pub fn constraints(&self) -> &[ConstraintSpec] {
        &self.constraints
    }

    /// Same instance at another risk level.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, ..self.clone() })
    }

    /// Per-scenario losses `f(ξ, x(ξ))`.
    pub fn losses(&self, x: &Policy) -> Result<Vec<f64>> {
        x.check_shape(&self.tree)?;
        Ok(self.costs.iter().zip(x.rows()).map(|(f, row)| f.value(row)).collect())
    }

    /// `cvar_α(f(·, x(·)))`.
    pub fn objective(&self, x: &Policy) -> Result<f64> {
        cvar_value(&self.tree, self.alpha, &self.losses(x)?)
    }
}

/// The lifted equilibrium problem together with the original instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedProblem {
    pub base: Problem,
    pub original: CvarProblem,
}

impl AugmentedProblem {
    /// Splits an augmented decision vector into the threshold and the
    /// original decision.
    pub fn split<'a>(&self, row: &'a [f64]) -> (f64, &'a [f64]) {
        (row[0], &row[1..])
    }

    /// Inverse of [`AugmentedProblem::split`].
    pub fn join(&self, y: f64, x: &[f64]) -> Vec<f64> {
        let mut row = Vec::with_capacity(x.len() + 1);
        row.push(y);
        row.extend_from_slice(x);
        row
    }
}

/// Builds the augmented problem: stage dimensions `[d₁ + 1, d₂, …]`, the
/// same scenarios, `∂𝐟` operators, `R × C(ξ)` constraints and `U = R^{d+1}`.
pub fn augment(cp: &CvarProblem) -> Result<AugmentedProblem> {
    let mut dims = cp.tree.stage_dims().to_vec();
    dims[0] += 1;
    let tree = cp.tree.with_stage_dims(&dims)?;
    let operators = cp
        .costs
        .iter()
        .map(|f| OperatorSpec::CvarAugmented {
            cost: f.clone(),
            alpha: cp.alpha,
        })
        .collect();
    let constraints = cp
        .constraints
        .iter()
        .map(|c| ConstraintSpec::Lifted(Box::new(c.clone())))
        .collect();
    let base = Problem::with_full_subspaces(tree, operators, constraints)?;
    Ok(AugmentedProblem {
        base,
        original: cp.clone(),
    })
}

/// Projection of `(y, x)` onto `W × V`: the probability-weighted mean of `y`
/// in every scenario, and `proj_V x`.
pub fn project_augmented(tree: &ScenarioTree, p: &AugmentedPolicy) -> Result<AugmentedPolicy> {
    let base = project_nonanticipative(tree, &p.base)?;
    let mean: f64 = tree.probabilities().zip(&p.scalar).map(|(w, y)| w * y).sum();
    AugmentedPolicy::new(vec![mean; p.scalar.len()], base)
}

#[derive(Debug, Clone)]
pub struct CvarSolution {
    pub x_bar: Policy,
    /// Common CVaR threshold (value-at-risk) across scenarios.
    pub y_bar: f64,
    pub objective: f64,
    pub inner: Solution,
}

pub fn solve_cvar(cp: &CvarProblem, config: &SolverConfig) -> Result<CvarSolution> {
    solve_cvar_with(cp, config, &Sequential)
}

pub fn solve_cvar_with<E: ScenarioExecutor>(cp: &CvarProblem, config: &SolverConfig, exec: &E) -> Result<CvarSolution> {
    let aug = augment(cp)?;
    let sol = solver::solve_with(&aug.base, config, exec)?;
    extract_solution(&aug, sol)
}

/// Maps an augmented solution back to `(x̄, ȳ)` and evaluates the objective.
pub fn extract_solution(aug: &AugmentedProblem, sol: Solution) -> Result<CvarSolution> {
    sol.x_bar.check_shape(aug.base.tree())?;
    let mut rows = Vec::with_capacity(sol.x_bar.scenarios());
    let mut thresholds = Vec::with_capacity(sol.x_bar.scenarios());
    for row in sol.x_bar.rows() {
        let (y, x) = aug.split(row);
        thresholds.push(y);
        rows.push(x.to_vec());
    }
    let x_bar = Policy::from_rows(&rows)?;
    let y_bar = thresholds[0];
    let deviation = thresholds.iter().map(|y| (y - y_bar).abs()).fold(0.0, f64::max);
    if deviation > THRESHOLD_SPREAD_TOL {
        return Err(Error::NonConstantThreshold { deviation });
    }
    let objective = aug.original.objective(&x_bar)?;
    Ok(CvarSolution {
        x_bar,
        y_bar,
        objective,
        inner: sol,
    })
}
