//! Scenario-decomposition solvers for multi-stage stochastic variational
//! inequalities with nonanticipativity constraints.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerics:
//!
//! - [`tree`]: finite scenario trees and the stage-wise information partitions.
//! - [`policy`]: decision policies, the expectation scalar product and the
//!   nonanticipativity projectors.
//! - [`operators`]: the catalog of per-scenario operators, costs, constraint
//!   sets and residual subspaces, with their resolvents and projectors.
//! - [`solver`]: the block-activated projective splitting iteration, the
//!   reduced variant for unconstrained problems and the progressive hedging
//!   baseline.
//! - [`cvar`]: risk-averse problems with a CVaR objective, lifted onto an
//!   augmented equilibrium problem.
//! - [`oracle`]: slow brute-force reference solvers used to cross-check the
//!   rest of the crate.
//!
//! File formats, the command-line interface and multi-threaded execution live
//! in the `stochsplit` crate.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cvar;
mod error;
pub mod operators;
pub mod oracle;
pub mod policy;
pub mod solver;
pub mod tree;

pub use error::{Error, Result};
pub use operators::{ConstraintSpec, CostSpec, OperatorSpec, SubspaceSpec};
pub use policy::{AugmentedPolicy, Policy};
pub use solver::{ActivationSchedule, Problem, Solution, SolverConfig, SolverState, Status};
pub use tree::{Scenario, ScenarioTree};

/// Bisection tolerance on the θ-interval width used by the CVaR and
/// `max{f, 0}` proximity operators.
pub const DEFAULT_BISECTION_TOL: f64 = 1e-12;

/// Hard cap on bisection steps; 200 halvings exhaust `f64` long before.
pub const MAX_BISECTION_STEPS: usize = 200;
