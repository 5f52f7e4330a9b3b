//! Problem files, solution files, CSV traces and the `stochsplit` command
//! line on top of `stochsplit-core`.

pub mod cli;
pub mod format;
pub mod parallel;
pub mod solution;
pub mod trace;

pub use format::{Instance, LoadError, ProblemFile};
pub use parallel::RayonExecutor;
pub use solution::SolutionFile;
