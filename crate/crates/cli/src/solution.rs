//! The JSON solution file written by `solve` and `solve-cvar`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stochsplit_core::cvar::CvarSolution;
use stochsplit_core::policy::is_nonanticipative;
use stochsplit_core::{Policy, ScenarioTree, Solution, Status};

/// Relative gap under which a stored `x_bar` counts as nonanticipative.
pub const REVALIDATE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub method: String,
    pub status: StatusRecord,
    pub iterations: usize,
    pub residual: f64,
    /// One row per scenario, in file order.
    pub x_bar: Vec<Vec<f64>>,
    pub x_star_bar: Vec<Vec<f64>>,
    pub v_star_bar: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvar: Option<CvarRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusRecord {
    Converged,
    MaxIter,
}

impl From<Status> for StatusRecord {
    fn from(s: Status) -> Self {
        match s {
            Status::Converged => StatusRecord::Converged,
            Status::MaxIter => StatusRecord::MaxIter,
        }
    }
}

/// Threshold, risk level and objective of a CVaR run. `x_star_bar` and
/// `v_star_bar` then live on the augmented space, threshold first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvarRecord {
    pub alpha: f64,
    pub y_bar: f64,
    pub objective: f64,
}

impl SolutionFile {
    pub fn from_solution(method: &str, sol: &Solution) -> Self {
        Self {
            method: method.to_owned(),
            status: sol.status.into(),
            iterations: sol.iterations,
            residual: sol.residual,
            x_bar: sol.x_bar.clone().into_rows(),
            x_star_bar: sol.x_star_bar.clone().into_rows(),
            v_star_bar: sol.v_star_bar.clone().into_rows(),
            cvar: None,
        }
    }

    pub fn from_cvar(alpha: f64, sol: &CvarSolution) -> Self {
        Self {
            x_bar: sol.x_bar.clone().into_rows(),
            cvar: Some(CvarRecord {
                alpha,
                y_bar: sol.y_bar,
                objective: sol.objective,
            }),
            ..Self::from_solution("block", &sol.inner)
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("solution files serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        fs::write(path, self.to_json())
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        Ok(Self::from_json(&fs::read_to_string(path)?)?)
    }

    /// Checks that `x_bar` fits `tree` and is nonanticipative.
    pub fn validate_against(&self, tree: &ScenarioTree) -> stochsplit_core::Result<()> {
        let x = Policy::from_rows(&self.x_bar)?;
        x.check_shape(tree)?;
        if !is_nonanticipative(tree, &x, REVALIDATE_TOL)? {
            return Err(stochsplit_core::Error::InvalidSpec {
                what: "solution",
                reason: "x_bar is not nonanticipative".into(),
            });
        }
        Ok(())
    }
}
