//! The JSON problem file.
//!
//! ```json
//! {
//!   "stages": [1, 1],
//!   "scenarios": [
//!     {"labels": ["a", "u"], "probability": 0.5},
//!     {"labels": ["b", "w"], "probability": 0.5}
//!   ],
//!   "operators": [
//!     {"grad_separable_quadratic": {"q": [1, 1], "c": [0, 0.2]}},
//!     {"grad_separable_quadratic": {"q": [1, 1], "c": [1, 0.8]}}
//!   ],
//!   "constraints": [
//!     {"box": {"lo": [0, 0], "hi": [1, "inf"]}},
//!     "whole_space"
//!   ],
//!   "subspaces": ["full", {"coordinates": [0]}]
//! }
//! ```
//!
//! `subspaces` defaults to `"full"` everywhere. A CVaR instance replaces
//! `operators` by `"cvar": {"alpha": 0.5, "costs": [...]}`; it takes no
//! `subspaces`. Unknown keys are rejected.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stochsplit_core::cvar::CvarProblem;
use stochsplit_core::{ConstraintSpec, CostSpec, OperatorSpec, Problem, ScenarioTree, SubspaceSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub stages: Vec<usize>,
    pub scenarios: Vec<ScenarioRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<Vec<OperatorRecord>>,
    pub constraints: Vec<ConstraintRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspaces: Option<Vec<SubspaceRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cvar: Option<CvarRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRecord {
    pub labels: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvarRecord {
    pub alpha: f64,
    pub costs: Vec<CostRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CostRecord {
    Affine {
        c: Vec<f64>,
        #[serde(default)]
        r: f64,
    },
    SeparableQuadratic {
        q: Vec<f64>,
        c: Vec<f64>,
        #[serde(default)]
        r: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorRecord {
    DiagonalAffine { a: Vec<f64>, b: Vec<f64> },
    GradSeparableQuadratic { q: Vec<f64>, c: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintRecord {
    WholeSpace,
    Box { lo: Vec<Bound>, hi: Vec<Bound> },
    Ball { center: Vec<f64>, radius: f64 },
    Halfspace { normal: Vec<f64>, offset: f64 },
    Hyperplane { normal: Vec<f64>, offset: f64 },
}

/// A box bound: a number, or `"inf"` / `"-inf"` for a free side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Finite(f64),
    Infinite(Infinity),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Positive,
    #[serde(rename = "-inf")]
    Negative,
}

impl Bound {
    fn value(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Infinite(Infinity::Positive) => f64::INFINITY,
            Bound::Infinite(Infinity::Negative) => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SubspaceRecord {
    Full,
    Zero,
    /// 0-based axes spanning the subspace.
    Coordinates(Vec<usize>),
}

/// A problem file that failed to load.
#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Parse(serde_json::Error),
    /// Structurally valid JSON that is not a valid instance.
    Invalid(stochsplit_core::Error),
    /// The file holds the wrong kind of instance for the command.
    Kind(String),
}

impl LoadError {
    pub fn kind(&self) -> &'static str {
        match self {
            LoadError::Io(_) => "IoError",
            LoadError::Parse(_) => "ParseError",
            LoadError::Invalid(e) => e.kind(),
            LoadError::Kind(_) => "WrongProblemKind",
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "{e}"),
            LoadError::Parse(e) => write!(f, "{e}"),
            LoadError::Invalid(e) => write!(f, "{e}"),
            LoadError::Kind(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<stochsplit_core::Error> for LoadError {
    fn from(e: stochsplit_core::Error) -> Self {
        LoadError::Invalid(e)
    }
}

/// A loaded and validated instance.
#[derive(Debug, Clone)]
pub enum Instance {
    Equilibrium(Problem),
    Cvar(CvarProblem),
}

impl Instance {
    pub fn tree(&self) -> &ScenarioTree {
        match self {
            Instance::Equilibrium(p) => p.tree(),
            Instance::Cvar(cp) => cp.tree(),
        }
    }
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, LoadError> {
        serde_json::from_str(text).map_err(LoadError::Parse)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        Self::from_json(&fs::read_to_string(path).map_err(LoadError::Io)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn tree(&self) -> Result<ScenarioTree, LoadError> {
        let raw = self.scenarios.iter().map(|s| (s.labels.clone(), s.probability));
        Ok(ScenarioTree::new(raw, &self.stages)?)
    }

    /// Builds and validates the instance the file describes.
    pub fn instance(&self) -> Result<Instance, LoadError> {
        let tree = self.tree()?;
        let constraints: Vec<ConstraintSpec> = self.constraints.iter().map(ConstraintRecord::to_spec).collect();
        match (&self.operators, &self.cvar) {
            (Some(ops), None) => {
                let operators = ops.iter().map(OperatorRecord::to_spec).collect();
                let subspaces = match &self.subspaces {
                    Some(us) => us.iter().map(SubspaceRecord::to_spec).collect(),
                    None => vec![SubspaceSpec::Full; tree.len()],
                };
                Ok(Instance::Equilibrium(Problem::new(
                    tree,
                    operators,
                    constraints,
                    subspaces,
                )?))
            }
            (None, Some(cvar)) => {
                if self.subspaces.is_some() {
                    return Err(LoadError::Kind("a cvar instance takes no \"subspaces\"".into()));
                }
                let costs = cvar.costs.iter().map(CostRecord::to_spec).collect();
                Ok(Instance::Cvar(CvarProblem::new(tree, cvar.alpha, costs, constraints)?))
            }
            (Some(_), Some(_)) => Err(LoadError::Kind("\"cvar\" replaces \"operators\"; give only one".into())),
            (None, None) => Err(LoadError::Kind("missing \"operators\" or \"cvar\"".into())),
        }
    }
}

impl CostRecord {
    pub fn to_spec(&self) -> CostSpec {
        match self {
            CostRecord::Affine { c, r } => CostSpec::Affine { c: c.clone(), r: *r },
            CostRecord::SeparableQuadratic { q, c, r } => CostSpec::SeparableQuadratic {
                q: q.clone(),
                c: c.clone(),
                r: *r,
            },
        }
    }
}

impl OperatorRecord {
    pub fn to_spec(&self) -> OperatorSpec {
        match self {
            OperatorRecord::DiagonalAffine { a, b } => OperatorSpec::DiagonalAffine {
                a: a.clone(),
                b: b.clone(),
            },
            OperatorRecord::GradSeparableQuadratic { q, c } => OperatorSpec::GradSeparableQuadratic {
                q: q.clone(),
                c: c.clone(),
            },
        }
    }
}

impl ConstraintRecord {
    pub fn to_spec(&self) -> ConstraintSpec {
        match self {
            ConstraintRecord::WholeSpace => ConstraintSpec::WholeSpace,
            ConstraintRecord::Box { lo, hi } => ConstraintSpec::Box {
                lo: lo.iter().map(|b| b.value()).collect(),
                hi: hi.iter().map(|b| b.value()).collect(),
            },
            ConstraintRecord::Ball { center, radius } => ConstraintSpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            ConstraintRecord::Halfspace { normal, offset } => ConstraintSpec::Halfspace {
                normal: normal.clone(),
                offset: *offset,
            },
            ConstraintRecord::Hyperplane { normal, offset } => ConstraintSpec::Hyperplane {
                normal: normal.clone(),
                offset: *offset,
            },
        }
    }
}

impl SubspaceRecord {
    pub fn to_spec(&self) -> SubspaceSpec {
        match self {
            SubspaceRecord::Full => SubspaceSpec::Full,
            SubspaceRecord::Zero => SubspaceSpec::Zero,
            SubspaceRecord::Coordinates(axes) => SubspaceSpec::Coordinates(axes.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "stages": [1, 1],
        "scenarios": [
            {"labels": ["a", "u"], "probability": 0.5},
            {"labels": ["b", "w"], "probability": 0.5}
        ],
        "operators": [
            {"grad_separable_quadratic": {"q": [1, 1], "c": [0, 0.2]}},
            {"diagonal_affine": {"a": [1, 1], "b": [-1, -0.8]}}
        ],
        "constraints": [
            {"box": {"lo": [0, "-inf"], "hi": [1, "inf"]}},
            "whole_space"
        ],
        "subspaces": [{"coordinates": [0]}, "full"]
    }"#;

    #[test]
    fn parses_sample() {
        let file = ProblemFile::from_json(SAMPLE).unwrap();
        let Instance::Equilibrium(p) = file.instance().unwrap() else {
            panic!("expected an equilibrium file")
        };
        assert_eq!(p.tree().len(), 2);
        assert_eq!(
            p.constraints()[0],
            ConstraintSpec::Box {
                lo: vec![0.0, f64::NEG_INFINITY],
                hi: vec![1.0, f64::INFINITY]
            }
        );
        assert_eq!(p.subspaces()[0], SubspaceSpec::Coordinates(vec![0]));
    }

    #[test]
    fn round_trips() {
        let file = ProblemFile::from_json(SAMPLE).unwrap();
        assert_eq!(ProblemFile::from_json(&file.to_json()).unwrap(), file);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = SAMPLE.replacen("\"stages\"", "\"extra\": 1, \"stages\"", 1);
        assert!(matches!(ProblemFile::from_json(&text), Err(LoadError::Parse(_))));
        let text = SAMPLE.replace("\"probability\": 0.5}", "\"probability\": 0.5, \"weight\": 2}");
        assert!(matches!(ProblemFile::from_json(&text), Err(LoadError::Parse(_))));
    }

    #[test]
    fn reports_core_errors_by_kind() {
        let text = SAMPLE.replacen("0.5", "0.6", 1);
        let err = ProblemFile::from_json(&text).unwrap().instance().unwrap_err();
        assert_eq!(err.kind(), "BadProbabilityMass");

        let text = SAMPLE.replace(r#"[{"coordinates": [0]}, "full"]"#, r#"["zero", "full"]"#);
        let err = ProblemFile::from_json(&text).unwrap().instance().unwrap_err();
        assert_eq!(err.kind(), "RangeConditionViolated");
        assert!(err.to_string().contains("range condition violated"));
    }

    #[test]
    fn cvar_section_replaces_operators() {
        let text = r#"{
            "stages": [1],
            "scenarios": [{"labels": ["s"], "probability": 1.0}],
            "constraints": [{"box": {"lo": [0], "hi": [1]}}],
            "cvar": {"alpha": 0.5, "costs": [{"separable_quadratic": {"q": [1], "c": [0.3]}}]}
        }"#;
        assert!(matches!(
            ProblemFile::from_json(text).unwrap().instance().unwrap(),
            Instance::Cvar(_)
        ));
        let both = text.replace("\"cvar\"", "\"operators\": [], \"cvar\"");
        assert_eq!(
            ProblemFile::from_json(&both).unwrap().instance().unwrap_err().kind(),
            "WrongProblemKind"
        );
    }
}
