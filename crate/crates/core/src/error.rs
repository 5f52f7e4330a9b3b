use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("scenario tree has no scenarios")]
    EmptyTree,
    #[error("scenario tree has no stages")]
    NoStages,
    #[error("stage {stage} has dimension 0")]
    ZeroStageDimension { stage: usize },
    #[error("scenario {scenario} has {found} labels, expected one per stage ({expected})")]
    LabelCount {
        scenario: usize,
        expected: usize,
        found: usize,
    },
    #[error("scenarios {first} and {second} have identical label sequences")]
    DuplicateScenario { first: usize, second: usize },
    #[error("scenario {scenario} has probability {probability}, must lie in (0, 1]")]
    NonPositiveProbability { scenario: usize, probability: f64 },
    #[error("probabilities sum to {total}, expected 1 within 1e-12")]
    BadProbabilityMass { total: f64 },
    #[error("stage index {stage} out of range for a {stages}-stage tree")]
    StageOutOfRange { stage: usize, stages: usize },
    #[error("policy shape {found:?} does not match (scenarios, dimension) = {expected:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("vector has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("step size must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("tolerance must be positive, got {0}")]
    ToleranceError(f64),
    #[error("risk level alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("invalid {what}: {reason}")]
    InvalidSpec { what: &'static str, reason: String },
    #[error("no closed-form composite resolvent for this operator/constraint pair")]
    UnsupportedComposite { scenario: Option<usize> },
    #[error("range condition violated at scenario {scenario}: ran(Id - proj_C) is not contained in U")]
    RangeConditionViolated { scenario: usize },
    #[error("expected {expected} {what} (one per scenario), found {found}")]
    SpecCount {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("epsilon must lie in (0, 1), got {0}")]
    BadEpsilon(f64),
    #[error("{what} value {value} lies outside the admissible range [{lo}, {hi}]")]
    StepOutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("block size must be at least 1")]
    BadBlockSize,
    #[error("scenario {scenario} has a non-trivial constraint; the reduced method needs C = R^d everywhere")]
    NonTrivialConstraint { scenario: usize },
    #[error("CVaR threshold deviates by {deviation} across scenarios")]
    NonConstantThreshold { deviation: f64 },
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("instance not supported by this oracle: {0}")]
    UnsupportedInstance(String),
    #[error("{count} free coordinates exceed the oracle limit of 3")]
    TooManyFreeCoordinates { count: usize },
}

impl Error {
    /// Stable variant name, used by front ends to report error categories.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyTree => "EmptyTree",
            Error::NoStages => "NoStages",
            Error::ZeroStageDimension { .. } => "ZeroStageDimension",
            Error::LabelCount { .. } => "LabelCount",
            Error::DuplicateScenario { .. } => "DuplicateScenario",
            Error::NonPositiveProbability { .. } => "NonPositiveProbability",
            Error::BadProbabilityMass { .. } => "BadProbabilityMass",
            Error::StageOutOfRange { .. } => "StageOutOfRange",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonPositiveGamma(_) => "NonPositiveGamma",
            Error::ToleranceError(_) => "ToleranceError",
            Error::BadAlpha(_) => "BadAlpha",
            Error::InvalidSpec { .. } => "InvalidSpec",
            Error::UnsupportedComposite { .. } => "UnsupportedComposite",
            Error::RangeConditionViolated { .. } => "RangeConditionViolated",
            Error::SpecCount { .. } => "SpecCount",
            Error::BadEpsilon(_) => "BadEpsilon",
            Error::StepOutOfRange { .. } => "StepOutOfRange",
            Error::BadBlockSize => "BadBlockSize",
            Error::NonTrivialConstraint { .. } => "NonTrivialConstraint",
            Error::NonConstantThreshold { .. } => "NonConstantThreshold",
            Error::BadGrid(_) => "BadGrid",
            Error::UnsupportedInstance(_) => "UnsupportedInstance",
            Error::TooManyFreeCoordinates { .. } => "TooManyFreeCoordinates",
        }
    }
}
