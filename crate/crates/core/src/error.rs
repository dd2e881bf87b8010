use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("atom {index}: multiplier a must be > 0, got {value}")]
    NonPositiveMultiplier { index: usize, value: f64 },

    #[error("atom {index}: weight must be in (0, 1], got {value}")]
    InvalidWeight { index: usize, value: f64 },

    #[error("atom {index}: non-finite component")]
    NonFiniteAtom { index: usize },

    #[error("weights sum to {sum}, which is not within 1e-12 of 1")]
    WeightSum { sum: f64 },

    #[error("threshold c must be present on every atom or on none")]
    MixedThreshold,

    #[error("operation needs the threshold c on every atom")]
    MissingThreshold,

    #[error("parametric driver: {0}")]
    InvalidParametric(String),

    #[error("analytic criteria need an atomic measure; parametric drivers are simulation-only")]
    ParametricNotSupported,

    #[error("E log A = {mean_log_a} is not negative; the recursion does not contract on average")]
    NotContracting { mean_log_a: f64 },

    #[error("no atom has a > 1, so E A^s = 1 has no positive root")]
    NoPositiveRoot,

    #[error("moment function overflowed before a bracket was found (s = {s})")]
    Overflow { s: f64 },

    #[error("a = 1 and b = {b}: the map is a translation and has no fixed point")]
    NoFixedPoint { b: f64 },

    #[error("a = 1 and b = 0: every point is fixed")]
    IdentityMap,

    #[error("measure is degenerate: every map fixes x* = {fixed_point}")]
    Degenerate { fixed_point: f64 },

    #[error("non-finite value at step {step}")]
    NonFinite { step: u64 },

    #[error("no stopping condition reached within {steps} steps")]
    MaxStepsExceeded { steps: u64 },

    #[error("simulation config: {0}")]
    InvalidConfig(String),

    #[error("family {family} is not usable with this measure: {reason}")]
    FamilyMismatch { family: String, reason: String },

    #[error("samples are empty")]
    EmptySamples,

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("grid must be strictly increasing")]
    UnsortedGrid,

    #[error("need at least {needed} positive samples, found {found}")]
    TooFewPositive { needed: usize, found: usize },

    #[error("Hill denominator is zero (tied order statistics)")]
    ZeroHillDenominator,

    #[error("empirical tail is zero at t = {t}; largest usable t is {largest_usable:?}")]
    ZeroTail { t: f64, largest_usable: Option<f64> },

    #[error("need at least {needed} points in the quantile band, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
