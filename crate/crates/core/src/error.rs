use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite policy coordinates ({c}, {p})")]
    NonFinite { c: f64, p: f64 },

    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{measure} requires {requirement}, got c = {c}")]
    Domain {
        measure: &'static str,
        requirement: &'static str,
        c: f64,
    },

    #[error("length mismatch: expected {expected} weights, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{expected} weights cannot be used where {wanted} weights are required")]
    WeightKind {
        expected: &'static str,
        wanted: &'static str,
    },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),

    #[error("policy collection is empty")]
    EmptyCollection,

    #[error("duplicate policy id `{0}`")]
    DuplicatePolicy(String),

    #[error("degenerate sample for `{policy}`: {reason}")]
    DegenerateSample { policy: String, reason: String },

    #[error("insufficient resamples for `{policy}`: need at least {need}, have {have}")]
    InsufficientResamples {
        policy: String,
        need: usize,
        have: usize,
    },

    #[error("correlation {0} is too close to +/-1 for the quadratic-form root")]
    CorrelationGuard(f64),

    #[error("shape matrix is not symmetric positive semidefinite: {0}")]
    NotPositiveSemidefinite(String),

    #[error("critical value must be non-negative, got {0}")]
    NegativeCriticalValue(f64),

    #[error("no resampled estimate of `{0}` falls inside the confidence region")]
    EmptyIntersection(String),

    #[error("product region mixes rectangle and ellipse geometry")]
    MixedGeometry,

    #[error("aggregate projection requires constant weights, got data-dependent `{0}` weights")]
    DataDependentWeights(&'static str),

    #[error("every resampled value of the functional is undefined")]
    AllUndefined,

    #[error("point estimate has an undefined MVPF")]
    UndefinedEstimate,

    #[error("interval endpoint {value} lies outside [-2, 2]")]
    OutOfRange { value: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
