use thiserror::Error;

/// Crate-wide error type. Every fallible operation states which variants it
/// can produce; preconditions are validated eagerly so failures carry the
/// offending value rather than a NaN surfacing three calls later.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (supported: 2 and 3)")]
    UnsupportedDimension(usize),

    #[error("quadrature order {0} too small (need at least {1})")]
    InvalidOrder(usize, usize),

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("radial grid empty or inconsistent with the requested interval: {0}")]
    EmptyGrid(String),

    #[error("cap radius {0} outside (0, 2]")]
    InvalidCapRadius(f64),

    #[error("exponent {0} invalid here: {1}")]
    InvalidExponent(f64, &'static str),

    #[error("delta {delta} outside (0, {total}]")]
    InvalidDelta { delta: f64, total: f64 },

    #[error("field provides neither an analytic derivative nor a finite-difference step")]
    MissingGradient,

    #[error("step-function grids are inconsistent: {0}")]
    InconsistentGrid(String),

    #[error("trace exponent outside the admissible range: {0}")]
    ExponentOutOfRange(String),

    #[error("need at least {need} entries, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("degenerate test-function family: {0}")]
    DegenerateFamily(String),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("coefficient is not uniformly coercive (min value {0})")]
    NonCoercive(f64),

    #[error("exponent pair outside the admissible set: {0}")]
    InvalidExponentPair(String),

    #[error("invalid samples: {0}")]
    InvalidSamples(String),
}

pub type Result<T> = std::result::Result<T, Error>;
