use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("direction is not unit length (norm {norm})")]
    NonUnitDirection { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("the origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("{0} is not supported for this body family")]
    Unsupported(&'static str),
    #[error("{name} = {value} is outside its admissible range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("net cardinality budget of {budget} points exceeded (delta too small)")]
    NetBudgetExceeded { budget: usize },
    #[error("covering radius violated: residual direction at distance {distance} > {delta}")]
    CoveringViolation { distance: f64, delta: f64 },
    #[error("negative deficit {deficit}: inputs are not nested")]
    NotNested { deficit: f64 },
    #[error("empty point cloud")]
    EmptyCloud,
    #[error("rejection efficiency {efficiency:e} below 1e-6")]
    LowEfficiency { efficiency: f64 },
    #[error("nonpositive centered support {value} (center not interior)")]
    NonPositiveSupport { value: f64 },
    #[error("{0}")]
    InvalidArgument(String),
}
