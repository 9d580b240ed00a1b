use thiserror::Error;

/// Errors raised by the geometric pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("metric degenerate (not positive definite); surface not space-like or chart invalid")]
    MetricDegenerate,

    #[error("cluster ambiguity: neighbouring values separated by {gap:e}")]
    ClusterAmbiguity { gap: f64 },

    #[error("degenerate orthogonal complement")]
    DegenerateComplement,

    #[error("complement has wrong causal type (squared norm {norm:e})")]
    WrongCausalType { norm: f64 },

    #[error("strategy `exact` requested but the immersion supplies no exact jets")]
    MissingExactJet,

    #[error("jet order {0} exceeds the supported maximum")]
    OrderTooHigh(usize),

    #[error("point too close to the chart boundary along axis {axis}")]
    NearBoundary { axis: usize },

    #[error("point outside the chart domain along axis {axis}")]
    OutsideDomain { axis: usize },

    #[error("non-finite evaluation")]
    NonFinite,

    #[error("non-regular (umbilic) point: e^(2 tau) = {value:e}")]
    NonRegularPoint { value: f64 },

    #[error("normal is not time-like; surface is not space-like")]
    NotSpaceLike,

    #[error("ambient constraint violated (residual {residual:e})")]
    AmbientConstraint { residual: f64 },

    #[error("ambient constraint mismatch: {0}")]
    AmbientMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("light-cone lift fails the null condition (residual {residual:e})")]
    LiftNotNull { residual: f64 },

    #[error("light-cone lift is not canonical (residual {residual:e})")]
    LiftNotCanonical { residual: f64 },

    #[error("A and B are not simultaneously block-diagonal (off-block entry {offblock:e})")]
    EigenAlignment { offblock: f64 },

    #[error("jet order {have} insufficient, {need} required")]
    InsufficientOrder { have: usize, need: usize },

    #[error("evaluation unsupported at this point: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
