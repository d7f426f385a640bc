use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalised (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("basis label `{0}` is not unique")]
    DuplicateLabel(String),
    #[error("label count {labels} does not match dimension {dim}")]
    LabelCount { labels: usize, dim: usize },
    #[error("basis vectors are not orthonormal (worst overlap deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("matrix is not a proper rotation (orthogonality residual {residual:e}, det {det})")]
    NotRotation { residual: f64, det: f64 },
    #[error("uniform sample {0} is outside [0, 1)")]
    UniformOutOfRange(f64),
    #[error("measurement outcome has vanishing probability {probability:e}")]
    DegenerateOutcome { probability: f64 },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid subsystem: {0}")]
    InvalidSubsystem(&'static str),
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("keys are not sifted on the same pair indices")]
    MisalignedKeys,
    #[error("no trials recorded for setting pair {0}")]
    ZeroTrials(&'static str),
    #[error("eavesdropping leaves the Wigner value unchanged; no threshold exists")]
    ZeroSlope,
    #[error("eavesdropper information on the double channel is zero")]
    ZeroInformation,
    #[error("single-channel induced error is zero; the error ratio is undefined")]
    ZeroReferenceError,
    #[error("strategy `{0}` has no closed-form analytics")]
    UnsupportedStrategy(&'static str),
}
