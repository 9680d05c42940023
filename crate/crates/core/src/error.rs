use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch in {context}: {len_a} vs {len_b}")]
    DimensionMismatch {
        context: &'static str,
        len_a: usize,
        len_b: usize,
    },

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(&'static str),

    #[error("KL divergence is infinite: q has zero mass where p is positive")]
    InfiniteKl,

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("discrete action index {index} out of range (n = {n})")]
    ActionOutOfRange { index: usize, n: usize },

    #[error("episode is terminal; call reset before stepping")]
    EpisodeTerminal,

    #[error("parameter {value} outside bounds [{low}, {high}]")]
    BoundsViolated { value: f64, low: f64, high: f64 },

    #[error("transition has no recorded noise (collected without GumbelRecorded mode)")]
    MissingNoise,

    #[error("loss node is not a scalar")]
    LossNotScalar,

    #[error("conjugate gradient produced a non-finite iterate at iteration {0}")]
    CgNonFinite(usize),

    #[error("oracle refuses instance: {0}")]
    OracleLimit(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("refusing to overwrite existing run output at {0}")]
    OutputExists(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
