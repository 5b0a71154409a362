use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("region escapes the sampled carrier: {0}")]
    OutsideCarrier(String),

    #[error("duplicate point in input set: {0:?}")]
    DuplicatePoint(Vec<i64>),

    #[error("missing arm-probability estimate: {0}")]
    MissingPi(String),

    #[error("missing constant {0}")]
    MissingConstant(String),

    #[error("duplicate key: {0}")]
    DuplicateKey(String),

    #[error("event is not in the increasing-event catalog: {0}")]
    NotIncreasing(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidLattice(_) => "invalid_lattice",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::OutsideCarrier(_) => "outside_carrier",
            Error::DuplicatePoint(_) => "duplicate_point",
            Error::MissingPi(_) => "missing_pi",
            Error::MissingConstant(_) => "missing_constant",
            Error::DuplicateKey(_) => "duplicate_key",
            Error::NotIncreasing(_) => "not_increasing",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
