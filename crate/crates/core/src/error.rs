use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifold: {0}")]
    InvalidSpec(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("need at least {needed} points, cloud has {available}")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("grid needs {required} nodes, cap is {cap}")]
    GridTooLarge { required: usize, cap: usize },

    #[error("density {value} at point {point:?} exceeds the declared bound {bound}")]
    DensityBoundExceeded {
        point: Vec<f64>,
        value: f64,
        bound: f64,
    },

    #[error("root finder did not converge: {0}")]
    NoConvergence(String),

    /// The requested experiment has no meaningful limit law; maps to exit code 2.
    #[error("configuration refused: {0}")]
    Refused(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_refusal(&self) -> bool {
        matches!(self, Error::Refused(_))
    }
}
