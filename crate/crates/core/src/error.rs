use thiserror::Error;

/// Partial progress of a coupled run that hit its step cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartialRun {
    pub steps: u64,
    pub sites_seen: usize,
    pub sites: usize,
    pub disagreements: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index {index} out of range (size {size})")]
    OutOfRange { index: usize, size: usize },
    #[error("no coalescence within cap of {cap} steps ({} of {} sites seen, {} disagreements)", partial.sites_seen, partial.sites, partial.disagreements)]
    NoCoalescence { cap: u64, partial: PartialRun },
    #[error("state space too large: {sites} sites exceeds the limit of {limit}")]
    StateSpaceTooLarge { sites: usize, limit: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("optimizer did not converge after {iterations} iterations (best {best:?}, objective {value})")]
    NoConvergence {
        iterations: usize,
        best: Vec<f64>,
        value: f64,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
