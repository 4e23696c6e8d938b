use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operation requires dichotomic outcomes: {0}")]
    NotDichotomic(String),
    #[error("behaviour is signalling (max violation {violation:.3e} > tol {tol:.3e})")]
    Signalling { violation: f64, tol: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("enumeration cap exceeded: need {needed} candidates, cap is {cap}")]
    CapExceeded { needed: u128, cap: u128 },
    #[error("LP failure: {0}")]
    LpFailure(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("certification failed at stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
