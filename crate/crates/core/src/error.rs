use thiserror::Error;

/// Errors raised by the library.
///
/// The variants are grouped by how a caller is expected to react: domain and
/// precondition errors mean the inputs are wrong, capacity and budget errors
/// mean the inputs are fine but exceed a configured limit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    /// A datum handed to the pluriharmonic completion still carries energy in
    /// the mixed quadrants.
    #[error("datum is not pluriharmonic: mixed-quadrant energy {energy:e}")]
    NotPluriharmonic { energy: f64 },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("invalid input format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by limits (table sizes, area or time budgets)
    /// rather than by invalid inputs.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity(_) | Error::Budget(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
