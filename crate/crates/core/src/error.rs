use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical quantity outside its admissible range.
    #[error("{quantity} must be {requirement}, got {value}")]
    Domain {
        quantity: &'static str,
        requirement: &'static str,
        value: f64,
    },

    /// An inconsistent or unusable configuration (grid sizes, spans, sweep specs).
    #[error("configuration error: {0}")]
    Config(String),

    /// A config file that could not be parsed.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown preset `{name}` (valid: {})", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error("unknown sweep axis `{name}` (valid: {})", valid.join(", "))]
    UnknownAxis { name: String, valid: Vec<String> },

    /// A numerical precondition of an operation was violated by its inputs.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("path overlap undefined: {0}")]
    UndefinedOverlap(String),

    #[error("visibility undefined: baseline is zero")]
    UndefinedVisibility,

    #[error("closed-form oracle supports only the double-Gaussian amplitude model")]
    UnsupportedModel,

    #[error("sweep row {row}: {source}")]
    SweepRow {
        row: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::Domain {
            quantity,
            requirement,
            value,
        }
    }

    /// True for errors caused by what the user asked for rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::UnknownPreset { .. }
            | Error::UnknownAxis { .. }
            | Error::Domain { .. } => true,
            Error::SweepRow { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
