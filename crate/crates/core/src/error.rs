use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Every variant maps to a stable machine-readable code through [`Error::code`],
/// which the command-line front end prints on failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("directed cycle: {}", fmt_cycle(.0))]
    Cycle(Vec<usize>),

    #[error("invalid variable table: {0}")]
    InvalidVariables(String),

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, String),

    #[error("invalid label on edge ({0}, {1}): {2}")]
    InvalidLabel(usize, usize, String),

    #[error("invalid context: {0}")]
    InvalidContext(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("value {value} out of range for variable {column} (cardinality {cardinality}) at row {row}")]
    ValueOutOfRange {
        row: usize,
        column: usize,
        value: usize,
        cardinality: usize,
    },

    #[error("kappa must lie in (0, 1], got {0}")]
    KappaOutOfRange(f64),

    #[error("equivalent sample size must be positive, got {0}")]
    EssOutOfRange(f64),

    #[error("context space of size {size} exceeds the bound {bound}")]
    ContextTooLarge { size: u128, bound: u128 },

    #[error("joint state space of size {size} exceeds the bound {bound}")]
    StateSpaceTooLarge { size: u128, bound: u128 },

    #[error("no legal move from the current graph")]
    NoLegalMove,

    #[error("approximating distribution has zero mass where the reference has {0}")]
    SupportError(f64),

    #[error("variable tables differ: {0}")]
    VariableMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn fmt_cycle(nodes: &[usize]) -> String {
    nodes
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

impl Error {
    /// Stable identifier, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Cycle(_) => "E_CYCLE",
            Error::InvalidVariables(_) => "E_VARIABLES",
            Error::InvalidEdge(..) => "E_EDGE",
            Error::InvalidLabel(..) => "E_LABEL",
            Error::InvalidContext(_) => "E_CONTEXT",
            Error::InvalidQuery(_) => "E_QUERY",
            Error::ValueOutOfRange { .. } => "E_VALUE_RANGE",
            Error::KappaOutOfRange(_) => "E_KAPPA",
            Error::EssOutOfRange(_) => "E_ESS",
            Error::ContextTooLarge { .. } => "E_CONTEXT_TOO_LARGE",
            Error::StateSpaceTooLarge { .. } => "E_STATE_SPACE",
            Error::NoLegalMove => "E_NO_MOVE",
            Error::SupportError(_) => "E_SUPPORT",
            Error::VariableMismatch(_) => "E_VARIABLE_MISMATCH",
            Error::InvalidConfig(_) => "E_CONFIG",
            Error::Parse { .. } => "E_PARSE",
            Error::InvariantViolation(_) => "E_INVARIANT",
            Error::Io(_) => "E_IO",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
