use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A lattice or scenario description that cannot be built.
    #[error("configuration error: {0}")]
    Config(String),

    /// Strict config parsing failed at a known position.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// A config value parsed but is semantically invalid.
    #[error("invalid value for `{key}`: {message}")]
    Semantic { key: String, message: String },

    #[error("exact integer overflow while computing term {index}")]
    Overflow { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("eigensolver failed on a {rows}x{cols} matrix (residual {residual:e})")]
    NumericalFailure {
        rows: usize,
        cols: usize,
        residual: f64,
    },

    #[error(
        "branch tracking ambiguous in t' interval [{lo}, {hi}] (overlap {overlap:.3}); refine the grid there"
    )]
    TrackingAmbiguity { lo: f64, hi: f64, overlap: f64 },

    #[error("no sign change of Im E in bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error(
        "branch leaves the imaginary axis at t' = {at} (|Re E| = {re:e}); exceptional point nearby"
    )]
    EpInterference { at: f64, re: f64 },

    #[error("spectrum has no (E, -E*) pairing within {tol:e}; worst offenders: {}", format_offenders(.offenders))]
    SymmetryViolation {
        tol: f64,
        offenders: Vec<(usize, f64)>,
    },

    /// A built geometry failed its own structural check.
    #[error("internal consistency error: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_offenders(offenders: &[(usize, f64)]) -> String {
    offenders
        .iter()
        .map(|(i, d)| format!("mode {i} (distance {d:e})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn semantic(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Semantic {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Machine-readable category used for CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Syntax { .. } => "syntax",
            Error::Semantic { .. } => "semantic",
            Error::Overflow { .. } => "overflow",
            Error::Domain(_) => "domain",
            Error::Precondition(_) => "precondition",
            Error::NumericalFailure { .. } => "numerical_failure",
            Error::TrackingAmbiguity { .. } => "tracking_ambiguity",
            Error::Bracket { .. } => "bracket",
            Error::EpInterference { .. } => "ep_interference",
            Error::SymmetryViolation { .. } => "symmetry_violation",
            Error::Geometry(_) => "geometry",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
