use thiserror::Error;

/// Errors raised by the matrix constructors, compile passes, verifier and simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode index {index} out of range for {modes} modes")]
    ModeOutOfRange { index: usize, modes: usize },

    #[error("invalid mode pair ({j}, {k})")]
    InvalidModePair { j: usize, k: usize },

    #[error("matrix is not unitary: max deviation {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not symplectic: max deviation {deviation:e}")]
    NotSymplectic { deviation: f64 },

    #[error("invalid Bogoliubov pair: max deviation {deviation:e}")]
    InvalidBogoliubov { deviation: f64 },

    #[error("matrix is not symmetric: max deviation {deviation:e}")]
    NotSymmetric { deviation: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("singular measurement basis on arm {arm}: sin(theta_b - theta_a) = {sin:e}")]
    SingularBasis { arm: Arm, sin: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed component list at element {index}: {message}")]
    MalformedList { index: usize, message: String },

    #[error("internal consistency failure at {context}: residual {residual:e}")]
    Internal { context: String, residual: f64 },

    #[error("structural error{}: {message}", site.map(|s| format!(" at site {s}")).unwrap_or_default())]
    Structural { site: Option<i64>, message: String },

    #[error("deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    ToleranceExceeded { deviation: f64, tolerance: f64 },

    #[error("lattice configuration error: {0}")]
    Configuration(String),

    #[error("pulse {0} is outside the simulated window")]
    OutOfWindow(String),

    #[error("state error: {0}")]
    State(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn structural(site: Option<i64>, message: impl Into<String>) -> Self {
        Error::Structural {
            site,
            message: message.into(),
        }
    }

    /// True for malformed inputs (wiring, parsing, list shape) as opposed to
    /// numeric validation failures.
    pub fn is_structural(&self) -> bool {
        matches!(
            self,
            Error::Structural { .. }
                | Error::MalformedList { .. }
                | Error::Json(_)
                | Error::DimensionMismatch { .. }
        )
    }
}

/// Which teleportation arm of a macronode an angle pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    B,
    D,
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arm::B => f.write_str("B"),
            Arm::D => f.write_str("D"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
