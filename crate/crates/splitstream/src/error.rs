use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A branching law or weight vector is malformed (probabilities do not
    /// sum to one, a branch count is below two, ...).
    #[error("invalid branching law: {0}")]
    InvalidLaw(String),

    /// A splitting weight of exactly 0 or 1 makes the split degenerate.
    #[error("degenerate split: weight {weight} outside (0, 1)")]
    DegenerateSplit { weight: f64 },

    /// A splitting measure violates its invariants.
    #[error("invalid splitting measure: {0}")]
    InvalidMeasure(String),

    /// An arrival law is malformed.
    #[error("invalid arrival law: {0}")]
    InvalidArrivals(String),

    /// Closed form not defined for these parameters (use the stated limit
    /// form instead).
    #[error("closed form not applicable: {0}")]
    NotApplicable(String),

    /// Pole of the symmetric-binary constant ratio at `lambda = 1/2`.
    #[error("pole: symmetric binary ratio diverges at lambda = {lambda}")]
    Pole { lambda: f64 },

    /// Determinant has the same sign at both bracket ends; widen the bracket
    /// or raise the path count.
    #[error(
        "no sign change: det({lo}) = {det_lo:e} and det({hi}) = {det_hi:e} share a sign; \
         widen the bracket or raise mc_paths"
    )]
    NoSignChange {
        lo: f64,
        hi: f64,
        det_lo: f64,
        det_hi: f64,
    },

    /// The stability matrix is numerically singular; the requested rate is
    /// too close to the critical rate for a trustworthy solve.
    #[error("near-singular system: |det| = {det:e} below conditioning floor {floor:e}")]
    SingularNearLambdaC { det: f64, floor: f64 },

    /// The measure has no arithmetic span, so periodic fluctuations are not
    /// defined.
    #[error("measure is not arithmetic: no common span for the atom logs")]
    NotArithmetic,

    /// I/O or serialization problem while reading a description file.
    #[error("config error: {0}")]
    Config(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Config(e.to_string())
    }
}
