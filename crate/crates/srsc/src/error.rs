//! Crate-wide error type.

/// Convenience alias used by every fallible operation of the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the toolkit.
///
/// The variants split into two groups that callers (notably the CLI) treat
/// differently: *operational* failures (I/O, parsing, integration breakdown)
/// and *mathematical* findings (the curve fails a hypothesis, a method does
/// not apply to the given structure). [`Error::is_hypothesis`] distinguishes
/// the groups.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Expression or file syntax error, with a byte offset into the source.
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// Frame definition rejected by validation.
    #[error("invalid frame: {0}")]
    Frame(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Numerical integration failed (non-finite state, step underflow, ...).
    #[error("integration failed: {0}")]
    Integration(String),

    /// A control violates the admissibility constraint `1 + v1_zero_mean > α`.
    #[error("control not admissible: {0}")]
    Admissibility(String),

    /// Invalid grid or discretization parameters.
    #[error("invalid grid: {0}")]
    Grid(String),

    /// The differential of the endpoint map is surjective at the tolerance:
    /// the reference curve is not singular, so no annihilating covector exists.
    #[error("curve is not singular at this tolerance (corank 0)")]
    NotSingular,

    /// Corank two or higher is outside the scope of the toolkit.
    #[error("corank {0} >= 2 is out of scope (corank-one structures only)")]
    CorankTooHigh(usize),

    /// A verified mathematical hypothesis fails (e.g. the Legendre quantity
    /// loses positivity where positivity is required to continue).
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),

    /// The requested method does not apply to the given structure
    /// (e.g. closed-form wedge indicators on a non-4-dimensional frame).
    #[error("method not applicable: {0}")]
    MethodInapplicable(String),

    /// Degenerate geometry detected (e.g. constraint matrix loses row rank).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    /// Any other numerical failure.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True when the error reports a mathematical finding about the input
    /// structure rather than an operational failure. The CLI maps hypothesis
    /// findings to exit code 2 and operational failures to exit code 1.
    pub fn is_hypothesis(&self) -> bool {
        matches!(
            self,
            Error::NotSingular
                | Error::CorankTooHigh(_)
                | Error::Hypothesis(_)
                | Error::MethodInapplicable(_)
                | Error::Degenerate(_)
        )
    }
}
