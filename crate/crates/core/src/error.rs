use thiserror::Error;

/// Errors produced by the model, geometry and diagnostics layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An input contained NaN or an infinity.
    #[error("non-finite input in {context}")]
    NonFinite { context: &'static str },

    /// A parameter violated its domain restriction (M ≤ 0, I < 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Sign triple does not satisfy s1 = s2*s3, so the closed-form
    /// expressions do not solve the unperturbed equations.
    #[error("inadmissible heteroclinic sign triple ({0}, {1}, {2})")]
    InadmissibleBranch(i8, i8, i8),

    /// Jacobi residual asked for a repeated coordinate index.
    #[error("coordinate triple ({0}, {1}, {2}) has a repeated index")]
    RepeatedIndex(usize, usize, usize),

    /// Coordinate index outside 0..dim.
    #[error("coordinate index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),

    /// A bracket evaluation needed a gradient but the field has none and
    /// the finite-difference fallback was disabled.
    #[error("field '{0}' has no analytic gradient and finite differences are disabled")]
    GradientUnavailable(String),

    /// Event refinement was asked to bracket a crossing that is not there.
    #[error("no sign change of the event function on the given step")]
    NoSignChange,

    /// Event function vanishes identically on the step: no isolated crossing.
    #[error("event function is degenerate (identically zero) on the given step")]
    DegenerateEvent,

    /// Configuration (CLI/file) problem.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
