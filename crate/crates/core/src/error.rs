use thiserror::Error;

/// Errors surfaced by the exact set algebra, the system constructors, and
/// the probe machinery. Messages name the violated invariant.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// Two operands do not live over the same space.
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    /// Structurally malformed input (interval order, out-of-range index, ...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A system descriptor violates one of its construction invariants.
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The operation is not supported for this system class.
    #[error("capability: {0}")]
    Capability(String),

    /// An exactness certificate could not be obtained within the budget.
    #[error("budget exhausted: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
