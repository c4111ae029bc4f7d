use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty netlist")]
    EmptyNetlist,

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("duplicate element id {0:?}")]
    DuplicateId(String),

    #[error("element {id:?}: resistance must be positive and finite, got {value}")]
    NonPositiveResistance { id: String, value: f64 },

    #[error("element {id:?}: source value must be finite, got {value}")]
    NonFiniteValue { id: String, value: f64 },

    #[error("element {0:?} connects a node to itself")]
    SelfLoop(String),

    #[error("unknown element {0:?}")]
    UnknownElement(String),

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("grid injections sum to {sum}, expected zero")]
    UnbalancedInjections { sum: f64 },

    #[error("singular system (reciprocal condition estimate {rcond:e})")]
    SingularSystem { rcond: f64 },

    #[error("sub-circuit is not well posed: {reason} (elements: {culprits:?})")]
    DegenerateSubcircuit {
        reason: String,
        culprits: Vec<String>,
    },

    #[error("constraint system is inconsistent (reciprocal condition estimate {rcond:e})")]
    ConstraintInconsistent { rcond: f64 },

    #[error("no equivalent circuit at terminals ({m}, {n}): {reason}")]
    NoEquivalent {
        m: String,
        n: String,
        reason: String,
    },

    #[error("edited circuit is ill posed: {0}")]
    EditIllPosed(String),

    #[error("invalid edit: {0}")]
    InvalidEdit(String),

    #[error("no closed-form prediction for edit: {0}")]
    UnsupportedEdit(String),
}
