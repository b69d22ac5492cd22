use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("set {index} has {size} elements: set exceeds r = {r}")]
    SetExceedsR { index: usize, size: usize, r: usize },

    #[error("set {index} is empty")]
    EmptySet { index: usize },

    #[error("element {element} out of range for universe of size {n}")]
    ElementOutOfRange { element: usize, n: usize },

    #[error("element {element} repeated inside a set")]
    RepeatedElement { element: usize },

    #[error("unknown element name {0:?}")]
    UnknownName(String),

    #[error("duplicate sets: members {first} and {second} are equal")]
    DuplicateSet { first: usize, second: usize },

    #[error("alpha kind `{kind}` requires {what}, which the instance does not provide")]
    MissingAnnotation { kind: &'static str, what: &'static str },

    #[error("annotation `{what}` has length {got}, expected {expected}")]
    AnnotationLength { what: &'static str, got: usize, expected: usize },

    #[error("distances are not a metric: {0}")]
    MetricViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("oracle refused: {0}")]
    OracleBudget(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
