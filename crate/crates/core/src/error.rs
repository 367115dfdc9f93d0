use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed matching: {0}")]
    MalformedMatching(String),
    #[error("boundary index {index} out of range (surface has {count} boundaries)")]
    BoundaryOutOfRange { index: usize, count: usize },
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("invalid family: {0}")]
    Invalid(String),
    #[error("family is not exhaustive: boundary {0} is unmet")]
    NotExhaustive(usize),
    #[error("total weight mismatch: {left} at the glued input, {right} at the output")]
    TotalsMismatch { left: String, right: String },
    #[error("circumference mismatch: {0} vs {1}")]
    CircumferenceMismatch(String, String),
    #[error("offset {0} outside [0, circumference)")]
    OffsetOutOfRange(String),
    #[error("inessential arc produced by gluing: arc {arc} bounds a disk with boundary {boundary}")]
    InessentialOutput { arc: usize, boundary: usize },
    #[error("boundary 0 of the inserted family is unmet")]
    EmptyOutputBoundary,
    #[error("arity error: {0}")]
    Arity(String),
    #[error("invalid cactus: {0}")]
    InvalidCactus(String),
    #[error("configuration is not planar: {0}")]
    NotPlanar(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("parameter point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("negative weight on a cell: {0}")]
    NegativeWeight(String),
    #[error("invalid facet: {0}")]
    InvalidFacet(String),
    #[error("non-integer parameter: {0}")]
    NonIntegerParameter(String),
    #[error("decode error at {path}: {message}")]
    Decode { path: String, message: String },
    #[error("unsatisfiable bounds: {0}")]
    Unsatisfiable(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
