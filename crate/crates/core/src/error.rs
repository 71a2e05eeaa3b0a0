use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator index {index} out of range (n = {n})")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("swap requires distinct generator indices, got {0} twice")]
    SameIndex(usize),

    #[error("swap requires j < k, got j = {j}, k = {k}")]
    IndexOrder { j: usize, k: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("invalid parameter matrix: {0}")]
    InvalidParameterMatrix(String),

    #[error("invalid angle: {0}")]
    InvalidAngle(String),

    #[error("phase e^(2 pi i {angle}) is not in the coefficient field of conductor {conductor}")]
    OutsideField { angle: String, conductor: u64 },

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("central generator x used in an odd-sphere context")]
    XInOddSphere,

    #[error("homogeneity class of the zero polynomial is undefined")]
    ZeroPolynomial,

    #[error("invalid rotation action: {0}")]
    InvalidAction(String),

    #[error("invalid scalar unitary: {0}")]
    InvalidUnitary(String),

    #[error("inhomogeneous entry at ({row}, {col})")]
    InhomogeneousEntry { row: usize, col: usize },

    #[error("inconsistent phase system at ({row}, {col})")]
    InconsistentPhases { row: usize, col: usize },

    #[error("graded projection routes disagree for class {0}")]
    ProjectionMismatch(usize),

    #[error("homomorphism is not validated")]
    Unvalidated,

    #[error("relation `{0}` fails")]
    FailedRelation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rotation orders differ: domain k = {domain}, codomain k = {codomain}")]
    OrderMismatch { domain: u64, codomain: u64 },

    #[error("irrational angle at ({0}, {1}); rational representations need exact angles")]
    IrrationalAngle(usize, usize),

    #[error("near-singular sample {index}: |det| = {abs_det:e}")]
    NearSingular { index: usize, abs_det: f64 },

    #[error("insufficient resolution: argument jump {jump:.3} at sample {index}")]
    InsufficientResolution { index: usize, jump: f64 },

    #[error("loop not closed: accumulated turns {0} is not an integer")]
    NotClosed(f64),

    #[error("loop is not invariant: residual {0:e}")]
    NotInvariant(f64),

    #[error("empty grid")]
    EmptyGrid,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
