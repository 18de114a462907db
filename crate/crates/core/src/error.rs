use thiserror::Error;

/// Everything that can go wrong inside the engine.
///
/// Variants are grouped by the exit code the command layer maps them to:
/// invalid input (2), exhausted work budget (3), and failed mathematical
/// verification (1).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large for word-size arithmetic")]
    ModulusTooLarge(u64),
    #[error("row has {found} entries, expected {expected}")]
    RowLength { expected: usize, found: usize },
    #[error("matrices live in different spaces: {0}")]
    Mismatch(String),
    #[error("the zero form does not define a hyperplane")]
    ZeroForm,
    #[error("non-homogeneous equation (constant term {0}); only central arrangements are supported")]
    NonHomogeneous(String),
    #[error("axiom (a) violated: schema `{0}` lacks the difference generator x1 - x2")]
    MissingDifferenceGenerator(String),
    #[error("generator {index} {coeffs:?} has a coefficient that vanishes in the field")]
    DegenerateGenerator { index: usize, coeffs: Vec<i64> },
    #[error("generator {0} is empty")]
    EmptyGenerator(usize),
    #[error("schema `{0}` has no generators")]
    NoGenerators(String),
    #[error("unknown family `{0}` (expected set, sumfree-2, sumfree-5, sumfree-7 or a schema file)")]
    UnknownFamily(String),
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("work budget of {limit} steps exceeded")]
    BudgetExceeded { limit: u64 },
    #[error("need at least {needed} consecutive values from k = 0, have {available}")]
    InsufficientPoints { needed: usize, available: usize },
    #[error("polynomial of degree <= {max_degree} does not fit: at k = {k} the series has {expected}, the fit gives {fitted}")]
    DegreeBound {
        max_degree: usize,
        k: usize,
        expected: String,
        fitted: String,
    },
    #[error("Möbius sign condition fails at codimension {codim}")]
    SignCondition { codim: usize },
    #[error("Möbius value overflowed 128-bit arithmetic")]
    MobiusOverflow,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for this error: 1 verification failure,
    /// 2 invalid input, 3 budget exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BudgetExceeded { .. } => 3,
            Error::DegreeBound { .. } | Error::SignCondition { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
