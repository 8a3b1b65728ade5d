use alloc::string::String;

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch on {axis}: expected {expected}, found {found}")]
    DimensionMismatch {
        axis: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace is {0} but must be 1")]
    Trace(f64),

    #[error("state vector has norm {0} but must be 1")]
    Norm(f64),

    #[error("map is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("Kraus and Choi representations disagree (deviation {0:e})")]
    Inconsistent(f64),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("parameter {name} = {value} is out of range")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("normalization violated: {what} sums to {sum}")]
    Normalization { what: &'static str, sum: f64 },

    #[error("negative probability {value} in {what}")]
    NegativeProbability { what: &'static str, value: f64 },

    #[error("memory budget exceeded: dimension {needed} > budget {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("invalid permutation or subsystem selection: {0}")]
    InvalidSelection(&'static str),

    #[error("state is not permutation invariant (deviation {0:e})")]
    NotPermutationInvariant(f64),

    #[error("block length {0} is too large for exact enumeration")]
    BlockLengthTooLarge(usize),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("active adversary set exceeded {0} members before convergence")]
    ActiveSetExhausted(usize),

    #[error("linear program failed: {0}")]
    LinearProgram(&'static str),

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
