use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ground-set size {n} outside supported range 1..={max}")]
    SizeLimit { n: usize, max: usize },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("partition has a crossing: {0}")]
    Crossing(String),

    #[error("partition {partition} is not bi-non-crossing for face word {chi}")]
    NotBiNonCrossing { partition: String, chi: String },

    #[error("the empty word is not accepted here")]
    EmptyWord,

    #[error("word length {len} exceeds truncation order {max_order}")]
    Truncation { len: usize, max_order: usize },

    #[error("missing moment entry for word \"{0}\"")]
    MissingEntry(String),

    #[error("unknown letter \"{0}\"")]
    UnknownLetter(String),

    #[error("alphabets or truncation orders do not match")]
    AlphabetMismatch,

    #[error("tensor degree {needed} exceeds Fock space depth {depth}")]
    DepthOverflow { needed: usize, depth: usize },

    #[error("matrix {0} is not self-adjoint")]
    NotSelfAdjoint(String),

    #[error(
        "cumulant Gram form is not conditionally non-negative definite \
             (min eigenvalue {min_eigenvalue:.3e}, witness {witness})"
    )]
    CndFailed {
        min_eigenvalue: f64,
        witness: String,
    },

    #[error(
        "cumulant set is not conditionally bounded at this truncation: \
             the inserted form does not vanish on the kernel of the base form \
             (leak {leak:.3e})"
    )]
    NotConditionallyBounded { leak: f64 },

    #[error(
        "right-multiplication operator is inconsistent on the modeled span \
             (residual {residual:.3e}); increase the truncation order"
    )]
    RightMultInconsistent { residual: f64 },

    #[error("time grid must start at 0 and strictly increase")]
    BadGrid,

    #[error("negative time parameter {0}")]
    NegativeTime(f64),

    #[error("letter \"{0}\" has nonzero mean; center the family first")]
    NonzeroMean(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("document error: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
