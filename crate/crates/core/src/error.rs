use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable count mismatch: {left} vs {right}")]
    VarCountMismatch { left: usize, right: usize },

    #[error("series has zero constant term and is not a unit")]
    NotAUnit,

    #[error("substituted series has a nonzero constant term")]
    NonzeroConstantTerm,

    #[error("divisor is not x-regular: f(x,0,...,0) vanishes up to order {order}")]
    NotXRegular { order: i32 },

    #[error("not divisible at order {order}: first nonzero remainder term {witness}")]
    NotDivisible { order: i32, witness: String },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("vector field is not nilpotent: {0}")]
    NotNilpotent(String),

    #[error("diffeomorphism is not unipotent: {0}")]
    NotUnipotent(String),

    #[error("linear part is not invertible")]
    NotInvertible,

    #[error("unit cofactor undefined: {0}")]
    DegenerateCofactor(String),

    #[error("resonant multiplier: small divisor vanishes at k = {k}")]
    Resonant { k: u32 },

    #[error("germ vanishes identically up to order {order}")]
    ZeroGerm { order: i32 },

    #[error("no root of the factor on this fiber: {0}")]
    NoRoot(String),

    #[error("multiplier equals 1: use the unipotent residue path")]
    UnipotentMultiplier,

    #[error("point is not fixed: |x∘φ(Q) - x(Q)| = {0:e}")]
    PointNotFixed(f64),

    #[error("singular sample at {0}: contact order jumps")]
    SingularSample(String),

    #[error("not free of residues along factor {factor}")]
    NotFreeOfResidues { factor: usize },

    #[error("no special solution at order {order}: {witness}")]
    NoSolution { order: i32, witness: String },

    #[error("structural hypothesis unmet: {0}")]
    Structural(String),

    #[error("search bound exceeded: no special equation for k <= {kmax}")]
    BoundExceeded { kmax: u32 },

    #[error("conjugation check failed: {0}")]
    VerificationFailed(String),

    #[error("path method leaves exact arithmetic: {0}")]
    PathNotExact(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
