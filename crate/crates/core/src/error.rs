use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NcError {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("variable z{index} at position {pos} is outside z1..z{d}")]
    VariableOutOfRange { index: usize, d: usize, pos: usize },

    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },

    #[error("dimension mismatch: expected d = {expected}, found d = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("level mismatch: expected n = {expected}, found n = {found}")]
    LevelMismatch { expected: usize, found: usize },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix is numerically singular (condition estimate {cond:.3e})")]
    Singular { cond: f64 },

    #[error("resolvent is ill-conditioned near the boundary (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },

    #[error("vector is not a unit vector (norm defect {defect:.3e})")]
    NotUnitVector { defect: f64 },

    #[error("map is not an isometry (defect {defect:.3e})")]
    NotIsometry { defect: f64 },

    #[error("enumeration of {required} words exceeds the budget of {limit}")]
    EnumerationBudget { required: f64, limit: f64 },

    #[error("polynomial has a word of size {size} < {order}; it is not in the ideal J_{order}")]
    NotInIdeal { size: usize, order: usize },

    #[error("pencil coefficients are linearly dependent (rank {rank} < {d})")]
    DependentPencil { rank: usize, d: usize },

    #[error("feedthrough block has norm {norm:.6} > 1")]
    NotContractive { norm: f64 },

    #[error("system matrix is not an isometry (defect {defect:.3e})")]
    IsometryDefect { defect: f64 },

    #[error("point lies outside the ball (excess {excess:.3e})")]
    OutsideBall { excess: f64 },

    #[error("sample is not a point of the variety")]
    NotInVariety,

    #[error("sample fails ball membership")]
    SampleOutsideBall,

    #[error("level-1 bound r = {r} is violated by a scalar sample with modulus {modulus}")]
    InvalidBound { r: f64, modulus: f64 },

    #[error("degenerate sample after {attempts} draws")]
    DegenerateSample { attempts: usize },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, NcError>;
