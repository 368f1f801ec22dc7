//! Error type shared by every module of the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid endpoints must satisfy a < b, got [{a}, {b}]")]
    InvalidGrid { a: i64, b: i64 },

    #[error("sequence length {got} does not match the grid's extended length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at n = {index}")]
    NonFinite { index: i64 },

    #[error("level mismatch: expected {expected}, got {got}")]
    LevelMismatch { expected: usize, got: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("level {level} out of range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("ladder ordering violated: cannot raise from level {from} to level {to}")]
    LadderOrder { from: usize, to: usize },

    #[error("ghost cell at n = {index} is invalid and carries weight in this operation")]
    GhostInvalid { index: i64 },

    #[error("weight recursion pivot b({index}) = 0 is singular")]
    SingularPivot { index: i64 },

    #[error("weight is not positive at n = {index}: rho = {value}")]
    NonPositiveWeight { index: i64, value: f64 },

    #[error("singular ratio in level propagation at level {level}, n = {index}, factor i = {factor}")]
    SingularRatio { level: usize, index: i64, factor: usize },

    #[error("sequence table covers [{start}, {end}] but index {index} is required")]
    TableOutOfRange { index: i64, start: i64, end: i64 },

    #[error("quadratic constraint residual {residual:.3e} exceeds {tol:.3e} at n = {index}")]
    ConstraintViolation { index: i64, residual: f64, tol: f64 },

    #[error("chain condition {which} residual {residual:.3e} exceeds {tol:.3e} at level {level}")]
    ConditionResidual { which: u8, level: usize, residual: f64, tol: f64 },

    #[error("gamma[{index}] = {value} must differ from zero and one")]
    InvalidGamma { index: usize, value: f64 },

    #[error("gamma list has {got} entries but the chain needs {expected}")]
    GammaCount { expected: usize, got: usize },

    #[error("self-consistency check failed at level {level}, n = {index}: residual {residual:.3e} exceeds {tol:.3e}")]
    ConsistencyFailure { level: usize, index: i64, residual: f64, tol: f64 },

    #[error("eigenvalue bisection did not converge for index {index}")]
    NoConvergence { index: usize },

    #[error("symmetrization asymmetry {residual:.3e} exceeds {tol:.3e} at off-diagonal {index}")]
    Asymmetry { index: usize, residual: f64, tol: f64 },

    #[error("degree {degree} exceeds the grid capacity {max}")]
    DegreeExceedsGrid { degree: usize, max: usize },

    #[error("operation requires a hypergeometric-family chain, got {family}")]
    WrongFamily { family: String },

    #[error("eigenpair residual {residual:.3e} exceeds {tol:.3e} at level {level}, ladder index {ladder}")]
    EigenResidual { level: usize, ladder: usize, residual: f64, tol: f64 },

    #[error("parameter {name} = {value} outside its validity range: {hint}")]
    ParameterRange { name: String, value: f64, hint: String },

    #[error("operator coefficients do not match any factorizable family: {0}")]
    NotFactorizable(String),

    #[error("fault index n = {index} outside the stored range [{start}, {end}]")]
    FaultIndex { index: i64, start: i64, end: i64 },
}
