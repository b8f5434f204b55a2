use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("invalid root set: {0}")]
    InvalidRoots(String),
    #[error("root iteration produced non-finite values")]
    NonFinite,
    #[error("clustered multiplicities sum to {found}, expected degree {expected}")]
    MultiplicityMismatch { expected: usize, found: usize },
    #[error("derivative order {requested} exceeds cap {cap}")]
    OrderTooHigh { requested: usize, cap: usize },
    #[error("overflow while evaluating at x = {0}")]
    Overflow(f64),
    #[error("invalid knots: {0}")]
    InvalidKnots(String),
    #[error("sections have unequal dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("C^n matching matrix at knot {knot} is numerically singular (cond {cond:e})")]
    SingularTransfer { knot: usize, cond: f64 },
    #[error("x = {0} lies outside the domain")]
    OutOfDomain(f64),
    #[error("endpoint conditions for basis index {0} do not define a unique function")]
    RankDeficient(usize),
    #[error("basis function {index} is not positive at x = {x}")]
    NotPositive { index: usize, x: f64 },
    #[error("no Bernstein-like basis: determinant ({i},{j}) vanishes (ratio {ratio:e})")]
    NoBasisEvidence { i: usize, j: usize, ratio: f64 },
    #[error("local basis matrix on section {0} is numerically singular")]
    SingularExpansion(usize),
    #[error("zero column sum in level-{level} step (section {k}, column {r})")]
    ZeroDenominator { level: usize, k: usize, r: usize },
    #[error("no failure found up to k = {0}")]
    Exhausted(usize),
    #[error("operator has no constants in its kernel (p(0) != 0)")]
    NotDesignSpace,
    #[error("the constant function does not lie in the space (residual {0:e})")]
    ConstantsAbsent(f64),
    #[error("expansion of unity has non-positive coefficient at index {index} ({value:e})")]
    NotGoodForDesign { index: usize, value: f64 },
    #[error("test report carries no retained levels")]
    LevelsMissing,
    #[error("test verdict is not EC")]
    NotEC,
    #[error("adaptive quadrature did not converge on [{0}, {1}]")]
    QuadratureFailure(f64, f64),
    #[error("no sign change found below {0}")]
    NoSignChange(f64),
    #[error("parameters outside the equation's regime: {0}")]
    OutOfRegime(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
