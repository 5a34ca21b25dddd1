use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("order {n} exceeds the recurrence limit {max}")]
    Size { n: usize, max: usize },
    #[error("series did not converge within {max_terms} terms")]
    NonConvergence { max_terms: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain too small: V_eff(xi_max) = {potential} < lambda_max = {lambda_max}")]
    DomainTooSmall { potential: f64, lambda_max: f64 },
    #[error("bisection for level {level} did not converge in {iterations} iterations")]
    BisectionNonConvergence { level: usize, iterations: usize },
    #[error("inverse iteration for level {level} stagnated")]
    InverseIterationStagnation { level: usize },
    #[error("eigenvalues are not strictly increasing at level {level}")]
    NonMonotone { level: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizeError {
    #[error("parabolic-cylinder quantization needs epsilon = 1/4, got {0}")]
    UnsupportedEpsilon(f64),
    #[error("found {found} roots in mu in [0, {mu_max}], {requested} requested")]
    TooFewRoots {
        found: usize,
        requested: usize,
        mu_max: f64,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error("level {n} exceeds the closed-sum limit {max}")]
    LevelTooHigh { n: usize, max: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassicalError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trajectory diverged at t = {t} (|x| > 1e8)")]
    Overflow { t: f64 },
    #[error("need at least {needed} velocity sign changes, found {found}")]
    InsufficientCrossings { found: usize, needed: usize },
    #[error("branch variable u vanishes: singular momentum map at x = {x}, v = {v}")]
    SingularMap { x: f64, v: f64 },
    #[error("branch boundary reached at t = {t} (p = {p})")]
    BranchBoundary { t: f64, p: f64 },
    #[error("force is not integrable at x = {x}")]
    NonIntegrable { x: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("zero polynomial is not allowed here")]
    ZeroPolynomial,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("internal consistency: {0}")]
    Internal(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("adaptive refinement exceeded depth {max_depth} near x = {x}")]
    DepthExceeded { max_depth: usize, x: f64 },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid interval [{a}, {b}]")]
    Interval { a: f64, b: f64 },
}
