use qhspec_core::{ClassicalError, ModelError, PerturbationError, PolyError, QuantizeError, SolverError, SpecFunError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("table {table}: max deviation {deviation:.3e} exceeds {tolerance:e}")]
    TableDeviation { table: u32, deviation: f64, tolerance: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Input(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::TableDeviation { .. } => 4,
        }
    }
}

impl From<SpecFunError> for CliError {
    fn from(e: SpecFunError) -> Self {
        match e {
            SpecFunError::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::BisectionNonConvergence { .. }
            | SolverError::InverseIterationStagnation { .. }
            | SolverError::NonMonotone { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<QuantizeError> for CliError {
    fn from(e: QuantizeError) -> Self {
        match e {
            QuantizeError::TooFewRoots { .. } => CliError::NonConvergence(e.to_string()),
            QuantizeError::SpecFun(inner) => inner.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PerturbationError> for CliError {
    fn from(e: PerturbationError) -> Self {
        match e {
            PerturbationError::Quadrature(_) => CliError::NonConvergence(e.to_string()),
            PerturbationError::SpecFun(inner) => inner.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ClassicalError> for CliError {
    fn from(e: ClassicalError) -> Self {
        match e {
            ClassicalError::Overflow { .. }
            | ClassicalError::InsufficientCrossings { .. }
            | ClassicalError::BranchBoundary { .. } => CliError::NonConvergence(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}
