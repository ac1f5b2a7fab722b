use thiserror::Error;

/// Errors raised by the numerical modules and the command-line layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OligomerError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter regime: {0}")]
    InvalidRegime(String),

    #[error("the propagation constant is determined by the {case} constraint and must not be supplied")]
    EnergyDetermined { case: &'static str },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Newton Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("no solution on branch {branch} anywhere in gamma range [{lo}, {hi}]")]
    EmptyBranch { branch: String, lo: f64, hi: f64 },

    #[error("integrator step underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl OligomerError {
    /// Short machine-readable tag used in the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InvalidInput(_) => "invalid-input",
            Self::InvalidRegime(_) => "invalid-regime",
            Self::EnergyDetermined { .. } => "energy-determined",
            Self::NoConvergence { .. } => "no-convergence",
            Self::SingularJacobian { .. } => "singular-jacobian",
            Self::NumericalFailure(_) => "numerical-failure",
            Self::EmptyBranch { .. } => "empty-branch",
            Self::StepUnderflow { .. } => "step-underflow",
            Self::Config(_) => "config",
            Self::SchemaViolation(_) => "schema-violation",
            Self::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for OligomerError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

pub type Result<T, E = OligomerError> = std::result::Result<T, E>;
