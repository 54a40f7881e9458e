use miso_dof::DofError;
use miso_dof_sim::SimError;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_EXTERIOR: i32 = 3;
pub const EXIT_GUARD: i32 = 4;
pub const EXIT_CONFIG: i32 = 5;
pub const EXIT_VERIFY: i32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    /// The message lists the violated constraints.
    #[error("{0}")]
    Exterior(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Config(String),
    /// Output has already been printed; only the exit code is left.
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Exterior(_) => EXIT_EXTERIOR,
            CliError::Guard(_) => EXIT_GUARD,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::VerifyFailed(_) => EXIT_VERIFY,
            CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

impl From<DofError> for CliError {
    fn from(e: DofError) -> Self {
        let msg = e.to_string();
        match e {
            DofError::EmptyProfile
            | DofError::TooManyUsers(_)
            | DofError::AlphaOutOfRange { .. }
            | DofError::DimensionMismatch { .. } => CliError::Parse(msg),
            DofError::Outside { .. } | DofError::NegativeCoordinate(_) => CliError::Exterior(msg),
            DofError::GuardExceeded { .. } => CliError::Guard(msg),
            DofError::InvalidScheme(_) | DofError::UserOutOfRange { .. } => CliError::Config(msg),
            _ => CliError::Other(msg),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) => CliError::Config(e.to_string()),
            SimError::Dof(d) => d.into(),
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
