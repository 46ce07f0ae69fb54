use launchsde::montecarlo::SimError;
use launchsde::verify::{CheckReport, VerifyError};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{failed} of {total} checks failed")]
    Verification {
        failed: usize,
        total: usize,
        failing: Vec<CheckReport>,
    },
    #[error("{0}")]
    Resource(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    failing: Option<&'a [CheckReport]>,
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Verification { .. } => 2,
            CliError::Resource(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "config",
            CliError::Verification { .. } => "verification",
            CliError::Resource(_) => "resource",
        }
    }

    /// One-line JSON document for the standard error stream.
    pub fn to_json(&self) -> String {
        let failing = match self {
            CliError::Verification { failing, .. } => Some(failing.as_slice()),
            _ => None,
        };
        let doc = ErrorDoc {
            error: ErrorBody {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
                failing,
            },
        };
        serde_json::to_string(&doc).expect("error serializes")
    }

    pub fn from_sim(e: SimError) -> Self {
        match e {
            SimError::ResourceLimit { .. } | SimError::HorizonExhausted { .. } => {
                CliError::Resource(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }

    pub fn from_verify(e: VerifyError) -> Self {
        match e {
            VerifyError::Sim(s) => Self::from_sim(s),
            other => CliError::Config(other.to_string()),
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::Resource(format!("cannot write {}: {e}", path.display()))
    }
}
