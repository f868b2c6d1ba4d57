use serde::Serialize;
use thiserror::Error;

/// Exit status for a configuration problem.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a size cap would be exceeded.
pub const EXIT_CAP: i32 = 3;
/// Exit status when a verification did not pass.
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("size cap exceeded: {what} = {value} exceeds the cap {cap}")]
    Cap {
        what: String,
        value: u128,
        cap: u128,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl From<cornershuffle::Error> for CliError {
    fn from(e: cornershuffle::Error) -> Self {
        use cornershuffle::Error as E;
        match e {
            E::Cap { what, value, cap } => CliError::Cap {
                what: what.to_string(),
                value,
                cap,
            },
            E::Verification(_) | E::Infeasible { .. } => CliError::Verification(e.to_string()),
            E::Domain(_) | E::Parse(_) => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<CapReport<'a>>,
}

#[derive(Serialize)]
struct CapReport<'a> {
    name: &'a str,
    value: String,
    limit: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Cap { .. } => EXIT_CAP,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Cap { .. } => "cap",
            CliError::Verification(_) => "verification",
            CliError::Io { .. } => "io",
        }
    }

    /// One-line JSON for the error stream.
    pub fn to_json(&self) -> String {
        let cap = match self {
            CliError::Cap { what, value, cap } => Some(CapReport {
                name: what,
                value: value.to_string(),
                limit: cap.to_string(),
            }),
            _ => None,
        };
        let report = ErrorReport {
            error: self.kind(),
            message: self.to_string(),
            cap,
        };
        serde_json::to_string(&report)
            .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}
