use std::path::Path;

/// Front-end failure classes. Each maps to a fixed exit code and a
/// machine-readable JSON object on stderr.
#[derive(Debug)]
pub enum CliError {
    /// Parse or validation failure in the config file or the flags.
    Config { message: String, details: Vec<String> },
    /// The engine rejected the run.
    Runtime(noon_sta::Error),
    /// Reading or writing a file failed.
    Io { path: String, message: String },
}

impl CliError {
    pub fn config(message: impl Into<String>, details: Vec<String>) -> CliError {
        CliError::Config {
            message: message.into(),
            details,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn to_json(&self) -> String {
        let body = match self {
            CliError::Config { message, details } => serde_json::json!({
                "kind": "config",
                "code": "invalid-config",
                "message": message,
                "details": details,
            }),
            CliError::Runtime(e) => serde_json::json!({
                "kind": "runtime",
                "code": e.code(),
                "message": e.to_string(),
                "details": [],
            }),
            CliError::Io { path, message } => serde_json::json!({
                "kind": "io",
                "code": "io",
                "message": format!("{path}: {message}"),
                "details": [],
            }),
        };
        serde_json::json!({ "error": body }).to_string()
    }
}

impl From<noon_sta::Error> for CliError {
    fn from(e: noon_sta::Error) -> CliError {
        CliError::Runtime(e)
    }
}
