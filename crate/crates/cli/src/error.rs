use serde_json::json;

use clubforge::Error;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Budget(String),
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Parse(_) | CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            CliError::Parse(m) => ("ParseError", m),
            CliError::Validation(m) => ("ValidationError", m),
            CliError::Budget(m) => ("BudgetExceeded", m),
            CliError::VerifyFailed(m) => ("VerifyFailed", m),
        };
        json!({ "error": { "kind": kind, "message": message } })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } | Error::SizeBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}
