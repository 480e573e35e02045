use std::io;
use std::path::Path;

use lmax_core::ErrorClass;
use thiserror::Error;

pub const EXIT_CONTRACT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_EXPERIMENT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lmax_core::Error),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("{0}")]
    Usage(String),

    #[error("manifest cannot be replayed: {0}")]
    Manifest(String),

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Contract => EXIT_CONTRACT,
                ErrorClass::Capacity => EXIT_CAPACITY,
                ErrorClass::Experiment => EXIT_EXPERIMENT,
            },
            CliError::Generation(_) | CliError::Usage(_) | CliError::Manifest(_) => EXIT_CONTRACT,
            CliError::Io { .. } => EXIT_EXPERIMENT,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Generation(_) => "GenerationError",
            CliError::Usage(_) => "UsageError",
            CliError::Manifest(_) => "ManifestError",
            CliError::Io { .. } => "IoError",
        }
    }

    /// One-line JSON object for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.code(), "exit": self.exit_code(), "message": self.to_string() }).to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let cap = CliError::from(lmax_core::Error::InstanceTooLargeForExact { n: 12, cap: 10 });
        assert_eq!((cap.exit_code(), cap.code()), (3, "InstanceTooLargeForExact"));
        let parse = CliError::from(lmax_core::Error::Parse("x".into()));
        assert_eq!(parse.exit_code(), 2);
        assert_eq!(CliError::from(lmax_core::Error::NoValidPlacement).exit_code(), 4);
        assert_eq!(CliError::Generation("n = 0".into()).exit_code(), 2);
        let v: serde_json::Value = serde_json::from_str(&cap.to_json()).unwrap();
        assert_eq!(v["error"], "InstanceTooLargeForExact");
        assert_eq!(v["exit"], 3);
    }
}
