use thiserror::Error;

/// Stable diagnostic codes for configuration failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigCode {
    /// Unknown key, wrong type or unparseable document.
    Schema,
    /// Arm lengths violate d = d1 + d2.
    ArmLength,
    /// A transfer-matrix leg is undersampled.
    Sampling,
    /// Realization count is zero.
    Realizations,
    /// Any other out-of-range value.
    Range,
}

impl ConfigCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigCode::Schema => "E-SCHEMA",
            ConfigCode::ArmLength => "E-ARM-LENGTH",
            ConfigCode::Sampling => "E-SAMPLING",
            ConfigCode::Realizations => "E-REALIZATIONS",
            ConfigCode::Range => "E-RANGE",
        }
    }
}

impl std::fmt::Display for ConfigCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("[{code}] {message}")]
    Config { code: ConfigCode, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(code: ConfigCode, message: impl Into<String>) -> Self {
        Error::Config {
            code,
            message: message.into(),
        }
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Diagnostic code if this is a configuration error.
    pub fn config_code(&self) -> Option<ConfigCode> {
        match self {
            Error::Config { code, .. } => Some(*code),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
