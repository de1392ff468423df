use std::path::PathBuf;

use thiserror::Error;

use crate::config::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(ValidationReport),

    #[error("user index {index} out of range 1..={num_users}")]
    UserOutOfRange { index: usize, num_users: usize },

    #[error("layer {layer} cannot be decoded at receiver {receiver} (need layer <= receiver)")]
    LayerAfterReceiver { layer: usize, receiver: usize },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("exponential integral argument must be negative, got {0}")]
    EiDomain(f64),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("malformed config file: {0}")]
    ConfigSyntax(String),

    #[error("malformed result table at line {line}: {message}")]
    TableSyntax { line: usize, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case tag for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::UserOutOfRange { .. } => "user_out_of_range",
            Error::LayerAfterReceiver { .. } => "layer_after_receiver",
            Error::NonPositive { .. } => "non_positive",
            Error::EiDomain(_) => "ei_domain",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::UnknownAxis(_) => "unknown_axis",
            Error::InvalidSweep(_) => "invalid_sweep",
            Error::ConfigSyntax(_) => "config_syntax",
            Error::TableSyntax { .. } => "table_syntax",
            Error::Io { .. } => "io",
        }
    }
}
