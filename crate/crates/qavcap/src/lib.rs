//! File formats, report emission and the `qavcap` command line on top of
//! [`qavcap_core`].

pub mod cli;
pub mod io;
pub mod report;

pub use qavcap_core as core;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed JSON; the message carries line and column.
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },

    /// Well-formed JSON with the wrong shape.
    #[error("{origin}: {message}")]
    Schema { origin: String, message: String },

    /// Input that parsed but violates a type invariant.
    #[error("{origin}: {error}")]
    Invalid { origin: String, error: qavcap_core::Error },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Domain(#[from] qavcap_core::Error),

    /// Input of the wrong kind for the requested operation.
    #[error("{0}")]
    Input(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::Invalid { .. } => "invariant",
            Error::Io { .. } => "io",
            Error::Domain(_) => "domain",
            Error::Input(_) => "input",
        }
    }

    /// One-line JSON diagnostic for standard error.
    pub fn diagnostic(&self) -> String {
        io::to_json_line(&json!({"error": self.kind(), "message": self.to_string()}))
    }
}
