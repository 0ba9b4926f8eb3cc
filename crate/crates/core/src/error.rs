use std::path::PathBuf;

/// Errors raised by kernel, operator, variation and imaging routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested combination of kernel, function and parameters cannot be evaluated.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical routine failed to reach its tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed image data.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn format(offset: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
