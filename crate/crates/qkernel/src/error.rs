//! Error taxonomy shared by the library and the CLI.

use thiserror::Error;

/// Library-wide error type. The three variants map onto the CLI exit codes
/// (input/config -> 2, resource -> 3, data -> 4).
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid arguments or configuration: bad shapes, out-of-range
    /// parameters, contract violations by the caller.
    #[error("input error: {0}")]
    Input(String),
    /// Work refused because it would exceed a resource guard
    /// (e.g. qubit count above the statevector cap).
    #[error("resource error: {0}")]
    Resource(String),
    /// Malformed external data: CSV parse failures, shape mismatches on
    /// load, I/O errors while reading or writing artifacts.
    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    /// Prefix the message with a location hint (e.g. "split 17"), keeping
    /// the variant so exit-code mapping is unaffected.
    #[must_use]
    pub fn context(self, ctx: &str) -> Error {
        match self {
            Error::Input(m) => Error::Input(format!("{ctx}: {m}")),
            Error::Resource(m) => Error::Resource(format!("{ctx}: {m}")),
            Error::Data(m) => Error::Data(format!("{ctx}: {m}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
