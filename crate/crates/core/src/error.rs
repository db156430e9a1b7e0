//! Crate-wide error type.

/// Errors surfaced by the toolkit.
///
/// Provider failures (refusals, transport errors) are deliberately *not*
/// errors: the pipeline consumes them through the retry budget and they
/// appear as [`crate::provider::ProviderReply`] variants instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A file (or embedded text) failed to parse. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Content violated a data invariant (script block, length rule, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A caller-supplied argument was out of range or inconsistent.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// An operation was invoked in a state that does not permit it.
    #[error("invalid state: {0}")]
    State(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
