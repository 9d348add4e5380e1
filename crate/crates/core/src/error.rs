use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A line-oriented input (tabular or dimension file) is malformed.
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A document-oriented input is malformed at a byte offset.
    #[error("{}: byte {offset}: {message}", path.display())]
    Syntax {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    #[error("{}: invalid UTF-8 at byte {offset}", path.display())]
    Encoding { path: PathBuf, offset: usize },

    #[error("{}: corrupt index file: {message}", path.display())]
    Index { path: PathBuf, message: String },

    #[error("{}: no dimension files found (expected any of synonym.tsv, antonym.tsv, formal.tsv, lexical.tsv, wordorder.tsv, cooccurrence.tsv)", .0.display())]
    NoModel(PathBuf),

    /// A numeric argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by a missing input file.
    pub fn is_not_found(&self) -> bool {
        match self {
            Error::Io { source, .. } => source.kind() == io::ErrorKind::NotFound,
            Error::NoModel(_) => true,
            _ => false,
        }
    }

    /// True for errors caused by malformed input content.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            Error::Format { .. } | Error::Syntax { .. } | Error::Encoding { .. } | Error::Index { .. }
        )
    }
}
