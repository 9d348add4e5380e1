//! Errors carrying the process exit status.

use std::fmt;
use std::io;
use std::path::Path;

pub const EXIT_GENERIC: u8 = 1;
pub const EXIT_MISSING_INPUT: u8 = 2;
pub const EXIT_PARSE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_GENERIC,
            message: message.into(),
        }
    }

    pub fn missing(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_MISSING_INPUT,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, error: io::Error) -> Self {
        let code = if error.kind() == io::ErrorKind::NotFound {
            EXIT_MISSING_INPUT
        } else {
            EXIT_GENERIC
        };
        Failure {
            code,
            message: format!("{}: {error}", path.display()),
        }
    }
}

impl From<mrm_core::Error> for Failure {
    fn from(error: mrm_core::Error) -> Self {
        let code = if error.is_not_found() {
            EXIT_MISSING_INPUT
        } else if error.is_parse_error() {
            EXIT_PARSE
        } else {
            EXIT_GENERIC
        };
        Failure {
            code,
            message: error.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}
