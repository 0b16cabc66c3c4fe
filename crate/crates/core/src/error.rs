use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("AMP diverged at iteration {iter}: non-finite {what}")]
    Divergence { iter: usize, what: &'static str },

    #[error("wrong magic: expected {expected:#010x}, found {found:#010x}")]
    WrongMagic { expected: u32, found: u32 },

    #[error("not an RBM1 file")]
    NotRbmFile,

    #[error("unexpected end of file at offset {offset} (needed {needed} more bytes)")]
    Truncated { offset: usize, needed: usize },

    #[error("{extra} trailing bytes after offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },

    #[error("exact enumeration over {units} units exceeds the limit of {limit}")]
    EnumerationTooLarge { units: usize, limit: usize },

    #[error("non-binary training value {value} at sample {row}, unit {col}")]
    NonBinary { row: usize, col: usize, value: f64 },

    #[error("no non-zero pixels to fit prior parameters")]
    NoSupport,

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::Dimension {
                what,
                expected,
                found,
            })
        }
    }
}
