use alloc::string::String;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("malformed space: {0}")]
    MalformedSpace(String),

    #[error("malformed selfmap: {0}")]
    MalformedMap(String),

    #[error("point does not belong to the space: {0}")]
    NotAPoint(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error("sequence family rejected: {0}")]
    Family(String),

    #[error("instance generation infeasible after {attempts} attempts")]
    Infeasible { attempts: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
