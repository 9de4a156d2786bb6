//! One error type for the whole pipeline, rendered as
//! `error[CODE]: message at line:col`.

use thiserror::Error;

use crate::ir::IrError;
use crate::parser::ParseError;
use crate::runtime::RuntimeError;
use crate::transform::TransformError;
use crate::typecheck::TypeError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("error[E-PARSE]: {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Type(#[from] TypeError),
    #[error("{0}")]
    Transform(#[from] TransformError),
    #[error("{0}")]
    Runtime(#[from] RuntimeError),
    #[error("error[E-IR]: {0}")]
    Ir(#[from] IrError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "E-PARSE",
            Error::Type(e) => e.code.as_str(),
            Error::Transform(e) => e.code.as_str(),
            Error::Runtime(e) => e.code.as_str(),
            Error::Ir(_) => "E-IR",
        }
    }
}
