use thiserror::Error;

use crate::ir::Loc;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbiError {
    #[error("abi config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("abi config: unknown key `{0}`")]
    UnknownKey(String),
    #[error("abi config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{loc}: syntax error: {msg}")]
    Syntax { loc: Loc, msg: String },
    #[error("{loc}: unknown identifier `{name}`")]
    UnknownIdent { loc: Loc, name: String },
    #[error("{loc}: type error: {msg}")]
    Type { loc: Loc, msg: String },
    #[error("{loc}: unsupported feature: {msg}")]
    Unsupported { loc: Loc, msg: String },
    #[error("recursion rejected: {0}")]
    Recursion(String),
    #[error("call depth exceeds {0} frames")]
    TooDeep(usize),
    #[error("no `main` function")]
    NoMain,
}

impl FrontendError {
    pub fn loc(&self) -> Option<Loc> {
        match self {
            FrontendError::Syntax { loc, .. }
            | FrontendError::UnknownIdent { loc, .. }
            | FrontendError::Type { loc, .. }
            | FrontendError::Unsupported { loc, .. } => Some(*loc),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("iteration cap of {0} edge transfers exceeded")]
    IterationCap(usize),
    #[error("post-fixpoint check failed on edge {src} -> {dst}")]
    NotPostFixpoint { src: usize, dst: usize },
}
