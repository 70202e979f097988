//! C-subset frontend: lexing, parsing, type layout and lowering to the
//! control-flow-graph language.

pub mod ast;
pub mod ctype;
pub mod lexer;
pub mod lower;
mod lower_expr;
pub mod parser;

use crate::abi::Abi;
use crate::error::FrontendError;
use crate::ir::Cfg;

pub use ctype::{layout, CType, Layout};
pub use lower::{lower, LowerOptions};

pub fn parse_program(src: &str, abi: &Abi) -> Result<ast::Program, FrontendError> {
    parser::parse(src, abi)
}

/// Parses and lowers in one step.
pub fn compile(src: &str, abi: &Abi, opts: &LowerOptions) -> Result<Cfg, FrontendError> {
    let prog = parse_program(src, abi)?;
    lower(&prog, abi, opts)
}
