//! Concrete byte-level semantics: memories map byte locations to symbolic
//! byte values `(τ, b, v)`, reads recompose values through `phi`.

mod eval;
mod exec;
mod gamma;
mod memory;
mod phi;

use std::fmt;

use crate::ir::{Base, Cfg};
use crate::scalar::ScalarType;

pub use eval::{eval_expr, exec_inst, load, Chooser, Ctx, RngChooser};
pub use exec::{resolve_inputs, run, run_with, ExecConfig, Outcome, Step, Trace};
pub use gamma::{gamma_member, AbstractView};
pub use memory::Memory;
pub use phi::{phi, sample_range, sample_type, IntPiece, ValueSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PtrVal {
    Addr(Base, u64),
    Null,
    /// The invalid pointer (dangling or otherwise erroneous).
    Invalid,
}

#[derive(Clone, Copy, Debug)]
pub enum Value {
    Int(i128),
    Float(f64),
    Ptr(PtrVal),
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Ptr(a), Value::Ptr(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn is_zero(&self) -> bool {
        match self {
            Value::Int(v) => *v == 0,
            Value::Float(x) => *x == 0.0,
            Value::Ptr(p) => *p == PtrVal::Null,
        }
    }

    pub fn show(&self, cfg: &Cfg) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(x) => format!("{:?}", x),
            Value::Ptr(PtrVal::Null) => "NULL".into(),
            Value::Ptr(PtrVal::Invalid) => "omega".into(),
            Value::Ptr(PtrVal::Addr(b, o)) => format!("&{}+{}", cfg.base_name(*b), o),
        }
    }
}

/// Symbolic content of one byte: the `b`-th byte of value `v` of type `ty`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ByteValue {
    pub ty: ScalarType,
    pub b: u8,
    pub v: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Byte {
    Val(ByteValue),
    Uninit,
}

impl Byte {
    /// Initial content of static storage.
    pub const ZERO: Byte = Byte::Val(ByteValue { ty: ScalarType::UChar, b: 0, v: Value::Int(0) });

    pub fn show(&self, cfg: &Cfg) -> String {
        match self {
            Byte::Val(bv) => format!("({},{},{})", bv.ty, bv.b, bv.v.show(cfg)),
            Byte::Uninit => "uninit".into(),
        }
    }
}

impl fmt::Display for PtrVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PtrVal::Null => f.write_str("NULL"),
            PtrVal::Invalid => f.write_str("omega"),
            PtrVal::Addr(b, o) => write!(f, "{:?}+{}", b, o),
        }
    }
}
