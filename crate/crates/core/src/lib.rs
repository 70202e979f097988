//! Field-sensitive value analysis for a byte-level C subset.

pub mod abi;
pub mod alarm;
pub mod analyzer;
pub mod cells;
pub mod concrete;
pub mod diff;
pub mod equality;
pub mod error;
pub mod frontend;
pub mod gen;
pub mod ir;
pub mod numeric;
pub mod pointer;
pub mod report;
pub mod scalar;

pub use abi::{Abi, Endian};
pub use alarm::{AlarmKind, AlarmSet};
pub use error::{AbiError, AnalysisError, FrontendError};
pub use ir::{Base, Cfg, Expr, Inst, Loc, VarId};
pub use scalar::ScalarType;
