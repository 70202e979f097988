//! Scalar values that may be pointers: a set of bases paired with a
//! numeric byte offset, and dereference-free expressions over them.

pub mod env;
pub mod expr;
pub mod value;

pub use env::ValueEnv;
pub use expr::{AExpr, EvalCtx};
pub use value::{AVal, BaseSet, PBase};
