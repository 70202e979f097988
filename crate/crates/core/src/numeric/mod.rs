//! Non-relational numeric abstraction: intervals reduced with
//! congruences for integers, outward-rounded intervals for floats.

pub mod backward;
pub mod congruence;
pub mod interval;
pub mod value;

pub use backward::{backward_binary, backward_cast, backward_truth, backward_unary};
pub use congruence::Cong;
pub use interval::{Bound, Itv};
pub use value::{compare, refine_compare, Arith, FItv, NumVal, OverflowPolicy};

/// Widening thresholds for integer bounds, ascending.
pub const THRESHOLDS: [i128; 11] = [-2147483647, -65535, -32767, -255, -1, 0, 1, 255, 32767, 65535, 2147483647];
