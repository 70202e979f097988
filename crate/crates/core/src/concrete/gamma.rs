use crate::abi::Abi;
use crate::ir::VarId;
use crate::scalar::ScalarType;

use super::phi::{phi, ValueSet};
use super::{Byte, Memory};

/// What the membership test needs to know about an abstract memory state.
pub trait AbstractView {
    fn is_bottom(&self) -> bool;
    /// Cells as (variable, offset, type).
    fn cells(&self) -> Vec<(VarId, u64, ScalarType)>;
    /// Whether every value of `values` is admitted by the cell's abstract value.
    fn admits(&self, cell: (VarId, u64, ScalarType), values: &ValueSet, abi: &Abi) -> bool;
    /// Byte ranges `[lo, hi)` of `v` known to still hold their static zero.
    fn pristine(&self, v: VarId) -> Vec<(u64, u64)>;
}

/// Whether the concrete memory `m` is described by the abstract state.
pub fn gamma_member(s: &dyn AbstractView, m: &Memory, abi: &Abi) -> bool {
    if s.is_bottom() {
        return false;
    }
    for (v, off, ty) in s.cells() {
        if !m.is_live(v) {
            return false;
        }
        let size = abi.size(ty);
        if off + size > m.size(v).unwrap_or(0) {
            return false;
        }
        let values = phi(ty, m.read(v, off, size), abi);
        if !s.admits((v, off, ty), &values, abi) {
            return false;
        }
    }
    for (v, _) in m.live() {
        for (lo, hi) in s.pristine(v) {
            if m.read(v, lo, hi - lo).iter().any(|b| *b != Byte::ZERO) {
                return false;
            }
        }
    }
    true
}
