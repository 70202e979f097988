use crate::ir::{Base, Cfg, VarId};
use crate::scalar::ScalarType;

use super::{Byte, ByteValue, PtrVal, Value};

/// A concrete memory: the byte contents of every live variable.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Memory {
    vars: Vec<Option<Vec<Byte>>>,
}

impl Memory {
    /// Memory at the entry point: static variables hold zero bytes, the
    /// others are uninitialized.
    pub fn initial(cfg: &Cfg) -> Memory {
        let mut m = Memory { vars: vec![None; cfg.vars.len()] };
        for v in &cfg.points[cfg.entry].live {
            let info = cfg.var(*v);
            m.create(*v, info.size, info.is_static);
        }
        m
    }

    pub fn create(&mut self, v: VarId, size: u64, is_static: bool) {
        let i = v.0 as usize;
        if self.vars.len() <= i {
            self.vars.resize(i + 1, None);
        }
        debug_assert!(self.vars[i].is_none(), "variable created twice");
        let fill = if is_static { Byte::ZERO } else { Byte::Uninit };
        self.vars[i] = Some(vec![fill; size as usize]);
    }

    /// Removes `v` and turns every remaining pointer byte into `v` into a
    /// byte of the invalid pointer.
    pub fn delete(&mut self, v: VarId) {
        self.vars[v.0 as usize] = None;
        for bytes in self.vars.iter_mut().flatten() {
            for b in bytes.iter_mut() {
                if let Byte::Val(ByteValue { ty: ScalarType::Ptr, b: k, v: Value::Ptr(PtrVal::Addr(Base::Var(w), _)) }) = *b {
                    if w == v {
                        *b = Byte::Val(ByteValue { ty: ScalarType::Ptr, b: k, v: Value::Ptr(PtrVal::Invalid) });
                    }
                }
            }
        }
    }

    pub fn is_live(&self, v: VarId) -> bool {
        self.vars.get(v.0 as usize).is_some_and(|b| b.is_some())
    }

    pub fn size(&self, v: VarId) -> Option<u64> {
        self.vars.get(v.0 as usize)?.as_ref().map(|b| b.len() as u64)
    }

    pub fn bytes(&self, v: VarId) -> &[Byte] {
        self.vars[v.0 as usize].as_deref().expect("variable not live")
    }

    pub fn read(&self, v: VarId, off: u64, n: u64) -> &[Byte] {
        &self.bytes(v)[off as usize..(off + n) as usize]
    }

    pub fn write(&mut self, v: VarId, off: u64, bytes: &[Byte]) {
        let dst = self.vars[v.0 as usize].as_mut().expect("variable not live");
        dst[off as usize..off as usize + bytes.len()].copy_from_slice(bytes);
    }

    /// Stores the byte components of a scalar value.
    pub fn store(&mut self, v: VarId, off: u64, ty: ScalarType, size: u64, val: Value) {
        let bytes: Vec<Byte> = (0..size).map(|b| Byte::Val(ByteValue { ty, b: b as u8, v: val })).collect();
        self.write(v, off, &bytes);
    }

    pub fn live(&self) -> impl Iterator<Item = (VarId, &[Byte])> {
        self.vars.iter().enumerate().filter_map(|(i, b)| b.as_deref().map(|b| (VarId(i as u32), b)))
    }

    /// Live bases with their sizes, used when drawing arbitrary pointers.
    pub fn live_bases(&self) -> Vec<(Base, u64)> {
        self.live().map(|(v, b)| (Base::Var(v), b.len() as u64)).collect()
    }

    /// Bytes that differ between `self` and `before`, including bytes of
    /// newly created variables.
    pub fn diff(&self, before: &Memory) -> Vec<(VarId, u64, Byte)> {
        let mut out = Vec::new();
        for (v, bytes) in self.live() {
            let old = before.vars.get(v.0 as usize).and_then(|b| b.as_deref());
            for (i, b) in bytes.iter().enumerate() {
                if old.map(|o| o[i]) != Some(*b) {
                    out.push((v, i as u64, *b));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_creation_is_zero() {
        let mut m = Memory::default();
        m.create(VarId(0), 4, true);
        assert_eq!(m.bytes(VarId(0)), &[Byte::ZERO; 4]);
        m.create(VarId(1), 2, false);
        assert_eq!(m.bytes(VarId(1)), &[Byte::Uninit; 2]);
    }

    #[test]
    fn deletion_invalidates_pointers() {
        let mut m = Memory::default();
        m.create(VarId(0), 4, true);
        m.create(VarId(1), 4, true);
        m.create(VarId(2), 4, true);
        m.store(VarId(1), 0, ScalarType::Ptr, 4, Value::Ptr(PtrVal::Addr(Base::Var(VarId(0)), 0)));
        m.store(VarId(2), 0, ScalarType::Int, 4, Value::Int(7));
        let untouched = m.bytes(VarId(2)).to_vec();
        m.delete(VarId(0));
        for (k, b) in m.bytes(VarId(1)).iter().enumerate() {
            assert_eq!(*b, Byte::Val(ByteValue { ty: ScalarType::Ptr, b: k as u8, v: Value::Ptr(PtrVal::Invalid) }));
        }
        assert_eq!(m.bytes(VarId(2)), &untouched[..]);
        assert!(!m.is_live(VarId(0)));
    }
}
