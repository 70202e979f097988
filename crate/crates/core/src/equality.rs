//! Byte-zone equalities between variables, created by copies and used to
//! carry cell values from a copy source to its destination.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cells::{Cell, CopyWindow, Dom, MemState, Reducer, Written};
use crate::ir::{Cfg, VarId};

/// Bytes `[s, s + l)` of the key variable equal bytes `[d, d + l)` of `w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding {
    pub s: u64,
    pub w: VarId,
    pub d: u64,
    pub l: u64,
}

impl Binding {
    fn shift(&self) -> i128 {
        self.s as i128 - self.d as i128
    }

    fn same_line(&self, o: &Binding) -> bool {
        self.w == o.w && self.shift() == o.shift()
    }
}

fn meets(a: u64, al: u64, b: u64, bl: u64) -> bool {
    a < b + bl && b < a + al
}

/// Missing keys are unconstrained.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EqState {
    map: BTreeMap<VarId, Binding>,
}

impl EqState {
    pub fn new() -> EqState {
        EqState::default()
    }

    pub fn get(&self, v: VarId) -> Option<&Binding> {
        self.map.get(&v)
    }

    pub fn set(&mut self, v: VarId, b: Binding) {
        self.map.insert(v, b);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &Binding)> {
        self.map.iter()
    }

    pub fn is_top(&self) -> bool {
        self.map.is_empty()
    }

    /// Forgets bindings whose source or destination zone meets `[lo, hi)` of `v`.
    pub fn clobber(&mut self, v: VarId, lo: u64, hi: u64) {
        self.map.retain(|k, b| {
            !((*k == v && meets(b.s, b.l, lo, hi - lo)) || (b.w == v && meets(b.d, b.l, lo, hi - lo)))
        });
    }

    pub fn assign(&mut self, w: &Written) {
        match w {
            Written::All => self.map.clear(),
            Written::Ranges(rs) => {
                for &(v, lo, hi) in rs {
                    self.clobber(v, lo, hi);
                }
            }
        }
    }

    /// Variable created or deleted.
    pub fn forget_var(&mut self, v: VarId) {
        self.map.retain(|k, b| *k != v && b.w != v);
    }

    /// Records a copy, growing an adjacent zone on the same line.
    pub fn copy(&mut self, win: &CopyWindow) {
        let (v, s2, w2, d2, l2) = (win.src, win.soff, win.dst, win.doff, win.len);
        let old = self.map.get(&v).copied().filter(|b| !(v == w2 && meets(b.s, b.l, d2, l2)));
        self.map.retain(|k, b| *k == v || b.w != w2);
        if w2 != v {
            if let Some(b) = self.map.get(&w2) {
                if meets(b.s, b.l, d2, l2) {
                    self.map.remove(&w2);
                }
            }
        }
        let fresh = Binding { s: s2, w: w2, d: d2, l: l2 };
        let nb = match old {
            Some(b) if b.same_line(&fresh) && b.s <= s2 && s2 <= b.s + b.l => {
                Binding { l: b.l.max(l2 + s2 - b.s), ..b }
            }
            Some(b) if b.same_line(&fresh) && s2 <= b.s && b.s <= s2 + l2 => {
                Binding { l: l2.max(b.l + b.s - s2), ..fresh }
            }
            _ => fresh,
        };
        if nb.w == v && meets(nb.s, nb.l, nb.d, nb.l) {
            self.map.remove(&v);
        } else {
            self.map.insert(v, nb);
        }
    }

    /// Inclusion of concretizations: every binding on the right is implied
    /// by a wider one on the left.
    pub fn leq(&self, o: &EqState) -> bool {
        o.map.iter().all(|(k, b2)| {
            self.map.get(k).is_some_and(|b1| b1.same_line(b2) && b1.s <= b2.s && b2.s + b2.l <= b1.s + b1.l)
        })
    }

    /// Common sub-zones.
    pub fn lub(&self, o: &EqState) -> EqState {
        let mut map = BTreeMap::new();
        for (k, b1) in &self.map {
            let Some(b2) = o.map.get(k) else { continue };
            if !b1.same_line(b2) {
                continue;
            }
            let lo = b1.s.max(b2.s);
            let hi = (b1.s + b1.l).min(b2.s + b2.l);
            if lo < hi {
                let d = (lo as i128 - b1.shift()) as u64;
                map.insert(*k, Binding { s: lo, w: b1.w, d, l: hi - lo });
            }
        }
        EqState { map }
    }

    /// Copies the cells of the source zone of `v` to its destination.
    pub fn reduce(&self, mem: &mut MemState, dom: &Dom, v: VarId) {
        let Some(b) = self.map.get(&v).copied() else { return };
        let inside: Vec<Cell> = mem
            .cells_of(v)
            .into_iter()
            .filter(|c| c.off >= b.s && c.end(dom.abi) <= b.s + b.l)
            .collect();
        for c in inside {
            let d = Cell::new(b.w, c.off - b.s + b.d, c.ty);
            mem.realize(dom, d);
            transfer_value(mem, &c, &d);
        }
    }

    pub fn dump(&self, cfg: &Cfg) -> String {
        let mut s = String::new();
        for (k, b) in &self.map {
            let _ = writeln!(s, "eq: {} -> ({}, {}, {}, {})", cfg.var(*k).name, b.s, cfg.var(b.w).name, b.d, b.l);
        }
        s
    }
}

/// Meets `dst` with the value of `src`.
fn transfer_value(mem: &mut MemState, src: &Cell, dst: &Cell) {
    if let (Some(a), Some(b)) = (mem.value(src).cloned(), mem.value(dst).cloned()) {
        mem.env.set(*dst, b.meet(&a));
    }
}

impl Reducer for EqState {
    fn reduce(&self, mem: &mut MemState, dom: &Dom, c: &Cell) {
        let end = c.end(dom.abi);
        let mut other = None;
        if let Some(b) = self.map.get(&c.var) {
            if c.off >= b.s && end <= b.s + b.l {
                other = Some(Cell::new(b.w, c.off - b.s + b.d, c.ty));
            }
        }
        if other.is_none() {
            for (k, b) in &self.map {
                if b.w == c.var && c.off >= b.d && end <= b.d + b.l {
                    other = Some(Cell::new(*k, c.off - b.d + b.s, c.ty));
                    break;
                }
            }
        }
        if let Some(o) = other {
            mem.realize(dom, o);
            transfer_value(mem, &o, c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn win(src: u32, soff: u64, dst: u32, doff: u64, len: u64) -> CopyWindow {
        CopyWindow { dst: VarId(dst), doff, src: VarId(src), soff, len }
    }

    #[test]
    fn bytewise_copy_grows_zone() {
        let mut e = EqState::new();
        for i in 0..4 {
            e.copy(&win(1, i, 0, i, 1));
        }
        assert_eq!(e.get(VarId(1)), Some(&Binding { s: 0, w: VarId(0), d: 0, l: 4 }));
    }

    #[test]
    fn backward_copy_grows_start() {
        let mut e = EqState::new();
        e.copy(&win(1, 2, 0, 2, 2));
        e.copy(&win(1, 0, 0, 0, 2));
        assert_eq!(e.get(VarId(1)), Some(&Binding { s: 0, w: VarId(0), d: 0, l: 4 }));
    }

    #[test]
    fn shift_mismatch_replaces() {
        let mut e = EqState::new();
        e.copy(&win(1, 0, 0, 0, 4));
        e.copy(&win(1, 8, 0, 0, 4));
        assert_eq!(e.get(VarId(1)), Some(&Binding { s: 8, w: VarId(0), d: 0, l: 4 }));
    }

    #[test]
    fn writes_clear_bindings() {
        let mut e = EqState::new();
        e.copy(&win(1, 0, 0, 0, 4));
        e.clobber(VarId(2), 0, 4);
        assert!(!e.is_top());
        e.clobber(VarId(0), 2, 3);
        assert!(e.is_top());
    }

    #[test]
    fn lub_intersects_zones() {
        let a = EqState { map: [(VarId(1), Binding { s: 0, w: VarId(0), d: 0, l: 4 })].into() };
        let b = EqState { map: [(VarId(1), Binding { s: 2, w: VarId(0), d: 2, l: 4 })].into() };
        let j = a.lub(&b);
        assert_eq!(j.get(VarId(1)), Some(&Binding { s: 2, w: VarId(0), d: 2, l: 2 }));
        assert!(a.leq(&j) && b.leq(&j));
        let c = EqState { map: [(VarId(1), Binding { s: 0, w: VarId(2), d: 0, l: 4 })].into() };
        assert!(a.lub(&c).is_top());
    }

    #[test]
    fn overlapping_self_copy_is_dropped() {
        let mut e = EqState::new();
        e.copy(&win(0, 1, 0, 0, 1));
        e.copy(&win(0, 2, 0, 1, 1));
        assert_eq!(e.get(VarId(0)), Some(&Binding { s: 2, w: VarId(0), d: 1, l: 1 }));
        e.copy(&win(0, 0, 0, 1, 2));
        assert!(e.get(VarId(0)).is_none());
    }
}
