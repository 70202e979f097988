//! Abstract memory as a dynamic set of typed cells over variable bytes,
//! read with intersection semantics: every cell constrains its bytes.

mod lattice;
mod ranges;
mod realize;
mod transfer;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::abi::Abi;
use crate::concrete::{AbstractView, PtrVal, Value, ValueSet};
use crate::ir::{Cfg, VarId};
use crate::numeric::{Arith, Cong, NumVal, OverflowPolicy};
use crate::pointer::{AVal, BaseSet, EvalCtx, PBase, ValueEnv};
use crate::scalar::ScalarType;

pub use ranges::RangeSet;
pub use transfer::{resolve, CopyWindow, Effect, Reducer, Targets, Written};

/// A scalar view of `ty` at byte `off` of `var`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub var: VarId,
    pub off: u64,
    pub ty: ScalarType,
}

impl Cell {
    pub fn new(var: VarId, off: u64, ty: ScalarType) -> Cell {
        Cell { var, off, ty }
    }

    pub fn end(&self, abi: &Abi) -> u64 {
        self.off + abi.size(self.ty)
    }

    pub fn overlaps(&self, o: &Cell, abi: &Abi) -> bool {
        self.var == o.var && self.off < o.end(abi) && o.off < self.end(abi)
    }

    pub fn show(&self, cfg: &Cfg) -> String {
        format!("({}, {}, {})", cfg.var(self.var).name, self.off, self.ty.name())
    }
}

/// Constraint kept between a realized cell and the cells it came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    /// `child` holds bytes of the unsigned integer `parent`.
    Extract { parent: Cell, child: Cell },
    /// The unsigned integer `whole` is exactly tiled by unsigned `parts`.
    Compose { whole: Cell, parts: Vec<Cell> },
    /// Same bytes as an integer and as a pointer: zero iff NULL.
    NullLink { int: Cell, ptr: Cell },
    /// `dst` was assigned the value of `src` without wrap-around.
    Copy { src: Cell, dst: Cell },
}

impl Relation {
    pub fn cells(&self) -> Vec<Cell> {
        match self {
            Relation::Extract { parent, child } => vec![*parent, *child],
            Relation::Compose { whole, parts } => {
                let mut v = parts.clone();
                v.push(*whole);
                v
            }
            Relation::NullLink { int, ptr } => vec![*int, *ptr],
            Relation::Copy { src, dst } => vec![*src, *dst],
        }
    }

    pub fn mentions(&self, c: &Cell) -> bool {
        self.cells().contains(c)
    }

    pub fn show(&self, cfg: &Cfg) -> String {
        match self {
            Relation::Extract { parent, child } => format!("extract {} <- {}", child.show(cfg), parent.show(cfg)),
            Relation::Compose { whole, parts } => {
                let p: Vec<String> = parts.iter().map(|c| c.show(cfg)).collect();
                format!("compose {} <- [{}]", whole.show(cfg), p.join(", "))
            }
            Relation::NullLink { int, ptr } => format!("null-link {} ~ {}", int.show(cfg), ptr.show(cfg)),
            Relation::Copy { src, dst } => format!("copy {} <- {}", dst.show(cfg), src.show(cfg)),
        }
    }
}

/// Fixed parameters shared by the memory transfer functions.
#[derive(Clone, Copy, Debug)]
pub struct Dom<'a> {
    pub cfg: &'a Cfg,
    pub abi: &'a Abi,
    pub policy: OverflowPolicy,
    pub fanout: usize,
    /// Value ranges of volatile integer variables.
    pub inputs: &'a BTreeMap<VarId, (i128, i128)>,
}

impl<'a> Dom<'a> {
    pub fn arith(&self) -> Arith<'a> {
        Arith { abi: self.abi, policy: self.policy }
    }

    pub fn eval_ctx(&self) -> EvalCtx<'a> {
        EvalCtx { arith: self.arith(), cfg: self.cfg }
    }

    pub fn size(&self, t: ScalarType) -> u64 {
        self.abi.size(t)
    }
}

/// Abstract memory state.
#[derive(Clone, Debug, PartialEq)]
pub struct MemState {
    pub env: ValueEnv<Cell>,
    /// Byte ranges possibly written since the variable was created.
    pub written: BTreeMap<VarId, RangeSet>,
    pub rels: BTreeSet<Relation>,
}

impl MemState {
    /// Entry state: no cells, nothing written.
    pub fn initial() -> MemState {
        MemState { env: ValueEnv::new(), written: BTreeMap::new(), rels: BTreeSet::new() }
    }

    pub fn bottom() -> MemState {
        MemState { env: ValueEnv::bottom(), written: BTreeMap::new(), rels: BTreeSet::new() }
    }

    pub fn is_bot(&self) -> bool {
        self.env.is_bot()
    }

    pub fn set_bot(&mut self) {
        *self = MemState::bottom();
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.env.keys()
    }

    pub fn cells_of(&self, v: VarId) -> Vec<Cell> {
        self.env.keys().filter(|c| c.var == v).copied().collect()
    }

    pub fn value(&self, c: &Cell) -> Option<&AVal> {
        self.env.get(c)
    }

    /// Bytes `[lo, hi)` of `v` are untouched static storage.
    pub fn is_pristine(&self, dom: &Dom, v: VarId, lo: u64, hi: u64) -> bool {
        dom.cfg.var(v).is_static && !self.written.get(&v).is_some_and(|r| r.intersects(lo, hi))
    }

    pub fn record_write(&mut self, v: VarId, lo: u64, hi: u64) {
        if !self.is_bot() {
            self.written.entry(v).or_default().insert(lo, hi);
        }
    }

    /// Drops a cell and the relations mentioning it.
    pub fn remove_cell(&mut self, c: &Cell) {
        self.env.remove(c);
        self.rels.retain(|r| !r.mentions(c));
    }

    pub fn drop_relations_of(&mut self, c: &Cell) {
        self.rels.retain(|r| !r.mentions(c));
    }

    /// Removes every cell of `v` overlapping `[lo, hi)` except `keep`.
    pub fn remove_overlapping(&mut self, dom: &Dom, v: VarId, lo: u64, hi: u64, keep: &[Cell]) {
        let doomed: Vec<Cell> = self
            .env
            .keys()
            .filter(|c| c.var == v && c.off < hi && lo < c.end(dom.abi) && !keep.contains(c))
            .copied()
            .collect();
        for c in doomed {
            self.remove_cell(&c);
        }
    }

    /// Variable entering scope: fresh uninitialized storage.
    pub fn create_var(&mut self, v: VarId) {
        for c in self.cells_of(v) {
            self.remove_cell(&c);
        }
        self.written.remove(&v);
    }

    /// Variable leaving scope: its cells go and pointers to it dangle.
    pub fn delete_var(&mut self, v: VarId) {
        if self.is_bot() {
            return;
        }
        for c in self.cells_of(v) {
            self.remove_cell(&c);
        }
        self.written.remove(&v);
        for (_, val) in self.env.iter_mut() {
            if let AVal::Ptr(b, off) = val {
                if b.contains(PBase::Var(v)) && !b.is_top() {
                    *val = AVal::ptr(b.kill(v), *off);
                }
            }
        }
    }

    /// Text dump with cells sorted by variable, offset and type.
    pub fn dump(&self, cfg: &Cfg) -> String {
        if self.is_bot() {
            return "bottom\n".into();
        }
        let mut s = String::new();
        for (c, v) in self.env.iter() {
            let _ = writeln!(s, "{} = {}", c.show(cfg), v.show(cfg));
        }
        for (v, r) in &self.written {
            let parts: Vec<String> = r.iter().map(|(a, b)| format!("[{}, {})", a, b)).collect();
            let _ = writeln!(s, "written {}: {}", cfg.var(*v).name, parts.join(" "));
        }
        for r in &self.rels {
            let _ = writeln!(s, "rel {}", r.show(cfg));
        }
        s
    }

    pub fn view<'s>(&'s self, dom: &'s Dom<'s>) -> MemView<'s> {
        MemView { mem: self, dom }
    }
}

/// Concretization queries of a memory state.
pub struct MemView<'s> {
    mem: &'s MemState,
    dom: &'s Dom<'s>,
}

fn admits_value(a: &AVal, v: &Value) -> bool {
    match (a, v) {
        (AVal::Num(n), Value::Int(x)) => n.contains_int(*x),
        (AVal::Num(n), Value::Float(x)) => n.contains_float(*x),
        (AVal::Ptr(b, off), Value::Ptr(p)) => match p {
            PtrVal::Null => b.has_null(),
            PtrVal::Invalid => b.has_invalid(),
            PtrVal::Addr(base, o) => {
                b.is_top() || (b.contains(PBase::from(*base)) && off.contains_int(*o as i128))
            }
        },
        _ => false,
    }
}

/// Whether every member of `set` is described by `a`.
pub fn admits(a: &AVal, set: &ValueSet, abi: &Abi) -> bool {
    match set {
        ValueSet::Exact(vs) => vs.iter().all(|v| admits_value(a, v)),
        ValueSet::All(t) => AVal::top(*t, abi).leq(a),
        ValueSet::Bytes { .. } => {
            let Some(AVal::Num(n)) = Some(a) else { return false };
            let Some(pieces) = set.int_pieces(abi) else { return false };
            pieces.iter().all(|p| {
                let cong = if p.step == 0 { Cong::constant(p.min) } else { Cong::new(p.step, p.min) };
                NumVal::int(crate::numeric::Itv::new(p.min, p.max), cong).leq(n)
            })
        }
    }
}

impl AbstractView for MemView<'_> {
    fn is_bottom(&self) -> bool {
        self.mem.is_bot()
    }

    fn cells(&self) -> Vec<(VarId, u64, ScalarType)> {
        self.mem.cells().map(|c| (c.var, c.off, c.ty)).collect()
    }

    fn admits(&self, cell: (VarId, u64, ScalarType), values: &ValueSet, abi: &Abi) -> bool {
        match self.mem.value(&Cell::new(cell.0, cell.1, cell.2)) {
            Some(a) => admits(a, values, abi),
            None => true,
        }
    }

    fn pristine(&self, v: VarId) -> Vec<(u64, u64)> {
        let info = self.dom.cfg.var(v);
        if !info.is_static {
            return Vec::new();
        }
        match self.mem.written.get(&v) {
            Some(r) => r.complement(info.size),
            None => vec![(0, info.size)],
        }
    }
}

/// Base set of a pointer value.
pub fn bases_of(a: &AVal) -> Option<&BaseSet> {
    match a {
        AVal::Ptr(b, _) => Some(b),
        AVal::Num(_) => None,
    }
}
