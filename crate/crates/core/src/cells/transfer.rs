use std::collections::BTreeSet;

use crate::alarm::{AlarmKind, AlarmSet};
use crate::ir::{CopyType, Expr, VarId};
use crate::numeric::{Cong, Itv, NumVal};
use crate::pointer::{AExpr, AVal, BaseSet, PBase};
use crate::scalar::ScalarType;

use super::{Cell, Dom, MemState, Relation};

/// Byte window moved by a copy between single source and destination.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CopyWindow {
    pub dst: VarId,
    pub doff: u64,
    pub src: VarId,
    pub soff: u64,
    pub len: u64,
}

/// Bytes possibly modified by a transfer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Written {
    Ranges(Vec<(VarId, u64, u64)>),
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    pub alarms: AlarmSet,
    pub written: Written,
    pub window: Option<CopyWindow>,
}

impl Effect {
    fn new() -> Effect {
        Effect { alarms: AlarmSet::EMPTY, written: Written::Ranges(Vec::new()), window: None }
    }

    fn touch(&mut self, v: VarId, lo: u64, hi: u64) {
        if let Written::Ranges(r) = &mut self.written {
            r.push((v, lo, hi));
        }
    }
}

/// Hook run on every cell realized by a read.
pub trait Reducer {
    fn reduce(&self, mem: &mut MemState, dom: &Dom, c: &Cell);
}

impl Reducer for () {
    fn reduce(&self, _: &mut MemState, _: &Dom, _: &Cell) {}
}

/// Resolution of a dereference.
#[derive(Clone, Debug, Default)]
pub struct Targets {
    /// Candidate offsets, when few enough.
    pub hits: Vec<(VarId, u64)>,
    /// Byte ranges `[lo, hi)` of candidates past the fan-out limit.
    pub wide: Vec<(VarId, u64, u64)>,
    /// Any variable may be targeted.
    pub top: bool,
    /// The pointer restricted to error-free targets.
    pub valid: Option<AVal>,
    pub alarms: AlarmSet,
}

impl Targets {
    pub fn is_empty(&self) -> bool {
        self.hits.is_empty() && self.wide.is_empty() && !self.top
    }
}

fn aligned(off: &NumVal, align: u64) -> bool {
    let c = off.cong();
    let a = align as i128;
    match c.as_constant() {
        Some(x) => x % a == 0,
        None => c.modulus() % a == 0 && c.residue() % a == 0,
    }
}

/// Offsets of `[lo, hi]` in `cong` and multiples of `align`, or `None`
/// past `limit`.
fn enumerate(lo: i128, hi: i128, cong: Cong, align: u64, limit: usize) -> Option<Vec<u64>> {
    let a = align as i128;
    let mut out = Vec::new();
    if let Some(x) = cong.as_constant() {
        if lo <= x && x <= hi && x % a == 0 {
            out.push(x as u64);
        }
        return Some(out);
    }
    let m = cong.modulus().max(1);
    let mut x = lo + (cong.residue() - lo).rem_euclid(m);
    let mut tries = 0;
    while x <= hi && x % a != 0 && tries < a {
        x += m;
        tries += 1;
    }
    if x > hi || x % a != 0 {
        return Some(out);
    }
    let step = num_integer::lcm(m, a);
    if (hi - x) / step + 1 > limit as i128 {
        return None;
    }
    while x <= hi {
        out.push(x as u64);
        x += step;
    }
    Some(out)
}

/// Targets of an access of `size` bytes through `p`.
pub fn resolve(dom: &Dom, p: &AVal, size: u64, align: u64) -> Targets {
    let mut t = Targets::default();
    let (bases, off) = match p {
        AVal::Ptr(b, off) => (b, off),
        AVal::Num(_) => {
            t.alarms.add(AlarmKind::InvalidPointer);
            return t;
        }
    };
    let BaseSet::Set(set) = bases else {
        for k in [AlarmKind::OutOfBound, AlarmKind::Misaligned, AlarmKind::NullDeref, AlarmKind::InvalidPointer] {
            t.alarms.add(k);
        }
        t.top = true;
        return t;
    };
    let itv = off.itv();
    let mut vars = BTreeSet::new();
    let mut ranges: Vec<(VarId, i128, i128)> = Vec::new();
    for b in set {
        match b {
            PBase::Null => t.alarms.add(AlarmKind::NullDeref),
            PBase::Invalid => t.alarms.add(AlarmKind::InvalidPointer),
            PBase::Func(_) => t.alarms.add(AlarmKind::OutOfBound),
            PBase::Var(v) => {
                let s = dom.cfg.var(*v).size;
                if s < size {
                    t.alarms.add(AlarmKind::OutOfBound);
                    continue;
                }
                let max = (s - size) as i128;
                let lo = itv.lo.fin().map_or(0, |x| x.max(0));
                let hi = itv.hi.fin().map_or(max, |x| x.min(max));
                if itv.lo.fin().is_none_or(|x| x < 0) || itv.hi.fin().is_none_or(|x| x > max) {
                    t.alarms.add(AlarmKind::OutOfBound);
                }
                if lo <= hi {
                    ranges.push((*v, lo, hi));
                }
            }
        }
    }
    if align > 1 && !ranges.is_empty() && !aligned(off, align) {
        t.alarms.add(AlarmKind::Misaligned);
    }
    let mut hits = Vec::new();
    let mut degraded = false;
    let mut span: Option<(i128, i128)> = None;
    for &(v, lo, hi) in &ranges {
        if !degraded {
            match enumerate(lo, hi, off.cong(), align, dom.fanout) {
                Some(os) => hits.extend(os.into_iter().map(|o| (v, o))),
                None => degraded = true,
            }
            if hits.len() > dom.fanout {
                degraded = true;
            }
        }
        vars.insert(PBase::Var(v));
        span = Some(span.map_or((lo, hi), |(a, b)| (a.min(lo), b.max(hi))));
    }
    if degraded {
        t.wide = ranges.iter().map(|&(v, lo, hi)| (v, lo as u64, hi as u64 + size)).collect();
    } else {
        t.hits = hits;
    }
    t.valid = Some(match span {
        Some((lo, hi)) => {
            let o = off.meet(&NumVal::int(Itv::new(lo, hi), Cong::new(align as i128, 0)));
            AVal::ptr(BaseSet::Set(vars), o)
        }
        None => AVal::bottom(ScalarType::Ptr),
    });
    t
}

impl MemState {
    /// Restricts the address `a` to its error-free targets.
    fn prune(&mut self, dom: &Dom, a: &AExpr<Cell>, t: &Targets) {
        if let Some(v) = &t.valid {
            if v.is_bot() {
                self.set_bot();
            } else {
                a.refine(&mut self.env, &dom.eval_ctx(), v);
            }
        }
    }

    /// Translates an expression into one over cells, reading through
    /// dereferences.
    pub fn lower(&mut self, dom: &Dom, red: &dyn Reducer, e: &Expr, alarms: &mut AlarmSet) -> AExpr<Cell> {
        match e {
            Expr::Int(x, t) => {
                let x = if t.is_integer() { *x } else { 0 };
                AExpr::Const(AVal::Num(NumVal::int_const(x)), *t)
            }
            Expr::Float(x, t) => {
                let x = dom.abi.round_float(*t, *x);
                AExpr::Const(AVal::Num(NumVal::float_range(x, x)), *t)
            }
            Expr::AddrOf(b) => AExpr::AddrOf(*b),
            Expr::Unary(op, a, t) => AExpr::Unary(*op, Box::new(self.lower(dom, red, a, alarms)), *t),
            Expr::Binary(op, a, b, t) => {
                let a = self.lower(dom, red, a, alarms);
                let b = self.lower(dom, red, b, alarms);
                AExpr::Binary(*op, Box::new(a), Box::new(b), *t)
            }
            Expr::Cast(t, a) => AExpr::Cast(*t, Box::new(self.lower(dom, red, a, alarms))),
            Expr::Input(v, t) => {
                let val = if t.is_integer() {
                    let (lo, hi) = dom.abi.int_range(*t);
                    let (a, b) = dom.inputs.get(v).copied().unwrap_or((lo, hi));
                    AVal::Num(NumVal::int_range(a.max(lo), b.min(hi)))
                } else {
                    AVal::top(*t, dom.abi)
                };
                AExpr::Const(val, *t)
            }
            Expr::Deref(t, a) => {
                let ae = self.lower(dom, red, a, alarms);
                let p = ae.eval(&self.env, &dom.eval_ctx(), alarms);
                let tg = resolve(dom, &p, dom.size(*t), dom.abi.align(*t));
                alarms.extend(tg.alarms);
                self.prune(dom, &ae, &tg);
                if self.is_bot() || tg.is_empty() {
                    self.set_bot();
                    return AExpr::Const(AVal::bottom(*t), *t);
                }
                if tg.top || !tg.wide.is_empty() {
                    return AExpr::Const(AVal::top(*t, dom.abi), *t);
                }
                let cells: Vec<Cell> = tg.hits.iter().map(|&(v, o)| Cell::new(v, o, *t)).collect();
                for c in &cells {
                    self.realize(dom, *c);
                    red.reduce(self, dom, c);
                }
                if self.is_bot() {
                    return AExpr::Const(AVal::bottom(*t), *t);
                }
                if cells.len() == 1 {
                    return AExpr::Cell(cells[0], *t);
                }
                let mut v = AVal::bottom(*t);
                for c in &cells {
                    if let Some(x) = self.env.get(c) {
                        v = if v.is_bot() { x.clone() } else { v.join(x) };
                    }
                }
                AExpr::Const(v, *t)
            }
        }
    }

    /// Evaluates `e` and removes the states where it fails.
    pub fn eval_checked(&mut self, dom: &Dom, red: &dyn Reducer, e: &Expr, alarms: &mut AlarmSet) -> (AExpr<Cell>, AVal) {
        let ae = self.lower(dom, red, e, alarms);
        let cx = dom.eval_ctx();
        let v = ae.eval(&self.env, &cx, alarms);
        if v.is_bot() {
            self.set_bot();
            return (ae, v);
        }
        ae.refine(&mut self.env, &cx, &v);
        let mut sink = AlarmSet::EMPTY;
        let v = ae.eval(&self.env, &cx, &mut sink);
        (ae, v)
    }

    /// Forgets every cell in the given byte ranges.
    fn havoc(&mut self, dom: &Dom, t: &Targets, size: u64, fx: &mut Effect) {
        if t.top {
            let vars: Vec<VarId> = (0..dom.cfg.vars.len() as u32).map(VarId).collect();
            for v in vars {
                let s = dom.cfg.var(v).size;
                self.remove_overlapping(dom, v, 0, s, &[]);
                self.record_write(v, 0, s);
            }
            fx.written = Written::All;
        }
        for &(v, lo, hi) in &t.wide {
            self.remove_overlapping(dom, v, lo, hi, &[]);
            self.record_write(v, lo, hi);
            fx.touch(v, lo, hi);
        }
        for &(v, o) in &t.hits {
            self.remove_overlapping(dom, v, o, o + size, &[]);
            self.record_write(v, o, o + size);
            fx.touch(v, o, o + size);
        }
    }

    /// `*ty addr ← value`
    pub fn assign(&mut self, dom: &Dom, red: &dyn Reducer, ty: ScalarType, addr: &Expr, value: &Expr) -> Effect {
        let mut fx = Effect::new();
        let size = dom.size(ty);
        let ae = self.lower(dom, red, addr, &mut fx.alarms);
        let p = ae.eval(&self.env, &dom.eval_ctx(), &mut fx.alarms);
        let tg = resolve(dom, &p, size, dom.abi.align(ty));
        fx.alarms.extend(tg.alarms);
        self.prune(dom, &ae, &tg);
        if tg.is_empty() {
            self.set_bot();
        }
        if self.is_bot() {
            return fx;
        }
        let value = if value.ty() == ty { value.clone() } else { Expr::Cast(ty, Box::new(value.clone())) };
        let (ve, v) = self.eval_checked(dom, red, &value, &mut fx.alarms);
        if self.is_bot() {
            return fx;
        }
        if tg.top || !tg.wide.is_empty() {
            self.havoc(dom, &tg, size, &mut fx);
            return fx;
        }
        if let [(var, o)] = tg.hits[..] {
            let c = Cell::new(var, o, ty);
            self.remove_overlapping(dom, var, o, o + size, &[]);
            self.env.set(c, v);
            if let Some(src) = self.exact_source(dom, &ve, ty) {
                self.rels.insert(Relation::Copy { src, dst: c });
            }
            self.record_write(var, o, o + size);
            fx.touch(var, o, o + size);
            return fx;
        }
        let cells: Vec<Cell> = tg.hits.iter().map(|&(var, o)| Cell::new(var, o, ty)).collect();
        for c in &cells {
            self.realize(dom, *c);
        }
        let olds: Vec<Option<AVal>> = cells.iter().map(|c| self.env.get(c).cloned()).collect();
        for c in &cells {
            let end = c.end(dom.abi);
            let clash = cells.iter().any(|d| d != c && d.overlaps(c, dom.abi));
            let keep: &[Cell] = if clash { &[] } else { std::slice::from_ref(c) };
            self.remove_overlapping(dom, c.var, c.off, end, keep);
            self.record_write(c.var, c.off, end);
            fx.touch(c.var, c.off, end);
        }
        for (c, old) in cells.iter().zip(olds) {
            if let (true, Some(old)) = (self.env.contains(c), old) {
                self.env.set(*c, old.join(&v));
            }
        }
        fx
    }

    /// The integer cell `e` reads when it is a value-preserving conversion of one.
    fn exact_source(&self, dom: &Dom, e: &AExpr<Cell>, ty: ScalarType) -> Option<Cell> {
        let src = match e {
            AExpr::Cell(c, _) => *c,
            AExpr::Cast(_, inner) => match **inner {
                AExpr::Cell(c, _) => c,
                _ => return None,
            },
            _ => return None,
        };
        if !(ty.is_integer() && src.ty.is_integer()) {
            return None;
        }
        match self.env.get(&src) {
            Some(AVal::Num(n)) if n.leq(&NumVal::top(ty, dom.abi)) => Some(src),
            _ => None,
        }
    }

    /// `*ty dst ← *ty src` as a raw byte copy.
    pub fn copy(&mut self, dom: &Dom, red: &dyn Reducer, ty: CopyType, dst: &Expr, src: &Expr) -> Effect {
        let mut fx = Effect::new();
        let size = match ty {
            CopyType::Scalar(t) => dom.size(t),
            CopyType::Bytes(n) => n,
        };
        let cx = dom.eval_ctx();
        let ad = self.lower(dom, red, dst, &mut fx.alarms);
        let pd = ad.eval(&self.env, &cx, &mut fx.alarms);
        let as_ = self.lower(dom, red, src, &mut fx.alarms);
        let ps = as_.eval(&self.env, &cx, &mut fx.alarms);
        let td = resolve(dom, &pd, size, 1);
        let ts = resolve(dom, &ps, size, 1);
        fx.alarms.extend(td.alarms);
        fx.alarms.extend(ts.alarms);
        self.prune(dom, &ad, &td);
        self.prune(dom, &as_, &ts);
        if td.is_empty() || ts.is_empty() {
            self.set_bot();
        }
        if self.is_bot() {
            return fx;
        }
        let (&[(dv, doff)], &[(sv, soff)]) = (&td.hits[..], &ts.hits[..]) else {
            self.havoc(dom, &td, size, &mut fx);
            return fx;
        };
        if let CopyType::Scalar(t) = ty {
            let c = Cell::new(sv, soff, t);
            self.realize(dom, c);
            red.reduce(self, dom, &c);
        }
        let moved: Vec<(Cell, AVal)> = self
            .env
            .iter()
            .filter(|(c, _)| c.var == sv && c.off >= soff && c.end(dom.abi) <= soff + size)
            .map(|(c, v)| (*c, v.clone()))
            .collect();
        self.remove_overlapping(dom, dv, doff, doff + size, &[]);
        for (c, v) in &moved {
            let d = Cell::new(dv, doff + (c.off - soff), c.ty);
            self.env.set(d, v.clone());
            if sv != dv && !c.ty.is_ptr() {
                self.rels.insert(Relation::Copy { src: *c, dst: d });
            }
        }
        self.record_write(dv, doff, doff + size);
        fx.touch(dv, doff, doff + size);
        fx.window = Some(CopyWindow { dst: dv, doff, src: sv, soff, len: size });
        fx
    }

    /// `e == 0 ?`
    pub fn guard(&mut self, dom: &Dom, red: &dyn Reducer, e: &Expr) -> Effect {
        let mut fx = Effect::new();
        let (ae, _) = self.eval_checked(dom, red, e, &mut fx.alarms);
        if self.is_bot() {
            return fx;
        }
        ae.assume(&mut self.env, &dom.eval_ctx(), true);
        self.apply_relations(dom);
        fx
    }
}
