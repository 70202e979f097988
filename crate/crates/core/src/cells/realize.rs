use crate::abi::Endian;
use crate::numeric::NumVal;
use crate::pointer::AVal;

use super::{Cell, Dom, MemState, Relation};

/// Exponent of the weight, in bytes, of the lowest-order byte of `child`
/// inside `parent`.
fn byte_shift(dom: &Dom, parent: &Cell, child: &Cell) -> u32 {
    let k = child.off - parent.off;
    let n = dom.size(parent.ty);
    let s = dom.size(child.ty);
    match dom.abi.endian {
        Endian::Little => k as u32,
        Endian::Big => (n - k - s) as u32,
    }
}

fn finite(v: &NumVal) -> Option<(i128, i128)> {
    let i = v.itv();
    Some((i.lo.fin()?, i.hi.fin()?))
}

/// Value of the bytes of `child` given the value of the integer `parent`.
pub(super) fn extract(dom: &Dom, parent: &Cell, pv: &NumVal, child: &Cell) -> NumVal {
    if pv.is_bot() {
        return *pv;
    }
    let ar = dom.arith();
    let u = ar.wrap(parent.ty.to_unsigned(), *pv);
    let s = dom.size(child.ty) as u32;
    let m = 1i128 << (8 * s);
    let full = NumVal::int_range(0, m - 1);
    let raw = match finite(&u) {
        Some((lo, hi)) => {
            let d = 1i128 << (8 * byte_shift(dom, parent, child));
            let (ql, qh) = (lo / d, hi / d);
            if ql / m == qh / m {
                NumVal::int_range(ql % m, qh % m)
            } else {
                full
            }
        }
        None => full,
    };
    if child.ty.is_signed() {
        ar.wrap(child.ty, raw)
    } else {
        raw
    }
}

/// Refines the unsigned `parent` from the value of its bytes `child`.
pub(super) fn extract_back(dom: &Dom, parent: &Cell, pv: &NumVal, child: &Cell, cv: &NumVal) -> NumVal {
    if cv.is_bot() {
        return pv.bottom_like();
    }
    let ar = dom.arith();
    let cu = if child.ty.is_signed() { ar.wrap(child.ty.to_unsigned(), *cv) } else { *cv };
    let (Some((lo, hi)), Some((cl, ch))) = (finite(pv), finite(&cu)) else { return *pv };
    let d = 1i128 << (8 * byte_shift(dom, parent, child));
    let b = d << (8 * dom.size(child.ty));
    let nlo = lo.max(lo.div_euclid(b) * b + cl * d);
    let nhi = hi.min(hi.div_euclid(b) * b + ch * d + d - 1);
    pv.meet(&NumVal::int_range(nlo, nhi))
}

/// Value of the unsigned `whole` from its unsigned tiles.
fn compose(dom: &Dom, whole: &Cell, parts: &[(Cell, NumVal)]) -> NumVal {
    let mut acc = NumVal::int_const(0);
    for (p, v) in parts {
        let w = NumVal::int_const(1i128 << (8 * byte_shift(dom, whole, p)));
        let term = NumVal::int(v.itv().mul(&w.itv()), v.cong().mul(&w.cong()));
        acc = NumVal::int(acc.itv().add(&term.itv()), acc.cong().add(&term.cong()));
    }
    acc
}

fn num(v: Option<&AVal>) -> Option<NumVal> {
    match v {
        Some(AVal::Num(n)) => Some(*n),
        _ => None,
    }
}

impl MemState {
    /// Adds `c` to the cell set, initialized from overlapping cells by the
    /// first matching pattern.
    pub fn realize(&mut self, dom: &Dom, c: Cell) {
        if self.is_bot() || self.env.contains(&c) {
            return;
        }
        let end = c.end(dom.abi);
        let size = dom.size(c.ty);
        let overlapping: Vec<(Cell, AVal)> = self
            .env
            .iter()
            .filter(|(o, _)| o.var == c.var && o.off < end && c.off < o.end(dom.abi))
            .map(|(o, v)| (*o, v.clone()))
            .collect();
        let covering = |pred: &dyn Fn(&Cell) -> bool| {
            overlapping.iter().find(|(o, _)| o.off <= c.off && end <= o.end(dom.abi) && pred(o)).cloned()
        };
        let mut found: Option<(AVal, Option<Relation>)> = None;
        if c.ty.is_integer() {
            let parent = covering(&|o: &Cell| o.ty.is_unsigned() && dom.size(o.ty) > size)
                .or_else(|| covering(&|o: &Cell| o.ty.is_integer() && dom.size(o.ty) > size));
            if let Some((p, AVal::Num(pv))) = parent {
                let v = extract(dom, &p, &pv, &c);
                let rel = p.ty.is_unsigned().then_some(Relation::Extract { parent: p, child: c });
                found = Some((AVal::Num(v), rel));
            }
        }
        if found.is_none() && c.ty.is_unsigned() {
            if let Some(parts) = self.tiling(dom, &c) {
                let vals: Option<Vec<(Cell, NumVal)>> =
                    parts.iter().map(|p| num(self.env.get(p)).map(|v| (*p, v))).collect();
                if let Some(vals) = vals {
                    let v = compose(dom, &c, &vals);
                    found = Some((AVal::Num(v), Some(Relation::Compose { whole: c, parts })));
                }
            }
        }
        if found.is_none() && c.ty.is_integer() {
            let sib = overlapping.iter().find(|(o, _)| {
                o.off == c.off && o.ty.is_integer() && dom.size(o.ty) == size && o.ty.is_signed() != c.ty.is_signed()
            });
            if let Some((_, AVal::Num(sv))) = sib {
                found = Some((AVal::Num(dom.arith().wrap(c.ty, *sv)), None));
            }
        }
        if found.is_none() {
            if c.ty.is_integer() {
                if let Some((p, v)) = covering(&|o: &Cell| o.ty.is_ptr()) {
                    if v.is_zero() {
                        let rel = (p.off == c.off && dom.size(p.ty) == size)
                            .then_some(Relation::NullLink { int: c, ptr: p });
                        found = Some((AVal::Num(NumVal::int_const(0)), rel));
                    }
                }
            } else if c.ty.is_ptr() {
                if let Some((p, v)) = covering(&|o: &Cell| o.ty.is_integer()) {
                    if v.is_zero() {
                        let rel = (p.off == c.off && dom.size(p.ty) == size)
                            .then_some(Relation::NullLink { int: p, ptr: c });
                        found = Some((AVal::null(), rel));
                    }
                }
            }
        }
        if found.is_none() && self.is_pristine(dom, c.var, c.off, end) {
            let v = if c.ty.is_integer() {
                AVal::Num(NumVal::int_const(0))
            } else if c.ty.is_ptr() {
                AVal::null()
            } else {
                // Zero bytes read as a floating-point type denote any value.
                AVal::top(c.ty, dom.abi)
            };
            found = Some((v, None));
        }
        let (v, rel) = found.unwrap_or_else(|| (AVal::top(c.ty, dom.abi), None));
        self.env.set(c, v);
        if let Some(r) = rel {
            if !self.is_bot() {
                self.rels.insert(r);
            }
        }
    }

    /// Unsigned cells exactly tiling the bytes of `c`, at least two.
    fn tiling(&self, dom: &Dom, c: &Cell) -> Option<Vec<Cell>> {
        let end = c.end(dom.abi);
        let mut pos = c.off;
        let mut parts = Vec::new();
        while pos < end {
            let next = self
                .env
                .keys()
                .filter(|o| o.var == c.var && o.off == pos && o.ty.is_unsigned() && o.end(dom.abi) <= end && o != &c)
                .max_by_key(|o| dom.size(o.ty))?;
            parts.push(*next);
            pos = next.end(dom.abi);
        }
        (parts.len() >= 2).then_some(parts)
    }

    fn meet_cell(&mut self, c: &Cell, v: &AVal) -> bool {
        match self.env.get(c) {
            Some(old) => {
                let n = old.meet(v);
                if &n != old {
                    self.env.set(*c, n);
                    true
                } else {
                    false
                }
            }
            None => false,
        }
    }

    /// Propagates values along the recorded relations, both ways.
    pub fn apply_relations(&mut self, dom: &Dom) {
        for _ in 0..4 {
            if self.is_bot() {
                return;
            }
            let mut changed = false;
            let rels: Vec<Relation> = self.rels.iter().cloned().collect();
            for r in rels {
                match &r {
                    Relation::Extract { parent, child } => {
                        let (Some(pv), Some(cv)) = (num(self.env.get(parent)), num(self.env.get(child))) else {
                            continue;
                        };
                        changed |= self.meet_cell(child, &AVal::Num(extract(dom, parent, &pv, child)));
                        changed |= self.meet_cell(parent, &AVal::Num(extract_back(dom, parent, &pv, child, &cv)));
                    }
                    Relation::Compose { whole, parts } => {
                        let Some(wv) = num(self.env.get(whole)) else { continue };
                        let vals: Option<Vec<(Cell, NumVal)>> =
                            parts.iter().map(|p| num(self.env.get(p)).map(|v| (*p, v))).collect();
                        let Some(vals) = vals else { continue };
                        changed |= self.meet_cell(whole, &AVal::Num(compose(dom, whole, &vals)));
                        for (p, _) in &vals {
                            changed |= self.meet_cell(p, &AVal::Num(extract(dom, whole, &wv, p)));
                        }
                    }
                    Relation::NullLink { int, ptr } => {
                        let (Some(iv), Some(pv)) = (self.env.get(int).cloned(), self.env.get(ptr).cloned()) else {
                            continue;
                        };
                        if iv.is_zero() {
                            changed |= self.meet_cell(ptr, &AVal::null());
                        }
                        if pv.is_zero() {
                            changed |= self.meet_cell(int, &AVal::Num(NumVal::int_const(0)));
                        }
                    }
                    Relation::Copy { src, dst } => {
                        let (Some(sv), Some(dv)) = (num(self.env.get(src)), num(self.env.get(dst))) else {
                            continue;
                        };
                        let m = AVal::Num(sv.meet(&dv));
                        changed |= self.meet_cell(src, &m);
                        changed |= self.meet_cell(dst, &m);
                    }
                }
                if self.is_bot() {
                    return;
                }
            }
            if !changed {
                return;
            }
        }
    }
}

