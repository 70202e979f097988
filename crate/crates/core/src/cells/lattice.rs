use std::collections::BTreeMap;

use crate::pointer::AVal;

use super::{Dom, MemState, RangeSet};

impl MemState {
    /// Copies of both states over the union of their cell sets.
    fn unify(&self, o: &MemState, dom: &Dom) -> (MemState, MemState) {
        let (mut a, mut b) = (self.clone(), o.clone());
        for c in o.cells() {
            a.realize(dom, *c);
        }
        for c in self.cells() {
            b.realize(dom, *c);
        }
        (a, b)
    }

    fn combine(&self, o: &MemState, dom: &Dom, widen: Option<&[i128]>) -> MemState {
        if self.is_bot() {
            return o.clone();
        }
        if o.is_bot() {
            return self.clone();
        }
        let (a, b) = self.unify(o, dom);
        let mut env = match widen {
            Some(th) => a.env.widen(&b.env, th, true),
            None => a.env.join(&b.env),
        };
        if widen.is_some() {
            for (c, v) in env.iter_mut() {
                if let AVal::Num(n) = v {
                    *n = n.meet(&crate::numeric::NumVal::top(c.ty, dom.abi));
                }
            }
        }
        let mut written: BTreeMap<_, RangeSet> = self.written.clone();
        for (v, r) in &o.written {
            let e = written.entry(*v).or_default();
            *e = e.union(r);
        }
        let rels = self.rels.intersection(&o.rels).cloned().collect();
        MemState { env, written, rels }
    }

    pub fn join(&self, o: &MemState, dom: &Dom) -> MemState {
        self.combine(o, dom, None)
    }

    /// Widening with thresholds; `o` is the newer iterate.
    pub fn widen(&self, o: &MemState, dom: &Dom, thresholds: &[i128]) -> MemState {
        self.combine(o, dom, Some(thresholds))
    }

    pub fn leq(&self, o: &MemState, dom: &Dom) -> bool {
        if self.is_bot() {
            return true;
        }
        if o.is_bot() {
            return false;
        }
        let mut a = self.clone();
        for c in o.cells() {
            a.realize(dom, *c);
        }
        a.env.leq(&o.env)
            && self.written.iter().all(|(v, r)| r.is_empty() || o.written.get(v).is_some_and(|s| r.is_subset(s)))
            && o.rels.is_subset(&self.rels)
    }
}
