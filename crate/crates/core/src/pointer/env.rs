use std::collections::BTreeMap;

use super::value::AVal;

/// Map from keys to abstract values with an explicit bottom. Keys bound
/// on one side only are dropped by joins and widenings.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueEnv<K: Ord> {
    bot: bool,
    vals: BTreeMap<K, AVal>,
}

impl<K: Ord + Clone> Default for ValueEnv<K> {
    fn default() -> Self {
        ValueEnv { bot: false, vals: BTreeMap::new() }
    }
}

impl<K: Ord + Clone> ValueEnv<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bottom() -> Self {
        ValueEnv { bot: true, vals: BTreeMap::new() }
    }

    pub fn is_bot(&self) -> bool {
        self.bot
    }

    pub fn set_bot(&mut self) {
        self.bot = true;
        self.vals.clear();
    }

    pub fn get(&self, k: &K) -> Option<&AVal> {
        self.vals.get(k)
    }

    pub fn contains(&self, k: &K) -> bool {
        self.vals.contains_key(k)
    }

    /// Binds `k`; an empty value makes the environment bottom.
    pub fn set(&mut self, k: K, v: AVal) {
        if self.bot {
            return;
        }
        if v.is_bot() {
            self.set_bot();
        } else {
            self.vals.insert(k, v);
        }
    }

    /// Meets the binding of `k` with `v`; unbound keys are left alone.
    pub fn refine(&mut self, k: &K, v: &AVal) {
        if self.bot {
            return;
        }
        if v.is_bot() {
            self.set_bot();
            return;
        }
        if let Some(cur) = self.vals.get(k) {
            let m = cur.meet(v);
            self.set(k.clone(), m);
        }
    }

    pub fn remove(&mut self, k: &K) -> Option<AVal> {
        self.vals.remove(k)
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.vals.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &AVal)> {
        self.vals.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&K, &mut AVal)> {
        self.vals.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn retain(&mut self, mut f: impl FnMut(&K, &AVal) -> bool) {
        self.vals.retain(|k, v| f(k, v));
    }

    fn combine(&self, o: &Self, f: impl Fn(&AVal, &AVal) -> AVal) -> Self {
        if self.bot {
            return o.clone();
        }
        if o.bot {
            return self.clone();
        }
        let vals = self
            .vals
            .iter()
            .filter_map(|(k, a)| o.vals.get(k).map(|b| (k.clone(), f(a, b))))
            .collect();
        ValueEnv { bot: false, vals }
    }

    pub fn join(&self, o: &Self) -> Self {
        self.combine(o, |a, b| a.join(b))
    }

    pub fn widen(&self, o: &Self, thresholds: &[i128], cong_widen: bool) -> Self {
        self.combine(o, |a, b| a.widen(b, thresholds, cong_widen))
    }

    /// Replaces bounds that were widened to infinity by those of `o`.
    pub fn narrow(&self, o: &Self) -> Self {
        if self.bot || o.bot {
            return Self::bottom();
        }
        let mut r = self.clone();
        for (k, a) in &self.vals {
            if let Some(b) = o.vals.get(k) {
                let n = match (a, b) {
                    (AVal::Num(x), AVal::Num(y)) => AVal::Num(x.narrow(y)),
                    (AVal::Ptr(b1, x), AVal::Ptr(_, y)) => AVal::ptr(b1.clone(), x.narrow(y)),
                    _ => a.clone(),
                };
                r.set(k.clone(), n);
            }
        }
        r
    }

    pub fn meet(&self, o: &Self) -> Self {
        if self.bot || o.bot {
            return Self::bottom();
        }
        let mut r = self.clone();
        for (k, b) in &o.vals {
            match r.vals.get(k) {
                Some(_) => r.refine(k, b),
                None => r.set(k.clone(), b.clone()),
            }
        }
        r
    }

    /// Inclusion; every key bound on the right must be bound on the left
    /// with a smaller value.
    pub fn leq(&self, o: &Self) -> bool {
        if self.bot {
            return true;
        }
        if o.bot {
            return false;
        }
        o.vals.iter().all(|(k, b)| self.vals.get(k).is_some_and(|a| a.leq(b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{Itv, NumVal};

    #[test]
    fn join_drops_one_sided_keys() {
        let mut a: ValueEnv<u32> = ValueEnv::new();
        a.set(1, AVal::Num(NumVal::int_const(0)));
        a.set(2, AVal::Num(NumVal::int_const(5)));
        let mut b = ValueEnv::new();
        b.set(1, AVal::Num(NumVal::int_const(4)));
        let j = a.join(&b);
        assert_eq!(j.get(&1).and_then(|v| v.num()).unwrap().itv(), Itv::new(0, 4));
        assert!(j.get(&2).is_none());
        assert!(a.leq(&j) && b.leq(&j));
        assert!(!j.leq(&a));
    }

    #[test]
    fn empty_binding_is_bottom() {
        let mut a: ValueEnv<u32> = ValueEnv::new();
        a.set(1, AVal::Num(NumVal::int_range(0, 3)));
        a.refine(&1, &AVal::Num(NumVal::int_range(5, 6)));
        assert!(a.is_bot());
    }
}
