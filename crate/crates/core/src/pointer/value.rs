use std::collections::BTreeSet;
use std::fmt;

use crate::abi::Abi;
use crate::ir::{Base, Cfg, FuncId, VarId};
use crate::numeric::{Itv, NumVal};
use crate::scalar::ScalarType;

/// What a pointer may point into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PBase {
    Var(VarId),
    Func(FuncId),
    Null,
    Invalid,
}

impl PBase {
    pub fn addressable(self) -> Option<Base> {
        match self {
            PBase::Var(v) => Some(Base::Var(v)),
            PBase::Func(f) => Some(Base::Func(f)),
            _ => None,
        }
    }
}

impl From<Base> for PBase {
    fn from(b: Base) -> PBase {
        match b {
            Base::Var(v) => PBase::Var(v),
            Base::Func(f) => PBase::Func(f),
        }
    }
}

/// Finite set of bases, or every possible pointer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BaseSet {
    Top,
    Set(BTreeSet<PBase>),
}

impl BaseSet {
    pub fn empty() -> BaseSet {
        BaseSet::Set(BTreeSet::new())
    }

    pub fn single(b: PBase) -> BaseSet {
        BaseSet::Set([b].into_iter().collect())
    }

    pub fn null() -> BaseSet {
        BaseSet::single(PBase::Null)
    }

    pub fn is_top(&self) -> bool {
        matches!(self, BaseSet::Top)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, BaseSet::Set(s) if s.is_empty())
    }

    pub fn contains(&self, b: PBase) -> bool {
        match self {
            BaseSet::Top => true,
            BaseSet::Set(s) => s.contains(&b),
        }
    }

    pub fn has_null(&self) -> bool {
        self.contains(PBase::Null)
    }

    pub fn has_invalid(&self) -> bool {
        self.contains(PBase::Invalid)
    }

    pub fn has_func(&self) -> bool {
        match self {
            BaseSet::Top => true,
            BaseSet::Set(s) => s.iter().any(|b| matches!(b, PBase::Func(_))),
        }
    }

    /// Variable and function bases; `None` for top.
    pub fn addressable(&self) -> Option<Vec<Base>> {
        match self {
            BaseSet::Top => None,
            BaseSet::Set(s) => Some(s.iter().filter_map(|b| b.addressable()).collect()),
        }
    }

    pub fn has_addressable(&self) -> bool {
        self.addressable().map_or(true, |v| !v.is_empty())
    }

    /// The only base, when there is exactly one.
    pub fn as_single(&self) -> Option<PBase> {
        match self {
            BaseSet::Set(s) if s.len() == 1 => s.iter().next().copied(),
            _ => None,
        }
    }

    pub fn join(&self, o: &BaseSet) -> BaseSet {
        match (self, o) {
            (BaseSet::Set(a), BaseSet::Set(b)) => BaseSet::Set(a.union(b).copied().collect()),
            _ => BaseSet::Top,
        }
    }

    pub fn meet(&self, o: &BaseSet) -> BaseSet {
        match (self, o) {
            (BaseSet::Top, x) | (x, BaseSet::Top) => x.clone(),
            (BaseSet::Set(a), BaseSet::Set(b)) => BaseSet::Set(a.intersection(b).copied().collect()),
        }
    }

    pub fn leq(&self, o: &BaseSet) -> bool {
        match (self, o) {
            (_, BaseSet::Top) => true,
            (BaseSet::Top, _) => false,
            (BaseSet::Set(a), BaseSet::Set(b)) => a.is_subset(b),
        }
    }

    pub fn without(&self, b: PBase) -> BaseSet {
        match self {
            BaseSet::Top => BaseSet::Top,
            BaseSet::Set(s) => BaseSet::Set(s.iter().copied().filter(|x| *x != b).collect()),
        }
    }

    /// Keeps variable and function bases only.
    pub fn only_addressable(&self) -> BaseSet {
        self.without(PBase::Null).without(PBase::Invalid)
    }

    /// Pointers into `v` become invalid.
    pub fn kill(&self, v: VarId) -> BaseSet {
        if self.contains(PBase::Var(v)) && !self.is_top() {
            self.without(PBase::Var(v)).join(&BaseSet::single(PBase::Invalid))
        } else {
            self.clone()
        }
    }

    pub fn show(&self, cfg: &Cfg) -> String {
        match self {
            BaseSet::Top => "any".into(),
            BaseSet::Set(s) => {
                let names: Vec<String> = s
                    .iter()
                    .map(|b| match b {
                        PBase::Var(v) => format!("&{}", cfg.var(*v).name),
                        PBase::Func(f) => format!("&{}", cfg.funcs[f.0 as usize]),
                        PBase::Null => "NULL".into(),
                        PBase::Invalid => "invalid".into(),
                    })
                    .collect();
                format!("{{{}}}", names.join(", "))
            }
        }
    }
}

/// Abstract scalar value: numeric, or a pointer given by its bases and a
/// byte offset shared by all addressable bases.
#[derive(Clone, Debug, PartialEq)]
pub enum AVal {
    Num(NumVal),
    Ptr(BaseSet, NumVal),
}

fn zero_offset() -> NumVal {
    NumVal::int_const(0)
}

impl AVal {
    pub fn ptr(bases: BaseSet, off: NumVal) -> AVal {
        if bases.is_top() {
            return AVal::Ptr(BaseSet::Top, NumVal::int(Itv::TOP, crate::numeric::Cong::TOP));
        }
        if off.is_bot() {
            let bases = bases.without_addressable();
            return AVal::Ptr(bases, zero_offset());
        }
        if !bases.has_addressable() {
            return AVal::Ptr(bases, zero_offset());
        }
        AVal::Ptr(bases, off)
    }

    pub fn null() -> AVal {
        AVal::Ptr(BaseSet::null(), zero_offset())
    }

    pub fn addr(b: Base, off: i128) -> AVal {
        AVal::Ptr(BaseSet::single(b.into()), NumVal::int_const(off))
    }

    pub fn top_ptr() -> AVal {
        AVal::ptr(BaseSet::Top, zero_offset())
    }

    pub fn top(t: ScalarType, abi: &Abi) -> AVal {
        if t.is_ptr() {
            AVal::top_ptr()
        } else {
            AVal::Num(NumVal::top(t, abi))
        }
    }

    pub fn bottom(t: ScalarType) -> AVal {
        if t.is_ptr() {
            AVal::Ptr(BaseSet::empty(), zero_offset())
        } else if t.is_float() {
            AVal::Num(NumVal::Float(crate::numeric::FItv::BOT))
        } else {
            AVal::Num(NumVal::Int(Itv::BOT, crate::numeric::Cong::TOP))
        }
    }

    pub fn bottom_like(&self) -> AVal {
        match self {
            AVal::Num(n) => AVal::Num(n.bottom_like()),
            AVal::Ptr(..) => AVal::Ptr(BaseSet::empty(), zero_offset()),
        }
    }

    pub fn is_bot(&self) -> bool {
        match self {
            AVal::Num(n) => n.is_bot(),
            AVal::Ptr(b, _) => b.is_empty(),
        }
    }

    pub fn num(&self) -> Option<&NumVal> {
        match self {
            AVal::Num(n) => Some(n),
            AVal::Ptr(..) => None,
        }
    }

    pub fn may_be_zero(&self) -> bool {
        match self {
            AVal::Num(n) => n.may_be_zero(),
            AVal::Ptr(b, _) => b.has_null(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            AVal::Num(n) => n.is_zero(),
            AVal::Ptr(b, _) => b.as_single() == Some(PBase::Null),
        }
    }

    pub fn join(&self, o: &AVal) -> AVal {
        match (self, o) {
            (AVal::Num(a), AVal::Num(b)) => AVal::Num(a.join(b)),
            (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) => {
                let off = match (b1.has_addressable(), b2.has_addressable()) {
                    (true, true) => o1.join(o2),
                    (true, false) => *o1,
                    _ => *o2,
                };
                AVal::ptr(b1.join(b2), off)
            }
            _ => panic!("joining numeric and pointer values"),
        }
    }

    pub fn widen(&self, o: &AVal, thresholds: &[i128], cong_widen: bool) -> AVal {
        match (self, o) {
            (AVal::Num(a), AVal::Num(b)) => AVal::Num(a.widen(b, thresholds, cong_widen)),
            (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) => {
                let off = match (b1.has_addressable(), b2.has_addressable()) {
                    (true, true) => o1.widen(o2, thresholds, cong_widen),
                    (true, false) => *o1,
                    _ => *o2,
                };
                AVal::ptr(b1.join(b2), off)
            }
            _ => panic!("widening numeric and pointer values"),
        }
    }

    pub fn meet(&self, o: &AVal) -> AVal {
        match (self, o) {
            (AVal::Num(a), AVal::Num(b)) => AVal::Num(a.meet(b)),
            (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) => {
                let bases = b1.meet(b2);
                let off = match (b1.has_addressable(), b2.has_addressable()) {
                    (true, true) => o1.meet(o2),
                    _ => zero_offset(),
                };
                AVal::ptr(bases, off)
            }
            _ => panic!("meeting numeric and pointer values"),
        }
    }

    pub fn leq(&self, o: &AVal) -> bool {
        if self.is_bot() {
            return true;
        }
        match (self, o) {
            (AVal::Num(a), AVal::Num(b)) => a.leq(b),
            (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) => {
                b1.leq(b2) && (!b1.has_addressable() || b2.is_top() || o1.leq(o2))
            }
            _ => false,
        }
    }

    pub fn show(&self, cfg: &Cfg) -> String {
        match self {
            AVal::Num(n) => n.to_string(),
            AVal::Ptr(b, _) if !b.has_addressable() || b.is_top() => b.show(cfg),
            AVal::Ptr(b, off) => format!("{} + {}", b.show(cfg), off),
        }
    }
}

impl BaseSet {
    fn without_addressable(&self) -> BaseSet {
        match self {
            BaseSet::Top => BaseSet::Top,
            BaseSet::Set(s) => BaseSet::Set(s.iter().copied().filter(|b| b.addressable().is_none()).collect()),
        }
    }
}

impl fmt::Display for AVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AVal::Num(n) => write!(f, "{}", n),
            AVal::Ptr(b, off) => write!(f, "{:?} + {}", b, off),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_offsets_are_ignored() {
        let x = Base::Var(VarId(0));
        let a = AVal::null().join(&AVal::addr(x, 8));
        match &a {
            AVal::Ptr(b, off) => {
                assert!(b.has_null());
                assert_eq!(*off, NumVal::int_const(8));
            }
            _ => panic!(),
        }
        assert!(AVal::null().leq(&a));
        assert!(AVal::addr(x, 8).leq(&a));
        assert!(!AVal::addr(x, 4).leq(&a));
    }

    #[test]
    fn deletion_invalidates() {
        let v = VarId(3);
        let s = BaseSet::single(PBase::Var(v)).join(&BaseSet::null());
        let k = s.kill(v);
        assert!(k.has_invalid() && k.has_null() && !k.contains(PBase::Var(v)));
    }
}
