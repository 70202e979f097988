use crate::alarm::{AlarmKind, AlarmSet};
use crate::ir::{Base, BinOp, Cfg, UnOp};
use crate::numeric::{self, Arith, Itv, NumVal};
use crate::scalar::ScalarType;

use super::env::ValueEnv;
use super::value::{AVal, BaseSet, PBase};

/// Dereference-free expression over keyed scalar cells.
#[derive(Clone, Debug, PartialEq)]
pub enum AExpr<K> {
    Const(AVal, ScalarType),
    Cell(K, ScalarType),
    AddrOf(Base),
    Unary(UnOp, Box<AExpr<K>>, ScalarType),
    Binary(BinOp, Box<AExpr<K>>, Box<AExpr<K>>, ScalarType),
    Cast(ScalarType, Box<AExpr<K>>),
}

#[derive(Clone, Copy, Debug)]
pub struct EvalCtx<'a> {
    pub arith: Arith<'a>,
    pub cfg: &'a Cfg,
}

impl<K: Ord + Clone> AExpr<K> {
    pub fn ty(&self) -> ScalarType {
        match self {
            AExpr::Const(_, t) | AExpr::Cell(_, t) => *t,
            AExpr::AddrOf(_) => ScalarType::Ptr,
            AExpr::Unary(_, _, t) | AExpr::Binary(_, _, _, t) | AExpr::Cast(t, _) => *t,
        }
    }

    pub fn eval(&self, env: &ValueEnv<K>, cx: &EvalCtx, alarms: &mut AlarmSet) -> AVal {
        let abi = cx.arith.abi;
        match self {
            AExpr::Const(v, _) => v.clone(),
            AExpr::Cell(k, t) => env.get(k).cloned().unwrap_or_else(|| AVal::top(*t, abi)),
            AExpr::AddrOf(b) => AVal::addr(*b, 0),
            AExpr::Unary(op, a, t) => {
                let v = a.eval(env, cx, alarms);
                if v.is_bot() {
                    return AVal::bottom(*t);
                }
                match (&v, op) {
                    (AVal::Num(n), _) => AVal::Num(cx.arith.unary(*op, n, *t, alarms)),
                    (AVal::Ptr(b, _), UnOp::Not) => {
                        if b.has_invalid() {
                            AVal::Num(NumVal::int_range(0, 1))
                        } else if v.is_zero() {
                            AVal::Num(NumVal::int_const(1))
                        } else if !v.may_be_zero() {
                            AVal::Num(NumVal::int_const(0))
                        } else {
                            AVal::Num(NumVal::int_range(0, 1))
                        }
                    }
                    (AVal::Ptr(..), _) => {
                        alarms.add(AlarmKind::InvalidPointer);
                        AVal::bottom(*t)
                    }
                }
            }
            AExpr::Binary(op, a, b, t) => {
                let x = a.eval(env, cx, alarms);
                let y = b.eval(env, cx, alarms);
                if x.is_bot() || y.is_bot() {
                    return AVal::bottom(*t);
                }
                binary(cx, *op, &x, &y, *t, alarms)
            }
            AExpr::Cast(t, a) => {
                let v = a.eval(env, cx, alarms);
                if v.is_bot() {
                    return AVal::bottom(*t);
                }
                cast(cx, *t, &v, alarms)
            }
        }
    }

    /// Restricts `env` to the states where this expression may evaluate
    /// within `target` without error.
    pub fn refine(&self, env: &mut ValueEnv<K>, cx: &EvalCtx, target: &AVal) {
        if env.is_bot() {
            return;
        }
        let mut sink = AlarmSet::EMPTY;
        let cur = self.eval(env, cx, &mut sink);
        let v = cur.meet(target);
        if v.is_bot() {
            env.set_bot();
            return;
        }
        match self {
            AExpr::Const(..) | AExpr::AddrOf(_) => {}
            AExpr::Cell(k, _) => env.refine(k, &v),
            AExpr::Unary(op, a, t) => {
                let av = a.eval(env, cx, &mut sink);
                let na = match (&av, &v) {
                    (AVal::Num(x), AVal::Num(r)) => AVal::Num(numeric::backward_unary(*op, x, r, *t)),
                    (AVal::Ptr(..), AVal::Num(r)) if *op == UnOp::Not => match r.singleton() {
                        Some(1) => AVal::null(),
                        Some(0) => non_null(&av),
                        _ => av.clone(),
                    },
                    _ => av.clone(),
                };
                a.refine(env, cx, &na);
            }
            AExpr::Binary(op, a, b, t) => {
                let x = a.eval(env, cx, &mut sink);
                let y = b.eval(env, cx, &mut sink);
                let (nx, ny) = backward_binary(*op, &x, &y, &v, *t);
                a.refine(env, cx, &nx);
                b.refine(env, cx, &ny);
            }
            AExpr::Cast(t, a) => {
                let av = a.eval(env, cx, &mut sink);
                let na = match (&av, &v) {
                    (AVal::Num(x), AVal::Num(r)) => {
                        AVal::Num(numeric::backward_cast(a.ty(), *t, x, r, cx.arith.abi))
                    }
                    (AVal::Ptr(..), AVal::Ptr(..)) => av.meet(&v),
                    (AVal::Num(x), AVal::Ptr(bs, _)) if !bs.is_top() => {
                        if !bs.has_null() {
                            AVal::Num(x.exclude_zero())
                        } else if v.is_zero() {
                            AVal::Num(numeric::backward_truth(x, &NumVal::int_const(0)))
                        } else {
                            av.clone()
                        }
                    }
                    (AVal::Ptr(..), AVal::Num(r)) if !r.may_be_zero() => non_null(&av),
                    _ => av.clone(),
                };
                a.refine(env, cx, &na);
            }
        }
    }

    /// Restricts `env` to the states where this expression evaluates to
    /// zero (`zero`) or to a nonzero value.
    pub fn assume(&self, env: &mut ValueEnv<K>, cx: &EvalCtx, zero: bool) {
        match self {
            AExpr::Binary(op, ..) if op.is_comparison() => {
                self.refine(env, cx, &AVal::Num(NumVal::int_const(if zero { 0 } else { 1 })));
                return;
            }
            AExpr::Unary(UnOp::Not, a, _) => {
                a.assume(env, cx, !zero);
                return;
            }
            _ => {}
        }
        let mut sink = AlarmSet::EMPTY;
        let cur = self.eval(env, cx, &mut sink);
        let target = match (&cur, zero) {
            (AVal::Num(n), true) => AVal::Num(numeric::backward_truth(n, &NumVal::int_const(0))),
            (AVal::Num(n), false) => AVal::Num(n.exclude_zero()),
            (AVal::Ptr(..), true) => AVal::null(),
            (AVal::Ptr(..), false) => non_null(&cur),
        };
        if target.is_bot() {
            env.set_bot();
            return;
        }
        self.refine(env, cx, &target);
    }
}

fn non_null(v: &AVal) -> AVal {
    match v {
        AVal::Ptr(b, off) if !b.is_top() => AVal::ptr(b.without(PBase::Null), *off),
        _ => v.clone(),
    }
}

/// A numeric operand used as a pointer: only the integer 0 is allowed.
fn as_pointer(v: &AVal, alarms: &mut AlarmSet) -> AVal {
    match v {
        AVal::Ptr(..) => v.clone(),
        AVal::Num(n) => {
            let int_zero = matches!(n, NumVal::Int(..)) && n.contains_int(0);
            if !(matches!(n, NumVal::Int(..)) && n.is_zero()) {
                alarms.add(AlarmKind::InvalidPointer);
            }
            if int_zero {
                AVal::null()
            } else {
                AVal::bottom(ScalarType::Ptr)
            }
        }
    }
}

fn truth(always: bool, never: bool) -> AVal {
    AVal::Num(if always {
        NumVal::int_const(1)
    } else if never {
        NumVal::int_const(0)
    } else {
        NumVal::int_range(0, 1)
    })
}

fn pointer_compare(op: BinOp, x: &AVal, y: &AVal, alarms: &mut AlarmSet) -> AVal {
    let (x, y) = (as_pointer(x, alarms), as_pointer(y, alarms));
    let (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) = (&x, &y) else { unreachable!() };
    if b1.has_invalid() || b2.has_invalid() {
        alarms.add(AlarmKind::InvalidPointer);
    }
    let (b1, b2) = (b1.without(PBase::Invalid), b2.without(PBase::Invalid));
    if b1.is_empty() || b2.is_empty() {
        return AVal::bottom(ScalarType::Int);
    }
    let same_single = match (b1.as_single(), b2.as_single()) {
        (Some(p), Some(q)) if p == q => Some(p),
        _ => None,
    };
    match op {
        BinOp::Eq | BinOp::Ne => {
            let (mut always, mut never) = (false, false);
            match same_single {
                Some(PBase::Null) => always = true,
                Some(_) => {
                    let c = numeric::compare(BinOp::Eq, o1, o2);
                    always = c.singleton() == Some(1);
                    never = c.singleton() == Some(0);
                }
                None => never = b1.meet(&b2).is_empty(),
            }
            if op == BinOp::Ne {
                std::mem::swap(&mut always, &mut never);
            }
            truth(always, never)
        }
        _ => {
            match same_single {
                Some(PBase::Null) => {
                    let holds = matches!(op, BinOp::Le | BinOp::Ge);
                    truth(holds, !holds)
                }
                Some(_) => AVal::Num(numeric::compare(op, o1, o2)),
                None => {
                    alarms.add(AlarmKind::CrossBaseArith);
                    truth(false, false)
                }
            }
        }
    }
}

fn pointer_arith(cx: &EvalCtx, op: BinOp, x: &AVal, y: &AVal, alarms: &mut AlarmSet) -> AVal {
    let AVal::Ptr(bases, off) = x else {
        alarms.add(AlarmKind::InvalidPointer);
        return AVal::bottom(ScalarType::Ptr);
    };
    let j = match y {
        AVal::Num(n) => NumVal::int(n.itv(), n.cong()),
        AVal::Ptr(..) => {
            alarms.add(AlarmKind::InvalidPointer);
            return AVal::bottom(ScalarType::Ptr);
        }
    };
    if bases.has_null() {
        alarms.add(AlarmKind::NullDeref);
    }
    if bases.has_invalid() {
        alarms.add(AlarmKind::InvalidPointer);
    }
    let Some(targets) = bases.addressable() else {
        alarms.add(AlarmKind::OutOfBound);
        return AVal::top_ptr();
    };
    if targets.is_empty() {
        return AVal::bottom(ScalarType::Ptr);
    }
    let j = if op == BinOp::Sub { NumVal::int(j.itv().neg(), j.cong().neg()) } else { j };
    let n = NumVal::int(off.itv().add(&j.itv()), off.cong().add(&j.cong()));
    let sizes: Vec<u64> = targets.iter().map(|b| cx.cfg.base_size(*b)).collect();
    let (min, max) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
    if !n.itv().leq(&Itv::new(0, min as i128)) {
        alarms.add(AlarmKind::OutOfBound);
    }
    AVal::ptr(bases.only_addressable(), n.meet(&NumVal::int_range(0, max as i128)))
}

fn pointer_diff(cx: &EvalCtx, x: &AVal, y: &AVal, t: ScalarType, alarms: &mut AlarmSet) -> AVal {
    let (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) = (x, y) else { unreachable!() };
    if b1.has_invalid() || b2.has_invalid() {
        alarms.add(AlarmKind::InvalidPointer);
    }
    let (b1, b2) = (b1.without(PBase::Invalid), b2.without(PBase::Invalid));
    match (b1.as_single(), b2.as_single()) {
        (Some(PBase::Null), Some(PBase::Null)) => AVal::Num(NumVal::int_const(0)),
        (Some(p), Some(q)) if p == q => {
            let d = NumVal::int(o1.itv().sub(&o2.itv()), o1.cong().sub(&o2.cong()));
            AVal::Num(cx.arith.fit(t, d, alarms))
        }
        _ if b1.is_empty() || b2.is_empty() => AVal::bottom(t),
        _ => {
            alarms.add(AlarmKind::CrossBaseArith);
            AVal::top(t, cx.arith.abi)
        }
    }
}

fn binary(cx: &EvalCtx, op: BinOp, x: &AVal, y: &AVal, t: ScalarType, alarms: &mut AlarmSet) -> AVal {
    let ptr_operand = matches!(x, AVal::Ptr(..)) || matches!(y, AVal::Ptr(..));
    if op.is_comparison() && ptr_operand {
        return pointer_compare(op, x, y, alarms);
    }
    if t.is_ptr() {
        return pointer_arith(cx, op, x, y, alarms);
    }
    match (x, y) {
        (AVal::Num(a), AVal::Num(b)) => AVal::Num(cx.arith.binary(op, a, b, t, alarms)),
        (AVal::Ptr(..), AVal::Ptr(..)) if op == BinOp::Sub => pointer_diff(cx, x, y, t, alarms),
        _ => {
            alarms.add(AlarmKind::InvalidPointer);
            AVal::bottom(t)
        }
    }
}

fn cast(cx: &EvalCtx, t: ScalarType, v: &AVal, alarms: &mut AlarmSet) -> AVal {
    let abi = cx.arith.abi;
    match v {
        AVal::Ptr(..) if t.is_ptr() => v.clone(),
        AVal::Num(n) if t.is_ptr() => {
            if n.is_zero() {
                AVal::null()
            } else {
                AVal::top_ptr()
            }
        }
        AVal::Ptr(b, _) => {
            if v.is_zero() {
                AVal::Num(if t.is_float() { NumVal::float_range(0.0, 0.0) } else { NumVal::int_const(0) })
            } else if b.has_addressable() || b.has_invalid() {
                AVal::top(t, abi)
            } else {
                AVal::bottom(t)
            }
        }
        AVal::Num(n) => AVal::Num(cx.arith.cast(t, n, alarms)),
    }
}

fn shift(off: &NumVal, by: &NumVal, sub: bool) -> NumVal {
    let by = if sub { NumVal::int(by.itv().neg(), by.cong().neg()) } else { *by };
    NumVal::int(off.itv().add(&by.itv()), off.cong().add(&by.cong()))
}

fn backward_binary(op: BinOp, x: &AVal, y: &AVal, r: &AVal, t: ScalarType) -> (AVal, AVal) {
    match (x, y, r) {
        (AVal::Num(a), AVal::Num(b), AVal::Num(rv)) => {
            let (na, nb) = numeric::backward_binary(op, a, b, rv, t);
            (AVal::Num(na), AVal::Num(nb))
        }
        (AVal::Ptr(bs, off), AVal::Num(j), AVal::Ptr(rb, ro)) if t.is_ptr() && !bs.is_top() && !rb.is_top() => {
            let sub = op == BinOp::Sub;
            let nbs = bs.only_addressable().meet(rb);
            let noff = off.meet(&shift(ro, j, !sub));
            let d = shift(ro, off, true);
            let nj = if sub { NumVal::int(d.itv().neg(), d.cong().neg()) } else { d };
            (AVal::ptr(nbs, noff), AVal::Num(j.meet(&nj)))
        }
        (_, _, AVal::Num(rv)) if op.is_comparison() => match rv.singleton() {
            Some(1) => pointer_refine(op, x, y),
            Some(0) => pointer_refine(op.negate(), x, y),
            _ => (x.clone(), y.clone()),
        },
        _ => (x.clone(), y.clone()),
    }
}

/// Refines pointer operands of a comparison known to hold.
fn pointer_refine(op: BinOp, x: &AVal, y: &AVal) -> (AVal, AVal) {
    let px = match x {
        AVal::Num(n) if n.contains_int(0) => AVal::null(),
        AVal::Num(_) => return (x.bottom_like(), y.bottom_like()),
        p => p.clone(),
    };
    let py = match y {
        AVal::Num(n) if n.contains_int(0) => AVal::null(),
        AVal::Num(_) => return (x.bottom_like(), y.bottom_like()),
        p => p.clone(),
    };
    let (AVal::Ptr(b1, o1), AVal::Ptr(b2, o2)) = (&px, &py) else { unreachable!() };
    let (b1, b2) = (b1.without(PBase::Invalid), b2.without(PBase::Invalid));
    let back = |orig: &AVal, p: AVal| match orig {
        AVal::Num(n) => {
            if p.is_bot() {
                orig.bottom_like()
            } else {
                AVal::Num(numeric::backward_truth(n, &NumVal::int_const(0)))
            }
        }
        _ => p,
    };
    let (r1, r2) = match op {
        BinOp::Eq => {
            let m = AVal::ptr(b1.clone(), *o1).meet(&AVal::ptr(b2.clone(), *o2));
            (m.clone(), m)
        }
        BinOp::Ne => {
            let drop = |a: &BaseSet, oa: &NumVal, b: &BaseSet, ob: &NumVal| match b.as_single() {
                Some(PBase::Null) => AVal::ptr(a.without(PBase::Null), *oa),
                Some(s) if a.as_single() == Some(s) => {
                    let (na, _) = numeric::refine_compare(BinOp::Ne, oa, ob);
                    AVal::ptr(a.clone(), na)
                }
                _ => AVal::ptr(a.clone(), *oa),
            };
            (drop(&b1, o1, &b2, o2), drop(&b2, o2, &b1, o1))
        }
        _ => {
            let keep_null = matches!(op, BinOp::Le | BinOp::Ge);
            let strip = |a: &BaseSet, other: &BaseSet| {
                if keep_null && other.has_null() {
                    a.clone()
                } else {
                    a.without(PBase::Null)
                }
            };
            let (s1, s2) = (strip(&b1, &b2), strip(&b2, &b1));
            match (s1.only_addressable().as_single(), s2.only_addressable().as_single()) {
                (Some(p), Some(q)) if p == q => {
                    let (n1, n2) = numeric::refine_compare(op, o1, o2);
                    (AVal::ptr(s1, n1), AVal::ptr(s2, n2))
                }
                _ => (AVal::ptr(s1, *o1), AVal::ptr(s2, *o2)),
            }
        }
    };
    (back(x, r1), back(y, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abi::Abi;
    use crate::numeric::OverflowPolicy;

    fn cfg() -> Cfg {
        crate::frontend::compile("int a[10]; int *p; void main(void){}", &Abi::default(), &Default::default()).unwrap()
    }

    fn cell(k: u32, t: ScalarType) -> Box<AExpr<u32>> {
        Box::new(AExpr::Cell(k, t))
    }

    #[test]
    fn pointer_loop_guard() {
        let abi = Abi::default();
        let cfg = cfg();
        let a = cfg.var_by_name("a").unwrap();
        let cx = EvalCtx { arith: Arith { abi: &abi, policy: OverflowPolicy::Wrap }, cfg: &cfg };
        let mut env: ValueEnv<u32> = ValueEnv::new();
        env.set(0, AVal::ptr(BaseSet::single(PBase::Var(a)), NumVal::int_range(0, 40)));
        let end = AExpr::Binary(
            BinOp::Add,
            Box::new(AExpr::AddrOf(Base::Var(a))),
            Box::new(AExpr::Const(AVal::Num(NumVal::int_const(40)), ScalarType::Long)),
            ScalarType::Ptr,
        );
        let g = AExpr::Binary(BinOp::Lt, cell(0, ScalarType::Ptr), Box::new(end), ScalarType::Int);
        let mut al = AlarmSet::EMPTY;
        assert_eq!(g.eval(&env, &cx, &mut al), AVal::Num(NumVal::int_range(0, 1)));
        assert!(al.is_empty());
        g.assume(&mut env, &cx, false);
        match env.get(&0).unwrap() {
            AVal::Ptr(_, off) => assert_eq!(off.itv(), Itv::new(0, 39)),
            _ => panic!(),
        }
    }

    #[test]
    fn null_check_refines() {
        let abi = Abi::default();
        let cfg = cfg();
        let a = cfg.var_by_name("a").unwrap();
        let cx = EvalCtx { arith: Arith { abi: &abi, policy: OverflowPolicy::Wrap }, cfg: &cfg };
        let mut env: ValueEnv<u32> = ValueEnv::new();
        let p = AVal::addr(Base::Var(a), 0).join(&AVal::null());
        env.set(0, p);
        let g = AExpr::Binary(
            BinOp::Ne,
            cell(0, ScalarType::Ptr),
            Box::new(AExpr::Const(AVal::Num(NumVal::int_const(0)), ScalarType::Int)),
            ScalarType::Int,
        );
        let mut then = env.clone();
        g.assume(&mut then, &cx, false);
        assert_eq!(then.get(&0), Some(&AVal::addr(Base::Var(a), 0)));
        g.assume(&mut env, &cx, true);
        assert_eq!(env.get(&0), Some(&AVal::null()));
    }

    #[test]
    fn null_arithmetic_alarm() {
        let abi = Abi::default();
        let cfg = cfg();
        let cx = EvalCtx { arith: Arith { abi: &abi, policy: OverflowPolicy::Wrap }, cfg: &cfg };
        let env: ValueEnv<u32> = ValueEnv::new();
        let e: AExpr<u32> = AExpr::Binary(
            BinOp::Add,
            Box::new(AExpr::Const(AVal::null(), ScalarType::Ptr)),
            Box::new(AExpr::Const(AVal::Num(NumVal::int_const(4)), ScalarType::Int)),
            ScalarType::Ptr,
        );
        let mut al = AlarmSet::EMPTY;
        assert!(e.eval(&env, &cx, &mut al).is_bot());
        assert!(al.contains(AlarmKind::NullDeref));
    }
}
