//! Backward transfer functions: given operand values and a constraint on
//! the result, shrink the operands. Results are taken as mathematical
//! values, since executions that overflow stop at the faulty operation.

use crate::abi::Abi;
use crate::ir::{BinOp, UnOp};
use crate::scalar::ScalarType;

use super::congruence::Cong;
use super::interval::{Bound, Itv};
use super::value::{refine_compare, FItv, NumVal};

fn is_int(v: &NumVal) -> bool {
    matches!(v, NumVal::Int(..))
}

fn math_add(a: &NumVal, b: &NumVal) -> NumVal {
    NumVal::int(a.itv().add(&b.itv()), a.cong().add(&b.cong()))
}

fn math_sub(a: &NumVal, b: &NumVal) -> NumVal {
    NumVal::int(a.itv().sub(&b.itv()), a.cong().sub(&b.cong()))
}

fn math_neg(a: &NumVal) -> NumVal {
    NumVal::int(a.itv().neg(), a.cong().neg())
}

/// Operand values whose product with the nonzero constant `c` lies in `r`.
fn div_by_factor(r: &NumVal, c: i128) -> NumVal {
    let (lo, hi) = (r.itv().lo, r.itv().hi);
    let (lo, hi) = if c > 0 { (lo, hi) } else { (hi.neg(), lo.neg()) };
    let c = c.abs();
    let lo = match lo {
        Bound::Fin(x) => Bound::Fin(x.div_euclid(c) + (x.rem_euclid(c) != 0) as i128),
        b => b,
    };
    let hi = match hi {
        Bound::Fin(x) => Bound::Fin(x.div_euclid(c)),
        b => b,
    };
    NumVal::int(Itv::bounds(lo, hi), Cong::TOP)
}

/// Dividends whose truncated quotient by the nonzero constant `c` lies
/// in `r`.
fn dividends(r: &NumVal, c: i128) -> NumVal {
    let q = r.itv();
    let (l, h) = if c > 0 { (q.lo, q.hi) } else { (q.hi.neg(), q.lo.neg()) };
    let c = c.abs();
    let lo = l.mul(Bound::Fin(c)).add(Bound::Fin(if l > Bound::Fin(0) { 0 } else { -(c - 1) }));
    let hi = h.mul(Bound::Fin(c)).add(Bound::Fin(if h < Bound::Fin(0) { 0 } else { c - 1 }));
    NumVal::int(Itv::bounds(lo, hi), Cong::TOP)
}

fn zero_like(a: &NumVal) -> NumVal {
    match a {
        NumVal::Int(..) => NumVal::int_const(0),
        NumVal::Float(_) => NumVal::Float(FItv { lo: 0.0, hi: 0.0 }),
    }
}

/// Restricts `a` to the values whose truth value lies in `truth`.
pub fn backward_truth(a: &NumVal, truth: &NumVal) -> NumVal {
    if truth.is_bot() {
        a.bottom_like()
    } else if truth.is_zero() {
        a.meet(&zero_like(a))
    } else if !truth.contains_int(0) {
        a.exclude_zero()
    } else {
        *a
    }
}

pub fn backward_unary(op: UnOp, a: &NumVal, r: &NumVal, t: ScalarType) -> NumVal {
    if r.is_bot() {
        return a.bottom_like();
    }
    match op {
        UnOp::Not => {
            let truth = match r.singleton() {
                Some(0) => NumVal::int_range(1, 1),
                Some(1) => NumVal::int_const(0),
                _ => return *a,
            };
            backward_truth(a, &truth)
        }
        UnOp::Neg if is_int(a) && is_int(r) => a.meet(&math_neg(r)),
        UnOp::Neg => {
            let f = r.fitv();
            a.meet(&NumVal::float_range(-f.hi, -f.lo))
        }
        UnOp::BitNot if t.is_signed() && is_int(a) => a.meet(&math_sub(&math_neg(r), &NumVal::int_const(1))),
        UnOp::BitNot => *a,
    }
}

pub fn backward_binary(op: BinOp, a: &NumVal, b: &NumVal, r: &NumVal, t: ScalarType) -> (NumVal, NumVal) {
    if r.is_bot() || a.is_bot() || b.is_bot() {
        return (a.bottom_like(), b.bottom_like());
    }
    if op.is_comparison() {
        return match r.singleton() {
            Some(1) => refine_compare(op, a, b),
            Some(0) => refine_compare(op.negate(), a, b),
            _ => (*a, *b),
        };
    }
    let ints = is_int(a) && is_int(b) && t.is_integer();
    match op {
        BinOp::Add if ints => (a.meet(&math_sub(r, b)), b.meet(&math_sub(r, a))),
        BinOp::Sub if ints => (a.meet(&math_add(r, b)), b.meet(&math_sub(a, r))),
        BinOp::Mul if ints => {
            let mut na = *a;
            let mut nb = *b;
            if let Some(c) = b.singleton().filter(|c| *c != 0) {
                na = na.meet(&div_by_factor(r, c));
                na = na.meet(&NumVal::Int(Itv::TOP, r.cong().div_exact(c)));
            }
            if let Some(c) = a.singleton().filter(|c| *c != 0) {
                nb = nb.meet(&div_by_factor(r, c));
                nb = nb.meet(&NumVal::Int(Itv::TOP, r.cong().div_exact(c)));
            }
            (na, nb)
        }
        BinOp::Div if ints => {
            let nb = b.exclude_zero();
            match nb.singleton() {
                Some(c) => (a.meet(&dividends(r, c)), nb),
                None => (*a, nb),
            }
        }
        BinOp::Div | BinOp::Mod => (*a, b.exclude_zero()),
        _ => (*a, *b),
    }
}

/// Restricts the operand of a conversion to type `t`, from operand type
/// `from`, given the converted result `r`.
pub fn backward_cast(from: ScalarType, t: ScalarType, a: &NumVal, r: &NumVal, abi: &Abi) -> NumVal {
    if r.is_bot() {
        return a.bottom_like();
    }
    match a {
        NumVal::Int(..) if t.is_integer() => {
            let (lo, hi) = abi.int_range(t);
            if a.itv().leq(&Itv::new(lo, hi)) {
                a.meet(r)
            } else {
                *a
            }
        }
        NumVal::Int(..) if t.is_float() => {
            let limit = if abi.size(t) <= 4 { 1i128 << 24 } else { 1i128 << 53 };
            if a.itv().leq(&Itv::new(-limit, limit)) {
                a.meet(r)
            } else {
                *a
            }
        }
        NumVal::Float(_) if t.is_integer() => {
            let i = r.itv();
            let lo = match i.lo {
                Bound::Fin(x) => (x - 1) as f64,
                _ => f64::NEG_INFINITY,
            };
            let hi = match i.hi {
                Bound::Fin(x) => (x + 1) as f64,
                _ => f64::INFINITY,
            };
            a.meet(&NumVal::float_range(lo.next_down(), hi.next_up()))
        }
        NumVal::Float(_) if t.is_float() && abi.size(t) >= abi.size(from) => a.meet(r),
        _ => *a,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_constraint() {
        let (a, b) = backward_binary(
            BinOp::Add,
            &NumVal::int_range(0, 100),
            &NumVal::int_const(5),
            &NumVal::int_range(0, 10),
            ScalarType::Int,
        );
        assert_eq!(a.itv(), Itv::new(0, 5));
        assert_eq!(b, NumVal::int_const(5));
    }

    #[test]
    fn quotient_constraint() {
        let (a, _) = backward_binary(
            BinOp::Div,
            &NumVal::int_range(-1000, 1000),
            &NumVal::int_const(256),
            &NumVal::int_const(0),
            ScalarType::Int,
        );
        assert_eq!(a.itv(), Itv::new(-255, 255));
        let (a, _) = backward_binary(
            BinOp::Div,
            &NumVal::int_range(0, 65535),
            &NumVal::int_const(256),
            &NumVal::int_range(1, 255),
            ScalarType::Int,
        );
        assert_eq!(a.itv(), Itv::new(256, 65535));
    }

    #[test]
    fn truth_refinement() {
        let a = NumVal::int_range(0, 9);
        assert_eq!(backward_truth(&a, &NumVal::int_const(0)), NumVal::int_const(0));
        assert_eq!(backward_truth(&a, &NumVal::int_const(1)).itv(), Itv::new(1, 9));
        let (x, _) =
            backward_binary(BinOp::Ge, &a, &NumVal::int_const(4), &NumVal::int_const(0), ScalarType::Int);
        assert_eq!(x.itv(), Itv::new(0, 3));
    }

    #[test]
    fn wrapping_cast_is_not_inverted() {
        let abi = Abi::default();
        let a = NumVal::int_range(0, 300);
        let r = NumVal::int_range(0, 10);
        assert_eq!(backward_cast(ScalarType::Int, ScalarType::UChar, &a, &r, &abi), a);
        let a = NumVal::int_range(0, 200);
        assert_eq!(backward_cast(ScalarType::Int, ScalarType::UChar, &a, &r, &abi).itv(), Itv::new(0, 10));
    }
}
