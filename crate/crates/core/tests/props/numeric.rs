use cellscope_core::ir::{BinOp, UnOp};
use cellscope_core::numeric::{backward_binary, refine_compare, Arith, Cong, Itv, NumVal, OverflowPolicy};
use cellscope_core::{Abi, AlarmKind, AlarmSet, ScalarType};
use proptest::prelude::*;

use super::{check, Prop};

/// A set `{lo + step·k | k < count}` inside `[0, 20]`.
#[derive(Clone, Copy, Debug)]
struct Leaf {
    lo: i128,
    step: i128,
    count: i128,
}

impl Leaf {
    fn values(&self) -> Vec<i128> {
        (0..self.count).map(|k| self.lo + self.step * k).collect()
    }

    fn abs(&self) -> NumVal {
        let hi = self.lo + self.step * (self.count - 1);
        let m = if self.count == 1 { 0 } else { self.step };
        NumVal::int(Itv::new(self.lo, hi), Cong::new(m, self.lo))
    }
}

fn leaf() -> impl Strategy<Value = Leaf> {
    (0i128..=20, 1i128..=5).prop_flat_map(|(lo, step)| {
        let max = (20 - lo) / step + 1;
        (Just(lo), Just(step), 1..=max).prop_map(|(lo, step, count)| Leaf { lo, step, count })
    })
}

#[derive(Clone, Debug)]
enum E {
    Var(usize),
    Const(i128),
    Un(UnOp, Box<E>),
    Bin(BinOp, Box<E>, Box<E>),
    Cast(ScalarType, Box<E>),
}

const BINOPS: [BinOp; 16] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Shl,
    BinOp::Shr,
    BinOp::BitAnd,
    BinOp::BitOr,
    BinOp::BitXor,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
];

fn expr(casts: bool) -> impl Strategy<Value = E> {
    let base = prop_oneof![(0usize..2).prop_map(E::Var), (0i128..=20).prop_map(E::Const)];
    base.prop_recursive(3, 24, 2, move |inner| {
        let un = prop::sample::select(vec![UnOp::Neg, UnOp::BitNot, UnOp::Not]);
        let bin = prop::sample::select(BINOPS.to_vec());
        let small = if casts {
            vec![ScalarType::SChar, ScalarType::UChar, ScalarType::Short, ScalarType::UShort]
        } else {
            vec![ScalarType::UInt]
        };
        prop_oneof![
            (un, inner.clone()).prop_map(|(o, a)| E::Un(o, Box::new(a))),
            (bin, inner.clone(), inner.clone()).prop_map(|(o, a, b)| E::Bin(o, Box::new(a), Box::new(b))),
            (prop::sample::select(small), inner).prop_map(|(t, a)| E::Cast(t, Box::new(a))),
        ]
    })
}

fn wrap(t: ScalarType, x: i128, abi: &Abi) -> i128 {
    let bits = abi.bits(t);
    let m = 1i128 << bits;
    let u = x.rem_euclid(m);
    if t.is_signed() && u >= m / 2 {
        u - m
    } else {
        u
    }
}

fn fits(t: ScalarType, x: i128, abi: &Abi) -> bool {
    let (lo, hi) = abi.int_range(t);
    lo <= x && x <= hi
}

/// Reference semantics over machine integers: the value, or the kind of
/// the error stopping the evaluation. Wrapping overflows are logged.
fn concrete(e: &E, env: &[i128; 2], t: ScalarType, abi: &Abi, log: &mut Vec<AlarmKind>) -> Result<i128, AlarmKind> {
    let fit = |x: i128, log: &mut Vec<AlarmKind>| {
        if fits(t, x, abi) {
            x
        } else {
            log.push(AlarmKind::Overflow);
            wrap(t, x, abi)
        }
    };
    Ok(match e {
        E::Var(i) => env[*i],
        E::Const(c) => *c,
        E::Cast(u, a) => wrap(*u, concrete(a, env, t, abi, log)?, abi),
        E::Un(op, a) => {
            let x = concrete(a, env, t, abi, log)?;
            match op {
                UnOp::Neg => fit(-x, log),
                UnOp::BitNot if t.is_signed() => !x,
                UnOp::BitNot => wrap(t, !x, abi),
                UnOp::Not => (x == 0) as i128,
            }
        }
        E::Bin(op, a, b) => {
            let x = concrete(a, env, t, abi, log)?;
            let y = concrete(b, env, t, abi, log)?;
            let bits = abi.bits(t) as i128;
            match op {
                BinOp::Add => fit(x + y, log),
                BinOp::Sub => fit(x - y, log),
                BinOp::Mul => fit(x * y, log),
                BinOp::Div | BinOp::Mod if y == 0 => return Err(AlarmKind::DivByZero),
                BinOp::Div => fit(x / y, log),
                BinOp::Mod => x % y,
                BinOp::Shl | BinOp::Shr if !(0..bits).contains(&y) => return Err(AlarmKind::Overflow),
                BinOp::Shl if x < 0 => return Err(AlarmKind::Overflow),
                BinOp::Shl => fit(x << y, log),
                BinOp::Shr => x >> y,
                BinOp::BitAnd => x & y,
                BinOp::BitOr => x | y,
                BinOp::BitXor => x ^ y,
                BinOp::Eq => (x == y) as i128,
                BinOp::Ne => (x != y) as i128,
                BinOp::Lt => (x < y) as i128,
                BinOp::Le => (x <= y) as i128,
                BinOp::Gt => (x > y) as i128,
                BinOp::Ge => (x >= y) as i128,
            }
        }
    })
}

fn abstract_eval(e: &E, env: &[NumVal; 2], t: ScalarType, ar: &Arith, alarms: &mut AlarmSet) -> NumVal {
    match e {
        E::Var(i) => env[*i],
        E::Const(c) => NumVal::int_const(*c),
        E::Cast(u, a) => {
            let v = abstract_eval(a, env, t, ar, alarms);
            ar.cast(*u, &v, alarms)
        }
        E::Un(op, a) => {
            let v = abstract_eval(a, env, t, ar, alarms);
            ar.unary(*op, &v, t, alarms)
        }
        E::Bin(op, a, b) => {
            let x = abstract_eval(a, env, t, ar, alarms);
            let y = abstract_eval(b, env, t, ar, alarms);
            ar.binary(*op, &x, &y, t, alarms)
        }
    }
}

fn eval_check(e: &E, x: Leaf, y: Leaf, t: ScalarType) -> Result<(), TestCaseError> {
    let abi = Abi::default();
    let ar = Arith { abi: &abi, policy: OverflowPolicy::Wrap };
    let mut alarms = AlarmSet::EMPTY;
    let r = abstract_eval(e, &[x.abs(), y.abs()], t, &ar, &mut alarms);
    for a in x.values() {
        for b in y.values() {
            let mut log = Vec::new();
            let got = concrete(e, &[a, b], t, &abi, &mut log);
            for k in &log {
                prop_assert!(alarms.contains(*k), "{:?} at x={} y={} not flagged", k, a, b);
            }
            match got {
                Ok(v) => prop_assert!(r.contains_int(v), "{} not in {} at x={} y={}", v, r, a, b),
                Err(k) => prop_assert!(alarms.contains(k), "{:?} at x={} y={} not flagged", k, a, b),
            }
        }
    }
    Ok(())
}

fn refinement(op: BinOp, x: Leaf, y: Leaf) -> Result<(), TestCaseError> {
    let (ra, rb) = refine_compare(op, &x.abs(), &y.abs());
    let abi = Abi::default();
    for a in x.values() {
        for b in y.values() {
            let e = E::Bin(op, Box::new(E::Const(a)), Box::new(E::Const(b)));
            if concrete(&e, &[0, 0], ScalarType::Int, &abi, &mut Vec::new()) == Ok(1) {
                prop_assert!(ra.contains_int(a) && rb.contains_int(b), "{} {:?} {} lost: {} {}", a, op, b, ra, rb);
            }
        }
    }
    Ok(())
}

fn backward(op: BinOp, x: Leaf, y: Leaf, lo: i128, len: i128) -> Result<(), TestCaseError> {
    let r = NumVal::int_range(lo, lo + len);
    let (ra, rb) = backward_binary(op, &x.abs(), &y.abs(), &r, ScalarType::Int);
    let abi = Abi::default();
    for a in x.values() {
        for b in y.values() {
            let e = E::Bin(op, Box::new(E::Const(a)), Box::new(E::Const(b)));
            if let Ok(v) = concrete(&e, &[0, 0], ScalarType::Int, &abi, &mut Vec::new()) {
                if r.contains_int(v) {
                    prop_assert!(ra.contains_int(a) && rb.contains_int(b), "{} {:?} {} = {} lost: {} {}", a, op, b, v, ra, rb);
                }
            }
        }
    }
    Ok(())
}

pub fn props() -> Vec<Prop> {
    vec![
        Prop {
            name: "signed expressions are sound",
            run: |n| check(n, (expr(true), leaf(), leaf()), |(e, x, y)| eval_check(&e, x, y, ScalarType::Int)),
        },
        Prop {
            name: "unsigned expressions are sound",
            run: |n| check(n, (expr(false), leaf(), leaf()), |(e, x, y)| eval_check(&e, x, y, ScalarType::UInt)),
        },
        Prop {
            name: "comparison refinement keeps solutions",
            run: |n| check(n, (prop::sample::select(BINOPS[10..].to_vec()), leaf(), leaf()), |(op, x, y)| refinement(op, x, y)),
        },
        Prop {
            name: "backward arithmetic keeps solutions",
            run: |n| {
                let s = (prop::sample::select(BINOPS[..5].to_vec()), leaf(), leaf(), -40i128..=400, 0i128..=200);
                check(n, s, |(op, x, y, lo, len)| backward(op, x, y, lo, len))
            },
        },
    ]
}
