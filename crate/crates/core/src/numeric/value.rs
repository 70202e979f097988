use std::fmt;

use crate::abi::Abi;
use crate::alarm::{AlarmKind, AlarmSet};
use crate::ir::{BinOp, UnOp};
use crate::scalar::ScalarType;

use super::congruence::Cong;
use super::interval::{BitOp, Bound, Itv};

/// What happens to integer results outside their type after the overflow
/// alarm was raised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum OverflowPolicy {
    #[default]
    Wrap,
    /// Signed results are clamped to the type range; unsigned ones wrap.
    ClampSigned,
}

/// Floating-point interval over finite values; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FItv {
    pub lo: f64,
    pub hi: f64,
}

impl FItv {
    pub const BOT: FItv = FItv { lo: 1.0, hi: -1.0 };

    pub fn is_bot(&self) -> bool {
        !(self.lo <= self.hi)
    }
}

/// Abstract value of a real-typed cell: interval and congruence for
/// integers (reduced), interval for floats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NumVal {
    Int(Itv, Cong),
    Float(FItv),
}

fn down(abi: &Abi, t: ScalarType, x: f64) -> f64 {
    if abi.size(t) <= 4 {
        let y = x as f32;
        let y = if (y as f64) > x { y.next_down() } else { y };
        y as f64
    } else {
        x
    }
}

fn up(abi: &Abi, t: ScalarType, x: f64) -> f64 {
    if abi.size(t) <= 4 {
        let y = x as f32;
        let y = if (y as f64) < x { y.next_up() } else { y };
        y as f64
    } else {
        x
    }
}

fn outward(abi: &Abi, t: ScalarType, x: f64, upward: bool) -> f64 {
    if upward {
        let y = up(abi, t, x);
        if abi.size(t) <= 4 {
            ((y as f32).next_up()) as f64
        } else {
            y.next_up()
        }
    } else {
        let y = down(abi, t, x);
        if abi.size(t) <= 4 {
            ((y as f32).next_down()) as f64
        } else {
            y.next_down()
        }
    }
}

impl NumVal {
    pub fn int(itv: Itv, cong: Cong) -> NumVal {
        NumVal::Int(itv, cong).reduce()
    }

    pub fn int_const(x: i128) -> NumVal {
        NumVal::Int(Itv::single(x), Cong::constant(x))
    }

    pub fn int_range(lo: i128, hi: i128) -> NumVal {
        NumVal::int(Itv::new(lo, hi), Cong::TOP)
    }

    pub fn float_range(lo: f64, hi: f64) -> NumVal {
        NumVal::Float(FItv { lo, hi })
    }

    pub fn top(t: ScalarType, abi: &Abi) -> NumVal {
        if t.is_float() {
            let m = abi.float_max(t);
            NumVal::float_range(-m, m)
        } else if t.is_integer() {
            let (lo, hi) = abi.int_range(t);
            NumVal::int_range(lo, hi)
        } else {
            NumVal::int(Itv::TOP, Cong::TOP)
        }
    }

    pub fn bottom_like(&self) -> NumVal {
        match self {
            NumVal::Int(..) => NumVal::Int(Itv::BOT, Cong::TOP),
            NumVal::Float(_) => NumVal::Float(FItv::BOT),
        }
    }

    pub fn is_bot(&self) -> bool {
        match self {
            NumVal::Int(i, _) => i.is_bot(),
            NumVal::Float(f) => f.is_bot(),
        }
    }

    pub fn itv(&self) -> Itv {
        match self {
            NumVal::Int(i, _) => *i,
            NumVal::Float(f) if f.is_bot() => Itv::BOT,
            NumVal::Float(f) => Itv::bounds(float_bound(f.lo.floor()), float_bound(f.hi.ceil())),
        }
    }

    pub fn cong(&self) -> Cong {
        match self {
            NumVal::Int(_, c) => *c,
            NumVal::Float(_) => Cong::TOP,
        }
    }

    pub fn fitv(&self) -> FItv {
        match self {
            NumVal::Float(f) => *f,
            NumVal::Int(i, _) if i.is_bot() => FItv::BOT,
            NumVal::Int(i, _) => FItv { lo: bound_f64(i.lo), hi: bound_f64(i.hi) },
        }
    }

    pub fn singleton(&self) -> Option<i128> {
        match self {
            NumVal::Int(i, _) => i.singleton(),
            NumVal::Float(_) => None,
        }
    }

    pub fn contains_int(&self, x: i128) -> bool {
        match self {
            NumVal::Int(i, c) => i.contains(x) && c.contains(x),
            NumVal::Float(f) => f.lo <= x as f64 && x as f64 <= f.hi,
        }
    }

    pub fn contains_float(&self, x: f64) -> bool {
        let f = self.fitv();
        f.lo <= x && x <= f.hi
    }

    pub fn may_be_zero(&self) -> bool {
        match self {
            NumVal::Int(..) => self.contains_int(0),
            NumVal::Float(f) => f.lo <= 0.0 && 0.0 <= f.hi,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NumVal::Int(i, _) => i.singleton() == Some(0),
            NumVal::Float(f) => f.lo == 0.0 && f.hi == 0.0,
        }
    }

    /// Tightens the interval to congruent bounds and the congruence to
    /// singletons.
    pub fn reduce(self) -> NumVal {
        match self {
            NumVal::Int(itv, cong) => {
                if itv.is_bot() {
                    return NumVal::Int(Itv::BOT, Cong::TOP);
                }
                if let Some(r) = cong.as_constant() {
                    return if itv.contains(r) { NumVal::int_const(r) } else { NumVal::Int(Itv::BOT, Cong::TOP) };
                }
                let m = cong.modulus();
                let r = cong.residue();
                let lo = match itv.lo {
                    Bound::Fin(l) if m > 1 => Bound::Fin(l + (r - l).rem_euclid(m)),
                    b => b,
                };
                let hi = match itv.hi {
                    Bound::Fin(h) if m > 1 => Bound::Fin(h - (h - r).rem_euclid(m)),
                    b => b,
                };
                let itv = Itv::bounds(lo, hi);
                if itv.is_bot() {
                    return NumVal::Int(Itv::BOT, Cong::TOP);
                }
                match itv.singleton() {
                    Some(x) => NumVal::int_const(x),
                    None => NumVal::Int(itv, cong),
                }
            }
            NumVal::Float(f) if f.is_bot() => NumVal::Float(FItv::BOT),
            v => v,
        }
    }

    pub fn leq(&self, o: &NumVal) -> bool {
        if self.is_bot() {
            return true;
        }
        match (self, o) {
            (NumVal::Int(i1, c1), NumVal::Int(i2, c2)) => i1.leq(i2) && c1.leq(c2),
            _ => {
                let (a, b) = (self.fitv(), o.fitv());
                b.lo <= a.lo && a.hi <= b.hi
            }
        }
    }

    pub fn join(&self, o: &NumVal) -> NumVal {
        if self.is_bot() {
            return *o;
        }
        if o.is_bot() {
            return *self;
        }
        match (self, o) {
            (NumVal::Int(i1, c1), NumVal::Int(i2, c2)) => NumVal::int(i1.join(i2), c1.join(c2)),
            _ => {
                let (a, b) = (self.fitv(), o.fitv());
                NumVal::float_range(a.lo.min(b.lo), a.hi.max(b.hi))
            }
        }
    }

    pub fn meet(&self, o: &NumVal) -> NumVal {
        match (self, o) {
            (NumVal::Int(i1, c1), NumVal::Int(i2, c2)) => match c1.meet(c2) {
                Some(c) => NumVal::int(i1.meet(i2), c),
                None => NumVal::Int(Itv::BOT, Cong::TOP),
            },
            (NumVal::Float(a), _) => {
                let b = o.fitv();
                NumVal::Float(FItv { lo: a.lo.max(b.lo), hi: a.hi.min(b.hi) }).reduce()
            }
            (NumVal::Int(i, c), NumVal::Float(f)) => {
                let lo = if f.lo.is_finite() { float_bound(f.lo.ceil()) } else { Bound::NegInf };
                let hi = if f.hi.is_finite() { float_bound(f.hi.floor()) } else { Bound::PosInf };
                NumVal::int(i.meet(&Itv::bounds(lo, hi)), *c)
            }
        }
    }

    /// Widening; congruences are only widened when `cong_widen` holds and
    /// are joined otherwise.
    pub fn widen(&self, o: &NumVal, thresholds: &[i128], cong_widen: bool) -> NumVal {
        if self.is_bot() {
            return *o;
        }
        if o.is_bot() {
            return *self;
        }
        match (self, o) {
            (NumVal::Int(i1, c1), NumVal::Int(i2, c2)) => {
                let c = if cong_widen { c1.widen(c2) } else { c1.join(c2) };
                NumVal::int(i1.widen(i2, thresholds), c)
            }
            _ => {
                let (a, b) = (self.fitv(), o.fitv());
                let lo = if b.lo < a.lo {
                    thresholds.iter().rev().map(|t| *t as f64).find(|t| *t <= b.lo).unwrap_or(f64::MIN)
                } else {
                    a.lo
                };
                let hi = if b.hi > a.hi {
                    thresholds.iter().map(|t| *t as f64).find(|t| *t >= b.hi).unwrap_or(f64::MAX)
                } else {
                    a.hi
                };
                NumVal::float_range(lo, hi)
            }
        }
    }

    pub fn narrow(&self, o: &NumVal) -> NumVal {
        match (self, o) {
            (NumVal::Int(i1, c1), NumVal::Int(i2, _)) => NumVal::int(i1.narrow(i2), *c1),
            _ => {
                let (a, b) = (self.fitv(), o.fitv());
                let lo = if a.lo <= f64::MIN { b.lo } else { a.lo };
                let hi = if a.hi >= f64::MAX { b.hi } else { a.hi };
                NumVal::float_range(lo, hi)
            }
        }
    }

    /// The value without zero, when zero is an interval end point.
    pub fn exclude_zero(&self) -> NumVal {
        match self {
            NumVal::Int(i, c) => {
                let mut i = *i;
                if i.lo == Bound::Fin(0) {
                    i.lo = Bound::Fin(1);
                }
                if i.hi == Bound::Fin(0) {
                    i.hi = Bound::Fin(-1);
                }
                NumVal::int(i, *c)
            }
            NumVal::Float(f) => {
                if f.lo == 0.0 && f.hi == 0.0 {
                    NumVal::Float(FItv::BOT)
                } else {
                    *self
                }
            }
        }
    }

}

fn float_bound(x: f64) -> Bound {
    if x.is_nan() || x < i128::MIN as f64 {
        Bound::NegInf
    } else if x >= i128::MAX as f64 {
        Bound::PosInf
    } else {
        Bound::Fin(x as i128)
    }
}

fn exact_below(b: Bound, x: f64) -> f64 {
    match b {
        Bound::Fin(v) if x.is_finite() && x as i128 > v => x.next_down(),
        _ => x,
    }
}

fn exact_above(b: Bound, x: f64) -> f64 {
    match b {
        Bound::Fin(v) if x.is_finite() && (x as i128) < v => x.next_up(),
        _ => x,
    }
}

fn bound_f64(b: Bound) -> f64 {
    match b {
        Bound::NegInf => f64::NEG_INFINITY,
        Bound::PosInf => f64::INFINITY,
        Bound::Fin(x) => x as f64,
    }
}

impl fmt::Display for NumVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumVal::Int(i, _) if i.is_bot() => f.write_str("bot"),
            NumVal::Int(i, c) => match c.as_constant() {
                Some(_) => write!(f, "{}", i),
                None if c.is_top() => write!(f, "{}", i),
                None => write!(f, "{} /\\ {}", i, c),
            },
            NumVal::Float(x) if x.is_bot() => f.write_str("bot"),
            NumVal::Float(x) => write!(f, "[{:?}, {:?}]", x.lo, x.hi),
        }
    }
}

/// Typing context of the arithmetic transfer functions.
#[derive(Clone, Copy, Debug)]
pub struct Arith<'a> {
    pub abi: &'a Abi,
    pub policy: OverflowPolicy,
}

impl Arith<'_> {
    fn range(&self, t: ScalarType) -> Itv {
        let (lo, hi) = self.abi.int_range(t);
        Itv::new(lo, hi)
    }

    /// Brings a mathematical integer result into type `t`, flagging
    /// overflow when it does not fit.
    pub fn fit(&self, t: ScalarType, v: NumVal, alarms: &mut AlarmSet) -> NumVal {
        let NumVal::Int(itv, cong) = v.reduce() else { return v };
        if itv.is_bot() || itv.leq(&self.range(t)) {
            return NumVal::int(itv, cong);
        }
        alarms.add(AlarmKind::Overflow);
        if self.policy == OverflowPolicy::ClampSigned && t.is_signed() {
            return NumVal::int(itv.meet(&self.range(t)), cong);
        }
        self.wrap(t, NumVal::Int(itv, cong))
    }

    /// Modular reduction into the range of `t`, without alarm.
    pub fn wrap(&self, t: ScalarType, v: NumVal) -> NumVal {
        let NumVal::Int(itv, cong) = v else { return v };
        let range = self.range(t);
        if itv.is_bot() || itv.leq(&range) {
            return v;
        }
        let bits = self.abi.bits(t);
        let modulus = 1i128 << bits;
        let w = |x: i128| {
            let u = x.rem_euclid(modulus);
            if t.is_signed() && u >= modulus / 2 {
                u - modulus
            } else {
                u
            }
        };
        let cong = cong.modulo(modulus);
        if let (Bound::Fin(lo), Bound::Fin(hi)) = (itv.lo, itv.hi) {
            if hi - lo < modulus {
                let (a, b) = (w(lo), w(hi));
                if a <= b {
                    return NumVal::int(Itv::new(a, b), cong);
                }
            }
        }
        NumVal::int(range, cong)
    }

    fn float_fit(&self, t: ScalarType, lo: f64, hi: f64, alarms: &mut AlarmSet) -> NumVal {
        if lo.is_nan() || hi.is_nan() {
            alarms.add(AlarmKind::Overflow);
            return NumVal::top(t, self.abi);
        }
        let max = self.abi.float_max(t);
        let lo = outward(self.abi, t, lo, false);
        let hi = outward(self.abi, t, hi, true);
        if lo < -max || hi > max {
            alarms.add(AlarmKind::Overflow);
        }
        NumVal::float_range(lo.max(-max), hi.min(max))
    }

    pub fn binary(&self, op: BinOp, a: &NumVal, b: &NumVal, t: ScalarType, alarms: &mut AlarmSet) -> NumVal {
        if op.is_comparison() {
            return compare(op, a, b);
        }
        if a.is_bot() || b.is_bot() {
            return NumVal::top(t, self.abi).bottom_like();
        }
        if t.is_float() {
            return self.float_binary(op, a.fitv(), b.fitv(), t, alarms);
        }
        let (i1, c1) = (a.itv(), a.cong());
        let (i2, c2) = (b.itv(), b.cong());
        match op {
            BinOp::Add => self.fit(t, NumVal::int(i1.add(&i2), c1.add(&c2)), alarms),
            BinOp::Sub => self.fit(t, NumVal::int(i1.sub(&i2), c1.sub(&c2)), alarms),
            BinOp::Mul => self.fit(t, NumVal::int(i1.mul(&i2), c1.mul(&c2)), alarms),
            BinOp::Div | BinOp::Mod => {
                if b.may_be_zero() {
                    alarms.add(AlarmKind::DivByZero);
                }
                let d = b.exclude_zero();
                if d.is_bot() {
                    return NumVal::Int(Itv::BOT, Cong::TOP);
                }
                let i2 = d.itv();
                if op == BinOp::Div {
                    let cong = match (c1.as_constant(), c2.as_constant()) {
                        (Some(x), Some(y)) if y != 0 => Cong::constant(x / y),
                        (_, Some(y)) => c1.div_exact(y),
                        _ => Cong::TOP,
                    };
                    self.fit(t, NumVal::int(i1.div(&i2), cong), alarms)
                } else {
                    let cong = match (c1.as_constant(), c2.as_constant()) {
                        (Some(x), Some(y)) if y != 0 => Cong::constant(x % y),
                        (_, Some(y)) if y != 0 => c1.modulo(y),
                        _ => Cong::TOP,
                    };
                    NumVal::int(i1.rem(&i2), cong)
                }
            }
            BinOp::Shl | BinOp::Shr => {
                let bits = self.abi.bits(t) as i128;
                let count = Itv::new(0, bits - 1);
                if !i2.leq(&count) {
                    alarms.add(AlarmKind::Overflow);
                }
                let k = NumVal::int(i2.meet(&count), c2);
                if k.is_bot() {
                    return k;
                }
                let ki = k.itv();
                if op == BinOp::Shl {
                    if i1.lo < Bound::Fin(0) {
                        alarms.add(AlarmKind::Overflow);
                    }
                    let x = NumVal::int(i1.meet(&Itv::bounds(Bound::Fin(0), Bound::PosInf)), c1);
                    if x.is_bot() {
                        return x;
                    }
                    let cong = match k.singleton() {
                        Some(s) => x.cong().mul(&Cong::constant(1i128 << s)),
                        None => Cong::TOP,
                    };
                    self.fit(t, NumVal::int(x.itv().shl(&ki), cong), alarms)
                } else {
                    let cong = match (c1.as_constant(), k.singleton()) {
                        (Some(x), Some(s)) => Cong::constant(x >> s),
                        _ => Cong::TOP,
                    };
                    NumVal::int(i1.shr(&ki), cong)
                }
            }
            BinOp::BitAnd | BinOp::BitOr | BinOp::BitXor => {
                if let (Some(x), Some(y)) = (a.singleton(), b.singleton()) {
                    let r = match op {
                        BinOp::BitAnd => x & y,
                        BinOp::BitOr => x | y,
                        _ => x ^ y,
                    };
                    return self.fit(t, NumVal::int_const(r), alarms);
                }
                let bop = match op {
                    BinOp::BitAnd => BitOp::And,
                    BinOp::BitOr => BitOp::Or,
                    _ => BitOp::Xor,
                };
                let itv = i1.bitop(&i2, bop).unwrap_or(self.range(t)).meet(&self.range(t));
                NumVal::int(itv, Cong::TOP)
            }
            _ => unreachable!("comparison handled above"),
        }
    }

    fn float_binary(&self, op: BinOp, a: FItv, b: FItv, t: ScalarType, alarms: &mut AlarmSet) -> NumVal {
        let corners = |f: fn(f64, f64) -> f64, a: FItv, b: FItv| {
            let c = [f(a.lo, b.lo), f(a.lo, b.hi), f(a.hi, b.lo), f(a.hi, b.hi)];
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        match op {
            BinOp::Add => self.float_fit(t, a.lo + b.lo, a.hi + b.hi, alarms),
            BinOp::Sub => self.float_fit(t, a.lo - b.hi, a.hi - b.lo, alarms),
            BinOp::Mul => {
                let (lo, hi) = corners(|x, y| x * y, a, b);
                self.float_fit(t, lo, hi, alarms)
            }
            BinOp::Div => {
                if b.lo <= 0.0 && 0.0 <= b.hi {
                    alarms.add(AlarmKind::DivByZero);
                    if b.lo == 0.0 && b.hi == 0.0 {
                        return NumVal::Float(FItv::BOT);
                    }
                    // Divisors arbitrarily close to zero: unbounded quotient.
                    return self.float_fit(t, f64::NEG_INFINITY, f64::INFINITY, alarms);
                }
                let (lo, hi) = corners(|x, y| x / y, a, b);
                self.float_fit(t, lo, hi, alarms)
            }
            _ => {
                alarms.add(AlarmKind::Overflow);
                NumVal::top(t, self.abi)
            }
        }
    }

    pub fn unary(&self, op: UnOp, a: &NumVal, t: ScalarType, alarms: &mut AlarmSet) -> NumVal {
        if a.is_bot() {
            return NumVal::top(t, self.abi).bottom_like();
        }
        match op {
            UnOp::Not => {
                if !a.may_be_zero() {
                    NumVal::int_const(0)
                } else if a.is_zero() {
                    NumVal::int_const(1)
                } else {
                    NumVal::int_range(0, 1)
                }
            }
            UnOp::Neg if t.is_float() => {
                let f = a.fitv();
                NumVal::float_range(-f.hi, -f.lo)
            }
            UnOp::Neg => self.fit(t, NumVal::int(a.itv().neg(), a.cong().neg()), alarms),
            UnOp::BitNot => {
                let minus_one = NumVal::int_const(-1);
                let negated = NumVal::int(a.itv().neg(), a.cong().neg());
                let v = NumVal::int(negated.itv().add(&minus_one.itv()), negated.cong().add(&minus_one.cong()));
                if t.is_signed() {
                    v
                } else {
                    self.wrap(t, v)
                }
            }
        }
    }

    /// Conversion between real types; integer narrowing wraps silently,
    /// float-to-integer conversion out of range is an overflow.
    pub fn cast(&self, t: ScalarType, a: &NumVal, alarms: &mut AlarmSet) -> NumVal {
        if a.is_bot() {
            return NumVal::top(t, self.abi).bottom_like();
        }
        match a {
            NumVal::Int(..) if t.is_integer() => self.wrap(t, *a),
            NumVal::Int(..) => {
                let f = a.fitv();
                let max = self.abi.float_max(t);
                let f = FItv { lo: exact_below(a.itv().lo, f.lo), hi: exact_above(a.itv().hi, f.hi) };
                let lo = if f.lo.is_finite() { down(self.abi, t, f.lo) } else { -max };
                let hi = if f.hi.is_finite() { up(self.abi, t, f.hi) } else { max };
                NumVal::float_range(lo.max(-max), hi.min(max))
            }
            NumVal::Float(f) if t.is_integer() => {
                let (lo, hi) = self.abi.int_range(t);
                let (tl, th) = (f.lo.trunc(), f.hi.trunc());
                if tl < lo as f64 || th > hi as f64 {
                    alarms.add(AlarmKind::Overflow);
                }
                let l = if tl < lo as f64 { lo } else { (tl as i128).max(lo) };
                let h = if th > hi as f64 { hi } else { (th as i128).min(hi) };
                NumVal::int_range(l, h)
            }
            NumVal::Float(f) => {
                let max = self.abi.float_max(t);
                let lo = down(self.abi, t, f.lo);
                let hi = up(self.abi, t, f.hi);
                if lo < -max || hi > max || f.lo < -max || f.hi > max {
                    alarms.add(AlarmKind::Overflow);
                }
                NumVal::float_range(lo.max(-max), hi.min(max))
            }
        }
    }
}

/// Abstract comparison producing a truth value in `[0, 1]`.
pub fn compare(op: BinOp, a: &NumVal, b: &NumVal) -> NumVal {
    if a.is_bot() || b.is_bot() {
        return NumVal::Int(Itv::BOT, Cong::TOP);
    }
    let (x, y) = (a.fitv(), b.fitv());
    let (always, never) = match op {
        BinOp::Eq => (x.lo == x.hi && y.lo == y.hi && x.lo == y.lo, x.hi < y.lo || y.hi < x.lo || disjoint_cong(a, b)),
        BinOp::Ne => (x.hi < y.lo || y.hi < x.lo || disjoint_cong(a, b), x.lo == x.hi && y.lo == y.hi && x.lo == y.lo),
        BinOp::Lt => (x.hi < y.lo, x.lo >= y.hi),
        BinOp::Le => (x.hi <= y.lo, x.lo > y.hi),
        BinOp::Gt => (x.lo > y.hi, x.hi <= y.lo),
        BinOp::Ge => (x.lo >= y.hi, x.hi < y.lo),
        _ => (false, false),
    };
    // Integer bounds beyond 2^53 lose precision in f64; decide on exact
    // integers instead.
    let (always, never) = match (a, b) {
        (NumVal::Int(i1, _), NumVal::Int(i2, _)) => int_compare(op, i1, i2, disjoint_cong(a, b)),
        _ => (always, never),
    };
    if always {
        NumVal::int_const(1)
    } else if never {
        NumVal::int_const(0)
    } else {
        NumVal::int_range(0, 1)
    }
}

fn disjoint_cong(a: &NumVal, b: &NumVal) -> bool {
    a.cong().meet(&b.cong()).is_none()
}

fn int_compare(op: BinOp, x: &Itv, y: &Itv, disjoint: bool) -> (bool, bool) {
    let same_single = x.singleton().is_some() && x.singleton() == y.singleton();
    let apart = x.hi < y.lo || y.hi < x.lo || disjoint;
    match op {
        BinOp::Eq => (same_single, apart),
        BinOp::Ne => (apart, same_single),
        BinOp::Lt => (x.hi < y.lo, x.lo >= y.hi),
        BinOp::Le => (x.hi <= y.lo, x.lo > y.hi),
        BinOp::Gt => (x.lo > y.hi, x.hi <= y.lo),
        BinOp::Ge => (x.lo >= y.hi, x.hi < y.lo),
        _ => (false, false),
    }
}

/// Refines `a` and `b` under the assumption that `a op b` holds.
pub fn refine_compare(op: BinOp, a: &NumVal, b: &NumVal) -> (NumVal, NumVal) {
    let is_int = matches!((a, b), (NumVal::Int(..), NumVal::Int(..)));
    let below = |v: &NumVal, strict: bool| -> NumVal {
        match v {
            NumVal::Int(i, _) => {
                let hi = if strict { i.hi.add(Bound::Fin(-1)) } else { i.hi };
                NumVal::int(Itv::bounds(Bound::NegInf, hi), Cong::TOP)
            }
            NumVal::Float(f) => NumVal::float_range(f64::NEG_INFINITY, f.hi),
        }
    };
    let above = |v: &NumVal, strict: bool| -> NumVal {
        match v {
            NumVal::Int(i, _) => {
                let lo = if strict { i.lo.add(Bound::Fin(1)) } else { i.lo };
                NumVal::int(Itv::bounds(lo, Bound::PosInf), Cong::TOP)
            }
            NumVal::Float(f) => NumVal::float_range(f.lo, f64::INFINITY),
        }
    };
    let strict = is_int;
    match op {
        BinOp::Eq => {
            let m = a.meet(b);
            (m, m)
        }
        BinOp::Ne => {
            let drop = |x: &NumVal, y: &NumVal| match (x, y.singleton()) {
                (NumVal::Int(i, c), Some(s)) => {
                    let mut i = *i;
                    if i.lo == Bound::Fin(s) {
                        i.lo = Bound::Fin(s + 1);
                    }
                    if i.hi == Bound::Fin(s) {
                        i.hi = Bound::Fin(s - 1);
                    }
                    NumVal::int(i, *c)
                }
                _ => *x,
            };
            (drop(a, b), drop(b, a))
        }
        BinOp::Lt => (a.meet(&below(b, strict)), b.meet(&above(a, strict))),
        BinOp::Le => (a.meet(&below(b, false)), b.meet(&above(a, false))),
        BinOp::Gt => (a.meet(&above(b, strict)), b.meet(&below(a, strict))),
        BinOp::Ge => (a.meet(&above(b, false)), b.meet(&below(a, false))),
        _ => (*a, *b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar(abi: &Abi) -> Arith<'_> {
        Arith { abi, policy: OverflowPolicy::Wrap }
    }

    #[test]
    fn reduction_tightens_bounds() {
        let v = NumVal::int(Itv::new(1, 10), Cong::new(4, 0));
        assert_eq!(v, NumVal::Int(Itv::new(4, 8), Cong::new(4, 0)));
        let v = NumVal::int(Itv::new(1, 3), Cong::new(4, 0));
        assert!(v.is_bot());
        let v = NumVal::int(Itv::new(5, 8), Cong::new(4, 0));
        assert_eq!(v, NumVal::int_const(8));
    }

    #[test]
    fn constant_sum() {
        let abi = Abi::default();
        let mut al = AlarmSet::EMPTY;
        let v = ar(&abi).binary(BinOp::Add, &NumVal::int_const(1), &NumVal::int_const(2), ScalarType::Int, &mut al);
        assert_eq!(v, NumVal::int_const(3));
        assert!(al.is_empty());
    }

    #[test]
    fn unsigned_overflow_wraps_with_alarm() {
        let abi = Abi::default();
        let mut al = AlarmSet::EMPTY;
        let v = ar(&abi).binary(BinOp::Sub, &NumVal::int_range(0, 3), &NumVal::int_const(1), ScalarType::UInt, &mut al);
        assert!(al.contains(AlarmKind::Overflow));
        assert!(v.contains_int(u32::MAX as i128));
        assert!(v.contains_int(2));
    }

    #[test]
    fn division_by_possible_zero() {
        let abi = Abi::default();
        let mut al = AlarmSet::EMPTY;
        let v = ar(&abi).binary(BinOp::Div, &NumVal::int_const(100), &NumVal::int_range(0, 10), ScalarType::Int, &mut al);
        assert!(al.contains(AlarmKind::DivByZero));
        assert_eq!(v.itv(), Itv::new(10, 100));
    }

    #[test]
    fn comparison_refinement() {
        let (a, _) = refine_compare(BinOp::Eq, &NumVal::int_range(0, 255), &NumVal::int_const(0));
        assert_eq!(a, NumVal::int_const(0));
        let (a, b) = refine_compare(BinOp::Lt, &NumVal::int_range(0, 100), &NumVal::int_const(10));
        assert_eq!(a.itv(), Itv::new(0, 9));
        assert_eq!(b, NumVal::int_const(10));
        assert!(refine_compare(BinOp::Eq, &NumVal::int_range(6, 9), &NumVal::int_const(5)).0.is_bot());
    }
}
