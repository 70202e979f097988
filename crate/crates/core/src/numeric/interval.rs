use std::cmp::{max, min};
use std::fmt;

/// An interval bound; `Fin` values are exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    NegInf,
    Fin(i128),
    PosInf,
}

use Bound::*;

impl Bound {
    fn sign(self) -> i8 {
        match self {
            NegInf => -1,
            PosInf => 1,
            Fin(x) => x.signum() as i8,
        }
    }

    fn inf(sign: i8) -> Bound {
        if sign < 0 {
            NegInf
        } else {
            PosInf
        }
    }

    pub fn add(self, o: Bound) -> Bound {
        match (self, o) {
            (Fin(a), Fin(b)) => a.checked_add(b).map_or(Bound::inf(a.signum() as i8), Fin),
            (NegInf, PosInf) | (PosInf, NegInf) => panic!("undefined bound sum"),
            (NegInf, _) | (_, NegInf) => NegInf,
            _ => PosInf,
        }
    }

    pub fn neg(self) -> Bound {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            Fin(x) => Fin(-x),
        }
    }

    pub fn mul(self, o: Bound) -> Bound {
        match (self, o) {
            (Fin(a), Fin(b)) => a.checked_mul(b).map_or(Bound::inf(a.signum() as i8 * b.signum() as i8), Fin),
            (Fin(0), _) | (_, Fin(0)) => Fin(0),
            _ => Bound::inf(self.sign() * o.sign()),
        }
    }

    /// Truncating division by a non-zero bound.
    pub fn div(self, o: Bound) -> Bound {
        match (self, o) {
            (Fin(a), Fin(b)) => Fin(a / b),
            (Fin(_), _) => Fin(0),
            (_, Fin(b)) => Bound::inf(self.sign() * b.signum() as i8),
            _ => Fin(0),
        }
    }

    pub fn fin(self) -> Option<i128> {
        match self {
            Fin(x) => Some(x),
            _ => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => f.write_str("-oo"),
            PosInf => f.write_str("+oo"),
            Fin(x) => write!(f, "{}", x),
        }
    }
}

/// Integer interval; empty when `lo > hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Itv {
    pub lo: Bound,
    pub hi: Bound,
}

impl Itv {
    pub const BOT: Itv = Itv { lo: PosInf, hi: NegInf };
    pub const TOP: Itv = Itv { lo: NegInf, hi: PosInf };

    pub fn new(lo: i128, hi: i128) -> Itv {
        Itv { lo: Fin(lo), hi: Fin(hi) }.norm()
    }

    pub fn bounds(lo: Bound, hi: Bound) -> Itv {
        Itv { lo, hi }.norm()
    }

    pub fn single(x: i128) -> Itv {
        Itv::new(x, x)
    }

    fn norm(self) -> Itv {
        if self.lo > self.hi || self.lo == PosInf || self.hi == NegInf {
            Itv::BOT
        } else {
            self
        }
    }

    pub fn is_bot(&self) -> bool {
        self.lo > self.hi
    }

    pub fn singleton(&self) -> Option<i128> {
        match (self.lo, self.hi) {
            (Fin(a), Fin(b)) if a == b => Some(a),
            _ => None,
        }
    }

    pub fn contains(&self, x: i128) -> bool {
        self.lo <= Fin(x) && Fin(x) <= self.hi
    }

    pub fn leq(&self, o: &Itv) -> bool {
        self.is_bot() || (o.lo <= self.lo && self.hi <= o.hi)
    }

    pub fn join(&self, o: &Itv) -> Itv {
        if self.is_bot() {
            return *o;
        }
        if o.is_bot() {
            return *self;
        }
        Itv { lo: min(self.lo, o.lo), hi: max(self.hi, o.hi) }
    }

    pub fn meet(&self, o: &Itv) -> Itv {
        Itv { lo: max(self.lo, o.lo), hi: min(self.hi, o.hi) }.norm()
    }

    /// Widening with thresholds: an unstable bound jumps to the nearest
    /// enclosing threshold, then to infinity.
    pub fn widen(&self, o: &Itv, thresholds: &[i128]) -> Itv {
        if self.is_bot() {
            return *o;
        }
        if o.is_bot() {
            return *self;
        }
        let lo = if o.lo < self.lo {
            thresholds.iter().rev().map(|t| Fin(*t)).find(|t| *t <= o.lo).unwrap_or(NegInf)
        } else {
            self.lo
        };
        let hi = if o.hi > self.hi {
            thresholds.iter().map(|t| Fin(*t)).find(|t| *t >= o.hi).unwrap_or(PosInf)
        } else {
            self.hi
        };
        Itv { lo, hi }
    }

    /// Refines infinite bounds of `self` with those of `o`.
    pub fn narrow(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        let lo = if self.lo == NegInf { o.lo } else { self.lo };
        let hi = if self.hi == PosInf { o.hi } else { self.hi };
        Itv { lo, hi }.norm()
    }

    pub fn add(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        Itv { lo: self.lo.add(o.lo), hi: self.hi.add(o.hi) }
    }

    pub fn neg(&self) -> Itv {
        if self.is_bot() {
            return Itv::BOT;
        }
        Itv { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn sub(&self, o: &Itv) -> Itv {
        self.add(&o.neg())
    }

    fn corners(&self, o: &Itv, f: impl Fn(Bound, Bound) -> Bound) -> Itv {
        let c = [f(self.lo, o.lo), f(self.lo, o.hi), f(self.hi, o.lo), f(self.hi, o.hi)];
        Itv { lo: *c.iter().min().unwrap(), hi: *c.iter().max().unwrap() }
    }

    pub fn mul(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        self.corners(o, Bound::mul)
    }

    /// Truncating division; the zero divisor is excluded from `o`.
    pub fn div(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        let neg = o.meet(&Itv::bounds(NegInf, Fin(-1)));
        let pos = o.meet(&Itv::bounds(Fin(1), PosInf));
        let mut r = Itv::BOT;
        for d in [neg, pos] {
            if !d.is_bot() {
                r = r.join(&self.corners(&d, Bound::div));
            }
        }
        r
    }

    /// Truncating remainder; the zero divisor is excluded from `o`.
    pub fn rem(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        let m = max(o.lo.neg(), o.hi);
        let bound = match m {
            Fin(m) => Fin(m - 1),
            _ => PosInf,
        };
        let mut r = Itv::BOT;
        if self.hi >= Fin(0) {
            r = r.join(&Itv { lo: Fin(0), hi: min(self.hi, bound) });
        }
        if self.lo < Fin(0) {
            r = r.join(&Itv { lo: max(self.lo, bound.neg()), hi: Fin(0) });
        }
        if let (Some(lo), Some(_)) = (o.lo.fin(), o.hi.fin()) {
            let least = min(lo.abs(), o.hi.fin().unwrap().abs());
            let zero_free = !o.contains(0) && least > 0;
            if zero_free && self.lo >= Fin(0) && self.hi < Fin(least) {
                return *self;
            }
        }
        r
    }

    /// Left shift of a non-negative interval by a shift-count interval
    /// within `[0, 127)`.
    pub fn shl(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        let pow = |b: Bound| match b {
            Fin(k) if k < 126 => Fin(1i128 << k),
            _ => PosInf,
        };
        self.mul(&Itv { lo: pow(o.lo), hi: pow(o.hi) })
    }

    /// Arithmetic right shift by a shift-count interval within `[0, 127)`.
    pub fn shr(&self, o: &Itv) -> Itv {
        if self.is_bot() || o.is_bot() {
            return Itv::BOT;
        }
        let sh = |a: Bound, k: Bound| match (a, k) {
            (Fin(a), Fin(k)) => Fin(a >> k.min(127)),
            (Fin(a), _) => Fin(if a < 0 { -1 } else { 0 }),
            (a, _) => a,
        };
        self.corners(o, sh)
    }

    pub fn is_nonneg(&self) -> bool {
        !self.is_bot() && self.lo >= Fin(0)
    }

    /// Bitwise and/or/xor; `None` when no better bound than the type range
    /// is known.
    pub fn bitop(&self, o: &Itv, op: BitOp) -> Option<Itv> {
        if self.is_bot() || o.is_bot() {
            return Some(Itv::BOT);
        }
        let fill = |b: Bound| match b {
            Fin(x) if x >= 0 => Some(Fin(if x == 0 { 0 } else { (1i128 << (128 - x.leading_zeros())) - 1 })),
            _ => None,
        };
        match op {
            BitOp::And => match (self.is_nonneg(), o.is_nonneg()) {
                (true, true) => Some(Itv { lo: Fin(0), hi: min(self.hi, o.hi) }),
                (true, false) => Some(Itv { lo: Fin(0), hi: self.hi }),
                (false, true) => Some(Itv { lo: Fin(0), hi: o.hi }),
                _ => None,
            },
            BitOp::Or if self.is_nonneg() && o.is_nonneg() => {
                Some(Itv { lo: max(self.lo, o.lo), hi: fill(max(self.hi, o.hi))? })
            }
            BitOp::Xor if self.is_nonneg() && o.is_nonneg() => Some(Itv { lo: Fin(0), hi: fill(max(self.hi, o.hi))? }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitOp {
    And,
    Or,
    Xor,
}

impl fmt::Display for Itv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bot() {
            f.write_str("bot")
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_basics() {
        assert_eq!(Itv::new(0, 1).join(&Itv::new(5, 6)), Itv::new(0, 6));
        assert!(Itv::new(1, 2).leq(&Itv::new(0, 3)));
        assert!(Itv::new(6, 9).meet(&Itv::single(5)).is_bot());
    }

    #[test]
    fn threshold_widening() {
        let w = Itv::new(0, 1).widen(&Itv::new(0, 2), &[255, 65535]);
        assert_eq!(w, Itv::new(0, 255));
        let w = w.widen(&Itv::new(0, 300), &[255, 65535]);
        assert_eq!(w, Itv::new(0, 65535));
        let w = w.widen(&Itv::new(0, 70000), &[255, 65535]);
        assert_eq!(w.hi, PosInf);
    }

    #[test]
    fn division_and_remainder() {
        assert_eq!(Itv::new(-7, 7).div(&Itv::new(2, 2)), Itv::new(-3, 3));
        assert_eq!(Itv::new(0, 65535).div(&Itv::new(-1, 256)), Itv::new(-65535, 65535));
        assert_eq!(Itv::new(0, 3).rem(&Itv::new(5, 5)), Itv::new(0, 3));
        assert_eq!(Itv::new(-10, 10).rem(&Itv::new(4, 4)), Itv::new(-3, 3));
    }

    #[test]
    fn saturating_bounds() {
        let big = Itv::new(i128::MAX - 1, i128::MAX);
        assert_eq!(big.add(&Itv::single(5)).hi, PosInf);
        assert_eq!(Itv::bounds(NegInf, Fin(0)).mul(&Itv::new(-1, -1)), Itv::bounds(Fin(0), PosInf));
    }
}
