use std::fmt;

use num_integer::Integer;

/// The set `{ r + k·m | k ∈ ℤ }`; `m = 0` is the constant `r`, `m = 1` is
/// every integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cong {
    m: i128,
    r: i128,
}

impl Cong {
    pub const TOP: Cong = Cong { m: 1, r: 0 };

    pub fn new(m: i128, r: i128) -> Cong {
        let m = m.abs();
        if m == 0 {
            Cong { m, r }
        } else {
            Cong { m, r: r.rem_euclid(m) }
        }
    }

    pub fn constant(r: i128) -> Cong {
        Cong { m: 0, r }
    }

    pub fn modulus(&self) -> i128 {
        self.m
    }

    pub fn residue(&self) -> i128 {
        self.r
    }

    pub fn is_top(&self) -> bool {
        self.m == 1
    }

    pub fn as_constant(&self) -> Option<i128> {
        (self.m == 0).then_some(self.r)
    }

    pub fn contains(&self, x: i128) -> bool {
        if self.m == 0 {
            x == self.r
        } else {
            (x - self.r).rem_euclid(self.m) == 0
        }
    }

    pub fn leq(&self, o: &Cong) -> bool {
        if o.m == 0 {
            return self.m == 0 && self.r == o.r;
        }
        self.m % o.m == 0 && o.contains(self.r)
    }

    pub fn join(&self, o: &Cong) -> Cong {
        let d = self.r.checked_sub(o.r).map_or(1, |d| d.abs());
        Cong::new(self.m.gcd(&o.m).gcd(&d), self.r)
    }

    /// Intersection; `None` when empty.
    pub fn meet(&self, o: &Cong) -> Option<Cong> {
        if self.m == 0 {
            return o.contains(self.r).then_some(*self);
        }
        if o.m == 0 {
            return self.contains(o.r).then_some(*o);
        }
        let g = self.m.gcd(&o.m);
        if (o.r - self.r) % g != 0 {
            return None;
        }
        let l = match (self.m / g).checked_mul(o.m) {
            Some(l) if l < (1i128 << 100) => l,
            _ => return Some(if self.m >= o.m { *self } else { *o }),
        };
        // x = r1 + m1·t with m1·t ≡ r2 − r1 (mod m2)
        let m1 = self.m / g;
        let m2 = o.m / g;
        let rhs = ((o.r - self.r) / g).rem_euclid(m2);
        let inv = mod_inverse(m1.rem_euclid(m2), m2);
        let t = (rhs * inv).rem_euclid(m2.max(1));
        Some(Cong::new(l, self.r + self.m * t))
    }

    /// Unstable congruences jump to top.
    pub fn widen(&self, o: &Cong) -> Cong {
        if o.leq(self) {
            *self
        } else {
            Cong::TOP
        }
    }

    pub fn add(&self, o: &Cong) -> Cong {
        match self.r.checked_add(o.r) {
            Some(r) => Cong::new(self.m.gcd(&o.m), r),
            None => Cong::TOP,
        }
    }

    pub fn neg(&self) -> Cong {
        Cong::new(self.m, -self.r)
    }

    pub fn sub(&self, o: &Cong) -> Cong {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Cong) -> Cong {
        let parts = [self.m.checked_mul(o.m), self.m.checked_mul(o.r), o.m.checked_mul(self.r), self.r.checked_mul(o.r)];
        match parts {
            [Some(a), Some(b), Some(c), Some(r)] => Cong::new(a.gcd(&b).gcd(&c), r),
            _ => Cong::TOP,
        }
    }

    /// Exact division by a constant `c` when every element is divisible.
    pub fn div_exact(&self, c: i128) -> Cong {
        if c != 0 && self.m % c == 0 && self.r % c == 0 {
            Cong::new(self.m / c, self.r / c)
        } else {
            Cong::TOP
        }
    }

    /// Congruence of `x - k·n` for elements `x` and any integer `k`, which
    /// covers every remainder and wrap-around modulo `n`.
    pub fn modulo(&self, n: i128) -> Cong {
        Cong::new(self.m.gcd(&n), self.r)
    }
}

fn mod_inverse(a: i128, m: i128) -> i128 {
    if m <= 1 {
        return 0;
    }
    let e = a.extended_gcd(&m);
    e.x.rem_euclid(m)
}

impl fmt::Display for Cong {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.r, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_of_constants() {
        let c = Cong::constant(0).join(&Cong::constant(4));
        assert_eq!(c, Cong::new(4, 0));
        assert_eq!(c.join(&Cong::constant(8)), c);
        assert!(Cong::constant(12).leq(&c));
        assert!(!Cong::constant(2).leq(&c));
    }

    #[test]
    fn chinese_remainder_meet() {
        let a = Cong::new(4, 1);
        let b = Cong::new(6, 3);
        let c = a.meet(&b).unwrap();
        assert_eq!(c, Cong::new(12, 9));
        assert!(Cong::new(4, 0).meet(&Cong::new(2, 1)).is_none());
    }

    #[test]
    fn arithmetic() {
        let a = Cong::new(4, 0);
        assert_eq!(a.add(&Cong::constant(4)), a);
        assert_eq!(Cong::TOP.mul(&Cong::constant(4)), Cong::new(4, 0));
        assert_eq!(Cong::new(512, 256).div_exact(256), Cong::new(2, 1));
    }
}
