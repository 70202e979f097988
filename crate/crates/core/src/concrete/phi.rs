use crate::abi::Abi;
use crate::ir::Base;
use crate::scalar::ScalarType;

use super::eval::Chooser;
use super::{Byte, PtrVal, Value};

/// Result of recomposing a byte sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValueSet {
    Exact(Vec<Value>),
    /// Integers of `ty` whose bytes, indexed by significance, match the
    /// pattern (`None` = any byte); signed types reinterpret the unsigned
    /// composition in two's complement.
    Bytes { ty: ScalarType, pattern: Vec<Option<u8>> },
    /// Every value of the type.
    All(ScalarType),
}

/// One contiguous-stride piece of an integer set: every element lies in
/// `[min, max]` and is congruent to `min` modulo `step` (0 = singleton).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntPiece {
    pub min: i128,
    pub max: i128,
    pub step: i128,
}

fn uchar_of(byte: &Byte, abi: &Abi) -> Option<u8> {
    match byte {
        Byte::Uninit => None,
        Byte::Val(bv) => match bv.v {
            Value::Ptr(PtrVal::Null) => Some(0),
            Value::Int(v) if bv.ty.is_integer() => {
                let w = abi.byte_weight(bv.ty, bv.b as u64);
                Some(v.div_euclid(1i128 << (8 * w)).rem_euclid(256) as u8)
            }
            _ => None,
        },
    }
}

/// The value-recomposition function: the set of `ty` values a byte sequence
/// of length `sizeof(ty)` may denote.
pub fn phi(ty: ScalarType, bytes: &[Byte], abi: &Abi) -> ValueSet {
    debug_assert_eq!(bytes.len() as u64, abi.size(ty));
    if let Some(Byte::Val(first)) = bytes.first() {
        let exact = bytes.iter().enumerate().all(|(k, b)| match b {
            Byte::Val(bv) => bv.ty == ty && bv.b as usize == k && bv.v == first.v,
            Byte::Uninit => false,
        });
        if exact {
            return ValueSet::Exact(vec![first.v]);
        }
    }
    if bytes.iter().any(|b| *b == Byte::Uninit) {
        return ValueSet::All(ty);
    }
    if ty.is_integer() {
        let n = bytes.len();
        let mut pattern = vec![None; n];
        for (k, b) in bytes.iter().enumerate() {
            pattern[abi.byte_weight(ty, k as u64) as usize] = uchar_of(b, abi);
        }
        if pattern.iter().all(|d| d.is_none()) {
            return ValueSet::All(ty);
        }
        let set = ValueSet::Bytes { ty, pattern };
        return match set.singleton() {
            Some(v) => ValueSet::Exact(vec![v]),
            None => set,
        };
    }
    if ty == ScalarType::Ptr {
        if bytes.iter().all(|b| uchar_of(b, abi) == Some(0)) {
            return ValueSet::Exact(vec![Value::Ptr(PtrVal::Null)]);
        }
        return ValueSet::All(ty);
    }
    ValueSet::All(ty)
}

fn compose(ty: ScalarType, digits: &[u8]) -> i128 {
    let n = digits.len();
    let u = digits.iter().rev().fold(0i128, |acc, d| acc * 256 + *d as i128);
    if ty.is_signed() && n > 0 && digits[n - 1] >= 128 {
        u - (1i128 << (8 * n))
    } else {
        u
    }
}

impl ValueSet {
    pub fn singleton(&self) -> Option<Value> {
        match self {
            ValueSet::Exact(vs) if vs.len() == 1 => Some(vs[0]),
            ValueSet::Bytes { ty, pattern } if pattern.iter().all(|d| d.is_some()) => {
                let digits: Vec<u8> = pattern.iter().map(|d| d.unwrap()).collect();
                Some(Value::Int(compose(*ty, &digits)))
            }
            _ => None,
        }
    }

    pub fn contains(&self, v: &Value, abi: &Abi) -> bool {
        match self {
            ValueSet::Exact(vs) => vs.contains(v),
            ValueSet::Bytes { ty, pattern } => match v {
                Value::Int(x) => {
                    let (lo, hi) = abi.int_range(*ty);
                    if *x < lo || *x > hi {
                        return false;
                    }
                    let u = x.rem_euclid(1i128 << (8 * pattern.len()));
                    pattern.iter().enumerate().all(|(k, d)| d.is_none_or(|d| ((u >> (8 * k)) & 255) as u8 == d))
                }
                _ => false,
            },
            ValueSet::All(t) => match v {
                Value::Int(x) if t.is_integer() => {
                    let (lo, hi) = abi.int_range(*t);
                    lo <= *x && *x <= hi
                }
                Value::Float(x) if t.is_float() => x.is_finite() && abi.round_float(*t, *x) == *x,
                Value::Ptr(_) => *t == ScalarType::Ptr,
                _ => false,
            },
        }
    }

    /// Integer pieces covering the set exactly in bounds, or `None` for
    /// non-integer sets.
    pub fn int_pieces(&self, abi: &Abi) -> Option<Vec<IntPiece>> {
        match self {
            ValueSet::Exact(vs) => vs
                .iter()
                .map(|v| match v {
                    Value::Int(x) => Some(IntPiece { min: *x, max: *x, step: 0 }),
                    _ => None,
                })
                .collect(),
            ValueSet::All(t) if t.is_integer() => {
                let (lo, hi) = abi.int_range(*t);
                Some(vec![IntPiece { min: lo, max: hi, step: 1 }])
            }
            ValueSet::All(_) => None,
            ValueSet::Bytes { ty, pattern } => {
                let n = pattern.len();
                let step = match pattern.iter().position(|d| d.is_none()) {
                    Some(k) => 1i128 << (8 * k),
                    None => 0,
                };
                let bound = |top: Option<(u8, u8)>, high: bool| -> i128 {
                    let digits: Vec<u8> = pattern
                        .iter()
                        .enumerate()
                        .map(|(k, d)| match (d, top) {
                            (Some(d), _) => *d,
                            (None, Some((lo, hi))) if k == n - 1 => {
                                if high {
                                    hi
                                } else {
                                    lo
                                }
                            }
                            (None, _) => {
                                if high {
                                    255
                                } else {
                                    0
                                }
                            }
                        })
                        .collect();
                    compose(*ty, &digits)
                };
                if ty.is_signed() && pattern[n - 1].is_none() {
                    // The free sign byte splits the set into a negative and a
                    // non-negative half.
                    let neg = IntPiece { min: bound(Some((128, 255)), false), max: bound(Some((128, 255)), true), step };
                    let pos = IntPiece { min: bound(Some((0, 127)), false), max: bound(Some((0, 127)), true), step };
                    Some(vec![neg, pos])
                } else {
                    Some(vec![IntPiece { min: bound(None, false), max: bound(None, true), step }])
                }
            }
        }
    }

    /// Draws one member.
    pub fn sample(&self, c: &mut dyn Chooser, abi: &Abi, bases: &[(Base, u64)]) -> Value {
        match self {
            ValueSet::Exact(vs) => vs[c.below(vs.len() as u64) as usize],
            ValueSet::Bytes { ty, pattern } => {
                let digits: Vec<u8> = pattern
                    .iter()
                    .map(|d| match d {
                        Some(d) => *d,
                        None => match c.below(6) {
                            0 => 0,
                            1 => 255,
                            2 => 127,
                            3 => 128,
                            _ => c.below(256) as u8,
                        },
                    })
                    .collect();
                Value::Int(compose(*ty, &digits))
            }
            ValueSet::All(t) => sample_type(*t, c, abi, bases),
        }
    }
}

/// Draws a value of type `t`, biased towards boundary values.
pub fn sample_type(t: ScalarType, c: &mut dyn Chooser, abi: &Abi, bases: &[(Base, u64)]) -> Value {
    if t.is_integer() {
        let (lo, hi) = abi.int_range(t);
        return Value::Int(sample_range(lo, hi, c));
    }
    if t.is_float() {
        let max = abi.float_max(t);
        let x = match c.below(8) {
            0 => 0.0,
            1 => 1.0,
            2 => -1.0,
            3 => max,
            4 => -max,
            5 => 0.5,
            6 => sample_range(-1000, 1000, c) as f64,
            _ => {
                let bits = c.below(u64::MAX);
                let x = f64::from_bits(bits);
                if x.is_finite() {
                    x
                } else {
                    2.0
                }
            }
        };
        let x = abi.round_float(t, x);
        return Value::Float(if x.is_finite() { x } else { 0.0 });
    }
    match c.below(4) {
        0 => Value::Ptr(PtrVal::Null),
        1 => Value::Ptr(PtrVal::Invalid),
        _ if !bases.is_empty() => {
            let (b, size) = bases[c.below(bases.len() as u64) as usize];
            Value::Ptr(PtrVal::Addr(b, c.below(size + 1)))
        }
        _ => Value::Ptr(PtrVal::Null),
    }
}

/// Draws from `[lo, hi]`, boundary values a quarter of the time.
pub fn sample_range(lo: i128, hi: i128, c: &mut dyn Chooser) -> i128 {
    if lo >= hi {
        return lo;
    }
    if c.below(4) == 0 {
        let specials = [lo, hi, 0, 1, -1, lo + 1, hi - 1];
        let inside: Vec<i128> = specials.into_iter().filter(|v| lo <= *v && *v <= hi).collect();
        return inside[c.below(inside.len() as u64) as usize];
    }
    let span = (hi - lo) as u128 + 1;
    let r = ((c.below(u64::MAX) as u128) << 64 | c.below(u64::MAX) as u128) % span;
    lo + r as i128
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concrete::ByteValue;

    fn stored(ty: ScalarType, v: Value, abi: &Abi) -> Vec<Byte> {
        (0..abi.size(ty)).map(|b| Byte::Val(ByteValue { ty, b: b as u8, v })).collect()
    }

    #[test]
    fn exact_match_round_trip() {
        let abi = Abi::default();
        let bytes = stored(ScalarType::UShort, Value::Int(0x1234), &abi);
        assert_eq!(phi(ScalarType::UShort, &bytes, &abi), ValueSet::Exact(vec![Value::Int(0x1234)]));
    }

    #[test]
    fn byte_extraction() {
        let abi = Abi::default();
        let bytes = stored(ScalarType::UShort, Value::Int(0x1234), &abi);
        // floor(0x1234 / 256^1) mod 256 = 0x12
        assert_eq!(phi(ScalarType::UChar, &bytes[1..2], &abi), ValueSet::Exact(vec![Value::Int(0x12)]));
        assert_eq!(phi(ScalarType::UChar, &bytes[0..1], &abi), ValueSet::Exact(vec![Value::Int(0x34)]));
    }

    #[test]
    fn big_endian_mirrors_bytes() {
        let mut abi = Abi::default();
        abi.endian = crate::abi::Endian::Big;
        let bytes = stored(ScalarType::UShort, Value::Int(0x1234), &abi);
        assert_eq!(phi(ScalarType::UChar, &bytes[0..1], &abi), ValueSet::Exact(vec![Value::Int(0x12)]));
    }

    #[test]
    fn pointer_bytes_as_float_are_top() {
        let abi = Abi::default();
        let p = Value::Ptr(PtrVal::Addr(Base::Var(crate::ir::VarId(0)), 8));
        let bytes = stored(ScalarType::Ptr, p, &abi);
        assert_eq!(phi(ScalarType::Float, &bytes, &abi), ValueSet::All(ScalarType::Float));
        assert_eq!(phi(ScalarType::UChar, &bytes[0..1], &abi), ValueSet::All(ScalarType::UChar));
    }

    #[test]
    fn static_zero_bytes_read_as_null() {
        let abi = Abi::default();
        let bytes = vec![Byte::ZERO; 4];
        assert_eq!(phi(ScalarType::Ptr, &bytes, &abi), ValueSet::Exact(vec![Value::Ptr(PtrVal::Null)]));
        assert_eq!(phi(ScalarType::Int, &bytes, &abi), ValueSet::Exact(vec![Value::Int(0)]));
    }

    #[test]
    fn signed_reinterpretation() {
        let abi = Abi::default();
        let bytes = stored(ScalarType::UShort, Value::Int(0xFFFE), &abi);
        assert_eq!(phi(ScalarType::Short, &bytes, &abi), ValueSet::Exact(vec![Value::Int(-2)]));
    }

    #[test]
    fn partially_known_composition() {
        let abi = Abi::default();
        let f = Value::Float(1.5);
        let mut bytes = stored(ScalarType::UShort, Value::Int(0x1234), &abi);
        bytes[1] = Byte::Val(ByteValue { ty: ScalarType::Float, b: 0, v: f });
        let s = phi(ScalarType::UShort, &bytes, &abi);
        assert_eq!(s.int_pieces(&abi).unwrap(), vec![IntPiece { min: 0x34, max: 0xFF34, step: 256 }]);
        assert!(s.contains(&Value::Int(0x7734), &abi));
        assert!(!s.contains(&Value::Int(0x7735), &abi));
        let s = phi(ScalarType::Short, &bytes, &abi);
        let pieces = s.int_pieces(&abi).unwrap();
        assert_eq!(pieces[0].min, 0x8034 - 0x10000);
        assert_eq!(pieces[1].max, 0x7F34);
    }
}
