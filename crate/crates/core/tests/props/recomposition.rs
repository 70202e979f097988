use cellscope_core::abi::Endian;
use cellscope_core::concrete::{phi, Byte, ByteValue, Memory, Value, ValueSet};
use cellscope_core::ir::VarId;
use cellscope_core::{Abi, ScalarType};
use proptest::prelude::*;

use super::{check, Prop};

const INT_TYPES: [ScalarType; 10] = [
    ScalarType::SChar,
    ScalarType::UChar,
    ScalarType::Short,
    ScalarType::UShort,
    ScalarType::Int,
    ScalarType::UInt,
    ScalarType::Long,
    ScalarType::ULong,
    ScalarType::LongLong,
    ScalarType::ULongLong,
];

fn abi_of(big: bool) -> Abi {
    let mut abi = Abi::default();
    if big {
        abi.endian = Endian::Big;
    }
    abi
}

fn mem(size: u64) -> Memory {
    let mut m = Memory::default();
    m.create(VarId(0), size, false);
    m
}

fn typed_value() -> impl Strategy<Value = (ScalarType, i128)> {
    prop::sample::select(INT_TYPES.to_vec()).prop_flat_map(|t| {
        let (lo, hi) = Abi::default().int_range(t);
        let lo = lo.max(i64::MIN as i128) as i64;
        let hi = hi.min(u64::MAX as i128);
        let v = if hi > i64::MAX as i128 {
            any::<u64>().prop_map(|x| x as i128).boxed()
        } else {
            (lo..=hi as i64).prop_map(|x| x as i128).boxed()
        };
        (Just(t), v)
    })
}

fn exact(v: i128) -> ValueSet {
    ValueSet::Exact(vec![Value::Int(v)])
}

fn round_trip((t, v): (ScalarType, i128), big: bool) -> Result<(), TestCaseError> {
    let abi = abi_of(big);
    let n = abi.size(t);
    let mut m = mem(n);
    m.store(VarId(0), 0, t, n, Value::Int(v));
    prop_assert_eq!(phi(t, m.read(VarId(0), 0, n), &abi), exact(v));
    Ok(())
}

fn word_views(v: u32, big: bool) -> Result<(), TestCaseError> {
    let abi = abi_of(big);
    let mut m = mem(4);
    m.store(VarId(0), 0, ScalarType::UInt, 4, Value::Int(v as i128));
    let bytes = if big { v.to_be_bytes() } else { v.to_le_bytes() };
    for (k, b) in bytes.iter().enumerate() {
        prop_assert_eq!(phi(ScalarType::UChar, m.read(VarId(0), k as u64, 1), &abi), exact(*b as i128));
        prop_assert_eq!(phi(ScalarType::SChar, m.read(VarId(0), k as u64, 1), &abi), exact(*b as i8 as i128));
    }
    for k in [0usize, 2] {
        let pair = [bytes[k], bytes[k + 1]];
        let (u, s) = if big {
            (u16::from_be_bytes(pair) as i128, i16::from_be_bytes(pair) as i128)
        } else {
            (u16::from_le_bytes(pair) as i128, i16::from_le_bytes(pair) as i128)
        };
        prop_assert_eq!(phi(ScalarType::UShort, m.read(VarId(0), k as u64, 2), &abi), exact(u));
        prop_assert_eq!(phi(ScalarType::Short, m.read(VarId(0), k as u64, 2), &abi), exact(s));
    }
    prop_assert_eq!(phi(ScalarType::Int, m.read(VarId(0), 0, 4), &abi), exact(v as i32 as i128));
    Ok(())
}

fn bytewise(bytes: [u8; 4], big: bool) -> Result<(), TestCaseError> {
    let abi = abi_of(big);
    let mut m = mem(4);
    for (k, b) in bytes.iter().enumerate() {
        m.store(VarId(0), k as u64, ScalarType::UChar, 1, Value::Int(*b as i128));
    }
    let (u, s) = if big {
        (u32::from_be_bytes(bytes), i32::from_be_bytes(bytes))
    } else {
        (u32::from_le_bytes(bytes), i32::from_le_bytes(bytes))
    };
    prop_assert_eq!(phi(ScalarType::UInt, m.read(VarId(0), 0, 4), &abi).singleton(), Some(Value::Int(u as i128)));
    prop_assert_eq!(phi(ScalarType::Int, m.read(VarId(0), 0, 4), &abi).singleton(), Some(Value::Int(s as i128)));
    Ok(())
}

fn partial(v: u16, hole: usize, probe: u16) -> Result<(), TestCaseError> {
    let abi = Abi::default();
    let mut m = mem(2);
    m.store(VarId(0), 0, ScalarType::UShort, 2, Value::Int(v as i128));
    let mut bytes = m.read(VarId(0), 0, 2).to_vec();
    bytes[hole] = Byte::Val(ByteValue { ty: ScalarType::Float, b: 0, v: Value::Float(1.5) });
    let set = phi(ScalarType::UShort, &bytes, &abi);
    prop_assert!(set.contains(&Value::Int(v as i128), &abi));
    let mut other = v.to_le_bytes();
    other[hole] = probe.to_le_bytes()[0];
    let w = u16::from_le_bytes(other) as i128;
    prop_assert!(set.contains(&Value::Int(w), &abi));
    let pieces = set.int_pieces(&abi).unwrap();
    prop_assert!(pieces.iter().any(|p| p.min <= w && w <= p.max && (p.step == 0 || (w - p.min) % p.step == 0)));
    Ok(())
}

pub fn props() -> Vec<Prop> {
    vec![
        Prop {
            name: "store then read round-trips",
            run: |n| check(n, (typed_value(), any::<bool>()), |(tv, big)| round_trip(tv, big)),
        },
        Prop { name: "word views follow byte order", run: |n| check(n, (any::<u32>(), any::<bool>()), |(v, big)| word_views(v, big)) },
        Prop { name: "bytewise writes compose", run: |n| check(n, (any::<[u8; 4]>(), any::<bool>()), |(b, big)| bytewise(b, big)) },
        Prop {
            name: "partial knowledge is a sound pattern",
            run: |n| check(n, (any::<u16>(), 0usize..2, any::<u16>()), |(v, h, p)| partial(v, h, p)),
        },
    ]
}

#[test]
fn uninitialized_bytes_denote_every_value() {
    let abi = Abi::default();
    let m = mem(4);
    assert_eq!(phi(ScalarType::Int, m.read(VarId(0), 0, 4), &abi), ValueSet::All(ScalarType::Int));
}
