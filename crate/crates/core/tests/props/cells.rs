use std::collections::BTreeMap;

use cellscope_core::cells::{Cell, Dom, MemState};
use cellscope_core::concrete::{gamma_member, phi, Memory, Value};
use cellscope_core::frontend::{compile, LowerOptions};
use cellscope_core::ir::{BinOp, Expr};
use cellscope_core::numeric::OverflowPolicy;
use cellscope_core::{Abi, Base, Cfg, Endian, ScalarType, VarId};
use proptest::prelude::*;

use super::{check as run_prop, Prop};

const TYPES: [ScalarType; 8] = [
    ScalarType::SChar,
    ScalarType::UChar,
    ScalarType::Short,
    ScalarType::UShort,
    ScalarType::Int,
    ScalarType::UInt,
    ScalarType::LongLong,
    ScalarType::ULongLong,
];

#[derive(Clone, Debug)]
enum Op {
    Set(ScalarType, u64, i128, i128),
    Move(ScalarType, u64, ScalarType, u64),
}

/// An aligned in-bounds position of the 8-byte buffer.
fn slot() -> impl Strategy<Value = (ScalarType, u64)> {
    prop::sample::select(TYPES.to_vec()).prop_flat_map(|t| {
        let abi = Abi::default();
        let (n, a) = (abi.size(t), abi.align(t));
        (Just(t), (0..=(8 - n) / a).prop_map(move |k| k * a))
    })
}

fn constant(t: ScalarType) -> BoxedStrategy<i128> {
    let (lo, hi) = Abi::default().int_range(t);
    prop_oneof![
        (-3i128..=3).prop_map(move |x| x.clamp(lo, hi)),
        (lo.max(i64::MIN as i128) as i64..=hi.min(i64::MAX as i128) as i64).prop_map(|x| x as i128),
    ]
    .boxed()
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        slot().prop_flat_map(|(t, o)| (Just(t), Just(o), constant(t), constant(t)))
            .prop_map(|(t, o, a, b)| Op::Set(t, o, a, b)),
        (slot(), slot()).prop_map(|((t, o), (t2, o2))| Op::Move(t, o, t2, o2)),
    ]
}

fn wrap(t: ScalarType, x: i128, abi: &Abi) -> i128 {
    let m = 1i128 << abi.bits(t);
    let u = x.rem_euclid(m);
    if t.is_signed() && u >= m / 2 {
        u - m
    } else {
        u
    }
}

fn setup() -> (Cfg, VarId) {
    let cfg = compile("unsigned char g[8];\nvoid main(void) { }\n", &Abi::default(), &LowerOptions::default()).unwrap();
    let g = cfg.var_by_name("g").unwrap();
    (cfg, g)
}

fn addr(g: VarId, o: u64) -> Expr {
    Expr::Binary(BinOp::Add, Box::new(Expr::AddrOf(Base::Var(g))), Box::new(Expr::Int(o as i128, ScalarType::Int)), ScalarType::Ptr)
}

/// Runs `ops` abstractly and concretely, with the first or second constant of each `Set`.
fn run(dom: &Dom, g: VarId, ops: &[Op], second: bool) -> (MemState, Memory) {
    let abi = dom.abi;
    let mut s = MemState::initial();
    let mut m = Memory::initial(dom.cfg);
    for o in ops {
        match *o {
            Op::Set(t, off, a, b) => {
                let c = if second { b } else { a };
                s.assign(dom, &(), t, &addr(g, off), &Expr::Int(c, t));
                m.store(g, off, t, abi.size(t), Value::Int(c));
            }
            Op::Move(t, off, t2, off2) => {
                let read = Expr::Deref(t2, Box::new(addr(g, off2)));
                let value = if t == t2 { read } else { Expr::Cast(t, Box::new(read)) };
                s.assign(dom, &(), t, &addr(g, off), &value);
                let Some(Value::Int(x)) = phi(t2, m.read(g, off2, abi.size(t2)), abi).singleton() else {
                    panic!("initialized integer bytes are not a singleton");
                };
                m.store(g, off, t, abi.size(t), Value::Int(wrap(t, x, abi)));
            }
        }
    }
    (s, m)
}

fn check(big: bool, ops: Vec<Op>, probe: (ScalarType, u64), lo: u64, len: u64, pick: usize) -> Result<(), TestCaseError> {
    let (cfg, g) = setup();
    let mut abi = Abi::default();
    if big {
        abi.endian = Endian::Big;
    }
    let inputs = BTreeMap::new();
    let dom = Dom { cfg: &cfg, abi: &abi, policy: OverflowPolicy::Wrap, fanout: 64, inputs: &inputs };
    let (s1, m1) = run(&dom, g, &ops, false);
    let (s2, m2) = run(&dom, g, &ops, true);
    prop_assert!(gamma_member(&s1.view(&dom), &m1, &abi), "first run escapes:\n{}", s1.dump(&cfg));
    prop_assert!(gamma_member(&s2.view(&dom), &m2, &abi), "second run escapes:\n{}", s2.dump(&cfg));
    let j = s1.join(&s2, &dom);
    let both = |s: &MemState| gamma_member(&s.view(&dom), &m1, &abi) && gamma_member(&s.view(&dom), &m2, &abi);
    prop_assert!(both(&j), "join escapes:\n{}", j.dump(&cfg));

    let c = Cell::new(g, probe.1, probe.0);
    for s in [&s1, &s2, &j] {
        let mut r = s.clone();
        r.realize(&dom, c);
        r.apply_relations(&dom);
        prop_assert!(r.value(&c).is_some());
        let ok = gamma_member(&r.view(&dom), &m1, &abi) || !gamma_member(&s.view(&dom), &m1, &abi);
        let ok2 = gamma_member(&r.view(&dom), &m2, &abi) || !gamma_member(&s.view(&dom), &m2, &abi);
        prop_assert!(ok && ok2, "realizing {:?} escapes:\n{}\n->\n{}", c, s.dump(&cfg), r.dump(&cfg));
    }

    let cells: Vec<Cell> = j.cells().copied().collect();
    if !cells.is_empty() {
        let mut r = j.clone();
        r.remove_cell(&cells[pick % cells.len()]);
        prop_assert!(both(&r));
    }
    let mut r = j.clone();
    r.remove_overlapping(&dom, g, lo, (lo + len).min(8), &[]);
    prop_assert!(both(&r));
    Ok(())
}

pub fn props() -> Vec<Prop> {
    vec![Prop {
        name: "realization and removal keep concrete memories",
        run: |n| {
            let s = (any::<bool>(), prop::collection::vec(op(), 0..8), slot(), 0u64..8, 1u64..8, any::<usize>());
            run_prop(n, s, |(big, ops, probe, lo, len, pick)| check(big, ops, probe, lo, len, pick))
        },
    }]
}

#[test]
fn byte_of_a_constant_word_is_exact() {
    let (cfg, g) = setup();
    let abi = Abi::default();
    let inputs = BTreeMap::new();
    let dom = Dom { cfg: &cfg, abi: &abi, policy: OverflowPolicy::Wrap, fanout: 64, inputs: &inputs };
    let (mut s, _) = run(&dom, g, &[Op::Set(ScalarType::UInt, 0, 0x11223344, 0)], false);
    let c = Cell::new(g, 1, ScalarType::UChar);
    s.realize(&dom, c);
    let v = s.value(&c).unwrap().clone();
    assert_eq!(format!("{}", v.show(&cfg)), "[51, 51]");
}
