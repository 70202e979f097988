use cellscope_core::cells::CopyWindow;
use cellscope_core::equality::EqState;
use cellscope_core::ir::VarId;
use proptest::prelude::*;

use super::{check, Prop};

const VARS: usize = 3;
const SIZE: u64 = 8;

type Mem = [[u8; SIZE as usize]; VARS];

#[derive(Clone, Debug)]
enum Op {
    Copy(CopyWindow),
    Write(u32, u64, u64, u8),
}

fn window() -> impl Strategy<Value = CopyWindow> {
    (0u32..VARS as u32, 0u32..VARS as u32, 1u64..=4).prop_flat_map(|(src, dst, len)| {
        (0..=SIZE - len, 0..=SIZE - len).prop_map(move |(soff, doff)| CopyWindow {
            dst: VarId(dst),
            doff,
            src: VarId(src),
            soff,
            len,
        })
    })
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => window().prop_map(Op::Copy),
        1 => (0u32..VARS as u32, 0u64..SIZE, 1u64..=3, any::<u8>())
            .prop_map(|(v, lo, n, b)| Op::Write(v, lo, (lo + n).min(SIZE), b)),
    ]
}

fn memory() -> impl Strategy<Value = Mem> {
    prop::array::uniform3(prop::array::uniform8(0u8..2))
}

fn holds(e: &EqState, m: &Mem) -> bool {
    e.iter().all(|(k, b)| {
        let (k, w) = (k.0 as usize, b.w.0 as usize);
        (0..b.l as usize).all(|i| m[k][b.s as usize + i] == m[w][b.d as usize + i])
    })
}

fn apply(e: &mut EqState, m: &mut Mem, op: &Op) {
    match op {
        Op::Copy(w) => {
            let bytes: Vec<u8> = (0..w.len).map(|i| m[w.src.0 as usize][(w.soff + i) as usize]).collect();
            for (i, b) in bytes.iter().enumerate() {
                m[w.dst.0 as usize][w.doff as usize + i] = *b;
            }
            e.copy(w);
        }
        Op::Write(v, lo, hi, b) => {
            for i in *lo..*hi {
                m[*v as usize][i as usize] = *b;
            }
            e.clobber(VarId(*v), *lo, *hi);
        }
    }
}

fn state_of(ops: &[Op], start: Mem) -> EqState {
    let mut e = EqState::new();
    let mut m = start;
    for o in ops {
        apply(&mut e, &mut m, o);
    }
    e
}

fn transfers(ops: Vec<Op>, start: Mem) -> Result<(), TestCaseError> {
    let mut e = EqState::new();
    let mut m = start;
    for o in &ops {
        apply(&mut e, &mut m, o);
        prop_assert!(holds(&e, &m), "{:?} broken after {:?}", e, o);
    }
    Ok(())
}

fn upper_bound(a: Vec<Op>, b: Vec<Op>) -> Result<(), TestCaseError> {
    let (x, y) = (state_of(&a, [[0; 8]; 3]), state_of(&b, [[0; 8]; 3]));
    let j = x.lub(&y);
    prop_assert!(x.leq(&j));
    prop_assert!(y.leq(&j));
    prop_assert_eq!(&j, &y.lub(&x));
    prop_assert_eq!(&x.lub(&x), &x);
    prop_assert_eq!(&j.lub(&x), &j);
    prop_assert!(x.leq(&x));
    prop_assert!(x.leq(&EqState::new()));
    Ok(())
}

fn concretization(a: Vec<Op>, b: Vec<Op>, m: Mem) -> Result<(), TestCaseError> {
    let (x, y) = (state_of(&a, [[0; 8]; 3]), state_of(&b, [[0; 8]; 3]));
    let j = x.lub(&y);
    if holds(&x, &m) || holds(&y, &m) {
        prop_assert!(holds(&j, &m));
    }
    if x.leq(&y) && holds(&x, &m) {
        prop_assert!(holds(&y, &m));
    }
    prop_assert_eq!(x.leq(&y), x.lub(&y) == y);
    Ok(())
}

fn ops(n: usize) -> impl Strategy<Value = Vec<Op>> {
    prop::collection::vec(op(), 0..n)
}

pub fn props() -> Vec<Prop> {
    vec![
        Prop { name: "transfers preserve concrete equalities", run: |n| check(n, (ops(16), memory()), |(o, m)| transfers(o, m)) },
        Prop { name: "lub is an upper bound", run: |n| check(n, (ops(12), ops(12)), |(a, b)| upper_bound(a, b)) },
        Prop {
            name: "order and lub agree with concretization",
            run: |n| check(n, (ops(12), ops(12), memory()), |(a, b, m)| concretization(a, b, m)),
        },
    ]
}
