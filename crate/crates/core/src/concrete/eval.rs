use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abi::Abi;
use crate::alarm::AlarmKind;
use crate::ir::{Base, BinOp, Cfg, CopyType, Expr, Inst, UnOp, VarId};
use crate::scalar::ScalarType;

use super::phi::{phi, sample_range, sample_type, ValueSet};
use super::{Byte, Memory, PtrVal, Value};

/// Source of the nondeterministic choices of the executor.
pub trait Chooser {
    /// A number in `[0, n)`; `n = 0` yields 0.
    fn below(&mut self, n: u64) -> u64;
}

pub struct RngChooser(ChaCha8Rng);

impl RngChooser {
    pub fn new(seed: u64) -> RngChooser {
        RngChooser(ChaCha8Rng::seed_from_u64(seed))
    }
}

impl Chooser for RngChooser {
    fn below(&mut self, n: u64) -> u64 {
        if n == 0 {
            0
        } else {
            self.0.gen_range(0..n)
        }
    }
}

/// Evaluation context: the program, the ABI, input ranges of volatile
/// variables and the choice source. Drawn values are logged in `draws`.
pub struct Ctx<'a> {
    pub cfg: &'a Cfg,
    pub abi: &'a Abi,
    pub inputs: &'a BTreeMap<VarId, (i128, i128)>,
    pub chooser: &'a mut dyn Chooser,
    pub draws: Vec<String>,
}

impl Ctx<'_> {
    fn draw(&mut self, set: &ValueSet, m: &Memory) -> Value {
        if let Some(v) = set.singleton() {
            return v;
        }
        let mut bases = m.live_bases();
        bases.extend((0..self.cfg.funcs.len()).map(|f| (Base::Func(crate::ir::FuncId(f as u32)), 0)));
        let v = set.sample(self.chooser, self.abi, &bases);
        self.draws.push(v.show(self.cfg));
        v
    }
}

fn int_in(abi: &Abi, t: ScalarType, x: i128) -> Result<Value, AlarmKind> {
    let (lo, hi) = abi.int_range(t);
    if x < lo || x > hi {
        Err(AlarmKind::Overflow)
    } else {
        Ok(Value::Int(x))
    }
}

fn wrap(abi: &Abi, t: ScalarType, x: i128) -> i128 {
    let bits = abi.bits(t);
    let m = 1i128 << bits;
    let u = x.rem_euclid(m);
    if t.is_signed() && u >= m / 2 {
        u - m
    } else {
        u
    }
}

fn float_in(abi: &Abi, t: ScalarType, x: f64) -> Result<Value, AlarmKind> {
    let r = abi.round_float(t, x);
    if r.is_finite() {
        Ok(Value::Float(r))
    } else {
        Err(AlarmKind::Overflow)
    }
}

fn as_float(v: Value) -> f64 {
    match v {
        Value::Int(x) => x as f64,
        Value::Float(x) => x,
        Value::Ptr(_) => 0.0,
    }
}

fn as_int(v: Value) -> Result<i128, AlarmKind> {
    match v {
        Value::Int(x) => Ok(x),
        Value::Float(x) => Ok(x as i128),
        Value::Ptr(_) => Err(AlarmKind::InvalidPointer),
    }
}

/// Resolves a dereference target: the variable and offset of an in-bounds
/// access of `size` bytes, checking alignment when `align` is given.
fn target(p: Value, size: u64, align: Option<u64>, m: &Memory) -> Result<(VarId, u64), AlarmKind> {
    match p {
        Value::Ptr(PtrVal::Null) => Err(AlarmKind::NullDeref),
        Value::Ptr(PtrVal::Invalid) => Err(AlarmKind::InvalidPointer),
        Value::Ptr(PtrVal::Addr(Base::Func(_), _)) => Err(AlarmKind::OutOfBound),
        Value::Ptr(PtrVal::Addr(Base::Var(v), o)) => {
            let Some(len) = m.size(v) else {
                return Err(AlarmKind::InvalidPointer);
            };
            if o + size > len {
                return Err(AlarmKind::OutOfBound);
            }
            if let Some(a) = align {
                if o % a != 0 {
                    return Err(AlarmKind::Misaligned);
                }
            }
            Ok((v, o))
        }
        _ => Err(AlarmKind::InvalidPointer),
    }
}

fn compare(op: BinOp, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        BinOp::Eq => ord == Equal,
        BinOp::Ne => ord != Equal,
        BinOp::Lt => ord == Less,
        BinOp::Le => ord != Greater,
        BinOp::Gt => ord == Greater,
        BinOp::Ge => ord != Less,
        _ => unreachable!(),
    }
}

fn pointer_compare(op: BinOp, a: Value, b: Value) -> Result<Value, AlarmKind> {
    let (pa, pb) = match (a, b) {
        (Value::Ptr(x), Value::Ptr(y)) => (x, y),
        (Value::Ptr(x), Value::Int(0)) => (x, PtrVal::Null),
        (Value::Int(0), Value::Ptr(y)) => (PtrVal::Null, y),
        _ => return Err(AlarmKind::InvalidPointer),
    };
    if pa == PtrVal::Invalid || pb == PtrVal::Invalid {
        return Err(AlarmKind::InvalidPointer);
    }
    let r = match op {
        BinOp::Eq => pa == pb,
        BinOp::Ne => pa != pb,
        _ => match (pa, pb) {
            (PtrVal::Addr(b1, o1), PtrVal::Addr(b2, o2)) if b1 == b2 => compare(op, o1.cmp(&o2)),
            (PtrVal::Null, PtrVal::Null) => compare(op, std::cmp::Ordering::Equal),
            _ => return Err(AlarmKind::CrossBaseArith),
        },
    };
    Ok(Value::Int(r as i128))
}

fn pointer_arith(op: BinOp, a: Value, b: Value, cfg: &Cfg, m: &Memory) -> Result<Value, AlarmKind> {
    let (base, off) = match a {
        Value::Ptr(PtrVal::Addr(base, off)) => (base, off),
        Value::Ptr(PtrVal::Null) => return Err(AlarmKind::NullDeref),
        _ => return Err(AlarmKind::InvalidPointer),
    };
    let j = as_int(b)?;
    let j = if op == BinOp::Sub { -j } else { j };
    let size = match base {
        Base::Var(v) => m.size(v).unwrap_or_else(|| cfg.var(v).size),
        Base::Func(_) => 0,
    };
    let n = off as i128 + j;
    if n < 0 || n > size as i128 {
        return Err(AlarmKind::OutOfBound);
    }
    Ok(Value::Ptr(PtrVal::Addr(base, n as u64)))
}

fn int_binary(abi: &Abi, op: BinOp, a: i128, b: i128, t: ScalarType) -> Result<Value, AlarmKind> {
    match op {
        BinOp::Add => int_in(abi, t, a + b),
        BinOp::Sub => int_in(abi, t, a - b),
        BinOp::Mul => a.checked_mul(b).map_or(Err(AlarmKind::Overflow), |x| int_in(abi, t, x)),
        BinOp::Div | BinOp::Mod if b == 0 => Err(AlarmKind::DivByZero),
        BinOp::Div => int_in(abi, t, a / b),
        BinOp::Mod => Ok(Value::Int(a % b)),
        BinOp::Shl | BinOp::Shr if b < 0 || b >= abi.bits(t) as i128 => Err(AlarmKind::Overflow),
        BinOp::Shl if a < 0 => Err(AlarmKind::Overflow),
        BinOp::Shl => int_in(abi, t, a << b),
        BinOp::Shr => Ok(Value::Int(a >> b)),
        BinOp::BitAnd => int_in(abi, t, a & b),
        BinOp::BitOr => int_in(abi, t, a | b),
        BinOp::BitXor => int_in(abi, t, a ^ b),
        _ => unreachable!(),
    }
}

fn float_binary(abi: &Abi, op: BinOp, a: f64, b: f64, t: ScalarType) -> Result<Value, AlarmKind> {
    match op {
        BinOp::Add => float_in(abi, t, a + b),
        BinOp::Sub => float_in(abi, t, a - b),
        BinOp::Mul => float_in(abi, t, a * b),
        BinOp::Div if b == 0.0 => Err(AlarmKind::DivByZero),
        BinOp::Div => float_in(abi, t, a / b),
        _ => Err(AlarmKind::Overflow),
    }
}

/// Converts a value to type `t`.
fn convert(ctx: &mut Ctx, m: &Memory, t: ScalarType, v: Value) -> Result<Value, AlarmKind> {
    let abi = ctx.abi;
    match (t, v) {
        (ScalarType::Ptr, Value::Ptr(_)) => Ok(v),
        (ScalarType::Ptr, _) if v.is_zero() => Ok(Value::Ptr(PtrVal::Null)),
        (ScalarType::Ptr, _) => Ok(ctx.draw(&ValueSet::All(ScalarType::Ptr), m)),
        (_, Value::Ptr(PtrVal::Null)) if t.is_integer() => Ok(Value::Int(0)),
        (_, Value::Ptr(PtrVal::Null)) => Ok(Value::Float(0.0)),
        (_, Value::Ptr(_)) => Ok(ctx.draw(&ValueSet::All(t), m)),
        (_, Value::Int(x)) if t.is_integer() => Ok(Value::Int(wrap(abi, t, x))),
        (_, Value::Int(x)) => float_in(abi, t, x as f64),
        (_, Value::Float(x)) if t.is_integer() => {
            let x = x.trunc();
            let (lo, hi) = abi.int_range(t);
            if x < lo as f64 || x > hi as f64 {
                Err(AlarmKind::Overflow)
            } else {
                Ok(Value::Int(x as i128))
            }
        }
        (_, Value::Float(x)) => float_in(abi, t, x),
    }
}

/// Reads a scalar of type `t` at a pointer value, sampling non-singleton
/// recompositions.
pub fn load(ctx: &mut Ctx, m: &Memory, t: ScalarType, p: Value) -> Result<Value, AlarmKind> {
    let size = ctx.abi.size(t);
    let (v, o) = target(p, size, Some(ctx.abi.align(t)), m)?;
    let bytes = m.read(v, o, size);
    if bytes.contains(&Byte::Uninit) {
        return Err(AlarmKind::UninitRead);
    }
    let set = phi(t, bytes, ctx.abi);
    Ok(ctx.draw(&set, m))
}

pub fn eval_expr(ctx: &mut Ctx, e: &Expr, m: &Memory) -> Result<Value, AlarmKind> {
    let abi = ctx.abi;
    match e {
        Expr::Int(x, t) => Ok(Value::Int(if t.is_integer() { *x } else { 0 })),
        Expr::Float(x, t) => float_in(abi, *t, *x),
        Expr::AddrOf(b) => Ok(Value::Ptr(PtrVal::Addr(*b, 0))),
        Expr::Unary(op, a, t) => {
            let a = eval_expr(ctx, a, m)?;
            match op {
                UnOp::Not => Ok(Value::Int(a.is_zero() as i128)),
                UnOp::Neg if t.is_float() => float_in(abi, *t, -as_float(a)),
                UnOp::Neg => int_in(abi, *t, -as_int(a)?),
                UnOp::BitNot => int_in(abi, *t, wrap(abi, *t, !as_int(a)?)),
            }
        }
        Expr::Binary(op, a, b, t) => {
            let a = eval_expr(ctx, a, m)?;
            let b = eval_expr(ctx, b, m)?;
            let is_ptr = |v: &Value| matches!(v, Value::Ptr(_));
            if op.is_comparison() {
                if is_ptr(&a) || is_ptr(&b) {
                    return pointer_compare(*op, a, b);
                }
                let ord = match (a, b) {
                    (Value::Int(x), Value::Int(y)) => x.cmp(&y),
                    _ => as_float(a).partial_cmp(&as_float(b)).unwrap_or(std::cmp::Ordering::Equal),
                };
                return Ok(Value::Int(compare(*op, ord) as i128));
            }
            if *t == ScalarType::Ptr {
                return pointer_arith(*op, a, b, ctx.cfg, m);
            }
            if let (Value::Ptr(pa), Value::Ptr(pb)) = (a, b) {
                if *op != BinOp::Sub {
                    return Err(AlarmKind::InvalidPointer);
                }
                return match (pa, pb) {
                    (PtrVal::Addr(b1, o1), PtrVal::Addr(b2, o2)) if b1 == b2 => {
                        int_in(abi, *t, o1 as i128 - o2 as i128)
                    }
                    (PtrVal::Invalid, _) | (_, PtrVal::Invalid) => Err(AlarmKind::InvalidPointer),
                    (PtrVal::Null, PtrVal::Null) => Ok(Value::Int(0)),
                    _ => Err(AlarmKind::CrossBaseArith),
                };
            }
            if t.is_float() {
                float_binary(abi, *op, as_float(a), as_float(b), *t)
            } else {
                int_binary(abi, *op, as_int(a)?, as_int(b)?, *t)
            }
        }
        Expr::Deref(t, a) => {
            let p = eval_expr(ctx, a, m)?;
            load(ctx, m, *t, p)
        }
        Expr::Cast(t, a) => {
            let v = eval_expr(ctx, a, m)?;
            convert(ctx, m, *t, v)
        }
        Expr::Input(x, t) => {
            if t.is_integer() {
                let (lo, hi) = abi.int_range(*t);
                let (a, b) = ctx.inputs.get(x).copied().unwrap_or((lo, hi));
                let v = Value::Int(sample_range(a.max(lo), b.min(hi), ctx.chooser));
                ctx.draws.push(v.show(ctx.cfg));
                Ok(v)
            } else {
                let bases = m.live_bases();
                let v = sample_type(*t, ctx.chooser, abi, &bases);
                ctx.draws.push(v.show(ctx.cfg));
                Ok(v)
            }
        }
    }
}

/// Executes one instruction. `Ok(None)` means a guard filtered the memory.
pub fn exec_inst(ctx: &mut Ctx, inst: &Inst, m: &Memory) -> Result<Option<Memory>, AlarmKind> {
    match inst {
        Inst::Assign { ty, addr, value } => {
            let p = eval_expr(ctx, addr, m)?;
            let size = ctx.abi.size(*ty);
            let (v, o) = target(p, size, Some(ctx.abi.align(*ty)), m)?;
            let val = eval_expr(ctx, value, m)?;
            let val = if val_matches(*ty, &val) { val } else { convert(ctx, m, *ty, val)? };
            let mut out = m.clone();
            out.store(v, o, *ty, size, val);
            Ok(Some(out))
        }
        Inst::Copy { ty, dst, src } => {
            let size = match ty {
                CopyType::Scalar(t) => ctx.abi.size(*t),
                CopyType::Bytes(n) => *n,
            };
            let pd = eval_expr(ctx, dst, m)?;
            let ps = eval_expr(ctx, src, m)?;
            let (dv, doff) = target(pd, size, None, m)?;
            let (sv, soff) = target(ps, size, None, m)?;
            let bytes = m.read(sv, soff, size).to_vec();
            let mut out = m.clone();
            out.write(dv, doff, &bytes);
            Ok(Some(out))
        }
        Inst::Guard(e) => {
            let v = eval_expr(ctx, e, m)?;
            Ok(if v.is_zero() { Some(m.clone()) } else { None })
        }
    }
}

fn val_matches(t: ScalarType, v: &Value) -> bool {
    match v {
        Value::Int(_) => t.is_integer(),
        Value::Float(_) => t.is_float(),
        Value::Ptr(_) => t.is_ptr(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{compile, LowerOptions};

    fn with_ctx<R>(cfg: &Cfg, f: impl FnOnce(&mut Ctx) -> R) -> R {
        let abi = Abi::default();
        let inputs = BTreeMap::new();
        let mut ch = RngChooser::new(1);
        let mut ctx = Ctx { cfg, abi: &abi, inputs: &inputs, chooser: &mut ch, draws: Vec::new() };
        f(&mut ctx)
    }

    fn program() -> Cfg {
        compile(
            "struct { int a[3]; int b; } U; unsigned short regs[2]; void main(void){ }",
            &Abi::default(),
            &LowerOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn pointer_arithmetic_bounds() {
        let cfg = program();
        let u = cfg.var_by_name("U").unwrap();
        let m = Memory::initial(&cfg);
        with_ctx(&cfg, |ctx| {
            let e = Expr::var_addr(u, 12);
            assert_eq!(eval_expr(ctx, &e, &m), Ok(Value::Ptr(PtrVal::Addr(Base::Var(u), 12))));
            let e = Expr::var_addr(u, 16);
            assert!(eval_expr(ctx, &e, &m).is_ok());
            let e = Expr::var_addr(u, 20);
            assert_eq!(eval_expr(ctx, &e, &m), Err(AlarmKind::OutOfBound));
        });
    }

    #[test]
    fn store_then_read_byte() {
        let cfg = program();
        let r = cfg.var_by_name("regs").unwrap();
        let m = Memory::initial(&cfg);
        with_ctx(&cfg, |ctx| {
            let st = Inst::Assign {
                ty: ScalarType::UShort,
                addr: Expr::var_addr(r, 0),
                value: Expr::Int(0x1234, ScalarType::UShort),
            };
            let m = exec_inst(ctx, &st, &m).unwrap().unwrap();
            let rd = Expr::deref(ScalarType::UChar, Expr::var_addr(r, 1));
            assert_eq!(eval_expr(ctx, &rd, &m), Ok(Value::Int(0x12)));
            let guard = Inst::Guard(Expr::deref(ScalarType::UShort, Expr::var_addr(r, 0)));
            assert_eq!(exec_inst(ctx, &guard, &m), Ok(None));
        });
    }

    #[test]
    fn misaligned_and_division_errors() {
        let cfg = program();
        let u = cfg.var_by_name("U").unwrap();
        let m = Memory::initial(&cfg);
        with_ctx(&cfg, |ctx| {
            let rd = Expr::deref(ScalarType::Int, Expr::var_addr(u, 2));
            assert_eq!(eval_expr(ctx, &rd, &m), Err(AlarmKind::Misaligned));
            let d = Expr::binary(BinOp::Div, Expr::int(1), Expr::int(0), ScalarType::Int);
            assert_eq!(eval_expr(ctx, &d, &m), Err(AlarmKind::DivByZero));
            let o = Expr::binary(BinOp::Add, Expr::int(i32::MAX as i128), Expr::int(1), ScalarType::Int);
            assert_eq!(eval_expr(ctx, &o, &m), Err(AlarmKind::Overflow));
        });
    }
}
