//! Expression lowering: field and index accesses become byte arithmetic on
//! addresses, side effects become instructions at the current point.

use crate::error::FrontendError;
use crate::ir::{BinOp, Expr, Inst, Loc, UnOp, VarId};
use crate::scalar::ScalarType;

use super::ast::{self, BinaryOp, ExprKind, UnaryOp};
use super::ctype::{CType, FuncSig};
use super::lexer::IntSuffix;
use super::lower::Lowerer;

#[derive(Clone, Debug)]
pub(crate) enum Val {
    Scalar(Expr, CType),
    /// An aggregate designated by its address.
    Agg(Expr, CType),
    Void,
}

#[derive(Clone, Debug)]
pub(crate) struct Lv {
    pub addr: Expr,
    pub ty: CType,
    /// Set when the access goes directly to a volatile variable.
    pub vol: Option<VarId>,
}

impl Lv {
    pub fn offset(&self, k: i128, ty: CType) -> Lv {
        Lv { addr: addr_add(self.addr.clone(), k), ty, vol: self.vol }
    }
}

/// `e + k` in bytes, folding into `&V + c` forms.
pub(crate) fn addr_add(e: Expr, k: i128) -> Expr {
    match e {
        Expr::Binary(BinOp::Add, a, b, ScalarType::Ptr) if matches!(*a, Expr::AddrOf(_)) => match *b {
            Expr::Int(c, t) => Expr::Binary(BinOp::Add, a, Box::new(Expr::Int(c + k, t)), ScalarType::Ptr),
            b => {
                let e = Expr::Binary(BinOp::Add, a, Box::new(b), ScalarType::Ptr);
                if k == 0 {
                    e
                } else {
                    Expr::binary(BinOp::Add, e, Expr::int(k), ScalarType::Ptr)
                }
            }
        },
        e @ Expr::AddrOf(_) => Expr::binary(BinOp::Add, e, Expr::int(k), ScalarType::Ptr),
        e if k == 0 => e,
        e => Expr::binary(BinOp::Add, e, Expr::int(k), ScalarType::Ptr),
    }
}

pub(crate) fn null_ptr() -> Expr {
    Expr::Cast(ScalarType::Ptr, Box::new(Expr::int(0)))
}

fn is_lvalue_kind(e: &ast::Expr) -> bool {
    matches!(
        e.kind,
        ExprKind::Ident(_) | ExprKind::Unary(UnaryOp::Deref, _) | ExprKind::Member(..) | ExprKind::Arrow(..) | ExprKind::Index(..)
    )
}

fn has_side_effects(e: &ast::Expr) -> bool {
    match &e.kind {
        ExprKind::Assign(..) | ExprKind::Call(..) => true,
        ExprKind::Unary(op, a) => {
            matches!(op, UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec) || has_side_effects(a)
        }
        ExprKind::Cast(_, a) | ExprKind::Member(a, _) | ExprKind::Arrow(a, _) => has_side_effects(a),
        ExprKind::Binary(_, a, b) | ExprKind::Index(a, b) | ExprKind::Comma(a, b) => {
            has_side_effects(a) || has_side_effects(b)
        }
        ExprKind::Cond(a, b, c) => has_side_effects(a) || has_side_effects(b) || has_side_effects(c),
        _ => false,
    }
}

fn type_err<T>(loc: Loc, msg: impl Into<String>) -> Result<T, FrontendError> {
    Err(FrontendError::Type { loc, msg: msg.into() })
}

fn decay(t: CType) -> CType {
    match t {
        CType::Array(e, _) => CType::Pointer(e),
        f @ CType::Function(_) => CType::Pointer(Box::new(f)),
        t => t,
    }
}

impl<'a> Lowerer<'a> {
    pub(crate) fn var_lvalue(&self, v: VarId) -> Lv {
        let info = &self.vars[v.0 as usize];
        Lv { addr: Expr::var_addr(v, 0), ty: self.var_types[v.0 as usize].clone(), vol: info.volatile.then_some(v) }
    }

    pub(crate) fn promote(&self, t: ScalarType) -> ScalarType {
        if t.is_integer() && t.rank() < ScalarType::Int.rank() {
            let (lo, hi) = self.abi.int_range(t);
            let (ilo, ihi) = self.abi.int_range(ScalarType::Int);
            if ilo <= lo && hi <= ihi {
                ScalarType::Int
            } else {
                ScalarType::UInt
            }
        } else {
            t
        }
    }

    fn common(&self, a: ScalarType, b: ScalarType) -> ScalarType {
        if a.is_float() || b.is_float() {
            let order = [ScalarType::Float, ScalarType::Double, ScalarType::LongDouble];
            let pos = |t: ScalarType| order.iter().position(|x| *x == t);
            return match (pos(a), pos(b)) {
                (Some(x), Some(y)) => order[x.max(y)],
                (Some(_), None) => a,
                _ => b,
            };
        }
        let (a, b) = (self.promote(a), self.promote(b));
        if a == b {
            return a;
        }
        if a.is_signed() == b.is_signed() {
            return if a.rank() >= b.rank() { a } else { b };
        }
        let (u, s) = if a.is_unsigned() { (a, b) } else { (b, a) };
        if u.rank() >= s.rank() {
            return u;
        }
        let (ulo, uhi) = self.abi.int_range(u);
        let (slo, shi) = self.abi.int_range(s);
        if slo <= ulo && uhi <= shi {
            s
        } else {
            s.to_unsigned()
        }
    }

    pub(crate) fn int_const(&self, v: i128, t: ScalarType) -> Expr {
        self.fold_cast(t, Expr::Int(v, ScalarType::LongLong))
    }

    pub(crate) fn fold_cast(&self, t: ScalarType, e: Expr) -> Expr {
        match e {
            Expr::Int(v, _) if t.is_integer() => {
                let (lo, hi) = self.abi.int_range(t);
                if lo <= v && v <= hi {
                    Expr::Int(v, t)
                } else {
                    Expr::Cast(t, Box::new(Expr::Int(v, ScalarType::LongLong)))
                }
            }
            Expr::Int(v, s) if t.is_float() => {
                if v.unsigned_abs() < (1 << 24) {
                    Expr::Float(v as f64, t)
                } else {
                    Expr::Cast(t, Box::new(Expr::Int(v, s)))
                }
            }
            Expr::Float(x, s) if t.is_float() => {
                if self.abi.round_float(t, x) == x {
                    Expr::Float(x, t)
                } else {
                    Expr::Cast(t, Box::new(Expr::Float(x, s)))
                }
            }
            e => Expr::cast(t, e),
        }
    }

    fn lit_type(&self, v: i128, s: IntSuffix) -> ScalarType {
        use ScalarType::*;
        let cands: &[ScalarType] = match (s.unsigned, s.long) {
            (true, 0) => &[UInt, ULong, ULongLong],
            (true, 1) => &[ULong, ULongLong],
            (true, _) => &[ULongLong],
            (false, 0) => &[Int, UInt, Long, ULong, LongLong, ULongLong],
            (false, 1) => &[Long, ULong, LongLong, ULongLong],
            (false, _) => &[LongLong, ULongLong],
        };
        for t in cands {
            let (lo, hi) = self.abi.int_range(*t);
            if lo <= v && v <= hi {
                return *t;
            }
        }
        ULongLong
    }

    fn elem_size(&self, pointee: &CType) -> i128 {
        match pointee {
            CType::Void | CType::Function(_) => 1,
            t => self.types.size_of(t, self.abi) as i128,
        }
    }

    /// Evaluates an expression only for its type, leaving no trace.
    fn type_of(&mut self, e: &ast::Expr) -> Result<CType, FrontendError> {
        let snap = self.snapshot();
        let r = if is_lvalue_kind(e) {
            self.lvalue(e).map(|lv| lv.ty)
        } else {
            self.rvalue(e).map(|v| match v {
                Val::Scalar(_, t) | Val::Agg(_, t) => t,
                Val::Void => CType::Void,
            })
        };
        self.restore(snap);
        r
    }

    pub(crate) fn lvalue(&mut self, e: &ast::Expr) -> Result<Lv, FrontendError> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::Ident(name) => match self.lookup(name) {
                Some(b) => Ok(self.var_lvalue(b.var)),
                None if self.func_ids.contains_key(name) => {
                    let f = self.prog.functions.iter().find(|f| &f.name == name).unwrap();
                    let sig = FuncSig { ret: f.ret.clone(), params: f.params.iter().map(|p| p.1.clone()).collect() };
                    Ok(Lv { addr: self.func_addr(name).unwrap(), ty: CType::Function(Box::new(sig)), vol: None })
                }
                None => Err(FrontendError::UnknownIdent { loc, name: name.clone() }),
            },
            ExprKind::Unary(UnaryOp::Deref, p) => {
                let (pe, pt) = self.scalar_rvalue(p)?;
                match pt {
                    CType::Pointer(t) => Ok(Lv { addr: pe, ty: *t, vol: None }),
                    _ => type_err(loc, "dereference of a non-pointer"),
                }
            }
            ExprKind::Member(b, f) => {
                let base = self.lvalue(b)?;
                self.field(base, f, loc)
            }
            ExprKind::Arrow(p, f) => {
                let (pe, pt) = self.scalar_rvalue(p)?;
                match pt {
                    CType::Pointer(t) => self.field(Lv { addr: pe, ty: *t, vol: None }, f, loc),
                    _ => type_err(loc, "`->` on a non-pointer"),
                }
            }
            ExprKind::Index(a, i) => {
                let (a, i) = match self.type_of(a)? {
                    t if t.is_integer() => (i, a),
                    _ => (a, i),
                };
                let (base, elem, vol) = if is_lvalue_kind(a) {
                    let lv = self.lvalue(a)?;
                    match lv.ty {
                        CType::Array(elem, _) => (lv.addr, *elem, lv.vol),
                        CType::Pointer(elem) => (Expr::deref(ScalarType::Ptr, lv.addr), *elem, None),
                        _ => return type_err(loc, "subscript of a non-array"),
                    }
                } else {
                    match self.scalar_rvalue(a)? {
                        (pe, CType::Pointer(elem)) => (pe, *elem, None),
                        _ => return type_err(loc, "subscript of a non-array"),
                    }
                };
                let base = if has_side_effects(i) && base.contains_deref() {
                    self.spill(base, CType::Pointer(Box::new(elem.clone())), loc)
                } else {
                    base
                };
                let (ie, it) = self.scalar_rvalue(i)?;
                if !it.is_integer() {
                    return type_err(loc, "non-integer subscript");
                }
                let addr = self.ptr_offset(base, &elem, ie, it.scalar().unwrap(), BinOp::Add);
                Ok(Lv { addr, ty: elem, vol })
            }
            _ => match self.rvalue(e)? {
                Val::Agg(addr, ty) => Ok(Lv { addr, ty, vol: None }),
                _ => type_err(loc, "expression is not assignable"),
            },
        }
    }

    fn field(&self, base: Lv, f: &str, loc: Loc) -> Result<Lv, FrontendError> {
        match &base.ty {
            CType::Record(id) => match self.types.field(*id, f, self.abi) {
                Some((off, ft)) => Ok(base.offset(off as i128, ft)),
                None => type_err(loc, format!("no field `{}`", f)),
            },
            _ => type_err(loc, format!("request for field `{}` in a non-record", f)),
        }
    }

    fn spill(&mut self, e: Expr, ty: CType, loc: Loc) -> Expr {
        let st = ty.scalar().unwrap();
        let t = self.temp(ty);
        self.emit(Inst::Assign { ty: st, addr: Expr::var_addr(t, 0), value: e }, loc);
        Expr::deref(st, Expr::var_addr(t, 0))
    }

    fn ptr_offset(&self, p: Expr, elem: &CType, idx: Expr, it: ScalarType, op: BinOp) -> Expr {
        let size = self.elem_size(elem);
        if let Expr::Int(v, _) = idx {
            let k = if op == BinOp::Add { v * size } else { -v * size };
            if matches!(&p, Expr::Binary(BinOp::Add, a, _, _) if matches!(**a, Expr::AddrOf(_))) {
                return addr_add(p, k);
            }
            let pt = self.promote(it);
            return Expr::binary(op, p, self.int_const(v * size, pt), ScalarType::Ptr);
        }
        let off = if size == 1 {
            idx
        } else {
            let pt = self.promote(it);
            Expr::binary(BinOp::Mul, self.fold_cast(pt, idx), Expr::Int(size, pt), pt)
        };
        Expr::binary(op, p, off, ScalarType::Ptr)
    }

    fn read(&mut self, lv: Lv, loc: Loc) -> Result<Val, FrontendError> {
        match lv.ty {
            CType::Array(..) | CType::Function(_) => Ok(Val::Scalar(lv.addr, decay(lv.ty))),
            CType::Record(_) => Ok(Val::Agg(lv.addr, lv.ty)),
            CType::Void => type_err(loc, "use of a void value"),
            ref t => {
                let st = t.scalar().unwrap();
                if let Some(v) = lv.vol {
                    self.emit(Inst::Assign { ty: st, addr: lv.addr.clone(), value: Expr::Input(v, st) }, loc);
                }
                Ok(Val::Scalar(Expr::deref(st, lv.addr), lv.ty))
            }
        }
    }

    pub(crate) fn scalar_rvalue(&mut self, e: &ast::Expr) -> Result<(Expr, CType), FrontendError> {
        match self.rvalue(e)? {
            Val::Scalar(x, t) => Ok((x, t)),
            _ => type_err(e.loc, "expected a scalar value"),
        }
    }

    pub(crate) fn rvalue(&mut self, e: &ast::Expr) -> Result<Val, FrontendError> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::IntLit(v, s) => {
                let t = self.lit_type(*v, *s);
                Ok(Val::Scalar(Expr::Int(*v, t), CType::Scalar(t)))
            }
            ExprKind::CharLit(v) => Ok(Val::Scalar(Expr::Int(*v, ScalarType::Int), CType::Scalar(ScalarType::Int))),
            ExprKind::FloatLit(x) => {
                Ok(Val::Scalar(Expr::Float(*x, ScalarType::Double), CType::Scalar(ScalarType::Double)))
            }
            ExprKind::Ident(_)
            | ExprKind::Member(..)
            | ExprKind::Arrow(..)
            | ExprKind::Index(..)
            | ExprKind::Unary(UnaryOp::Deref, _) => {
                let lv = self.lvalue(e)?;
                self.read(lv, loc)
            }
            ExprKind::Unary(op, a) => self.unary(*op, a, loc),
            ExprKind::Binary(BinaryOp::LogAnd | BinaryOp::LogOr, ..) => {
                let t = self.temp(CType::Scalar(ScalarType::Int));
                let (tp, fp, join) = (self.new_point(loc), self.new_point(loc), self.new_point(loc));
                self.cond(e, tp, fp)?;
                for (p, v) in [(tp, 1), (fp, 0)] {
                    self.cur = p;
                    self.emit(Inst::Assign { ty: ScalarType::Int, addr: Expr::var_addr(t, 0), value: Expr::int(v) }, loc);
                    let cur = self.cur;
                    self.edge(cur, join, Inst::nop(), loc);
                }
                self.cur = join;
                Ok(Val::Scalar(Expr::deref(ScalarType::Int, Expr::var_addr(t, 0)), CType::Scalar(ScalarType::Int)))
            }
            ExprKind::Binary(op, a, b) => {
                let (ae, at) = self.scalar_rvalue(a)?;
                let ae = if has_side_effects(b) && ae.contains_deref() { self.spill(ae, at.clone(), loc) } else { ae };
                let (be, bt) = self.scalar_rvalue(b)?;
                let (x, t) = self.arith(*op, (ae, at), (be, bt), loc)?;
                Ok(Val::Scalar(x, t))
            }
            ExprKind::Assign(op, l, r) => {
                let lv = self.lvalue(l)?;
                match op {
                    None => self.assign_expr(lv.clone(), r, loc)?,
                    Some(op) => {
                        let cur = match self.read(lv.clone(), loc)? {
                            Val::Scalar(x, t) => (x, t),
                            _ => return type_err(loc, "compound assignment to an aggregate"),
                        };
                        let cur = if has_side_effects(r) { (self.spill(cur.0, cur.1.clone(), loc), cur.1) } else { cur };
                        let rhs = self.scalar_rvalue(r)?;
                        let (x, t) = self.arith(*op, cur, rhs, loc)?;
                        self.store_val(lv.clone(), Val::Scalar(x, t), loc)?;
                    }
                }
                self.read(Lv { vol: None, ..lv }, loc)
            }
            ExprKind::Cond(c, a, b) => {
                let (ta, tb) = (decay(self.type_of(a)?), decay(self.type_of(b)?));
                let rt = match (&ta, &tb) {
                    (CType::Scalar(x), CType::Scalar(y)) => CType::Scalar(self.common(*x, *y)),
                    (CType::Pointer(_), _) => ta.clone(),
                    (_, CType::Pointer(_)) => tb.clone(),
                    (CType::Void, _) | (_, CType::Void) => CType::Void,
                    _ => ta.clone(),
                };
                let tmp = if rt == CType::Void { None } else { Some(self.temp(rt.clone())) };
                let (pa, pb, join) = (self.new_point(a.loc), self.new_point(b.loc), self.new_point(loc));
                self.cond(c, pa, pb)?;
                for (p, x) in [(pa, a), (pb, b)] {
                    self.cur = p;
                    match tmp {
                        Some(t) => {
                            let lv = self.var_lvalue(t);
                            self.assign_expr(lv, x, loc)?;
                        }
                        None => self.effect(x)?,
                    }
                    let cur = self.cur;
                    self.edge(cur, join, Inst::nop(), loc);
                }
                self.cur = join;
                match tmp {
                    Some(t) => {
                        let lv = self.var_lvalue(t);
                        self.read(lv, loc)
                    }
                    None => Ok(Val::Void),
                }
            }
            ExprKind::Cast(t, a) => {
                if *t == CType::Void {
                    self.effect(a)?;
                    return Ok(Val::Void);
                }
                let (x, at) = self.scalar_rvalue(a)?;
                match (t, &at) {
                    (CType::Pointer(_), CType::Pointer(_)) => Ok(Val::Scalar(x, t.clone())),
                    (CType::Pointer(_), CType::Scalar(s)) if s.is_integer() => {
                        Ok(Val::Scalar(self.fold_cast(ScalarType::Ptr, x), t.clone()))
                    }
                    (CType::Scalar(s), CType::Pointer(_)) if s.is_integer() => {
                        Ok(Val::Scalar(Expr::cast(*s, x), t.clone()))
                    }
                    (CType::Scalar(s), CType::Scalar(_)) => Ok(Val::Scalar(self.fold_cast(*s, x), t.clone())),
                    _ => type_err(loc, "invalid cast"),
                }
            }
            ExprKind::SizeofType(t) => {
                let n = self.types.size_of(t, self.abi) as i128;
                Ok(Val::Scalar(Expr::Int(n, ScalarType::UInt), CType::Scalar(ScalarType::UInt)))
            }
            ExprKind::SizeofExpr(a) => {
                let t = self.type_of(a)?;
                let n = self.types.size_of(&t, self.abi) as i128;
                Ok(Val::Scalar(Expr::Int(n, ScalarType::UInt), CType::Scalar(ScalarType::UInt)))
            }
            ExprKind::Call(f, args) => self.call(f, args, loc),
            ExprKind::Comma(a, b) => {
                self.effect(a)?;
                self.rvalue(b)
            }
        }
    }

    fn unary(&mut self, op: UnaryOp, a: &ast::Expr, loc: Loc) -> Result<Val, FrontendError> {
        match op {
            UnaryOp::Deref => unreachable!("dereferences are lowered as lvalues"),
            UnaryOp::AddrOf => {
                if let ExprKind::Unary(UnaryOp::Deref, p) = &a.kind {
                    let (x, t) = self.scalar_rvalue(p)?;
                    if t.is_pointer() {
                        return Ok(Val::Scalar(x, t));
                    }
                }
                let lv = self.lvalue(a)?;
                if let CType::Function(_) = lv.ty {
                    return Ok(Val::Scalar(lv.addr, decay(lv.ty)));
                }
                Ok(Val::Scalar(lv.addr, CType::Pointer(Box::new(lv.ty))))
            }
            UnaryOp::Neg | UnaryOp::Plus | UnaryOp::BitNot => {
                let (x, t) = self.scalar_rvalue(a)?;
                let st = match t {
                    CType::Scalar(s) => s,
                    _ => return type_err(loc, "arithmetic on a pointer"),
                };
                if op == UnaryOp::BitNot && !st.is_integer() {
                    return type_err(loc, "`~` on a non-integer");
                }
                let pt = self.promote(st);
                let x = self.fold_cast(pt, x);
                let r = match op {
                    UnaryOp::Plus => x,
                    UnaryOp::Neg => Expr::Unary(UnOp::Neg, Box::new(x), pt),
                    _ => Expr::Unary(UnOp::BitNot, Box::new(x), pt),
                };
                Ok(Val::Scalar(r, CType::Scalar(pt)))
            }
            UnaryOp::Not => {
                let (x, t) = self.scalar_rvalue(a)?;
                let r = if t.is_pointer() {
                    Expr::binary(BinOp::Eq, x, null_ptr(), ScalarType::Int)
                } else {
                    Expr::Unary(UnOp::Not, Box::new(x), ScalarType::Int)
                };
                Ok(Val::Scalar(r, CType::Scalar(ScalarType::Int)))
            }
            UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec => {
                let lv = self.lvalue(a)?;
                let post = matches!(op, UnaryOp::PostInc | UnaryOp::PostDec);
                let bop = if matches!(op, UnaryOp::PreInc | UnaryOp::PostInc) { BinaryOp::Add } else { BinaryOp::Sub };
                let cur = match self.read(lv.clone(), loc)? {
                    Val::Scalar(x, t) => (x, t),
                    _ => return type_err(loc, "increment of a non-scalar"),
                };
                let old = if post { Some(self.spill(cur.0.clone(), cur.1.clone(), loc)) } else { None };
                let base = match &old {
                    Some(o) => (o.clone(), cur.1.clone()),
                    None => cur.clone(),
                };
                let one = (Expr::int(1), CType::Scalar(ScalarType::Int));
                let (x, t) = self.arith(bop, base, one, loc)?;
                self.store_val(lv.clone(), Val::Scalar(x, t), loc)?;
                match old {
                    Some(o) => Ok(Val::Scalar(o, cur.1)),
                    None => self.read(Lv { vol: None, ..lv }, loc),
                }
            }
        }
    }

    fn arith(
        &mut self,
        op: BinaryOp,
        (a, at): (Expr, CType),
        (b, bt): (Expr, CType),
        loc: Loc,
    ) -> Result<(Expr, CType), FrontendError> {
        let bop = match op {
            BinaryOp::Add => BinOp::Add,
            BinaryOp::Sub => BinOp::Sub,
            BinaryOp::Mul => BinOp::Mul,
            BinaryOp::Div => BinOp::Div,
            BinaryOp::Mod => BinOp::Mod,
            BinaryOp::Shl => BinOp::Shl,
            BinaryOp::Shr => BinOp::Shr,
            BinaryOp::BitAnd => BinOp::BitAnd,
            BinaryOp::BitOr => BinOp::BitOr,
            BinaryOp::BitXor => BinOp::BitXor,
            BinaryOp::Eq => BinOp::Eq,
            BinaryOp::Ne => BinOp::Ne,
            BinaryOp::Lt => BinOp::Lt,
            BinaryOp::Le => BinOp::Le,
            BinaryOp::Gt => BinOp::Gt,
            BinaryOp::Ge => BinOp::Ge,
            BinaryOp::LogAnd | BinaryOp::LogOr => unreachable!("lowered through control flow"),
        };
        let int = CType::Scalar(ScalarType::Int);
        match (&at, &bt) {
            (CType::Pointer(_), CType::Pointer(_)) if bop.is_comparison() => {
                Ok((Expr::binary(bop, a, b, ScalarType::Int), int))
            }
            (CType::Pointer(_), CType::Scalar(s)) if bop.is_comparison() && s.is_integer() => {
                Ok((Expr::binary(bop, a, self.fold_cast(ScalarType::Ptr, b), ScalarType::Int), int))
            }
            (CType::Scalar(s), CType::Pointer(_)) if bop.is_comparison() && s.is_integer() => {
                Ok((Expr::binary(bop, self.fold_cast(ScalarType::Ptr, a), b, ScalarType::Int), int))
            }
            (CType::Pointer(pa), CType::Pointer(_)) if bop == BinOp::Sub => {
                let d = self.abi.address_type().to_signed();
                let diff = Expr::binary(BinOp::Sub, a, b, d);
                let size = self.elem_size(pa);
                let r = if size == 1 { diff } else { Expr::binary(BinOp::Div, diff, Expr::Int(size, d), d) };
                Ok((r, CType::Scalar(d)))
            }
            (CType::Pointer(pa), CType::Scalar(s)) if matches!(bop, BinOp::Add | BinOp::Sub) && s.is_integer() => {
                Ok((self.ptr_offset(a, pa, b, *s, bop), at.clone()))
            }
            (CType::Scalar(s), CType::Pointer(pb)) if bop == BinOp::Add && s.is_integer() => {
                Ok((self.ptr_offset(b, pb, a, *s, bop), bt.clone()))
            }
            (CType::Scalar(x), CType::Scalar(y)) => {
                let (x, y) = (*x, *y);
                let needs_int = matches!(bop, BinOp::Mod | BinOp::Shl | BinOp::Shr | BinOp::BitAnd | BinOp::BitOr | BinOp::BitXor);
                if needs_int && !(x.is_integer() && y.is_integer()) {
                    return type_err(loc, format!("`{}` on a non-integer", bop.symbol()));
                }
                if matches!(bop, BinOp::Shl | BinOp::Shr) {
                    let (px, py) = (self.promote(x), self.promote(y));
                    let r = Expr::binary(bop, self.fold_cast(px, a), self.fold_cast(py, b), px);
                    return Ok((r, CType::Scalar(px)));
                }
                let c = self.common(x, y);
                let (a, b) = (self.fold_cast(c, a), self.fold_cast(c, b));
                if bop.is_comparison() {
                    Ok((Expr::binary(bop, a, b, ScalarType::Int), int))
                } else {
                    Ok((Expr::binary(bop, a, b, c), CType::Scalar(c)))
                }
            }
            _ => type_err(loc, format!("invalid operands to `{}`", bop.symbol())),
        }
    }

    /// Converts a scalar value for storage into a `target`-typed location.
    fn convert(&self, x: Expr, from: &CType, target: &CType, loc: Loc) -> Result<Expr, FrontendError> {
        match (target, from) {
            (CType::Pointer(_), CType::Pointer(_)) => Ok(x),
            (CType::Pointer(_), CType::Scalar(s)) if s.is_integer() => Ok(self.fold_cast(ScalarType::Ptr, x)),
            (CType::Scalar(t), CType::Scalar(_)) => Ok(self.fold_cast(*t, x)),
            (CType::Scalar(t), CType::Pointer(_)) if t.is_integer() => Ok(Expr::cast(*t, x)),
            _ => type_err(loc, "incompatible types in assignment"),
        }
    }

    pub(crate) fn store_val(&mut self, lv: Lv, val: Val, loc: Loc) -> Result<(), FrontendError> {
        match (val, &lv.ty) {
            (Val::Scalar(x, from), t) if t.is_scalar() => {
                let x = self.convert(x, &from, t, loc)?;
                self.emit(Inst::Assign { ty: t.scalar().unwrap(), addr: lv.addr, value: x }, loc);
                Ok(())
            }
            (Val::Agg(src, from), CType::Record(_)) => {
                let (n, m) = (self.types.size_of(&from, self.abi), self.types.size_of(&lv.ty, self.abi));
                if n != m {
                    return type_err(loc, "aggregate assignment with mismatched sizes");
                }
                let inst = self.copy_inst(&lv.ty, lv.addr, src);
                self.emit(inst, loc);
                Ok(())
            }
            (Val::Void, _) => type_err(loc, "use of a void value"),
            _ => type_err(loc, "incompatible types in assignment"),
        }
    }

    /// `lv = rhs`: same-typed scalar lvalues and aggregates are byte copies.
    pub(crate) fn assign_expr(&mut self, lv: Lv, rhs: &ast::Expr, loc: Loc) -> Result<(), FrontendError> {
        if matches!(lv.ty, CType::Array(..) | CType::Function(_) | CType::Void) {
            return type_err(loc, "assignment to a non-assignable object");
        }
        let lv = if has_side_effects(rhs) && lv.addr.contains_deref() {
            let ptr = self.spill(lv.addr.clone(), CType::Pointer(Box::new(lv.ty.clone())), loc);
            Lv { addr: ptr, ..lv }
        } else {
            lv
        };
        if is_lvalue_kind(rhs) && lv.ty.is_scalar() {
            let r = self.lvalue(rhs)?;
            if r.ty == lv.ty && r.vol.is_none() {
                let inst = self.copy_inst(&lv.ty, lv.addr, r.addr);
                self.emit(inst, loc);
                return Ok(());
            }
            let v = self.read(r, loc)?;
            return self.store_val(lv, v, loc);
        }
        let v = self.rvalue(rhs)?;
        self.store_val(lv, v, loc)
    }

    pub(crate) fn effect(&mut self, e: &ast::Expr) -> Result<(), FrontendError> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::Unary(UnaryOp::PostInc, a) => {
                self.unary(UnaryOp::PreInc, a, loc)?;
            }
            ExprKind::Unary(UnaryOp::PostDec, a) => {
                self.unary(UnaryOp::PreDec, a, loc)?;
            }
            ExprKind::Unary(UnaryOp::PreInc | UnaryOp::PreDec, _) => {
                self.rvalue(e)?;
            }
            ExprKind::Comma(a, b) => {
                self.effect(a)?;
                self.effect(b)?;
            }
            ExprKind::Assign(None, l, r) => {
                let lv = self.lvalue(l)?;
                self.assign_expr(lv, r, loc)?;
            }
            ExprKind::Cast(CType::Void, a) => self.effect(a)?,
            ExprKind::Binary(BinaryOp::LogAnd | BinaryOp::LogOr, a, b) => {
                let (run, skip) = (self.new_point(loc), self.new_point(loc));
                match &e.kind {
                    ExprKind::Binary(BinaryOp::LogAnd, ..) => self.cond(a, run, skip)?,
                    _ => self.cond(a, skip, run)?,
                }
                self.cur = run;
                self.effect(b)?;
                let cur = self.cur;
                self.edge(cur, skip, Inst::nop(), loc);
                self.cur = skip;
            }
            _ => {
                self.rvalue(e)?;
            }
        }
        Ok(())
    }

    /// Branches to `t` when `e` is nonzero and to `f` otherwise.
    pub(crate) fn cond(&mut self, e: &ast::Expr, t: usize, f: usize) -> Result<(), FrontendError> {
        let loc = e.loc;
        match &e.kind {
            ExprKind::Binary(BinaryOp::LogAnd, a, b) => {
                let mid = self.new_point(b.loc);
                self.cond(a, mid, f)?;
                self.cur = mid;
                self.cond(b, t, f)
            }
            ExprKind::Binary(BinaryOp::LogOr, a, b) => {
                let mid = self.new_point(b.loc);
                self.cond(a, t, mid)?;
                self.cur = mid;
                self.cond(b, t, f)
            }
            ExprKind::Unary(UnaryOp::Not, a) => self.cond(a, f, t),
            ExprKind::Comma(a, b) => {
                self.effect(a)?;
                self.cond(b, t, f)
            }
            _ => {
                let (x, ty) = self.scalar_rvalue(e)?;
                let truth = if ty.is_pointer() { Expr::binary(BinOp::Ne, x, null_ptr(), ScalarType::Int) } else { x };
                let cur = self.cur;
                self.edge(cur, t, Inst::Guard(truth.clone().negate()), loc);
                self.edge(cur, f, Inst::Guard(truth), loc);
                Ok(())
            }
        }
    }

    fn call(&mut self, f: &ast::Expr, args: &[ast::Expr], loc: Loc) -> Result<Val, FrontendError> {
        let direct = match &f.kind {
            ExprKind::Ident(n) if self.lookup(n).is_none() => {
                if !self.func_ids.contains_key(n) {
                    if self.prog.functions.iter().any(|g| &g.name == n) {
                        return Err(FrontendError::Unsupported { loc, msg: format!("call to undefined function `{}`", n) });
                    }
                    return Err(FrontendError::UnknownIdent { loc: f.loc, name: n.clone() });
                }
                Some(n.clone())
            }
            _ => None,
        };
        let (target, sig) = match &direct {
            Some(_) => (None, None),
            None => {
                let (x, t) = self.scalar_rvalue(f)?;
                match t {
                    CType::Pointer(inner) => match *inner {
                        CType::Function(sig) => (Some(x), Some(sig)),
                        _ => return type_err(loc, "call of a non-function"),
                    },
                    _ => return type_err(loc, "call of a non-function"),
                }
            }
        };
        let target = match target {
            Some(x) if x.contains_deref() && args.iter().any(has_side_effects) => {
                Some(self.spill(x, CType::Scalar(ScalarType::Ptr), loc))
            }
            t => t,
        };
        let mut vals = Vec::with_capacity(args.len());
        for (i, a) in args.iter().enumerate() {
            let v = self.rvalue(a)?;
            let later = args[i + 1..].iter().any(has_side_effects);
            let v = match v {
                Val::Scalar(x, t) if later && x.contains_deref() => Val::Scalar(self.spill(x, t.clone(), loc), t),
                v => v,
            };
            vals.push(v);
        }
        if let Some(name) = direct {
            let ret = self.inline_call(&name, vals, loc)?;
            return match ret {
                Some((t, _)) => {
                    let lv = self.var_lvalue(t);
                    self.read(lv, loc)
                }
                None => Ok(Val::Void),
            };
        }
        let target = target.unwrap();
        let sig = sig.unwrap();
        let cands: Vec<String> = self
            .funcs
            .iter()
            .filter(|n| self.addr_taken.contains(*n))
            .filter(|n| self.prog.function(n).is_some_and(|g| g.params.len() == args.len()))
            .cloned()
            .collect();
        if cands.is_empty() {
            return Err(FrontendError::Unsupported { loc, msg: "call through a pointer with no matching function".into() });
        }
        let result = if sig.ret == CType::Void { None } else { Some(self.temp(sig.ret.clone())) };
        let dispatch = self.cur;
        let join = self.new_point(loc);
        for name in cands {
            let p = self.new_point(loc);
            let fa = self.func_addr(&name).unwrap();
            self.edge(dispatch, p, Inst::Guard(Expr::binary(BinOp::Ne, target.clone(), fa, ScalarType::Int)), loc);
            self.cur = p;
            let ret = self.inline_call(&name, vals.clone(), loc)?;
            if let (Some(r), Some((t, _))) = (result, ret) {
                let src = self.var_lvalue(t);
                let v = self.read(src, loc)?;
                let dst = self.var_lvalue(r);
                self.store_val(dst, v, loc)?;
            }
            let cur = self.cur;
            self.edge(cur, join, Inst::nop(), loc);
        }
        self.cur = join;
        match result {
            Some(r) => {
                let lv = self.var_lvalue(r);
                self.read(lv, loc)
            }
            None => Ok(Val::Void),
        }
    }
}
