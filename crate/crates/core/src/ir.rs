//! The byte-level control-flow-graph language the analyses consume.
//!
//! Expressions are side-effect free; every memory access is a typed
//! dereference `*τ e` of a scalar type and all pointer arithmetic is
//! expressed in bytes. Instructions are scalar assignments, copy
//! assignments and guards `e == 0 ?`.

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::scalar::ScalarType;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FuncId(pub u32);

/// Base of a valid pointer: a variable or a function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Base {
    Var(VarId),
    Func(FuncId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    BitNot,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    BitAnd,
    BitOr,
    BitXor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    /// The comparison holding exactly when `self` does not.
    pub fn negate(self) -> BinOp {
        match self {
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            op => op,
        }
    }

    /// The comparison with swapped operands.
    pub fn swap(self) -> BinOp {
        match self {
            BinOp::Lt => BinOp::Gt,
            BinOp::Le => BinOp::Ge,
            BinOp::Gt => BinOp::Lt,
            BinOp::Ge => BinOp::Le,
            op => op,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::BitAnd => "&",
            BinOp::BitOr => "|",
            BinOp::BitXor => "^",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i128, ScalarType),
    Float(f64, ScalarType),
    AddrOf(Base),
    /// Unary operation; the type is the result type.
    Unary(UnOp, Box<Expr>, ScalarType),
    /// Binary operation; the type is the result type. Pointer arithmetic
    /// keeps the pointer operand on the left.
    Binary(BinOp, Box<Expr>, Box<Expr>, ScalarType),
    Deref(ScalarType, Box<Expr>),
    Cast(ScalarType, Box<Expr>),
    /// A fresh value read from the environment through a volatile variable.
    Input(VarId, ScalarType),
}

impl Expr {
    pub fn ty(&self) -> ScalarType {
        match self {
            Expr::Int(_, t) | Expr::Float(_, t) => *t,
            Expr::AddrOf(_) => ScalarType::Ptr,
            Expr::Unary(_, _, t) | Expr::Binary(_, _, _, t) => *t,
            Expr::Deref(t, _) | Expr::Cast(t, _) => *t,
            Expr::Input(_, t) => *t,
        }
    }

    pub fn int(v: i128) -> Expr {
        Expr::Int(v, ScalarType::Int)
    }

    pub fn deref(t: ScalarType, addr: Expr) -> Expr {
        Expr::Deref(t, Box::new(addr))
    }

    pub fn cast(t: ScalarType, e: Expr) -> Expr {
        if e.ty() == t {
            e
        } else {
            Expr::Cast(t, Box::new(e))
        }
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr, t: ScalarType) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b), t)
    }

    /// `&V + off` in bytes.
    pub fn var_addr(v: VarId, off: u64) -> Expr {
        Expr::binary(
            BinOp::Add,
            Expr::AddrOf(Base::Var(v)),
            Expr::Int(off as i128, ScalarType::Int),
            ScalarType::Ptr,
        )
    }

    pub fn contains_deref(&self) -> bool {
        match self {
            Expr::Deref(..) => true,
            Expr::Unary(_, e, _) | Expr::Cast(_, e) => e.contains_deref(),
            Expr::Binary(_, a, b, _) => a.contains_deref() || b.contains_deref(),
            _ => false,
        }
    }

    /// Logical negation used by guard lowering: `!(a < b)` becomes `a >= b`
    /// and `!!e` becomes `e`.
    pub fn negate(self) -> Expr {
        match self {
            Expr::Unary(UnOp::Not, e, _) => *e,
            Expr::Binary(op, a, b, t) if op.is_comparison() => Expr::Binary(op.negate(), a, b, t),
            e => Expr::Unary(UnOp::Not, Box::new(e), ScalarType::Int),
        }
    }
}

/// Type moved by a copy assignment; aggregates are copied as raw bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CopyType {
    Scalar(ScalarType),
    Bytes(u64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Inst {
    /// `*τ addr ← value`
    Assign { ty: ScalarType, addr: Expr, value: Expr },
    /// `*τ dst ← *τ src`, a raw byte copy.
    Copy { ty: CopyType, dst: Expr, src: Expr },
    /// `e == 0 ?`
    Guard(Expr),
}

impl Inst {
    pub fn nop() -> Inst {
        Inst::Guard(Expr::int(0))
    }

    pub fn is_nop(&self) -> bool {
        matches!(self, Inst::Guard(Expr::Int(0, _)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarInfo {
    pub name: String,
    pub size: u64,
    /// Zero-initialized storage (globals).
    pub is_static: bool,
    pub volatile: bool,
    /// Scalar type of a volatile variable, used for its default input range.
    pub scalar: Option<ScalarType>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointInfo {
    /// Variables alive at the point, sorted.
    pub live: Vec<VarId>,
    pub label: Option<String>,
    pub func: String,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub inst: Inst,
    pub loc: Loc,
}

/// Inlined control-flow graph; every control point is a program point
/// together with its call stack.
#[derive(Clone, Debug, PartialEq)]
pub struct Cfg {
    pub vars: Vec<VarInfo>,
    pub funcs: Vec<String>,
    pub points: Vec<PointInfo>,
    pub edges: Vec<Edge>,
    pub entry: usize,
}

impl Cfg {
    pub fn var(&self, v: VarId) -> &VarInfo {
        &self.vars[v.0 as usize]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(|i| VarId(i as u32))
    }

    pub fn base_size(&self, b: Base) -> u64 {
        match b {
            Base::Var(v) => self.var(v).size,
            Base::Func(_) => 0,
        }
    }

    pub fn point_by_label(&self, label: &str) -> Option<usize> {
        self.points.iter().position(|p| p.label.as_deref() == Some(label))
    }

    pub fn out_edges(&self, p: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges.iter().enumerate().filter(move |(_, e)| e.src == p)
    }

    pub fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.points.len()];
        for (i, e) in self.edges.iter().enumerate() {
            succ[e.src].push(i);
        }
        succ
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.points.len()];
        for (i, e) in self.edges.iter().enumerate() {
            pred[e.dst].push(i);
        }
        pred
    }

    /// Variables created and deleted when following an edge.
    pub fn scope_change(&self, e: &Edge) -> (Vec<VarId>, Vec<VarId>) {
        let src: BTreeSet<_> = self.points[e.src].live.iter().copied().collect();
        let dst: BTreeSet<_> = self.points[e.dst].live.iter().copied().collect();
        let created = dst.difference(&src).copied().collect();
        let deleted = src.difference(&dst).copied().collect();
        (created, deleted)
    }

    pub fn base_name(&self, b: Base) -> String {
        match b {
            Base::Var(v) => self.var(v).name.clone(),
            Base::Func(f) => self.funcs[f.0 as usize].clone(),
        }
    }

    pub fn fmt_expr(&self, e: &Expr) -> String {
        let mut s = String::new();
        self.write_expr(&mut s, e, false);
        s
    }

    fn write_expr(&self, s: &mut String, e: &Expr, nested: bool) {
        match e {
            Expr::Int(v, _) => write!(s, "{}", v).unwrap(),
            Expr::Float(v, _) => write!(s, "{:?}", v).unwrap(),
            Expr::AddrOf(b) => write!(s, "&{}", self.base_name(*b)).unwrap(),
            Expr::Unary(op, a, _) => {
                s.push_str(match op {
                    UnOp::Neg => "-",
                    UnOp::BitNot => "~",
                    UnOp::Not => "!",
                });
                self.write_expr(s, a, true);
            }
            Expr::Binary(op, a, b, _) => {
                if nested {
                    s.push('(');
                }
                self.write_expr(s, a, true);
                write!(s, " {} ", op.symbol()).unwrap();
                self.write_expr(s, b, true);
                if nested {
                    s.push(')');
                }
            }
            Expr::Deref(t, a) => {
                write!(s, "*{}(", t).unwrap();
                self.write_expr(s, a, false);
                s.push(')');
            }
            Expr::Cast(t, a) => {
                write!(s, "({})", t).unwrap();
                self.write_expr(s, a, true);
            }
            Expr::Input(v, _) => write!(s, "input({})", self.var(*v).name).unwrap(),
        }
    }

    pub fn fmt_inst(&self, i: &Inst) -> String {
        match i {
            Inst::Assign { ty, addr, value } => {
                format!("*{}({}) <- {}", ty, self.fmt_expr(addr), self.fmt_expr(value))
            }
            Inst::Copy { ty, dst, src } => {
                let t = match ty {
                    CopyType::Scalar(t) => t.to_string(),
                    CopyType::Bytes(n) => format!("bytes{}", n),
                };
                format!("*{}({}) <- *{}({})", t, self.fmt_expr(dst), t, self.fmt_expr(src))
            }
            Inst::Guard(e) => format!("{} == 0 ?", self.fmt_expr(e)),
        }
    }

    /// Deterministic line-oriented dump, one edge per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.points.iter().enumerate() {
            if let Some(l) = &p.label {
                writeln!(out, "label {} = {}", l, i).unwrap();
            }
        }
        for e in &self.edges {
            writeln!(out, "{} -> {} : {}", e.src, e.dst, self.fmt_inst(&e.inst)).unwrap();
        }
        out
    }

    /// Checks that every dereference in every instruction has scalar type
    /// and that expressions are well-formed with respect to the variable
    /// table.
    pub fn check_well_formed(&self) -> Result<(), String> {
        fn walk(cfg: &Cfg, e: &Expr) -> Result<(), String> {
            match e {
                Expr::AddrOf(Base::Var(v)) | Expr::Input(v, _) if v.0 as usize >= cfg.vars.len() => {
                    Err(format!("unknown variable {:?}", v))
                }
                Expr::Deref(_, a) => {
                    if a.ty() != ScalarType::Ptr {
                        return Err(format!("dereference of non-pointer `{}`", cfg.fmt_expr(a)));
                    }
                    walk(cfg, a)
                }
                Expr::Unary(_, a, _) | Expr::Cast(_, a) => walk(cfg, a),
                Expr::Binary(_, a, b, _) => {
                    walk(cfg, a)?;
                    walk(cfg, b)
                }
                _ => Ok(()),
            }
        }
        for e in &self.edges {
            if e.src >= self.points.len() || e.dst >= self.points.len() {
                return Err("edge endpoint out of range".into());
            }
            match &e.inst {
                Inst::Assign { addr, value, .. } => {
                    walk(self, addr)?;
                    walk(self, value)?;
                }
                Inst::Copy { dst, src, .. } => {
                    walk(self, dst)?;
                    walk(self, src)?;
                }
                Inst::Guard(g) => walk(self, g)?,
            }
        }
        Ok(())
    }
}
