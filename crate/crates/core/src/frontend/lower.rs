//! Lowering of the surface AST to the byte-level control-flow graph.
//!
//! Every call is inlined with a fresh frame; a control point belongs to one
//! frame chain and its live variable set is the globals plus every variable
//! of that chain.

use std::collections::{BTreeSet, HashMap};

use crate::abi::Abi;
use crate::error::FrontendError;
use crate::ir::{Base, BinOp, Cfg, CopyType, Edge, Expr, FuncId, Inst, Loc, PointInfo, VarId, VarInfo};
use crate::scalar::ScalarType;

use super::ast::{self, Init, Program, Stmt, StmtKind};
use super::ctype::{CType, TypeTable};

pub const MAX_INLINE_DEPTH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LowerOptions {
    /// Number of leading iterations duplicated for loops that copy or store
    /// through a computed address.
    pub unroll: u32,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { unroll: 64 }
    }
}

pub fn lower(prog: &Program, abi: &Abi, opts: &LowerOptions) -> Result<Cfg, FrontendError> {
    check_recursion(prog)?;
    let main = prog.function("main").ok_or(FrontendError::NoMain)?;
    let mut l = Lowerer::new(prog, abi, *opts);
    l.run(main)?;
    Ok(l.finish())
}

fn check_recursion(prog: &Program) -> Result<(), FrontendError> {
    fn calls(e: &ast::Expr, out: &mut BTreeSet<String>) {
        use ast::ExprKind::*;
        match &e.kind {
            Call(f, args) => {
                if let Ident(n) = &f.kind {
                    out.insert(n.clone());
                } else {
                    calls(f, out);
                }
                args.iter().for_each(|a| calls(a, out));
            }
            Unary(_, a) | Cast(_, a) | SizeofExpr(a) | Member(a, _) | Arrow(a, _) => calls(a, out),
            Binary(_, a, b) | Assign(_, a, b) | Index(a, b) | Comma(a, b) => {
                calls(a, out);
                calls(b, out);
            }
            Cond(a, b, c) => {
                calls(a, out);
                calls(b, out);
                calls(c, out);
            }
            _ => {}
        }
    }
    fn init_calls(i: &Init, out: &mut BTreeSet<String>) {
        match i {
            Init::Expr(e) => calls(e, out),
            Init::List(items) => items.iter().for_each(|i| init_calls(i, out)),
        }
    }
    fn stmt_calls(s: &Stmt, out: &mut BTreeSet<String>) {
        match &s.kind {
            StmtKind::Decl(d) => {
                if let Some(i) = &d.init {
                    init_calls(i, out);
                }
            }
            StmtKind::Expr(e) | StmtKind::Case(e) | StmtKind::Return(Some(e)) => calls(e, out),
            StmtKind::If(c, t, e) => {
                calls(c, out);
                stmt_calls(t, out);
                if let Some(e) = e {
                    stmt_calls(e, out);
                }
            }
            StmtKind::While(c, b) | StmtKind::DoWhile(b, c) | StmtKind::Switch(c, b) => {
                calls(c, out);
                stmt_calls(b, out);
            }
            StmtKind::For(i, c, st, b) => {
                if let Some(i) = i {
                    stmt_calls(i, out);
                }
                c.iter().chain(st.iter()).for_each(|e| calls(e, out));
                stmt_calls(b, out);
            }
            StmtKind::Block(items) => items.iter().for_each(|s| stmt_calls(s, out)),
            StmtKind::Labeled(_, s) => stmt_calls(s, out),
            _ => {}
        }
    }
    let mut graph: HashMap<&str, BTreeSet<String>> = HashMap::new();
    for f in &prog.functions {
        if let Some(body) = &f.body {
            let mut out = BTreeSet::new();
            body.iter().for_each(|s| stmt_calls(s, &mut out));
            graph.insert(&f.name, out);
        }
    }
    fn visit<'g>(
        n: &'g str,
        graph: &'g HashMap<&str, BTreeSet<String>>,
        state: &mut HashMap<&'g str, u8>,
    ) -> Result<(), FrontendError> {
        match state.get(n) {
            Some(1) => return Err(FrontendError::Recursion(n.to_string())),
            Some(_) => return Ok(()),
            None => {}
        }
        state.insert(n, 1);
        if let Some(callees) = graph.get(n) {
            for c in callees {
                if graph.contains_key(c.as_str()) {
                    visit(c, graph, state)?;
                }
            }
        }
        state.insert(n, 2);
        Ok(())
    }
    let mut state = HashMap::new();
    for f in &prog.functions {
        if f.body.is_some() {
            visit(&f.name, &graph, &mut state)?;
        }
    }
    Ok(())
}

struct Frame {
    parent: Option<usize>,
    vars: Vec<VarId>,
}

struct PointDraft {
    frame: usize,
    label: Option<String>,
    func: String,
    loc: Loc,
}

#[derive(Clone, Copy)]
pub(super) struct Targets {
    pub brk: usize,
    pub cont: Option<usize>,
}

pub(super) struct Switch {
    pub points: Vec<usize>,
    pub next: usize,
}

/// Lowering context of one inlined function body.
pub(super) struct FnCtx {
    pub frame: usize,
    pub func: String,
    pub prefix: String,
    pub ret: Option<(VarId, CType)>,
    pub exit: usize,
    pub loops: Vec<Targets>,
    pub switches: Vec<Switch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) struct Binding {
    pub var: VarId,
    pub volatile: bool,
}

pub(super) struct Snapshot {
    points: usize,
    edges: usize,
    vars: usize,
    frames: usize,
    cur: usize,
    tmp: usize,
    inline_count: HashMap<String, usize>,
    scopes: Vec<HashMap<String, Binding>>,
}

pub(super) struct Lowerer<'a> {
    pub prog: &'a Program,
    pub abi: &'a Abi,
    pub types: &'a TypeTable,
    opts: LowerOptions,
    pub vars: Vec<VarInfo>,
    pub var_types: Vec<CType>,
    pub funcs: Vec<String>,
    pub func_ids: HashMap<String, FuncId>,
    pub addr_taken: BTreeSet<String>,
    points: Vec<PointDraft>,
    pub edges: Vec<Edge>,
    frames: Vec<Frame>,
    globals: HashMap<String, Binding>,
    pub scopes: Vec<HashMap<String, Binding>>,
    pub cur: usize,
    pub ctx: Vec<FnCtx>,
    pub call_stack: Vec<String>,
    inline_count: HashMap<String, usize>,
    tmp: usize,
    /// Indices of the unrolled loop iterations being lowered.
    unrolled: Vec<u32>,
}

impl<'a> Lowerer<'a> {
    fn new(prog: &'a Program, abi: &'a Abi, opts: LowerOptions) -> Self {
        let mut funcs = Vec::new();
        let mut func_ids = HashMap::new();
        for f in &prog.functions {
            if f.body.is_some() {
                func_ids.insert(f.name.clone(), FuncId(funcs.len() as u32));
                funcs.push(f.name.clone());
            }
        }
        let addr_taken = address_taken(prog, &func_ids);
        Lowerer {
            prog,
            abi,
            types: &prog.types,
            opts,
            vars: Vec::new(),
            var_types: Vec::new(),
            funcs,
            func_ids,
            addr_taken,
            points: Vec::new(),
            edges: Vec::new(),
            frames: Vec::new(),
            globals: HashMap::new(),
            scopes: Vec::new(),
            cur: 0,
            ctx: Vec::new(),
            call_stack: Vec::new(),
            inline_count: HashMap::new(),
            tmp: 0,
            unrolled: Vec::new(),
        }
    }

    fn run(&mut self, main: &'a ast::Function) -> Result<(), FrontendError> {
        for g in &self.prog.globals {
            if self.globals.contains_key(&g.name) {
                return Err(FrontendError::Type { loc: g.loc, msg: format!("redefinition of `{}`", g.name) });
            }
            self.check_complete(&g.ty, g.loc)?;
            let v = self.new_var(g.name.clone(), g.ty.clone(), true, g.volatile, None);
            self.globals.insert(g.name.clone(), Binding { var: v, volatile: g.volatile });
        }
        self.frames.push(Frame { parent: None, vars: Vec::new() });
        self.call_stack.push("main".into());
        self.ctx.push(FnCtx {
            frame: 0,
            func: "main".into(),
            prefix: String::new(),
            ret: None,
            exit: 0,
            loops: Vec::new(),
            switches: Vec::new(),
        });
        let entry = self.new_point(main.loc);
        self.cur = entry;
        let exit = self.new_point(main.loc);
        self.ctx.last_mut().unwrap().exit = exit;
        self.scopes.push(HashMap::new());
        for (name, ty) in &main.params {
            self.declare(name, ty.clone(), false, main.loc)?;
        }
        for g in &self.prog.globals {
            if let Some(init) = &g.init {
                let b = self.globals[&g.name];
                let lv = self.var_lvalue(b.var);
                self.initialize(lv, &g.ty, init, false, g.loc)?;
            }
        }
        self.block(main.body.as_ref().unwrap())?;
        let cur = self.cur;
        self.edge(cur, exit, Inst::nop(), main.loc);
        self.scopes.pop();
        Ok(())
    }

    fn finish(self) -> Cfg {
        let nglobals: Vec<VarId> = self.globals.values().map(|b| b.var).collect();
        let mut frame_live: Vec<Vec<VarId>> = Vec::with_capacity(self.frames.len());
        for (i, f) in self.frames.iter().enumerate() {
            let mut live = match f.parent {
                Some(p) => frame_live[p].clone(),
                None => nglobals.clone(),
            };
            debug_assert!(f.parent.is_none_or(|p| p < i));
            live.extend(f.vars.iter().copied());
            live.sort();
            frame_live.push(live);
        }
        let points = self
            .points
            .into_iter()
            .map(|p| PointInfo { live: frame_live[p.frame].clone(), label: p.label, func: p.func, loc: p.loc })
            .collect();
        Cfg { vars: self.vars, funcs: self.funcs, points, edges: self.edges, entry: 0 }
    }

    fn check_complete(&self, ty: &CType, loc: Loc) -> Result<(), FrontendError> {
        match ty {
            CType::Record(id) => {
                let r = self.types.record(*id);
                if !r.complete {
                    return Err(FrontendError::Type { loc, msg: "variable of incomplete type".into() });
                }
                for (_, f) in &r.fields {
                    self.check_complete(f, loc)?;
                }
                Ok(())
            }
            CType::Array(e, _) => self.check_complete(e, loc),
            CType::Void => Err(FrontendError::Type { loc, msg: "variable of type void".into() }),
            CType::Function(_) => Err(FrontendError::Type { loc, msg: "variable of function type".into() }),
            _ => Ok(()),
        }
    }

    pub fn fctx(&self) -> &FnCtx {
        self.ctx.last().unwrap()
    }

    pub fn fctx_mut(&mut self) -> &mut FnCtx {
        self.ctx.last_mut().unwrap()
    }

    pub fn new_point(&mut self, loc: Loc) -> usize {
        let c = self.fctx();
        let p = PointDraft { frame: c.frame, label: None, func: c.func.clone(), loc };
        self.points.push(p);
        self.points.len() - 1
    }

    pub fn edge(&mut self, src: usize, dst: usize, inst: Inst, loc: Loc) {
        self.edges.push(Edge { src, dst, inst, loc });
    }

    /// Appends an instruction at the current point.
    pub fn emit(&mut self, inst: Inst, loc: Loc) {
        let p = self.new_point(loc);
        let cur = self.cur;
        self.edge(cur, p, inst, loc);
        self.cur = p;
    }

    /// Jumps from the current point and continues at a fresh unreachable point.
    pub fn jump(&mut self, dst: usize, loc: Loc) {
        let cur = self.cur;
        self.edge(cur, dst, Inst::nop(), loc);
        self.cur = self.new_point(loc);
    }

    pub fn new_var(&mut self, name: String, ty: CType, is_static: bool, volatile: bool, frame: Option<usize>) -> VarId {
        let v = VarId(self.vars.len() as u32);
        let scalar = if volatile { ty.scalar() } else { None };
        self.vars.push(VarInfo { name, size: self.types.size_of(&ty, self.abi), is_static, volatile, scalar });
        self.var_types.push(ty);
        if let Some(f) = frame {
            self.frames[f].vars.push(v);
        }
        v
    }

    pub fn temp(&mut self, ty: CType) -> VarId {
        self.tmp += 1;
        let name = format!("{}__t{}", self.fctx().prefix, self.tmp);
        let frame = self.fctx().frame;
        self.new_var(name, ty, false, false, Some(frame))
    }

    pub fn declare(&mut self, name: &str, ty: CType, volatile: bool, loc: Loc) -> Result<VarId, FrontendError> {
        self.check_complete(&ty, loc)?;
        let prefix = self.fctx().prefix.clone();
        let mut full = format!("{}{}", prefix, name);
        if self.vars.iter().any(|v| v.name == full) {
            let mut k = 2;
            while self.vars.iter().any(|v| v.name == format!("{}#{}", full, k)) {
                k += 1;
            }
            full = format!("{}#{}", full, k);
        }
        let frame = self.fctx().frame;
        let v = self.new_var(full, ty, false, volatile, Some(frame));
        self.scopes.last_mut().unwrap().insert(name.to_string(), Binding { var: v, volatile });
        Ok(v)
    }

    pub fn lookup(&self, name: &str) -> Option<Binding> {
        for s in self.scopes.iter().rev() {
            if let Some(b) = s.get(name) {
                return Some(*b);
            }
        }
        self.globals.get(name).copied()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            points: self.points.len(),
            edges: self.edges.len(),
            vars: self.vars.len(),
            frames: self.frames.len(),
            cur: self.cur,
            tmp: self.tmp,
            inline_count: self.inline_count.clone(),
            scopes: self.scopes.clone(),
        }
    }

    pub fn restore(&mut self, s: Snapshot) {
        self.points.truncate(s.points);
        self.edges.truncate(s.edges);
        self.vars.truncate(s.vars);
        self.var_types.truncate(s.vars);
        self.frames.truncate(s.frames);
        for f in &mut self.frames {
            f.vars.retain(|v| (v.0 as usize) < s.vars);
        }
        self.cur = s.cur;
        self.tmp = s.tmp;
        self.inline_count = s.inline_count;
        self.scopes = s.scopes;
    }

    pub fn edges_since(&self, s: &Snapshot) -> &[Edge] {
        &self.edges[s.edges..]
    }

    fn block(&mut self, items: &[Stmt]) -> Result<(), FrontendError> {
        self.scopes.push(HashMap::new());
        for s in items {
            self.stmt(s)?;
        }
        self.scopes.pop();
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), FrontendError> {
        let loc = s.loc;
        match &s.kind {
            StmtKind::Empty => {}
            StmtKind::Decl(d) => {
                let v = self.declare(&d.name, d.ty.clone(), d.volatile, d.loc)?;
                if let Some(init) = &d.init {
                    let lv = self.var_lvalue(v);
                    self.initialize(lv, &d.ty, init, true, d.loc)?;
                }
            }
            StmtKind::Expr(e) => self.effect(e)?,
            StmtKind::Block(items) => self.block(items)?,
            StmtKind::If(c, t, e) => {
                let then_p = self.new_point(t.loc);
                let else_p = self.new_point(e.as_ref().map_or(loc, |e| e.loc));
                self.cond(c, then_p, else_p)?;
                let join = self.new_point(loc);
                self.cur = then_p;
                self.stmt(t)?;
                let cur = self.cur;
                self.edge(cur, join, Inst::nop(), loc);
                self.cur = else_p;
                if let Some(e) = e {
                    self.stmt(e)?;
                }
                let cur = self.cur;
                self.edge(cur, join, Inst::nop(), loc);
                self.cur = join;
            }
            StmtKind::While(c, body) => self.lower_loop(None, Some(c), None, body, false, loc)?,
            StmtKind::DoWhile(body, c) => self.lower_loop(None, Some(c), None, body, true, loc)?,
            StmtKind::For(init, c, step, body) => {
                self.scopes.push(HashMap::new());
                self.lower_loop(init.as_deref(), c.as_ref(), step.as_ref(), body, false, loc)?;
                self.scopes.pop();
            }
            StmtKind::Switch(e, body) => self.switch(e, body, loc)?,
            StmtKind::Case(_) | StmtKind::Default => {
                let sw = self
                    .fctx_mut()
                    .switches
                    .last_mut()
                    .ok_or(FrontendError::Syntax { loc, msg: "case label outside switch".into() })?;
                let p = sw.points[sw.next];
                sw.next += 1;
                let cur = self.cur;
                self.edge(cur, p, Inst::nop(), loc);
                self.cur = p;
            }
            StmtKind::Break => {
                let t = self
                    .fctx()
                    .loops
                    .last()
                    .copied()
                    .ok_or(FrontendError::Syntax { loc, msg: "break outside loop or switch".into() })?;
                self.jump(t.brk, loc);
            }
            StmtKind::Continue => {
                let t = self
                    .fctx()
                    .loops
                    .iter()
                    .rev()
                    .find_map(|t| t.cont)
                    .ok_or(FrontendError::Syntax { loc, msg: "continue outside loop".into() })?;
                self.jump(t, loc);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    match self.fctx().ret.clone() {
                        Some((tv, _)) => {
                            let lv = self.var_lvalue(tv);
                            self.assign_expr(lv, e, loc)?;
                        }
                        None => self.effect(e)?,
                    }
                }
                let exit = self.fctx().exit;
                self.jump(exit, loc);
            }
            StmtKind::Labeled(name, inner) => {
                let mut full = format!("{}{}", self.fctx().prefix, name);
                for k in &self.unrolled {
                    full.push_str(&format!("@{}", k));
                }
                if self.points.iter().any(|p| p.label.as_deref() == Some(full.as_str())) {
                    return Err(FrontendError::Type { loc, msg: format!("duplicate label `{}`", name) });
                }
                if self.points[self.cur].label.is_some() {
                    self.emit(Inst::nop(), loc);
                }
                let cur = self.cur;
                self.points[cur].label = Some(full);
                self.stmt(inner)?;
            }
        }
        Ok(())
    }

    fn switch(&mut self, e: &ast::Expr, body: &Stmt, loc: Loc) -> Result<(), FrontendError> {
        let (scrut, sty) = self.scalar_rvalue(e)?;
        if !sty.is_integer() {
            return Err(FrontendError::Type { loc: e.loc, msg: "switch on a non-integer value".into() });
        }
        let pt = self.promote(sty.scalar().unwrap());
        let scrut = self.fold_cast(pt, scrut);
        let mut labels = Vec::new();
        collect_cases(body, &mut labels);
        let mut points = Vec::new();
        let mut default = None;
        let mut values: Vec<(i128, usize)> = Vec::new();
        for lab in labels {
            let p = self.new_point(lab.loc);
            points.push(p);
            match &lab.kind {
                StmtKind::Case(v) => {
                    let v = super::parser::const_eval(self.types, self.abi, v)?;
                    if values.iter().any(|(w, _)| *w == v) {
                        return Err(FrontendError::Type { loc: lab.loc, msg: format!("duplicate case value {}", v) });
                    }
                    values.push((v, p));
                }
                _ => {
                    if default.is_some() {
                        return Err(FrontendError::Type { loc: lab.loc, msg: "duplicate default label".into() });
                    }
                    default = Some(p);
                }
            }
        }
        let exit = self.new_point(loc);
        for (v, p) in values {
            let c = Expr::binary(BinOp::Ne, scrut.clone(), self.int_const(v, pt), ScalarType::Int);
            let cur = self.cur;
            self.edge(cur, p, Inst::Guard(c.clone()), loc);
            let next = self.new_point(loc);
            self.edge(cur, next, Inst::Guard(c.negate()), loc);
            self.cur = next;
        }
        let cur = self.cur;
        self.edge(cur, default.unwrap_or(exit), Inst::nop(), loc);
        self.cur = self.new_point(loc);
        self.fctx_mut().switches.push(Switch { points, next: 0 });
        self.fctx_mut().loops.push(Targets { brk: exit, cont: None });
        self.stmt(body)?;
        self.fctx_mut().loops.pop();
        self.fctx_mut().switches.pop();
        let cur = self.cur;
        self.edge(cur, exit, Inst::nop(), loc);
        self.cur = exit;
        Ok(())
    }

    fn lower_loop(
        &mut self,
        init: Option<&Stmt>,
        c: Option<&ast::Expr>,
        step: Option<&ast::Expr>,
        body: &Stmt,
        body_first: bool,
        loc: Loc,
    ) -> Result<(), FrontendError> {
        if let Some(init) = init {
            self.stmt(init)?;
        }
        let exit = self.new_point(loc);
        let mut unroll = 0;
        if self.opts.unroll > 0 && !contains_loop(body) {
            let snap = self.snapshot();
            self.loop_iteration(c, step, body, body_first, exit, loc)?;
            let stores = self.edges_since(&snap).iter().any(|e| match &e.inst {
                Inst::Copy { .. } => true,
                Inst::Assign { addr, .. } => !is_static_addr(addr),
                Inst::Guard(_) => false,
            });
            self.restore(snap);
            if stores {
                unroll = self.opts.unroll;
            }
        }
        for k in 0..unroll {
            self.unrolled.push(k);
            let r = self.loop_iteration(c, step, body, body_first, exit, loc);
            self.unrolled.pop();
            r?;
        }
        let head = self.new_point(loc);
        let cur = self.cur;
        self.edge(cur, head, Inst::nop(), loc);
        self.cur = head;
        let cont = self.new_point(loc);
        let body_p = self.new_point(body.loc);
        if body_first {
            let cur = self.cur;
            self.edge(cur, body_p, Inst::nop(), loc);
        } else {
            self.test(c, body_p, exit)?;
        }
        self.cur = body_p;
        self.fctx_mut().loops.push(Targets { brk: exit, cont: Some(cont) });
        self.stmt(body)?;
        self.fctx_mut().loops.pop();
        let cur = self.cur;
        self.edge(cur, cont, Inst::nop(), loc);
        self.cur = cont;
        if let Some(s) = step {
            self.effect(s)?;
        }
        if body_first {
            let after = self.new_point(loc);
            self.test(c, after, exit)?;
            self.cur = after;
        }
        let cur = self.cur;
        self.edge(cur, head, Inst::nop(), loc);
        self.cur = exit;
        Ok(())
    }

    /// One duplicated iteration: test, body, step, ending at the point where
    /// the next iteration starts.
    fn loop_iteration(
        &mut self,
        c: Option<&ast::Expr>,
        step: Option<&ast::Expr>,
        body: &Stmt,
        body_first: bool,
        exit: usize,
        loc: Loc,
    ) -> Result<(), FrontendError> {
        let body_p = self.new_point(body.loc);
        if body_first {
            let cur = self.cur;
            self.edge(cur, body_p, Inst::nop(), loc);
        } else {
            self.test(c, body_p, exit)?;
        }
        self.cur = body_p;
        let cont = self.new_point(loc);
        self.fctx_mut().loops.push(Targets { brk: exit, cont: Some(cont) });
        self.stmt(body)?;
        self.fctx_mut().loops.pop();
        let cur = self.cur;
        self.edge(cur, cont, Inst::nop(), loc);
        self.cur = cont;
        if let Some(s) = step {
            self.effect(s)?;
        }
        if body_first {
            let next = self.new_point(loc);
            self.test(c, next, exit)?;
            self.cur = next;
        }
        Ok(())
    }

    fn test(&mut self, c: Option<&ast::Expr>, t: usize, f: usize) -> Result<(), FrontendError> {
        match c {
            Some(c) => self.cond(c, t, f),
            None => {
                let cur = self.cur;
                self.edge(cur, t, Inst::nop(), Loc::default());
                Ok(())
            }
        }
    }

    /// Inlines a call to `name` with already-evaluated arguments; returns the
    /// variable holding the result, if any.
    pub fn inline_call(
        &mut self,
        name: &str,
        args: Vec<super::lower_expr::Val>,
        loc: Loc,
    ) -> Result<Option<(VarId, CType)>, FrontendError> {
        let f = self
            .prog
            .function(name)
            .ok_or_else(|| FrontendError::Unsupported { loc, msg: format!("call to undefined function `{}`", name) })?;
        if self.call_stack.iter().any(|n| n == name) {
            return Err(FrontendError::Recursion(name.to_string()));
        }
        if self.call_stack.len() >= MAX_INLINE_DEPTH {
            return Err(FrontendError::TooDeep(MAX_INLINE_DEPTH));
        }
        if args.len() != f.params.len() {
            return Err(FrontendError::Type {
                loc,
                msg: format!("`{}` expects {} arguments, got {}", name, f.params.len(), args.len()),
            });
        }
        let ret = if f.ret == CType::Void {
            None
        } else {
            let t = self.temp(f.ret.clone());
            Some((t, f.ret.clone()))
        };
        let k = {
            let c = self.inline_count.entry(name.to_string()).or_insert(0);
            *c += 1;
            *c
        };
        let parent = self.fctx().frame;
        self.frames.push(Frame { parent: Some(parent), vars: Vec::new() });
        let frame = self.frames.len() - 1;
        self.call_stack.push(name.to_string());
        self.ctx.push(FnCtx {
            frame,
            func: name.to_string(),
            prefix: format!("{}#{}.", name, k),
            ret: ret.clone(),
            exit: 0,
            loops: Vec::new(),
            switches: Vec::new(),
        });
        let saved_scopes = std::mem::take(&mut self.scopes);
        self.scopes.push(HashMap::new());
        let entry = self.new_point(f.loc);
        let exit = self.new_point(f.loc);
        self.fctx_mut().exit = exit;
        let cur = self.cur;
        self.edge(cur, entry, Inst::nop(), loc);
        self.cur = entry;
        for ((pname, pty), arg) in f.params.iter().zip(args) {
            let v = self.declare(pname, pty.clone(), false, f.loc)?;
            let lv = self.var_lvalue(v);
            self.store_val(lv, arg, loc)?;
        }
        self.block(f.body.as_ref().unwrap())?;
        let cur = self.cur;
        self.edge(cur, exit, Inst::nop(), f.loc);
        self.scopes = saved_scopes;
        self.ctx.pop();
        self.call_stack.pop();
        let back = self.new_point(loc);
        self.edge(exit, back, Inst::nop(), loc);
        self.cur = back;
        Ok(ret)
    }

    pub fn initialize(
        &mut self,
        lv: super::lower_expr::Lv,
        ty: &CType,
        init: &Init,
        zero_fill: bool,
        loc: Loc,
    ) -> Result<(), FrontendError> {
        match (init, ty) {
            (Init::Expr(e), _) => self.assign_expr(lv, e, loc),
            (Init::List(items), CType::Array(elem, n)) => {
                if items.len() as u64 > *n {
                    return Err(FrontendError::Type { loc, msg: "too many initializers".into() });
                }
                let es = self.types.size_of(elem, self.abi);
                for k in 0..*n {
                    let sub = lv.offset((k * es) as i128, (**elem).clone());
                    match items.get(k as usize) {
                        Some(i) => self.initialize(sub, elem, i, zero_fill, loc)?,
                        None if zero_fill => self.zero(sub, elem, loc)?,
                        None => {}
                    }
                }
                Ok(())
            }
            (Init::List(items), CType::Record(id)) => {
                let (_, _, offs) = self.types.record_layout(*id, self.abi);
                let fields = self.types.record(*id).fields.clone();
                let is_union = self.types.record(*id).kind == super::ctype::RecordKind::Union;
                if items.len() > fields.len() || (is_union && items.len() > 1) {
                    return Err(FrontendError::Type { loc, msg: "too many initializers".into() });
                }
                for (i, ((_, fty), off)) in fields.iter().zip(offs).enumerate() {
                    let sub = lv.offset(off as i128, fty.clone());
                    match items.get(i) {
                        Some(it) => self.initialize(sub, fty, it, zero_fill, loc)?,
                        None if zero_fill && !(is_union && i > 0) => self.zero(sub, fty, loc)?,
                        None => {}
                    }
                }
                Ok(())
            }
            (Init::List(items), t) if t.is_scalar() && items.len() == 1 => {
                self.initialize(lv, ty, &items[0], zero_fill, loc)
            }
            _ => Err(FrontendError::Type { loc, msg: "invalid initializer".into() }),
        }
    }

    fn zero(&mut self, lv: super::lower_expr::Lv, ty: &CType, loc: Loc) -> Result<(), FrontendError> {
        match ty {
            CType::Array(elem, n) => {
                let es = self.types.size_of(elem, self.abi);
                for k in 0..*n {
                    self.zero(lv.offset((k * es) as i128, (**elem).clone()), elem, loc)?;
                }
            }
            CType::Record(id) => {
                let (_, _, offs) = self.types.record_layout(*id, self.abi);
                let fields = self.types.record(*id).fields.clone();
                let is_union = self.types.record(*id).kind == super::ctype::RecordKind::Union;
                for ((_, fty), off) in fields.iter().zip(offs) {
                    self.zero(lv.offset(off as i128, fty.clone()), fty, loc)?;
                    if is_union {
                        break;
                    }
                }
            }
            t => {
                let st = t.scalar().unwrap();
                let v = self.fold_cast(st, Expr::int(0));
                self.emit(Inst::Assign { ty: st, addr: lv.addr, value: v }, loc);
            }
        }
        Ok(())
    }

    pub fn copy_inst(&self, ty: &CType, dst: Expr, src: Expr) -> Inst {
        let ct = match ty.scalar() {
            Some(s) => CopyType::Scalar(s),
            None => CopyType::Bytes(self.types.size_of(ty, self.abi)),
        };
        Inst::Copy { ty: ct, dst, src }
    }

    pub fn func_addr(&self, name: &str) -> Option<Expr> {
        self.func_ids.get(name).map(|f| Expr::AddrOf(Base::Func(*f)))
    }
}

fn is_static_addr(e: &Expr) -> bool {
    match e {
        Expr::AddrOf(_) => true,
        Expr::Binary(BinOp::Add, a, b, _) => matches!(**a, Expr::AddrOf(_)) && matches!(**b, Expr::Int(..)),
        _ => false,
    }
}

fn contains_loop(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::While(..) | StmtKind::DoWhile(..) | StmtKind::For(..) => true,
        StmtKind::If(_, t, e) => contains_loop(t) || e.as_ref().is_some_and(|e| contains_loop(e)),
        StmtKind::Switch(_, b) | StmtKind::Labeled(_, b) => contains_loop(b),
        StmtKind::Block(items) => items.iter().any(contains_loop),
        _ => false,
    }
}

fn collect_cases<'s>(s: &'s Stmt, out: &mut Vec<&'s Stmt>) {
    match &s.kind {
        StmtKind::Case(_) | StmtKind::Default => out.push(s),
        StmtKind::If(_, t, e) => {
            collect_cases(t, out);
            if let Some(e) = e {
                collect_cases(e, out);
            }
        }
        StmtKind::While(_, b) | StmtKind::DoWhile(b, _) | StmtKind::For(_, _, _, b) | StmtKind::Labeled(_, b) => {
            collect_cases(b, out)
        }
        StmtKind::Block(items) => items.iter().for_each(|s| collect_cases(s, out)),
        _ => {}
    }
}

/// Functions whose name is used other than as the callee of a direct call.
fn address_taken(prog: &Program, funcs: &HashMap<String, FuncId>) -> BTreeSet<String> {
    fn expr(e: &ast::Expr, funcs: &HashMap<String, FuncId>, out: &mut BTreeSet<String>) {
        use ast::ExprKind::*;
        match &e.kind {
            Ident(n) if funcs.contains_key(n) => {
                out.insert(n.clone());
            }
            Call(f, args) => {
                if !matches!(f.kind, Ident(_)) {
                    expr(f, funcs, out);
                }
                args.iter().for_each(|a| expr(a, funcs, out));
            }
            Unary(_, a) | Cast(_, a) | SizeofExpr(a) | Member(a, _) | Arrow(a, _) => expr(a, funcs, out),
            Binary(_, a, b) | Assign(_, a, b) | Index(a, b) | Comma(a, b) => {
                expr(a, funcs, out);
                expr(b, funcs, out);
            }
            Cond(a, b, c) => {
                expr(a, funcs, out);
                expr(b, funcs, out);
                expr(c, funcs, out);
            }
            _ => {}
        }
    }
    fn init(i: &Init, funcs: &HashMap<String, FuncId>, out: &mut BTreeSet<String>) {
        match i {
            Init::Expr(e) => expr(e, funcs, out),
            Init::List(items) => items.iter().for_each(|i| init(i, funcs, out)),
        }
    }
    fn stmt(s: &Stmt, funcs: &HashMap<String, FuncId>, out: &mut BTreeSet<String>) {
        match &s.kind {
            StmtKind::Decl(d) => {
                if let Some(i) = &d.init {
                    init(i, funcs, out)
                }
            }
            StmtKind::Expr(e) | StmtKind::Case(e) | StmtKind::Return(Some(e)) => expr(e, funcs, out),
            StmtKind::If(c, t, e) => {
                expr(c, funcs, out);
                stmt(t, funcs, out);
                if let Some(e) = e {
                    stmt(e, funcs, out);
                }
            }
            StmtKind::While(c, b) | StmtKind::DoWhile(b, c) | StmtKind::Switch(c, b) => {
                expr(c, funcs, out);
                stmt(b, funcs, out);
            }
            StmtKind::For(i, c, st, b) => {
                if let Some(i) = i {
                    stmt(i, funcs, out);
                }
                c.iter().chain(st.iter()).for_each(|e| expr(e, funcs, out));
                stmt(b, funcs, out);
            }
            StmtKind::Block(items) => items.iter().for_each(|s| stmt(s, funcs, out)),
            StmtKind::Labeled(_, s) => stmt(s, funcs, out),
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    for g in &prog.globals {
        if let Some(i) = &g.init {
            init(i, funcs, &mut out);
        }
    }
    for f in &prog.functions {
        if let Some(body) = &f.body {
            body.iter().for_each(|s| stmt(s, funcs, &mut out));
        }
    }
    out
}
