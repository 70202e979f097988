//! Recursive-descent parser for the accepted C subset.

use std::collections::HashMap;

use crate::abi::Abi;
use crate::error::FrontendError;
use crate::ir::Loc;
use crate::scalar::ScalarType;

use super::ast::*;
use super::ctype::{CType, FuncSig, RecordDef, RecordId, RecordKind, TypeTable};
use super::lexer::{tokenize, Tok, Token};

pub fn parse(src: &str, abi: &Abi) -> Result<Program, FrontendError> {
    let toks = tokenize(src)?;
    let mut p = Parser::new(toks, abi);
    p.program()
}

struct Specs {
    ty: CType,
    is_static: bool,
    volatile: bool,
    typedef: bool,
}

enum Suffix {
    Array(u64),
    Func(Vec<(Option<String>, CType)>),
}

struct Shape {
    stars: usize,
    inner: Option<Box<Shape>>,
    name: Option<(String, Loc)>,
    suffixes: Vec<Suffix>,
}

impl Shape {
    fn apply(self, base: CType) -> (Option<(String, Loc)>, CType, Option<Vec<Option<String>>>) {
        let mut ty = base;
        for _ in 0..self.stars {
            ty = CType::Pointer(Box::new(ty));
        }
        let mut param_names = None;
        for s in self.suffixes.into_iter().rev() {
            ty = match s {
                Suffix::Array(n) => CType::Array(Box::new(ty), n),
                Suffix::Func(params) => {
                    param_names = Some(params.iter().map(|(n, _)| n.clone()).collect());
                    CType::Function(Box::new(FuncSig { ret: ty, params: params.into_iter().map(|(_, t)| t).collect() }))
                }
            };
        }
        match self.inner {
            Some(inner) => {
                let (name, ty, inner_names) = inner.apply(ty);
                (name, ty, inner_names)
            }
            None => (self.name, ty, param_names),
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    abi: &'a Abi,
    types: TypeTable,
    typedefs: HashMap<String, CType>,
    tags: HashMap<String, RecordId>,
}

fn is_type_keyword(s: &str) -> bool {
    matches!(
        s,
        "void"
            | "char"
            | "short"
            | "int"
            | "long"
            | "signed"
            | "unsigned"
            | "float"
            | "double"
            | "struct"
            | "union"
            | "const"
            | "volatile"
            | "static"
            | "extern"
            | "typedef"
            | "register"
            | "auto"
    )
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<Token>, abi: &'a Abi) -> Self {
        let mut typedefs = HashMap::new();
        for (name, bytes, signed) in [
            ("int8", 1, true),
            ("uint8", 1, false),
            ("int16", 2, true),
            ("uint16", 2, false),
            ("int32", 4, true),
            ("uint32", 4, false),
            ("int64", 8, true),
            ("uint64", 8, false),
        ] {
            let found = ScalarType::ALL
                .iter()
                .copied()
                .filter(|t| t.is_integer() && t.is_signed() == signed)
                .find(|t| abi.size(*t) == bytes);
            if let Some(t) = found {
                typedefs.insert(name.to_string(), CType::Scalar(t));
                typedefs.insert(format!("{}_t", name), CType::Scalar(t));
            }
        }
        typedefs.insert("size_t".into(), CType::Scalar(ScalarType::UInt));
        Parser { toks, pos: 0, abi, types: TypeTable::default(), typedefs, tags: HashMap::new() }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].loc
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FrontendError> {
        Err(FrontendError::Syntax { loc: self.loc(), msg: msg.into() })
    }

    fn expect(&mut self, p: &str) -> Result<(), FrontendError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.err(format!("expected `{}`, found {}", p, self.describe()))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::Int(v, _) => format!("`{}`", v),
            Tok::Float(v) => format!("`{}`", v),
            Tok::Char(v) => format!("character {}", v),
            Tok::Punct(p) => format!("`{}`", p),
            Tok::Eof => "end of input".into(),
        }
    }

    fn ident(&mut self) -> Result<(String, Loc), FrontendError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Ident(s) if !is_type_keyword(&s) => {
                self.bump();
                Ok((s, loc))
            }
            _ => self.err(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn starts_type(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => is_type_keyword(s) || self.typedefs.contains_key(s),
            _ => false,
        }
    }

    fn program(&mut self) -> Result<Program, FrontendError> {
        let mut globals = Vec::new();
        let mut functions: Vec<Function> = Vec::new();
        while *self.peek() != Tok::Eof {
            if self.eat_punct(";") {
                continue;
            }
            let loc = self.loc();
            let specs = self.specifiers()?;
            if self.eat_punct(";") {
                continue;
            }
            loop {
                let dloc = self.loc();
                let shape = self.declarator()?;
                let (name, ty, param_names) = shape.apply(specs.ty.clone());
                let (name, nloc) = match name {
                    Some(n) => n,
                    None => return Err(FrontendError::Syntax { loc: dloc, msg: "missing declarator name".into() }),
                };
                if specs.typedef {
                    self.typedefs.insert(name, ty);
                } else if let CType::Function(sig) = &ty {
                    let names = param_names.unwrap_or_default();
                    let params: Vec<(String, CType)> = sig
                        .params
                        .iter()
                        .enumerate()
                        .map(|(i, t)| (names.get(i).cloned().flatten().unwrap_or_else(|| format!("__arg{}", i)), t.clone()))
                        .collect();
                    if self.is_punct("{") {
                        let body = self.block_items()?;
                        functions.retain(|f| !(f.name == name && f.body.is_none()));
                        if functions.iter().any(|f| f.name == name) {
                            return Err(FrontendError::Type { loc: nloc, msg: format!("redefinition of `{}`", name) });
                        }
                        functions.push(Function { name, ret: sig.ret.clone(), params, body: Some(body), loc });
                        break;
                    }
                    if !functions.iter().any(|f| f.name == name) {
                        functions.push(Function { name, ret: sig.ret.clone(), params, body: None, loc });
                    }
                } else {
                    let init = if self.eat_punct("=") { Some(self.initializer()?) } else { None };
                    globals.push(Decl { name, ty, is_static: true, volatile: specs.volatile, init, loc: nloc });
                }
                if self.eat_punct(",") {
                    continue;
                }
                self.expect(";")?;
                break;
            }
        }
        Ok(Program { types: std::mem::take(&mut self.types), globals, functions })
    }

    fn initializer(&mut self) -> Result<Init, FrontendError> {
        if self.eat_punct("{") {
            let mut items = Vec::new();
            while !self.is_punct("}") {
                items.push(self.initializer()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect("}")?;
            Ok(Init::List(items))
        } else {
            Ok(Init::Expr(self.assignment()?))
        }
    }

    fn specifiers(&mut self) -> Result<Specs, FrontendError> {
        let loc = self.loc();
        let mut is_static = false;
        let mut volatile = false;
        let mut typedef = false;
        let (mut signed, mut unsigned, mut short, mut long, mut char_, mut int, mut float, mut double, mut void) =
            (false, false, false, 0, false, false, false, false, false);
        let mut other: Option<CType> = None;
        let mut any = false;
        loop {
            let Tok::Ident(s) = self.peek().clone() else { break };
            match s.as_str() {
                "static" => is_static = true,
                "extern" | "register" | "auto" | "const" => {}
                "volatile" => volatile = true,
                "typedef" => typedef = true,
                "signed" => signed = true,
                "unsigned" => unsigned = true,
                "short" => short = true,
                "long" => long += 1,
                "char" => char_ = true,
                "int" => int = true,
                "float" => float = true,
                "double" => double = true,
                "void" => void = true,
                "struct" | "union" => {
                    if other.is_some() {
                        return self.err("multiple types in declaration");
                    }
                    other = Some(self.record_spec()?);
                    any = true;
                    continue;
                }
                _ => {
                    let is_basic = signed || unsigned || short || long > 0 || char_ || int || float || double || void;
                    if other.is_none() && !is_basic {
                        if let Some(t) = self.typedefs.get(&s) {
                            other = Some(t.clone());
                            self.bump();
                            any = true;
                            continue;
                        }
                    }
                    break;
                }
            }
            any = true;
            self.bump();
        }
        if !any {
            return self.err(format!("expected a type, found {}", self.describe()));
        }
        let basic = signed || unsigned || short || long > 0 || char_ || int || float || double || void;
        let ty = match (other, basic) {
            (Some(t), false) => t,
            (Some(_), true) => return Err(FrontendError::Syntax { loc, msg: "conflicting type specifiers".into() }),
            (None, _) => {
                if void {
                    CType::Void
                } else if float {
                    CType::Scalar(ScalarType::Float)
                } else if double {
                    CType::Scalar(if long > 0 { ScalarType::LongDouble } else { ScalarType::Double })
                } else {
                    let t = if char_ {
                        ScalarType::SChar
                    } else if short {
                        ScalarType::Short
                    } else if long >= 2 {
                        ScalarType::LongLong
                    } else if long == 1 {
                        ScalarType::Long
                    } else if int || signed || unsigned {
                        ScalarType::Int
                    } else {
                        return Err(FrontendError::Syntax { loc, msg: "missing type specifier".into() });
                    };
                    CType::Scalar(if unsigned { t.to_unsigned() } else { t })
                }
            }
        };
        Ok(Specs { ty, is_static, volatile, typedef })
    }

    fn record_spec(&mut self) -> Result<CType, FrontendError> {
        let kind = if self.eat_kw("struct") {
            RecordKind::Struct
        } else {
            self.bump();
            RecordKind::Union
        };
        let tag = match self.peek().clone() {
            Tok::Ident(s) if !is_type_keyword(&s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        };
        let id = match &tag {
            Some(t) if self.tags.contains_key(t) => {
                let id = self.tags[t];
                if self.types.record(id).kind != kind {
                    return self.err(format!("`{}` redeclared with a different kind", t));
                }
                id
            }
            _ => {
                let id = RecordId(self.types.records.len());
                self.types.records.push(RecordDef { kind, tag: tag.clone(), fields: Vec::new(), complete: false });
                if let Some(t) = &tag {
                    self.tags.insert(t.clone(), id);
                }
                id
            }
        };
        if self.eat_punct("{") {
            if self.types.record(id).complete {
                return self.err("record redefinition");
            }
            let mut fields: Vec<(String, CType)> = Vec::new();
            while !self.eat_punct("}") {
                let specs = self.specifiers()?;
                loop {
                    let shape = self.declarator()?;
                    let (name, ty, _) = shape.apply(specs.ty.clone());
                    let (name, nloc) = name.ok_or(FrontendError::Syntax { loc: self.loc(), msg: "unnamed field".into() })?;
                    if fields.iter().any(|(n, _)| *n == name) {
                        return Err(FrontendError::Type { loc: nloc, msg: format!("duplicate field `{}`", name) });
                    }
                    if self.is_punct(":") {
                        return Err(FrontendError::Unsupported { loc: self.loc(), msg: "bit-fields".into() });
                    }
                    fields.push((name, ty));
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect(";")?;
            }
            let def = &mut self.types.records[id.0];
            def.fields = fields;
            def.complete = true;
        } else if tag.is_none() {
            return self.err("anonymous record without body");
        }
        Ok(CType::Record(id))
    }

    fn declarator(&mut self) -> Result<Shape, FrontendError> {
        let mut stars = 0;
        loop {
            if self.eat_punct("*") {
                stars += 1;
            } else if self.eat_kw("const") || self.eat_kw("volatile") {
            } else {
                break;
            }
        }
        let mut inner = None;
        let mut name = None;
        let nested = self.is_punct("(")
            && (matches!(self.peek_at(1), Tok::Punct("*")) || matches!(self.peek_at(1), Tok::Punct("(")));
        if nested {
            self.bump();
            inner = Some(Box::new(self.declarator()?));
            self.expect(")")?;
        } else if let Tok::Ident(s) = self.peek().clone() {
            if !is_type_keyword(&s) && !self.typedefs.contains_key(&s) {
                let loc = self.loc();
                self.bump();
                name = Some((s, loc));
            }
        }
        let mut suffixes = Vec::new();
        loop {
            if self.eat_punct("[") {
                let e = self.conditional()?;
                let n = self.const_eval(&e)?;
                if n < 0 {
                    return self.err("negative array length");
                }
                self.expect("]")?;
                suffixes.push(Suffix::Array(n as u64));
            } else if self.eat_punct("(") {
                suffixes.push(Suffix::Func(self.params()?));
            } else {
                break;
            }
        }
        Ok(Shape { stars, inner, name, suffixes })
    }

    fn params(&mut self) -> Result<Vec<(Option<String>, CType)>, FrontendError> {
        let mut params = Vec::new();
        if self.eat_punct(")") {
            return Ok(params);
        }
        if self.is_kw("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
            self.bump();
            self.bump();
            return Ok(params);
        }
        loop {
            if self.is_punct("...") {
                return Err(FrontendError::Unsupported { loc: self.loc(), msg: "variadic functions".into() });
            }
            let specs = self.specifiers()?;
            let shape = self.declarator()?;
            let (name, ty, _) = shape.apply(specs.ty);
            let ty = match ty {
                CType::Array(e, _) => CType::Pointer(e),
                f @ CType::Function(_) => CType::Pointer(Box::new(f)),
                t => t,
            };
            params.push((name.map(|n| n.0), ty));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok(params)
    }

    fn type_name(&mut self) -> Result<CType, FrontendError> {
        let specs = self.specifiers()?;
        let shape = self.declarator()?;
        if shape.name.is_some() {
            return self.err("unexpected name in type");
        }
        Ok(shape.apply(specs.ty).1)
    }

    fn const_eval(&self, e: &Expr) -> Result<i128, FrontendError> {
        const_eval(&self.types, self.abi, e)
    }

    fn block_items(&mut self) -> Result<Vec<Stmt>, FrontendError> {
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.eat_punct("}") {
            if *self.peek() == Tok::Eof {
                return self.err("unexpected end of input in block");
            }
            if self.starts_type() {
                self.local_decls(&mut items)?;
            } else {
                items.push(self.statement()?);
            }
        }
        Ok(items)
    }

    fn local_decls(&mut self, out: &mut Vec<Stmt>) -> Result<(), FrontendError> {
        let loc = self.loc();
        let specs = self.specifiers()?;
        if self.eat_punct(";") {
            return Ok(());
        }
        loop {
            let shape = self.declarator()?;
            let (name, ty, _) = shape.apply(specs.ty.clone());
            let (name, nloc) = name.ok_or(FrontendError::Syntax { loc, msg: "missing declarator name".into() })?;
            if specs.typedef {
                self.typedefs.insert(name, ty);
            } else {
                if matches!(ty, CType::Function(_)) {
                    return Err(FrontendError::Unsupported { loc: nloc, msg: "local function declarations".into() });
                }
                if specs.is_static {
                    return Err(FrontendError::Unsupported { loc: nloc, msg: "static local variables".into() });
                }
                let init = if self.eat_punct("=") { Some(self.initializer()?) } else { None };
                out.push(Stmt {
                    kind: StmtKind::Decl(Decl { name, ty, is_static: false, volatile: specs.volatile, init, loc: nloc }),
                    loc: nloc,
                });
            }
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect(";")
    }

    fn statement(&mut self) -> Result<Stmt, FrontendError> {
        let loc = self.loc();
        let kind = if self.is_punct("{") {
            let mut items = self.block_items()?;
            if items.len() == 1 && !matches!(items[0].kind, StmtKind::Decl(_)) {
                return Ok(Stmt { kind: StmtKind::Block(vec![items.remove(0)]), loc });
            }
            StmtKind::Block(items)
        } else if self.eat_punct(";") {
            StmtKind::Empty
        } else if self.eat_kw("if") {
            self.expect("(")?;
            let c = self.expression()?;
            self.expect(")")?;
            let t = self.statement()?;
            let e = if self.eat_kw("else") { Some(Box::new(self.statement()?)) } else { None };
            StmtKind::If(c, Box::new(t), e)
        } else if self.eat_kw("while") {
            self.expect("(")?;
            let c = self.expression()?;
            self.expect(")")?;
            StmtKind::While(c, Box::new(self.statement()?))
        } else if self.eat_kw("do") {
            let body = self.statement()?;
            if !self.eat_kw("while") {
                return self.err("expected `while`");
            }
            self.expect("(")?;
            let c = self.expression()?;
            self.expect(")")?;
            self.expect(";")?;
            StmtKind::DoWhile(Box::new(body), c)
        } else if self.eat_kw("for") {
            self.expect("(")?;
            let init = if self.eat_punct(";") {
                None
            } else if self.starts_type() {
                let mut decls = Vec::new();
                let l = self.loc();
                self.local_decls(&mut decls)?;
                Some(Box::new(Stmt { kind: StmtKind::Block(decls), loc: l }))
            } else {
                let l = self.loc();
                let e = self.expression()?;
                self.expect(";")?;
                Some(Box::new(Stmt { kind: StmtKind::Expr(e), loc: l }))
            };
            let cond = if self.is_punct(";") { None } else { Some(self.expression()?) };
            self.expect(";")?;
            let step = if self.is_punct(")") { None } else { Some(self.expression()?) };
            self.expect(")")?;
            StmtKind::For(init, cond, step, Box::new(self.statement()?))
        } else if self.eat_kw("switch") {
            self.expect("(")?;
            let c = self.expression()?;
            self.expect(")")?;
            StmtKind::Switch(c, Box::new(self.statement()?))
        } else if self.eat_kw("case") {
            let e = self.conditional()?;
            self.expect(":")?;
            StmtKind::Case(e)
        } else if self.eat_kw("default") {
            self.expect(":")?;
            StmtKind::Default
        } else if self.eat_kw("break") {
            self.expect(";")?;
            StmtKind::Break
        } else if self.eat_kw("continue") {
            self.expect(";")?;
            StmtKind::Continue
        } else if self.eat_kw("return") {
            let e = if self.is_punct(";") { None } else { Some(self.expression()?) };
            self.expect(";")?;
            StmtKind::Return(e)
        } else if self.is_kw("goto") {
            return Err(FrontendError::Unsupported { loc, msg: "goto".into() });
        } else if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Punct(":")) {
            let (name, _) = self.ident()?;
            self.bump();
            let inner = if self.is_punct("}") { Stmt { kind: StmtKind::Empty, loc } } else { self.statement()? };
            StmtKind::Labeled(name, Box::new(inner))
        } else {
            let e = self.expression()?;
            self.expect(";")?;
            StmtKind::Expr(e)
        };
        Ok(Stmt { kind, loc })
    }

    fn expression(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.assignment()?;
        while self.is_punct(",") {
            let loc = self.loc();
            self.bump();
            let r = self.assignment()?;
            e = Expr { kind: ExprKind::Comma(Box::new(e), Box::new(r)), loc };
        }
        Ok(e)
    }

    fn assignment(&mut self) -> Result<Expr, FrontendError> {
        let lhs = self.conditional()?;
        let loc = self.loc();
        let op = match self.peek() {
            Tok::Punct("=") => Some(None),
            Tok::Punct("+=") => Some(Some(BinaryOp::Add)),
            Tok::Punct("-=") => Some(Some(BinaryOp::Sub)),
            Tok::Punct("*=") => Some(Some(BinaryOp::Mul)),
            Tok::Punct("/=") => Some(Some(BinaryOp::Div)),
            Tok::Punct("%=") => Some(Some(BinaryOp::Mod)),
            Tok::Punct("&=") => Some(Some(BinaryOp::BitAnd)),
            Tok::Punct("|=") => Some(Some(BinaryOp::BitOr)),
            Tok::Punct("^=") => Some(Some(BinaryOp::BitXor)),
            Tok::Punct("<<=") => Some(Some(BinaryOp::Shl)),
            Tok::Punct(">>=") => Some(Some(BinaryOp::Shr)),
            _ => None,
        };
        match op {
            Some(op) => {
                self.bump();
                let rhs = self.assignment()?;
                Ok(Expr { kind: ExprKind::Assign(op, Box::new(lhs), Box::new(rhs)), loc })
            }
            None => Ok(lhs),
        }
    }

    fn conditional(&mut self) -> Result<Expr, FrontendError> {
        let c = self.binary(0)?;
        if self.is_punct("?") {
            let loc = self.loc();
            self.bump();
            let a = self.expression()?;
            self.expect(":")?;
            let b = self.conditional()?;
            return Ok(Expr { kind: ExprKind::Cond(Box::new(c), Box::new(a), Box::new(b)), loc });
        }
        Ok(c)
    }

    fn binop_info(&self) -> Option<(BinaryOp, u8)> {
        let Tok::Punct(p) = self.peek() else { return None };
        Some(match *p {
            "||" => (BinaryOp::LogOr, 1),
            "&&" => (BinaryOp::LogAnd, 2),
            "|" => (BinaryOp::BitOr, 3),
            "^" => (BinaryOp::BitXor, 4),
            "&" => (BinaryOp::BitAnd, 5),
            "==" => (BinaryOp::Eq, 6),
            "!=" => (BinaryOp::Ne, 6),
            "<" => (BinaryOp::Lt, 7),
            "<=" => (BinaryOp::Le, 7),
            ">" => (BinaryOp::Gt, 7),
            ">=" => (BinaryOp::Ge, 7),
            "<<" => (BinaryOp::Shl, 8),
            ">>" => (BinaryOp::Shr, 8),
            "+" => (BinaryOp::Add, 9),
            "-" => (BinaryOp::Sub, 9),
            "*" => (BinaryOp::Mul, 10),
            "/" => (BinaryOp::Div, 10),
            "%" => (BinaryOp::Mod, 10),
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binop_info() {
            if prec <= min_prec {
                break;
            }
            let loc = self.loc();
            self.bump();
            let rhs = self.binary(prec)?;
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc };
        }
        Ok(lhs)
    }

    fn paren_type_ahead(&self) -> bool {
        self.is_punct("(")
            && match self.peek_at(1) {
                Tok::Ident(s) => is_type_keyword(s) || self.typedefs.contains_key(s),
                _ => false,
            }
    }

    fn unary(&mut self) -> Result<Expr, FrontendError> {
        let loc = self.loc();
        let op = match self.peek() {
            Tok::Punct("-") => Some(UnaryOp::Neg),
            Tok::Punct("+") => Some(UnaryOp::Plus),
            Tok::Punct("~") => Some(UnaryOp::BitNot),
            Tok::Punct("!") => Some(UnaryOp::Not),
            Tok::Punct("*") => Some(UnaryOp::Deref),
            Tok::Punct("&") => Some(UnaryOp::AddrOf),
            Tok::Punct("++") => Some(UnaryOp::PreInc),
            Tok::Punct("--") => Some(UnaryOp::PreDec),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let e = self.unary()?;
            return Ok(Expr { kind: ExprKind::Unary(op, Box::new(e)), loc });
        }
        if self.eat_kw("sizeof") {
            if self.paren_type_ahead() {
                self.bump();
                let t = self.type_name()?;
                self.expect(")")?;
                return Ok(Expr { kind: ExprKind::SizeofType(t), loc });
            }
            let e = self.unary()?;
            return Ok(Expr { kind: ExprKind::SizeofExpr(Box::new(e)), loc });
        }
        if self.paren_type_ahead() {
            self.bump();
            let t = self.type_name()?;
            self.expect(")")?;
            let e = self.unary()?;
            return Ok(Expr { kind: ExprKind::Cast(t, Box::new(e)), loc });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, FrontendError> {
        let mut e = self.primary()?;
        loop {
            let loc = self.loc();
            if self.eat_punct("[") {
                let i = self.expression()?;
                self.expect("]")?;
                e = Expr { kind: ExprKind::Index(Box::new(e), Box::new(i)), loc };
            } else if self.eat_punct("(") {
                let mut args = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        args.push(self.assignment()?);
                        if !self.eat_punct(",") {
                            break;
                        }
                    }
                    self.expect(")")?;
                }
                e = Expr { kind: ExprKind::Call(Box::new(e), args), loc };
            } else if self.eat_punct(".") {
                let (f, _) = self.ident()?;
                e = Expr { kind: ExprKind::Member(Box::new(e), f), loc };
            } else if self.eat_punct("->") {
                let (f, _) = self.ident()?;
                e = Expr { kind: ExprKind::Arrow(Box::new(e), f), loc };
            } else if self.eat_punct("++") {
                e = Expr { kind: ExprKind::Unary(UnaryOp::PostInc, Box::new(e)), loc };
            } else if self.eat_punct("--") {
                e = Expr { kind: ExprKind::Unary(UnaryOp::PostDec, Box::new(e)), loc };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FrontendError> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(v, s) => {
                self.bump();
                Ok(Expr { kind: ExprKind::IntLit(v, s), loc })
            }
            Tok::Float(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::FloatLit(v), loc })
            }
            Tok::Char(v) => {
                self.bump();
                Ok(Expr { kind: ExprKind::CharLit(v), loc })
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expression()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(s) if !is_type_keyword(&s) => {
                self.bump();
                if s == "malloc" || s == "calloc" || s == "realloc" || s == "free" {
                    return Err(FrontendError::Unsupported { loc, msg: "dynamic memory allocation".into() });
                }
                Ok(Expr { kind: ExprKind::Ident(s), loc })
            }
            _ => self.err(format!("expected expression, found {}", self.describe())),
        }
    }
}

/// Evaluates an integer constant expression (array lengths, case labels).
pub(crate) fn const_eval(types: &TypeTable, abi: &Abi, e: &Expr) -> Result<i128, FrontendError> {
    let bad = || FrontendError::Type { loc: e.loc, msg: "expected an integer constant expression".into() };
    Ok(match &e.kind {
        ExprKind::IntLit(v, _) | ExprKind::CharLit(v) => *v,
        ExprKind::SizeofType(t) => types.size_of(t, abi) as i128,
        ExprKind::Unary(UnaryOp::Neg, a) => -const_eval(types, abi, a)?,
        ExprKind::Unary(UnaryOp::Plus, a) => const_eval(types, abi, a)?,
        ExprKind::Unary(UnaryOp::BitNot, a) => !const_eval(types, abi, a)?,
        ExprKind::Cast(_, a) => const_eval(types, abi, a)?,
        ExprKind::Binary(op, a, b) => {
            let (x, y) = (const_eval(types, abi, a)?, const_eval(types, abi, b)?);
            match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x.checked_mul(y).ok_or_else(bad)?,
                BinaryOp::Div if y != 0 => x / y,
                BinaryOp::Mod if y != 0 => x % y,
                BinaryOp::Shl if (0..64).contains(&y) => x.checked_shl(y as u32).ok_or_else(bad)?,
                BinaryOp::Shr if (0..64).contains(&y) => x >> y,
                BinaryOp::BitAnd => x & y,
                BinaryOp::BitOr => x | y,
                BinaryOp::BitXor => x ^ y,
                _ => return Err(bad()),
            }
        }
        _ => return Err(bad()),
    })
}
