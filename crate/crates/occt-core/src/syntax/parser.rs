//! Recursive-descent parser for programs, expressions and the type surface
//! syntax.
//!
//! Grammar sketch (types bind tighter left of `->`, which is
//! right-associative; `|` and `&` bind tighter than `->`, `~` tighter
//! still):
//!
//! ```text
//! program  ::= { "type" X "=" ty {"and" X "=" ty} | "let" x "=" expr }
//! ty       ::= ty-arrow ["where" X "=" ty {"and" X "=" ty}]
//! ty-arrow ::= ty-or ["->" ty-arrow]
//! ty-or    ::= ty-and {"|" ty-and}
//! ty-and   ::= ty-neg {"&" ty-neg}
//! ty-neg   ::= "~" ty-neg | ty-atom
//! ty-atom  ::= "(" ty ")" | "(" ty "," ty ")" | "{" fields ["..."] "}"
//!            | Int | Bool | Char | String | Any | Empty | Atom | Undef
//!            | 42 | 'c' | "s" | true | false | nil | X
//! expr     ::= "fun" "(" x ":" annot ")" "->" expr
//!            | "if" expr "is" ty "then" expr "else" expr
//!            | "let" x "=" expr "in" expr
//!            | app
//! app      ::= prefix {prefix}
//! prefix   ::= "fst" prefix | "snd" prefix | postfix
//! postfix  ::= atom {"." label}
//! atom     ::= const | x | "(" expr ")" | "(" expr "," expr ")"
//!            | "{" "}" | "{" expr "with" label "=" expr "}"
//!            | "{" expr "without" label "}"
//! annot    ::= ty | ty "->" ty ";" ... [";"]
//! ```
//!
//! A single-type annotation is a domain whose result type is reconstructed;
//! semicolon-separated arrows (or one arrow with a trailing semicolon) form
//! an explicit intersection annotation.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, Ordering};

use crate::diag::{Span, TypeError};
use crate::types::{TyExpr, TypeId, TypeStore};

use super::ast::{Const, Expr, ExprKind, LambdaAnnot, NodeId, ProjSide};
use super::lexer::{lex, Tok, Token};

pub type TypeNames = BTreeMap<String, TypeId>;

#[derive(Debug, Clone)]
pub enum Decl {
    TypeGroup {
        bindings: Vec<(String, TypeId)>,
    },
    Let {
        name: String,
        expr: Expr,
        span: Span,
    },
}

#[derive(Debug, Clone)]
pub enum TopLevel {
    Decl(Decl),
    Expr(Expr),
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
}

static NODE_COUNTER: AtomicU32 = AtomicU32::new(0);

fn fresh_node() -> NodeId {
    NodeId(NODE_COUNTER.fetch_add(1, Ordering::Relaxed))
}

const RESERVED: &[&str] = &[
    "fun", "if", "is", "then", "else", "let", "in", "type", "and", "with", "without", "fst", "snd",
    "where",
];

#[derive(Debug, Clone)]
enum TyAst {
    Name(String, Span),
    IntAny,
    BoolAny,
    CharAny,
    StringAny,
    Any,
    Empty,
    AtomAny,
    Undef,
    IntLit(i64),
    CharLit(char),
    StrLit(String),
    AtomLit(String),
    Arrow(Box<TyAst>, Box<TyAst>),
    Prod(Box<TyAst>, Box<TyAst>),
    Record(Vec<(String, TyAst, bool)>, bool),
    Or(Box<TyAst>, Box<TyAst>),
    And(Box<TyAst>, Box<TyAst>),
    Not(Box<TyAst>),
    Where(Box<TyAst>, Vec<(String, TyAst)>),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    store: &'a TypeStore,
    names: TypeNames,
}

pub fn parse_program(
    store: &TypeStore,
    names: &TypeNames,
    src: &str,
) -> Result<Program, TypeError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        store,
        names: names.clone(),
    };
    let mut decls = Vec::new();
    while !p.at_eof() {
        match p.parse_toplevel()? {
            TopLevel::Decl(d) => decls.push(d),
            TopLevel::Expr(e) => {
                return Err(TypeError::Syntax {
                    span: e.span,
                    message: "bare expressions are not allowed at the top level of a file; bind them with `let`".into(),
                })
            }
        }
    }
    Ok(Program { decls })
}

/// One line of interactive input: a declaration or an expression.
pub fn parse_expr_or_decl(
    store: &TypeStore,
    names: &TypeNames,
    src: &str,
) -> Result<TopLevel, TypeError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        store,
        names: names.clone(),
    };
    let item = p.parse_toplevel()?;
    p.expect_eof()?;
    Ok(item)
}

/// Parses a type in isolation (used by builtins files and the REPL).
pub fn parse_type(store: &TypeStore, names: &TypeNames, src: &str) -> Result<TypeId, TypeError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        store,
        names: names.clone(),
    };
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn expect_eof(&self) -> Result<(), TypeError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn err(&self, msg: &str) -> TypeError {
        TypeError::Syntax {
            span: self.span(),
            message: msg.to_string(),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TypeError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {what}")))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), TypeError> {
        let span = self.span();
        match self.bump() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => Ok((s, span)),
            _ => Err(TypeError::Syntax {
                span,
                message: format!("expected {what}"),
            }),
        }
    }

    // ---- top level ---------------------------------------------------------

    fn parse_toplevel(&mut self) -> Result<TopLevel, TypeError> {
        if self.is_kw("type") {
            self.bump();
            let mut group = Vec::new();
            loop {
                let (name, _) = self.ident("type name")?;
                self.expect(Tok::Eq, "`=`")?;
                let body = self.ty_ast()?;
                group.push((name, body));
                if !self.eat_kw("and") {
                    break;
                }
            }
            let bindings = self.resolve_group(&group)?;
            for (name, id) in &bindings {
                self.names.insert(name.clone(), *id);
            }
            return Ok(TopLevel::Decl(Decl::TypeGroup { bindings }));
        }
        if self.is_kw("let") {
            let start = self.span();
            self.bump();
            let (name, _) = self.ident("binding name")?;
            self.expect(Tok::Eq, "`=`")?;
            let expr = self.expr()?;
            if self.eat_kw("in") {
                // it was an expression-level let after all
                let body = self.expr()?;
                let span = start.merge(body.span);
                return Ok(TopLevel::Expr(Expr::new(
                    ExprKind::Let {
                        name,
                        bound: Box::new(expr),
                        body: Box::new(body),
                    },
                    span,
                    fresh_node(),
                )));
            }
            let span = start.merge(expr.span);
            return Ok(TopLevel::Decl(Decl::Let { name, expr, span }));
        }
        let e = self.expr()?;
        Ok(TopLevel::Expr(e))
    }

    // ---- expressions -------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, TypeError> {
        if self.is_kw("fun") {
            let start = self.span();
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let (param, _) = self.ident("parameter name")?;
            self.expect(Tok::Colon, "`:`")?;
            let annot = self.annotation()?;
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Arrow, "`->`")?;
            let body = self.expr()?;
            let span = start.merge(body.span);
            return Ok(Expr::new(
                ExprKind::Lambda {
                    param,
                    annot,
                    body: Box::new(body),
                    resolved: None,
                },
                span,
                fresh_node(),
            ));
        }
        if self.is_kw("if") {
            let start = self.span();
            self.bump();
            let scrut = self.expr_app_level()?;
            if !self.eat_kw("is") {
                return Err(self.err("expected `is` after the tested expression"));
            }
            let test = self.ty()?;
            if !self.eat_kw("then") {
                return Err(self.err("expected `then`"));
            }
            let then_branch = self.expr()?;
            if !self.eat_kw("else") {
                return Err(self.err("expected `else`"));
            }
            let else_branch = self.expr()?;
            let span = start.merge(else_branch.span);
            return Ok(Expr::new(
                ExprKind::TypeCase {
                    scrut: Box::new(scrut),
                    test,
                    then_branch: Box::new(then_branch),
                    else_branch: Box::new(else_branch),
                },
                span,
                fresh_node(),
            ));
        }
        if self.is_kw("let") {
            let start = self.span();
            self.bump();
            let (name, _) = self.ident("binding name")?;
            self.expect(Tok::Eq, "`=`")?;
            let bound = self.expr()?;
            if !self.eat_kw("in") {
                return Err(self.err("expected `in`"));
            }
            let body = self.expr()?;
            let span = start.merge(body.span);
            return Ok(Expr::new(
                ExprKind::Let {
                    name,
                    bound: Box::new(bound),
                    body: Box::new(body),
                },
                span,
                fresh_node(),
            ));
        }
        self.expr_app_level()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Char(_) | Tok::Str(_) | Tok::LParen | Tok::LBrace => true,
            Tok::Ident(s) => !RESERVED.contains(&s.as_str()) || s == "fst" || s == "snd",
            _ => false,
        }
    }

    fn expr_app_level(&mut self) -> Result<Expr, TypeError> {
        let mut e = self.expr_prefix()?;
        while self.starts_atom() {
            let arg = self.expr_prefix()?;
            let span = e.span.merge(arg.span);
            e = Expr::new(
                ExprKind::App(Box::new(e), Box::new(arg)),
                span,
                fresh_node(),
            );
        }
        Ok(e)
    }

    fn expr_prefix(&mut self) -> Result<Expr, TypeError> {
        if self.is_kw("fst") || self.is_kw("snd") {
            let start = self.span();
            let side = if self.eat_kw("fst") {
                ProjSide::First
            } else {
                self.bump();
                ProjSide::Second
            };
            let inner = self.expr_prefix()?;
            let span = start.merge(inner.span);
            return Ok(Expr::new(
                ExprKind::Proj(side, Box::new(inner)),
                span,
                fresh_node(),
            ));
        }
        self.expr_postfix()
    }

    fn expr_postfix(&mut self) -> Result<Expr, TypeError> {
        let mut e = self.expr_atom()?;
        while self.eat(&Tok::Dot) {
            let (label, span) = self.ident("field name")?;
            let sp = e.span.merge(span);
            e = Expr::new(ExprKind::FieldSel(Box::new(e), label), sp, fresh_node());
        }
        Ok(e)
    }

    fn expr_atom(&mut self) -> Result<Expr, TypeError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::new(
                    ExprKind::Const(Const::Int(n)),
                    start,
                    fresh_node(),
                ))
            }
            Tok::Char(c) => {
                self.bump();
                Ok(Expr::new(
                    ExprKind::Const(Const::Char(c)),
                    start,
                    fresh_node(),
                ))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::new(
                    ExprKind::Const(Const::Str(s)),
                    start,
                    fresh_node(),
                ))
            }
            Tok::Ident(s) if s == "true" || s == "false" || s == "nil" => {
                self.bump();
                Ok(Expr::new(
                    ExprKind::Const(Const::Atom(s)),
                    start,
                    fresh_node(),
                ))
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident("expression")?;
                Ok(Expr::new(ExprKind::Var(name), span, fresh_node()))
            }
            Tok::LParen => {
                self.bump();
                let first = self.expr()?;
                if self.eat(&Tok::Comma) {
                    let second = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let span = start.merge(self.prev_span());
                    return Ok(Expr::new(
                        ExprKind::Pair(Box::new(first), Box::new(second)),
                        span,
                        fresh_node(),
                    ));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(first)
            }
            Tok::LBrace => {
                self.bump();
                if self.eat(&Tok::RBrace) {
                    let span = start.merge(self.prev_span());
                    return Ok(Expr::new(
                        ExprKind::Record(BTreeMap::new()),
                        span,
                        fresh_node(),
                    ));
                }
                let subject = self.expr()?;
                if self.eat_kw("with") {
                    let (label, _) = self.ident("field name")?;
                    self.expect(Tok::Eq, "`=`")?;
                    let value = self.expr()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    let span = start.merge(self.prev_span());
                    Ok(Expr::new(
                        ExprKind::FieldUpdate(Box::new(subject), label, Box::new(value)),
                        span,
                        fresh_node(),
                    ))
                } else if self.eat_kw("without") {
                    let (label, _) = self.ident("field name")?;
                    self.expect(Tok::RBrace, "`}`")?;
                    let span = start.merge(self.prev_span());
                    Ok(Expr::new(
                        ExprKind::FieldDel(Box::new(subject), label),
                        span,
                        fresh_node(),
                    ))
                } else {
                    Err(self.err("expected `with` or `without` in record expression"))
                }
            }
            _ => Err(self.err("expected an expression")),
        }
    }

    fn annotation(&mut self) -> Result<LambdaAnnot, TypeError> {
        let first = self.ty_ast()?;
        let mut segments = vec![first];
        let mut explicit = false;
        while self.eat(&Tok::Semi) {
            explicit = true;
            if matches!(self.peek(), Tok::RParen) {
                break;
            }
            segments.push(self.ty_ast()?);
        }
        if !explicit {
            let t = self.resolve(&segments[0], &BTreeMap::new())?;
            return Ok(LambdaAnnot::Domain(t));
        }
        let mut arrows = Vec::new();
        for seg in &segments {
            match seg {
                TyAst::Arrow(d, c) => {
                    let d = self.resolve(d, &BTreeMap::new())?;
                    let c = self.resolve(c, &BTreeMap::new())?;
                    arrows.push((d, c));
                }
                _ => {
                    return Err(self
                        .err("each segment of an arrow annotation must be of the form `T -> S`"))
                }
            }
        }
        Ok(LambdaAnnot::Arrows(arrows))
    }

    // ---- types -------------------------------------------------------------

    fn ty(&mut self) -> Result<TypeId, TypeError> {
        let ast = self.ty_ast()?;
        self.resolve(&ast, &BTreeMap::new())
    }

    fn ty_ast(&mut self) -> Result<TyAst, TypeError> {
        let main = self.ty_ast_arrow()?;
        if self.eat_kw("where") {
            let mut bindings = Vec::new();
            loop {
                let (name, _) = self.ident("type name")?;
                self.expect(Tok::Eq, "`=`")?;
                let body = self.ty_ast_arrow()?;
                bindings.push((name, body));
                if !self.eat_kw("and") {
                    break;
                }
            }
            return Ok(TyAst::Where(Box::new(main), bindings));
        }
        Ok(main)
    }

    fn ty_ast_arrow(&mut self) -> Result<TyAst, TypeError> {
        let lhs = self.ty_ast_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.ty_ast_arrow()?;
            return Ok(TyAst::Arrow(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn ty_ast_or(&mut self) -> Result<TyAst, TypeError> {
        let mut t = self.ty_ast_and()?;
        while self.eat(&Tok::Bar) {
            let rhs = self.ty_ast_and()?;
            t = TyAst::Or(Box::new(t), Box::new(rhs));
        }
        Ok(t)
    }

    fn ty_ast_and(&mut self) -> Result<TyAst, TypeError> {
        let mut t = self.ty_ast_neg()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.ty_ast_neg()?;
            t = TyAst::And(Box::new(t), Box::new(rhs));
        }
        Ok(t)
    }

    fn ty_ast_neg(&mut self) -> Result<TyAst, TypeError> {
        if self.eat(&Tok::Tilde) {
            let inner = self.ty_ast_neg()?;
            return Ok(TyAst::Not(Box::new(inner)));
        }
        self.ty_ast_atom()
    }

    fn ty_ast_atom(&mut self) -> Result<TyAst, TypeError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(TyAst::IntLit(n))
            }
            Tok::Char(c) => {
                self.bump();
                Ok(TyAst::CharLit(c))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(TyAst::StrLit(s))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(match s.as_str() {
                    "Int" => TyAst::IntAny,
                    "Bool" => TyAst::BoolAny,
                    "Char" => TyAst::CharAny,
                    "String" => TyAst::StringAny,
                    "Any" => TyAst::Any,
                    "Empty" => TyAst::Empty,
                    "Atom" => TyAst::AtomAny,
                    "Undef" => TyAst::Undef,
                    "true" | "True" => TyAst::AtomLit("true".into()),
                    "false" | "False" => TyAst::AtomLit("false".into()),
                    "nil" | "Nil" => TyAst::AtomLit("nil".into()),
                    "unit" | "Unit" => TyAst::AtomLit("unit".into()),
                    _ if RESERVED.contains(&s.as_str()) => {
                        return Err(TypeError::Syntax {
                            span,
                            message: format!("`{s}` is a keyword, not a type"),
                        })
                    }
                    _ => TyAst::Name(s, span),
                })
            }
            Tok::LParen => {
                self.bump();
                let first = self.ty_ast()?;
                if self.eat(&Tok::Comma) {
                    let second = self.ty_ast()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(TyAst::Prod(Box::new(first), Box::new(second)));
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(first)
            }
            Tok::LBrace => {
                self.bump();
                let mut fields = Vec::new();
                let mut open = false;
                loop {
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    if self.eat(&Tok::DotDot) {
                        open = true;
                        self.expect(Tok::RBrace, "`}`")?;
                        break;
                    }
                    let (label, _) = self.ident("field label")?;
                    let optional = if self.eat(&Tok::EqQuestion) {
                        true
                    } else {
                        self.expect(Tok::Eq, "`=` or `=?`")?;
                        false
                    };
                    let t = self.ty_ast_arrow()?;
                    fields.push((label, t, optional));
                    if self.eat(&Tok::Comma) {
                        continue;
                    }
                }
                Ok(TyAst::Record(fields, open))
            }
            _ => Err(self.err("expected a type")),
        }
    }

    fn resolve_group(&self, group: &[(String, TyAst)]) -> Result<Vec<(String, TypeId)>, TypeError> {
        let refs: BTreeMap<String, usize> = group
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), i))
            .collect();
        let mut bodies = Vec::new();
        for (_, ast) in group {
            bodies.push(self.to_tyexpr(ast, &refs)?);
        }
        let names: Vec<String> = group.iter().map(|(n, _)| n.clone()).collect();
        let ids = self.store.recursive(&names, &bodies)?;
        Ok(names.into_iter().zip(ids).collect())
    }

    fn resolve(&self, ast: &TyAst, refs: &BTreeMap<String, usize>) -> Result<TypeId, TypeError> {
        let e = self.to_tyexpr(ast, refs)?;
        self.store.build(&e)
    }

    fn to_tyexpr(&self, ast: &TyAst, refs: &BTreeMap<String, usize>) -> Result<TyExpr, TypeError> {
        Ok(match ast {
            TyAst::Name(n, span) => {
                if let Some(&i) = refs.get(n) {
                    TyExpr::Ref(i)
                } else if let Some(&t) = self.names.get(n) {
                    TyExpr::Done(t)
                } else {
                    return Err(TypeError::Syntax {
                        span: *span,
                        message: format!("unknown type name `{n}`"),
                    });
                }
            }
            TyAst::IntAny => TyExpr::Done(self.store.int_any()),
            TyAst::BoolAny => TyExpr::Done(self.store.bool_ty()),
            TyAst::CharAny => TyExpr::Done(self.store.char_any()),
            TyAst::StringAny => TyExpr::Done(self.store.string_any()),
            TyAst::Any => TyExpr::Done(self.store.any()),
            TyAst::Empty => TyExpr::Done(self.store.empty()),
            TyAst::AtomAny => TyExpr::Done(self.store.atom_any()),
            TyAst::Undef => TyExpr::Done(self.store.undef()),
            TyAst::IntLit(n) => TyExpr::Done(self.store.int(*n)),
            TyAst::CharLit(c) => TyExpr::Done(self.store.char(*c)),
            TyAst::StrLit(s) => TyExpr::Done(self.store.string(s)),
            TyAst::AtomLit(a) => TyExpr::Done(self.store.atom(a)),
            TyAst::Arrow(d, c) => TyExpr::Arrow(
                Box::new(self.to_tyexpr(d, refs)?),
                Box::new(self.to_tyexpr(c, refs)?),
            ),
            TyAst::Prod(l, r) => TyExpr::Product(
                Box::new(self.to_tyexpr(l, refs)?),
                Box::new(self.to_tyexpr(r, refs)?),
            ),
            TyAst::Record(fields, open) => {
                let mut fs = Vec::new();
                for (label, t, optional) in fields {
                    fs.push((label.clone(), self.to_tyexpr(t, refs)?, *optional));
                }
                TyExpr::Record(fs, *open)
            }
            TyAst::Or(a, b) => TyExpr::Union(
                Box::new(self.to_tyexpr(a, refs)?),
                Box::new(self.to_tyexpr(b, refs)?),
            ),
            TyAst::And(a, b) => TyExpr::Inter(
                Box::new(self.to_tyexpr(a, refs)?),
                Box::new(self.to_tyexpr(b, refs)?),
            ),
            // surface negation complements within the value universe `Any`;
            // the absence constant stays out of it
            TyAst::Not(a) => TyExpr::Diff(
                Box::new(TyExpr::Done(self.store.any())),
                Box::new(self.to_tyexpr(a, refs)?),
            ),
            TyAst::Where(main, bindings) => {
                // bind the local group recursively, then resolve the body
                let group: Vec<(String, TyAst)> = bindings.clone();
                let ids = self.resolve_where(&group)?;
                let mut inner = self.clone_with_names(&ids);
                return inner.to_tyexpr_owned(main, refs);
            }
        })
    }

    fn resolve_where(&self, group: &[(String, TyAst)]) -> Result<Vec<(String, TypeId)>, TypeError> {
        self.resolve_group(group)
    }

    fn clone_with_names(&self, extra: &[(String, TypeId)]) -> Parser<'a> {
        let mut names = self.names.clone();
        for (n, t) in extra {
            names.insert(n.clone(), *t);
        }
        Parser {
            toks: Vec::new(),
            pos: 0,
            store: self.store,
            names,
        }
    }

    fn to_tyexpr_owned(
        &mut self,
        ast: &TyAst,
        refs: &BTreeMap<String, usize>,
    ) -> Result<TyExpr, TypeError> {
        let this: &Parser<'a> = self;
        this.to_tyexpr(ast, refs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::{expr_equal, ExprKind};

    fn parse_one(src: &str) -> (TypeStore, Expr) {
        let store = TypeStore::new();
        let names = TypeNames::new();
        match parse_expr_or_decl(&store, &names, src).unwrap() {
            TopLevel::Expr(e) => (store, e),
            TopLevel::Decl(Decl::Let { expr, .. }) => (store, expr),
            _ => panic!("expected expression"),
        }
    }

    #[test]
    fn parses_annotated_lambda_with_typecase() {
        let (_s, e) = parse_one("fun (x : Int | Bool) -> if x is Int then incr x else lnot x");
        let ExprKind::Lambda { annot, body, .. } = &e.kind else {
            panic!()
        };
        assert!(matches!(annot, LambdaAnnot::Domain(_)));
        assert!(matches!(body.kind, ExprKind::TypeCase { .. }));
    }

    #[test]
    fn parses_field_test() {
        let (store, e) = parse_one("if x.nodeType is 9 then false else true");
        let ExprKind::TypeCase { scrut, test, .. } = &e.kind else {
            panic!()
        };
        assert!(matches!(&scrut.kind, ExprKind::FieldSel(_, l) if l == "nodeType"));
        assert!(store.equiv(*test, store.int(9)));
    }

    #[test]
    fn parses_pairs_and_projections() {
        let (_s, e) = parse_one("(x, x)");
        let ExprKind::Pair(a, b) = &e.kind else {
            panic!()
        };
        assert!(expr_equal(a, b));
        let (_s, e) = parse_one("fst p q");
        // `fst p q` applies `fst p` to `q`
        assert!(matches!(&e.kind, ExprKind::App(f, _) if matches!(f.kind, ExprKind::Proj(..))));
    }

    #[test]
    fn parses_record_expressions() {
        let (_s, e) = parse_one("{{} with a = 1}.a");
        assert!(matches!(&e.kind, ExprKind::FieldSel(inner, l)
            if l == "a" && matches!(inner.kind, ExprKind::FieldUpdate(..))));
        let (_s, e) = parse_one("{r without a}");
        assert!(matches!(&e.kind, ExprKind::FieldDel(_, l) if l == "a"));
    }

    #[test]
    fn multi_arrow_annotations() {
        let (s, e) = parse_one("fun (x : Int -> Int ; Any -> Bool) -> x");
        let ExprKind::Lambda {
            annot: LambdaAnnot::Arrows(arrows),
            ..
        } = &e.kind
        else {
            panic!()
        };
        assert_eq!(arrows.len(), 2);
        assert!(s.equiv(arrows[0].0, s.int_any()));
        // single explicit arrow via trailing semicolon
        let (s2, e2) = parse_one("fun (x : Int -> Int ;) -> x");
        let ExprKind::Lambda {
            annot: LambdaAnnot::Arrows(arrows),
            ..
        } = &e2.kind
        else {
            panic!()
        };
        assert_eq!(arrows.len(), 1);
        assert!(s2.equiv(arrows[0].1, s2.int_any()));
        // without the semicolon an arrow type is a plain domain
        let (_s3, e3) = parse_one("fun (x : Int -> Int) -> x");
        let ExprKind::Lambda { annot, .. } = &e3.kind else {
            panic!()
        };
        assert!(matches!(annot, LambdaAnnot::Domain(_)));
    }

    #[test]
    fn type_declarations_with_recursion() {
        let store = TypeStore::new();
        let names = TypeNames::new();
        let prog = parse_program(
            &store,
            &names,
            "type IntList = Nil | (Int, IntList)\nlet f = fun (x : IntList) -> x",
        )
        .unwrap();
        assert_eq!(prog.decls.len(), 2);
        let Decl::TypeGroup { bindings } = &prog.decls[0] else {
            panic!()
        };
        let list = bindings[0].1;
        let once = store.union(store.nil(), store.product(store.int_any(), list));
        assert!(store.equiv(list, once));
    }

    #[test]
    fn where_types() {
        let store = TypeStore::new();
        let t = parse_type(&store, &TypeNames::new(), "X where X = Nil | (Int, X)").unwrap();
        let once = store.union(store.nil(), store.product(store.int_any(), t));
        assert!(store.equiv(t, once));
    }

    #[test]
    fn precedence_of_connectives() {
        let store = TypeStore::new();
        let t = parse_type(&store, &TypeNames::new(), "Int | Bool -> Int").unwrap();
        // unions bind tighter than arrows
        let expect = store.arrow(
            store.union(store.int_any(), store.bool_ty()),
            store.int_any(),
        );
        assert!(store.equiv(t, expect));
        let n = parse_type(&store, &TypeNames::new(), "~Int | Bool").unwrap();
        let expect2 = store.union(store.diff(store.any(), store.int_any()), store.bool_ty());
        assert!(store.equiv(n, expect2));
    }
}
