//! Canonical rendering of types back into the surface syntax.
//!
//! Types print from their normal form, union of per-kind pieces.  When the
//! complement of a type prints shorter (negations push whole kinds into the
//! output) the printer falls back to `~(...)`.  Recursive types print as
//! `T where X = ... and X1 = ...`.  The output re-parses to an equivalent
//! type.

use std::collections::HashMap;

use crate::types::{RecordAtom, SetMod, Summand, TypeDesc, TypeId, TypeStore};

use super::ast::{Const, Expr, ExprKind};

const LVL_ARROW: u8 = 0;
const LVL_OR: u8 = 1;
const LVL_AND: u8 = 2;
const LVL_NEG: u8 = 3;
const LVL_ATOM: u8 = 4;

#[derive(Clone)]
struct Piece {
    s: String,
    level: u8,
}

impl Piece {
    fn atom(s: impl Into<String>) -> Piece {
        Piece {
            s: s.into(),
            level: LVL_ATOM,
        }
    }

    fn at(&self, required: u8) -> String {
        if self.level < required {
            format!("({})", self.s)
        } else {
            self.s.clone()
        }
    }
}

fn join_or(pieces: Vec<Piece>) -> Piece {
    match pieces.len() {
        0 => Piece::atom("Empty"),
        1 => pieces.into_iter().next().unwrap(),
        _ => Piece {
            s: pieces
                .iter()
                .map(|p| p.at(LVL_OR))
                .collect::<Vec<_>>()
                .join(" | "),
            level: LVL_OR,
        },
    }
}

fn join_and(pieces: Vec<Piece>) -> Piece {
    match pieces.len() {
        0 => Piece::atom("Any"),
        1 => pieces.into_iter().next().unwrap(),
        _ => Piece {
            s: pieces
                .iter()
                .map(|p| p.at(LVL_AND))
                .collect::<Vec<_>>()
                .join(" & "),
            level: LVL_AND,
        },
    }
}

fn negate(p: Piece) -> Piece {
    Piece {
        s: format!("~{}", p.at(LVL_NEG)),
        level: LVL_NEG,
    }
}

struct Printer<'a> {
    store: &'a TypeStore,
    names: HashMap<TypeId, String>,
}

/// Renders `t` in the surface type syntax.
pub fn pretty_type(store: &TypeStore, t: TypeId) -> String {
    let mut names = HashMap::new();
    let mut order = Vec::new();
    find_cycles(store, t, &mut names, &mut order);
    let p = Printer { store, names };
    let main = p.render(t).s;
    if order.is_empty() {
        return main;
    }
    let defs: Vec<String> = order
        .iter()
        .map(|id| format!("{} = {}", p.names[id], p.render_definition(*id).s))
        .collect();
    format!("{} where {}", main, defs.join(" and "))
}

fn find_cycles(
    store: &TypeStore,
    root: TypeId,
    names: &mut HashMap<TypeId, String>,
    order: &mut Vec<TypeId>,
) {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        Active,
        Done,
    }
    fn children(store: &TypeStore, t: TypeId) -> Vec<TypeId> {
        let d = store.desc(t);
        let mut out = Vec::new();
        let mut from_sop = |sop: &crate::types::Sop, f: &dyn Fn(u32) -> Vec<TypeId>| {
            for s in &sop.summands {
                for &a in s.pos.iter().chain(s.neg.iter()) {
                    out.extend(f(a));
                }
            }
        };
        from_sop(&d.arrows, &|i| {
            let a = store.arrow_atom(i);
            vec![a.dom, a.cod]
        });
        from_sop(&d.products, &|i| {
            let a = store.product_atom(i);
            vec![a.left, a.right]
        });
        from_sop(&d.records, &|i| {
            let r = store.record_atom(i);
            let mut v: Vec<TypeId> = r.fields.values().copied().collect();
            v.push(r.default);
            v
        });
        out
    }
    fn dfs(
        store: &TypeStore,
        t: TypeId,
        colors: &mut HashMap<TypeId, Color>,
        names: &mut HashMap<TypeId, String>,
        order: &mut Vec<TypeId>,
    ) {
        match colors.get(&t) {
            Some(Color::Active) => {
                if !names.contains_key(&t) {
                    let name = if order.is_empty() {
                        "X".to_string()
                    } else {
                        format!("X{}", order.len())
                    };
                    names.insert(t, name);
                    order.push(t);
                }
                return;
            }
            Some(Color::Done) => return,
            None => {}
        }
        colors.insert(t, Color::Active);
        for c in children(store, t) {
            dfs(store, c, colors, names, order);
        }
        colors.insert(t, Color::Done);
    }
    let mut colors = HashMap::new();
    dfs(store, root, &mut colors, names, order);
}

impl<'a> Printer<'a> {
    fn render(&self, t: TypeId) -> Piece {
        if let Some(n) = self.names.get(&t) {
            return Piece::atom(n.clone());
        }
        self.render_definition(t)
    }

    fn render_definition(&self, t: TypeId) -> Piece {
        let store = self.store;
        if store.is_empty(t) {
            return Piece::atom("Empty");
        }
        if store.equiv(t, store.any()) {
            return Piece::atom("Any");
        }
        let value_part = store.inter(t, store.any());
        let has_undef = store.desc(t).undef;
        let direct = self.render_value_desc(&store.desc(value_part));
        // a complement may be much smaller, e.g. `~true`
        let best = if store.equiv(value_part, store.any()) {
            Piece::atom("Any")
        } else {
            let compl = store.diff(store.any(), value_part);
            let alt = negate(self.render_value_desc(&store.desc(compl)));
            if alt.s.len() < direct.s.len() {
                alt
            } else {
                direct
            }
        };
        if has_undef {
            join_or(vec![best, Piece::atom("Undef")])
        } else {
            best
        }
    }

    /// Direct rendering of the value kinds of a descriptor, no tricks.
    fn render_value_desc(&self, d: &TypeDesc) -> Piece {
        let store = self.store;
        let mut pieces: Vec<Piece> = Vec::new();
        match &d.ints {
            SetMod::Finite(xs) => {
                pieces.extend(xs.iter().map(|n| Piece::atom(n.to_string())));
            }
            SetMod::Cofinite(xs) if xs.is_empty() => pieces.push(Piece::atom("Int")),
            SetMod::Cofinite(xs) => {
                let lits = join_or(xs.iter().map(|n| Piece::atom(n.to_string())).collect());
                pieces.push(join_and(vec![Piece::atom("Int"), negate(lits)]));
            }
        }
        match &d.chars {
            SetMod::Finite(xs) => {
                pieces.extend(xs.iter().map(|c| Piece::atom(format!("'{c}'"))));
            }
            SetMod::Cofinite(xs) if xs.is_empty() => pieces.push(Piece::atom("Char")),
            SetMod::Cofinite(xs) => {
                let lits = join_or(xs.iter().map(|c| Piece::atom(format!("'{c}'"))).collect());
                pieces.push(join_and(vec![Piece::atom("Char"), negate(lits)]));
            }
        }
        match &d.strings {
            SetMod::Finite(xs) => {
                pieces.extend(xs.iter().map(|s| Piece::atom(format!("\"{s}\""))));
            }
            SetMod::Cofinite(xs) if xs.is_empty() => pieces.push(Piece::atom("String")),
            SetMod::Cofinite(xs) => {
                let lits = join_or(xs.iter().map(|s| Piece::atom(format!("\"{s}\""))).collect());
                pieces.push(join_and(vec![Piece::atom("String"), negate(lits)]));
            }
        }
        match &d.atoms {
            SetMod::Finite(xs) => {
                let names: Vec<String> = xs.iter().map(|&a| store.atom_name(a)).collect();
                let mut rest: Vec<&String> = names.iter().collect();
                if names.iter().any(|n| n == "true") && names.iter().any(|n| n == "false") {
                    pieces.push(Piece::atom("Bool"));
                    rest.retain(|n| *n != "true" && *n != "false");
                }
                pieces.extend(rest.into_iter().map(|n| Piece::atom(n.clone())));
            }
            SetMod::Cofinite(xs) if xs.is_empty() => pieces.push(Piece::atom("Atom")),
            SetMod::Cofinite(xs) => {
                let lits = join_or(
                    xs.iter()
                        .map(|&a| Piece::atom(store.atom_name(a)))
                        .collect(),
                );
                pieces.push(join_and(vec![Piece::atom("Atom"), negate(lits)]));
            }
        }
        for s in &d.arrows.summands {
            if !self.arrow_summand_inhabited(s) {
                continue;
            }
            let mut conj: Vec<Piece> = Vec::new();
            if s.pos.is_empty() {
                conj.push(self.arrow_piece(store.empty(), store.any()));
            }
            for &i in &s.pos {
                let a = store.arrow_atom(i);
                conj.push(self.arrow_piece(a.dom, a.cod));
            }
            for &i in &s.neg {
                let a = store.arrow_atom(i);
                conj.push(negate(self.arrow_piece(a.dom, a.cod)));
            }
            pieces.push(join_and(conj));
        }
        for s in &d.products.summands {
            let mut conj: Vec<Piece> = Vec::new();
            if s.pos.is_empty() {
                conj.push(Piece::atom(format!(
                    "({}, {})",
                    self.render(store.any()).s,
                    self.render(store.any()).s
                )));
            }
            for &i in &s.pos {
                let a = store.product_atom(i);
                conj.push(Piece::atom(format!(
                    "({}, {})",
                    self.render(a.left).s,
                    self.render(a.right).s
                )));
            }
            for &i in &s.neg {
                let a = store.product_atom(i);
                conj.push(negate(Piece::atom(format!(
                    "({}, {})",
                    self.render(a.left).s,
                    self.render(a.right).s
                ))));
            }
            let piece = join_and(conj);
            if !self.summand_inhabited_product(s) {
                continue;
            }
            pieces.push(piece);
        }
        for s in &d.records.summands {
            if !self.summand_inhabited_record(s) {
                continue;
            }
            let mut conj: Vec<Piece> = Vec::new();
            if s.pos.is_empty() {
                conj.push(Piece::atom("{ .. }"));
            }
            for &i in &s.pos {
                conj.push(self.record_piece(&store.record_atom(i)));
            }
            for &i in &s.neg {
                conj.push(negate(self.record_piece(&store.record_atom(i))));
            }
            pieces.push(join_and(conj));
        }
        join_or(pieces)
    }

    fn arrow_piece(&self, dom: TypeId, cod: TypeId) -> Piece {
        let d = self.render(dom);
        let c = self.render(cod);
        Piece {
            s: format!("{} -> {}", d.at(LVL_OR), c.at(LVL_ARROW)),
            level: LVL_ARROW,
        }
    }

    fn record_piece(&self, row: &RecordAtom) -> Piece {
        let store = self.store;
        let open = !store.is_empty(store.diff(row.default, store.undef()));
        let mut parts = Vec::new();
        for (label, ty) in &row.fields {
            let name = store.label_name(*label);
            let optional = !store.is_empty(store.inter(*ty, store.undef()));
            if optional {
                let inner = store.diff(*ty, store.undef());
                parts.push(format!("{} =? {}", name, self.render(inner).at(LVL_OR)));
            } else {
                parts.push(format!("{} = {}", name, self.render(*ty).at(LVL_OR)));
            }
        }
        let body = parts.join(", ");
        let s = match (parts.is_empty(), open) {
            (true, true) => "{ .. }".to_string(),
            (true, false) => "{}".to_string(),
            (false, true) => format!("{{{} ..}}", body),
            (false, false) => format!("{{{}}}", body),
        };
        Piece::atom(s)
    }

    fn arrow_summand_inhabited(&self, s: &Summand) -> bool {
        let store = self.store;
        let mut t = store.arrow_any();
        for &i in &s.pos {
            let a = store.arrow_atom(i);
            t = store.inter(t, store.arrow(a.dom, a.cod));
        }
        for &i in &s.neg {
            let a = store.arrow_atom(i);
            t = store.diff(t, store.arrow(a.dom, a.cod));
        }
        !store.is_empty(t)
    }

    fn summand_inhabited_product(&self, s: &Summand) -> bool {
        let store = self.store;
        let mut t = store.product_any();
        for &i in &s.pos {
            let a = store.product_atom(i);
            t = store.inter(t, store.product(a.left, a.right));
        }
        for &i in &s.neg {
            let a = store.product_atom(i);
            t = store.diff(t, store.product(a.left, a.right));
        }
        !store.is_empty(t)
    }

    fn summand_inhabited_record(&self, s: &Summand) -> bool {
        let store = self.store;
        let mut t = store.record_any();
        for &i in &s.pos {
            let r = store.record_atom(i);
            t = store.inter(t, store.record_row(r.fields.clone(), r.default));
        }
        for &i in &s.neg {
            let r = store.record_atom(i);
            t = store.diff(t, store.record_row(r.fields.clone(), r.default));
        }
        !store.is_empty(t)
    }
}

/// Rendering of expressions in the concrete syntax; `parse` of the output
/// gives back the same tree up to spans and identifiers.
pub fn pretty_expr(store: &TypeStore, e: &Expr) -> String {
    expr_prec(store, e, 0)
}

// precedence: 0 body-level, 1 application operand, 2 postfix subject
fn expr_prec(store: &TypeStore, e: &Expr, prec: u8) -> String {
    let wrap = |needed: u8, s: String| if prec > needed { format!("({s})") } else { s };
    match &e.kind {
        ExprKind::Const(Const::Int(n)) => n.to_string(),
        ExprKind::Const(Const::Atom(a)) => a.clone(),
        ExprKind::Const(Const::Char(c)) => format!("'{c}'"),
        ExprKind::Const(Const::Str(s)) => format!("\"{s}\""),
        ExprKind::Var(x) => x.clone(),
        ExprKind::Builtin(b) => b.clone(),
        ExprKind::App(f, a) => wrap(
            1,
            format!("{} {}", expr_prec(store, f, 1), expr_prec(store, a, 2)),
        ),
        ExprKind::Lambda { param, annot, body, .. } => {
            let annot = match annot {
                super::ast::LambdaAnnot::Domain(t) => pretty_type(store, *t),
                super::ast::LambdaAnnot::Arrows(arrows) => {
                    let segs: Vec<String> = arrows
                        .iter()
                        .map(|(d, c)| {
                            format!("{} -> {}", pretty_type(store, *d), pretty_type(store, *c))
                        })
                        .collect();
                    format!("{} ;", segs.join(" ; "))
                }
            };
            wrap(0, format!("fun ({param} : {annot}) -> {}", expr_prec(store, body, 0)))
        }
        ExprKind::Proj(side, inner) => {
            let kw = match side {
                super::ast::ProjSide::First => "fst",
                super::ast::ProjSide::Second => "snd",
            };
            wrap(1, format!("{kw} {}", expr_prec(store, inner, 2)))
        }
        ExprKind::Pair(l, r) => {
            format!("({}, {})", expr_prec(store, l, 0), expr_prec(store, r, 0))
        }
        ExprKind::TypeCase { scrut, test, then_branch, else_branch } => wrap(
            0,
            format!(
                "if {} is {} then {} else {}",
                expr_prec(store, scrut, 1),
                pretty_type(store, *test),
                expr_prec(store, then_branch, 0),
                expr_prec(store, else_branch, 0)
            ),
        ),
        ExprKind::Record(fields) if fields.is_empty() => "{}".to_string(),
        ExprKind::Record(fields) => {
            // fold a record value back into updates of the empty record
            let mut out = "{}".to_string();
            for (l, v) in fields {
                out = format!("{{{out} with {l} = {}}}", expr_prec(store, v, 0));
            }
            out
        }
        ExprKind::FieldUpdate(subject, l, v) => format!(
            "{{{} with {l} = {}}}",
            expr_prec(store, subject, 0),
            expr_prec(store, v, 0)
        ),
        ExprKind::FieldDel(subject, l) => {
            format!("{{{} without {l}}}", expr_prec(store, subject, 0))
        }
        ExprKind::FieldSel(subject, l) => {
            format!("{}.{l}", expr_prec(store, subject, 2))
        }
        ExprKind::Let { name, bound, body } => wrap(
            0,
            format!(
                "let {name} = {} in {}",
                expr_prec(store, bound, 1),
                expr_prec(store, body, 0)
            ),
        ),
    }
}

/// Rendering of values for the interactive loop.
pub fn pretty_value(store: &TypeStore, v: &Expr) -> String {
    match &v.kind {
        ExprKind::Const(Const::Int(n)) => n.to_string(),
        ExprKind::Const(Const::Atom(a)) => a.clone(),
        ExprKind::Const(Const::Char(c)) => format!("'{c}'"),
        ExprKind::Const(Const::Str(s)) => format!("\"{s}\""),
        ExprKind::Pair(a, b) => {
            format!("({}, {})", pretty_value(store, a), pretty_value(store, b))
        }
        ExprKind::Record(fields) => {
            let parts: Vec<String> = fields
                .iter()
                .map(|(l, e)| format!("{} = {}", l, pretty_value(store, e)))
                .collect();
            format!("{{{}}}", parts.join(", "))
        }
        ExprKind::Lambda { .. } => "<fun>".to_string(),
        ExprKind::Builtin(name) => format!("<builtin {name}>"),
        _ => "<expr>".to_string(),
    }
}
