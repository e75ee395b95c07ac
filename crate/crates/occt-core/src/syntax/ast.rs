//! Expressions, values and occurrence paths.
//!
//! An occurrence inside a tested expression is addressed by a [`Path`]: one
//! step per application side, pair side, projection argument or record
//! operation subject.  Paths never cross a lambda, a `let` or a nested
//! type-case, so occurrences contain no bound variables of the expression
//! they live in and plain structural comparison (alpha-insensitive on
//! lambdas) implements occurrence identity.

use std::collections::BTreeMap;

use crate::diag::Span;
use crate::types::TypeId;

pub type Symbol = String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjSide {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Const {
    Int(i64),
    Atom(Symbol),
    Char(char),
    Str(String),
}

/// Parameter annotation of a lambda.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaAnnot {
    /// `fun (x : T) -> e`: domain given, result type reconstructed.
    Domain(TypeId),
    /// `fun (x : T1 -> S1 ; T2 -> S2) -> e`: explicit arrow intersection.
    Arrows(Vec<(TypeId, TypeId)>),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    pub id: NodeId,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Const(Const),
    Var(Symbol),
    /// Primitive with a fixed type and a delta rule in the evaluator.
    Builtin(Symbol),
    App(Box<Expr>, Box<Expr>),
    Lambda {
        param: Symbol,
        annot: LambdaAnnot,
        body: Box<Expr>,
        /// Arrows this lambda was elaborated with after checking; used as
        /// its most specific type at run time.
        resolved: Option<Vec<(TypeId, TypeId)>>,
    },
    Proj(ProjSide, Box<Expr>),
    Pair(Box<Expr>, Box<Expr>),
    TypeCase {
        scrut: Box<Expr>,
        test: TypeId,
        then_branch: Box<Expr>,
        else_branch: Box<Expr>,
    },
    /// Record literal; the parser only produces the empty one, updates are
    /// explicit nodes, and the evaluator accumulates fields here.
    Record(BTreeMap<Symbol, Expr>),
    /// `{e with l = e'}`
    FieldUpdate(Box<Expr>, Symbol, Box<Expr>),
    /// `{e without l}`
    FieldDel(Box<Expr>, Symbol),
    /// `e.l`
    FieldSel(Box<Expr>, Symbol),
    Let {
        name: Symbol,
        bound: Box<Expr>,
        body: Box<Expr>,
    },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span, id: NodeId) -> Self {
        Expr { kind, span, id }
    }

    /// Depth of the syntax tree, used to pick the refinement budget.
    pub fn depth(&self) -> usize {
        1 + match &self.kind {
            ExprKind::Const(_) | ExprKind::Var(_) | ExprKind::Builtin(_) => 0,
            ExprKind::App(a, b) | ExprKind::Pair(a, b) => a.depth().max(b.depth()),
            ExprKind::Lambda { body, .. } => body.depth(),
            ExprKind::Proj(_, e) | ExprKind::FieldDel(e, _) | ExprKind::FieldSel(e, _) => e.depth(),
            ExprKind::TypeCase {
                scrut,
                then_branch,
                else_branch,
                ..
            } => scrut
                .depth()
                .max(then_branch.depth())
                .max(else_branch.depth()),
            ExprKind::Record(fields) => fields.values().map(|e| e.depth()).max().unwrap_or(0),
            ExprKind::FieldUpdate(a, _, b) => a.depth().max(b.depth()),
            ExprKind::Let { bound, body, .. } => bound.depth().max(body.depth()),
        }
    }

    pub fn is_value(&self) -> bool {
        match &self.kind {
            ExprKind::Const(_) | ExprKind::Lambda { .. } | ExprKind::Builtin(_) => true,
            ExprKind::Pair(a, b) => a.is_value() && b.is_value(),
            ExprKind::Record(fields) => fields.values().all(|e| e.is_value()),
            _ => false,
        }
    }
}

/// One step of an occurrence path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathStep {
    /// Function side of an application.
    Fun,
    /// Argument side of an application.
    Arg,
    /// Left component of a pair.
    PairL,
    /// Right component of a pair.
    PairR,
    /// Argument of a first projection.
    Fst,
    /// Argument of a second projection.
    Snd,
    /// Subject of a field selection `e.l`.
    Sel(Symbol),
    /// Subject of a field deletion `{e without l}`.
    Del(Symbol),
    /// Subject of a field update `{e with l = e'}`.
    UpdSubj(Symbol),
    /// New field value of a field update.
    UpdField(Symbol),
}

pub type Path = Vec<PathStep>;

/// The sub-expression of `e` addressed by `path`, when defined.  Paths do
/// not descend under lambdas, lets or nested type-cases.
pub fn occ<'a>(e: &'a Expr, path: &[PathStep]) -> Option<&'a Expr> {
    let Some((step, rest)) = path.split_first() else {
        return Some(e);
    };
    match (&e.kind, step) {
        (ExprKind::App(f, _), PathStep::Fun) => occ(f, rest),
        (ExprKind::App(_, a), PathStep::Arg) => occ(a, rest),
        (ExprKind::Pair(l, _), PathStep::PairL) => occ(l, rest),
        (ExprKind::Pair(_, r), PathStep::PairR) => occ(r, rest),
        (ExprKind::Proj(ProjSide::First, inner), PathStep::Fst) => occ(inner, rest),
        (ExprKind::Proj(ProjSide::Second, inner), PathStep::Snd) => occ(inner, rest),
        (ExprKind::FieldSel(inner, l), PathStep::Sel(l2)) if l == l2 => occ(inner, rest),
        (ExprKind::FieldDel(inner, l), PathStep::Del(l2)) if l == l2 => occ(inner, rest),
        (ExprKind::FieldUpdate(inner, l, _), PathStep::UpdSubj(l2)) if l == l2 => occ(inner, rest),
        (ExprKind::FieldUpdate(_, l, val), PathStep::UpdField(l2)) if l == l2 => occ(val, rest),
        _ => None,
    }
}

/// All valid paths of `e` paired with the sub-expression they reach.
pub fn sub_occurrences(e: &Expr) -> Vec<(Path, &Expr)> {
    fn ext(path: &Path, step: PathStep) -> Path {
        let mut p = path.clone();
        p.push(step);
        p
    }
    let mut out = Vec::new();
    let mut stack: Vec<(Path, &Expr)> = vec![(Vec::new(), e)];
    while let Some((path, cur)) = stack.pop() {
        match &cur.kind {
            ExprKind::App(f, a) => {
                stack.push((ext(&path, PathStep::Fun), f));
                stack.push((ext(&path, PathStep::Arg), a));
            }
            ExprKind::Pair(l, r) => {
                stack.push((ext(&path, PathStep::PairL), l));
                stack.push((ext(&path, PathStep::PairR), r));
            }
            ExprKind::Proj(side, inner) => {
                let step = match side {
                    ProjSide::First => PathStep::Fst,
                    ProjSide::Second => PathStep::Snd,
                };
                stack.push((ext(&path, step), inner));
            }
            ExprKind::FieldSel(inner, l) => {
                stack.push((ext(&path, PathStep::Sel(l.clone())), inner));
            }
            ExprKind::FieldDel(inner, l) => {
                stack.push((ext(&path, PathStep::Del(l.clone())), inner));
            }
            ExprKind::FieldUpdate(inner, l, val) => {
                stack.push((ext(&path, PathStep::UpdSubj(l.clone())), inner));
                stack.push((ext(&path, PathStep::UpdField(l.clone())), val));
            }
            // no path letters descend into these
            ExprKind::Const(_)
            | ExprKind::Var(_)
            | ExprKind::Builtin(_)
            | ExprKind::Lambda { .. }
            | ExprKind::TypeCase { .. }
            | ExprKind::Record(_)
            | ExprKind::Let { .. } => {}
        }
        out.push((path, cur));
    }
    out
}

/// Structural equality, alpha-insensitive on lambda and let binders.
pub fn expr_equal(a: &Expr, b: &Expr) -> bool {
    fn go(a: &Expr, b: &Expr, scope: &mut Vec<(Symbol, Symbol)>) -> bool {
        match (&a.kind, &b.kind) {
            (ExprKind::Const(x), ExprKind::Const(y)) => x == y,
            (ExprKind::Var(x), ExprKind::Var(y)) => {
                for (bx, by) in scope.iter().rev() {
                    let hit_x = bx == x;
                    let hit_y = by == y;
                    if hit_x || hit_y {
                        return hit_x && hit_y;
                    }
                }
                x == y
            }
            (ExprKind::Builtin(x), ExprKind::Builtin(y)) => x == y,
            (ExprKind::App(f1, a1), ExprKind::App(f2, a2)) => {
                go(f1, f2, scope) && go(a1, a2, scope)
            }
            (
                ExprKind::Lambda {
                    param: p1,
                    annot: a1,
                    body: b1,
                    ..
                },
                ExprKind::Lambda {
                    param: p2,
                    annot: a2,
                    body: b2,
                    ..
                },
            ) => {
                if a1 != a2 {
                    return false;
                }
                scope.push((p1.clone(), p2.clone()));
                let r = go(b1, b2, scope);
                scope.pop();
                r
            }
            (ExprKind::Proj(s1, e1), ExprKind::Proj(s2, e2)) => s1 == s2 && go(e1, e2, scope),
            (ExprKind::Pair(l1, r1), ExprKind::Pair(l2, r2)) => {
                go(l1, l2, scope) && go(r1, r2, scope)
            }
            (
                ExprKind::TypeCase {
                    scrut: s1,
                    test: t1,
                    then_branch: th1,
                    else_branch: e1,
                },
                ExprKind::TypeCase {
                    scrut: s2,
                    test: t2,
                    then_branch: th2,
                    else_branch: e2,
                },
            ) => t1 == t2 && go(s1, s2, scope) && go(th1, th2, scope) && go(e1, e2, scope),
            (ExprKind::Record(f1), ExprKind::Record(f2)) => {
                f1.len() == f2.len()
                    && f1
                        .iter()
                        .zip(f2.iter())
                        .all(|((l1, e1), (l2, e2))| l1 == l2 && go(e1, e2, scope))
            }
            (ExprKind::FieldUpdate(e1, l1, v1), ExprKind::FieldUpdate(e2, l2, v2)) => {
                l1 == l2 && go(e1, e2, scope) && go(v1, v2, scope)
            }
            (ExprKind::FieldDel(e1, l1), ExprKind::FieldDel(e2, l2)) => {
                l1 == l2 && go(e1, e2, scope)
            }
            (ExprKind::FieldSel(e1, l1), ExprKind::FieldSel(e2, l2)) => {
                l1 == l2 && go(e1, e2, scope)
            }
            (
                ExprKind::Let {
                    name: n1,
                    bound: b1,
                    body: e1,
                },
                ExprKind::Let {
                    name: n2,
                    bound: b2,
                    body: e2,
                },
            ) => {
                if !go(b1, b2, scope) {
                    return false;
                }
                scope.push((n1.clone(), n2.clone()));
                let r = go(e1, e2, scope);
                scope.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Span;

    fn ex(kind: ExprKind) -> Expr {
        Expr::new(kind, Span::default(), NodeId(0))
    }

    fn var(n: &str) -> Expr {
        ex(ExprKind::Var(n.into()))
    }

    #[test]
    fn occ_addresses_application_sides() {
        let e = ex(ExprKind::App(Box::new(var("x1")), Box::new(var("x2"))));
        assert!(matches!(
            &occ(&e, &[PathStep::Fun]).unwrap().kind,
            ExprKind::Var(v) if v == "x1"
        ));
        assert!(matches!(
            &occ(&e, &[PathStep::Arg]).unwrap().kind,
            ExprKind::Var(v) if v == "x2"
        ));
        assert!(occ(&e, &[PathStep::PairL]).is_none());
    }

    #[test]
    fn occ_addresses_pairs_and_projections() {
        let pair = ex(ExprKind::Pair(Box::new(var("a")), Box::new(var("b"))));
        assert!(matches!(
            &occ(&pair, &[PathStep::PairR]).unwrap().kind,
            ExprKind::Var(v) if v == "b"
        ));
        let p = ex(ExprKind::Proj(ProjSide::First, Box::new(var("e"))));
        assert!(matches!(
            &occ(&p, &[PathStep::Fst]).unwrap().kind,
            ExprKind::Var(v) if v == "e"
        ));
    }

    #[test]
    fn sub_occurrences_group_repeats() {
        let e = ex(ExprKind::Pair(Box::new(var("x")), Box::new(var("x"))));
        let occs = sub_occurrences(&e);
        assert_eq!(occs.len(), 3);
        assert!(occs.iter().any(|(p, _)| p.is_empty()));
        let xs: Vec<_> = occs
            .iter()
            .filter(|(_, sub)| matches!(&sub.kind, ExprKind::Var(v) if v == "x"))
            .collect();
        assert_eq!(xs.len(), 2);
    }

    #[test]
    fn sub_occurrences_of_constants() {
        let e = ex(ExprKind::Const(Const::Int(1)));
        assert_eq!(sub_occurrences(&e).len(), 1);
    }

    #[test]
    fn prefix_closure() {
        let e = ex(ExprKind::App(
            Box::new(ex(ExprKind::App(Box::new(var("f")), Box::new(var("x"))))),
            Box::new(var("y")),
        ));
        for (path, _) in sub_occurrences(&e) {
            for cut in 0..path.len() {
                assert!(occ(&e, &path[..cut]).is_some());
            }
        }
    }

    #[test]
    fn alpha_insensitive_equality() {
        let s = crate::types::TypeStore::new();
        let lam = |p: &str, body: Expr| {
            ex(ExprKind::Lambda {
                param: p.into(),
                annot: LambdaAnnot::Domain(s.int_any()),
                body: Box::new(body),
                resolved: None,
            })
        };
        assert!(expr_equal(&lam("x", var("x")), &lam("y", var("y"))));
        assert!(!expr_equal(&lam("x", var("z")), &lam("y", var("y"))));
        let fx = ex(ExprKind::App(Box::new(var("f")), Box::new(var("x"))));
        let fx2 = ex(ExprKind::App(Box::new(var("f")), Box::new(var("x"))));
        let fy = ex(ExprKind::App(Box::new(var("f")), Box::new(var("y"))));
        assert!(expr_equal(&fx, &fx2));
        assert!(!expr_equal(&fx, &fy));
    }
}
