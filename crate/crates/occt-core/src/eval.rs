//! Small-step call-by-value interpreter.
//!
//! Reduction is leftmost, one redex at a time.  Type-cases dispatch on the
//! most specific type of the scrutinee value.  `Stuck` is a result, not an
//! error: it is unreachable from well-typed closed programs and the
//! soundness suite checks exactly that.

use std::collections::BTreeMap;

use crate::syntax::ast::{Const, Expr, ExprKind, LambdaAnnot, ProjSide, Symbol};
use crate::types::{TypeId, TypeStore};

#[derive(Debug, Clone)]
pub enum StepResult {
    /// The expression is already a value.
    Value,
    /// One reduction step was performed.
    Stepped(Expr),
    /// No rule applies (ill-typed or open input).
    Stuck,
}

#[derive(Debug, Clone)]
pub enum EvalResult {
    Done(Expr),
    OutOfFuel(Expr),
    Stuck(Expr),
}

pub struct Evaluator<'s> {
    pub store: &'s TypeStore,
    pub builtins: BTreeMap<String, TypeId>,
}

impl<'s> Evaluator<'s> {
    pub fn new(store: &'s TypeStore, builtins: BTreeMap<String, TypeId>) -> Self {
        Evaluator { store, builtins }
    }

    /// Most specific type of a value.
    pub fn mst(&self, v: &Expr) -> TypeId {
        let store = self.store;
        match &v.kind {
            ExprKind::Const(Const::Int(n)) => store.int(*n),
            ExprKind::Const(Const::Atom(a)) => store.atom(a),
            ExprKind::Const(Const::Char(c)) => store.char(*c),
            ExprKind::Const(Const::Str(s)) => store.string(s),
            ExprKind::Lambda {
                annot, resolved, ..
            } => {
                let arrows: Vec<(TypeId, TypeId)> = match (resolved, annot) {
                    (Some(rs), _) => rs.clone(),
                    (None, LambdaAnnot::Arrows(ar)) => ar.clone(),
                    (None, LambdaAnnot::Domain(d)) => vec![(*d, store.any())],
                };
                store.inter_all(arrows.into_iter().map(|(d, c)| store.arrow(d, c)))
            }
            ExprKind::Builtin(name) => self
                .builtins
                .get(name)
                .copied()
                .unwrap_or_else(|| store.arrow_any()),
            ExprKind::Pair(a, b) => store.product(self.mst(a), self.mst(b)),
            ExprKind::Record(fields) => {
                let row = fields
                    .iter()
                    .map(|(l, e)| (store.label_id(l), self.mst(e)))
                    .collect();
                store.record_row(row, store.undef())
            }
            _ => store.empty(),
        }
    }

    /// Membership of a value in a type, decided through its most specific
    /// type.
    pub fn value_in_type(&self, v: &Expr, t: TypeId) -> bool {
        self.store.subtype(self.mst(v), t)
    }

    pub fn step(&self, e: &Expr) -> StepResult {
        if e.is_value() {
            return StepResult::Value;
        }
        let rebuild = |kind: ExprKind| Expr::new(kind, e.span, e.id);
        macro_rules! ctx {
            ($child:expr, $wrap:expr) => {
                match self.step($child) {
                    StepResult::Stepped(c) => return StepResult::Stepped(rebuild($wrap(c))),
                    StepResult::Stuck => return StepResult::Stuck,
                    StepResult::Value => {}
                }
            };
        }
        match &e.kind {
            ExprKind::App(f, a) => {
                if !f.is_value() {
                    ctx!(f, |c| ExprKind::App(Box::new(c), a.clone()));
                    unreachable!()
                }
                if !a.is_value() {
                    ctx!(a, |c| ExprKind::App(f.clone(), Box::new(c)));
                    unreachable!()
                }
                match &f.kind {
                    ExprKind::Lambda { param, body, .. } => {
                        StepResult::Stepped(subst(body, param, a))
                    }
                    ExprKind::Builtin(name) => self.delta(name, a),
                    _ => StepResult::Stuck,
                }
            }
            ExprKind::Proj(side, inner) => {
                if !inner.is_value() {
                    ctx!(inner, |c| ExprKind::Proj(*side, Box::new(c)));
                    unreachable!()
                }
                match &inner.kind {
                    ExprKind::Pair(l, r) => StepResult::Stepped(match side {
                        ProjSide::First => (**l).clone(),
                        ProjSide::Second => (**r).clone(),
                    }),
                    _ => StepResult::Stuck,
                }
            }
            ExprKind::Pair(l, r) => {
                if !l.is_value() {
                    ctx!(l, |c| ExprKind::Pair(Box::new(c), r.clone()));
                    unreachable!()
                }
                ctx!(r, |c| ExprKind::Pair(l.clone(), Box::new(c)));
                unreachable!()
            }
            ExprKind::TypeCase {
                scrut,
                test,
                then_branch,
                else_branch,
            } => {
                if !scrut.is_value() {
                    let test = *test;
                    let (tb, eb) = (then_branch.clone(), else_branch.clone());
                    ctx!(scrut, |c| ExprKind::TypeCase {
                        scrut: Box::new(c),
                        test,
                        then_branch: tb.clone(),
                        else_branch: eb.clone(),
                    });
                    unreachable!()
                }
                if self.value_in_type(scrut, *test) {
                    StepResult::Stepped((**then_branch).clone())
                } else {
                    StepResult::Stepped((**else_branch).clone())
                }
            }
            ExprKind::Record(fields) => {
                // fields evaluate left to right
                for (label, value) in fields {
                    if !value.is_value() {
                        return match self.step(value) {
                            StepResult::Stepped(c) => {
                                let mut fs = fields.clone();
                                fs.insert(label.clone(), c);
                                StepResult::Stepped(rebuild(ExprKind::Record(fs)))
                            }
                            StepResult::Stuck => StepResult::Stuck,
                            StepResult::Value => unreachable!(),
                        };
                    }
                }
                StepResult::Value
            }
            ExprKind::FieldUpdate(subject, label, value) => {
                if !subject.is_value() {
                    let (l, v) = (label.clone(), value.clone());
                    ctx!(subject, |c| ExprKind::FieldUpdate(
                        Box::new(c),
                        l.clone(),
                        v.clone()
                    ));
                    unreachable!()
                }
                if !value.is_value() {
                    let (s, l) = (subject.clone(), label.clone());
                    ctx!(value, |c| ExprKind::FieldUpdate(
                        s.clone(),
                        l.clone(),
                        Box::new(c)
                    ));
                    unreachable!()
                }
                match &subject.kind {
                    ExprKind::Record(fields) => {
                        let mut fs = fields.clone();
                        fs.insert(label.clone(), (**value).clone());
                        StepResult::Stepped(rebuild(ExprKind::Record(fs)))
                    }
                    _ => StepResult::Stuck,
                }
            }
            ExprKind::FieldDel(subject, label) => {
                if !subject.is_value() {
                    let l = label.clone();
                    ctx!(subject, |c| ExprKind::FieldDel(Box::new(c), l.clone()));
                    unreachable!()
                }
                match &subject.kind {
                    ExprKind::Record(fields) => {
                        let mut fs = fields.clone();
                        fs.remove(label);
                        StepResult::Stepped(rebuild(ExprKind::Record(fs)))
                    }
                    _ => StepResult::Stuck,
                }
            }
            ExprKind::FieldSel(subject, label) => {
                if !subject.is_value() {
                    let l = label.clone();
                    ctx!(subject, |c| ExprKind::FieldSel(Box::new(c), l.clone()));
                    unreachable!()
                }
                match &subject.kind {
                    ExprKind::Record(fields) => match fields.get(label) {
                        Some(v) => StepResult::Stepped(v.clone()),
                        None => StepResult::Stuck,
                    },
                    _ => StepResult::Stuck,
                }
            }
            ExprKind::Let { name, bound, body } => {
                if !bound.is_value() {
                    let (n, b) = (name.clone(), body.clone());
                    ctx!(bound, |c| ExprKind::Let {
                        name: n.clone(),
                        bound: Box::new(c),
                        body: b.clone(),
                    });
                    unreachable!()
                }
                StepResult::Stepped(subst(body, name, bound))
            }
            ExprKind::Var(_) => StepResult::Stuck,
            ExprKind::Const(_) | ExprKind::Lambda { .. } | ExprKind::Builtin(_) => {
                StepResult::Value
            }
        }
    }

    fn delta(&self, name: &str, arg: &Expr) -> StepResult {
        let span = arg.span;
        match (name, &arg.kind) {
            ("incr", ExprKind::Const(Const::Int(n))) => {
                StepResult::Stepped(Expr::new(ExprKind::Const(Const::Int(n + 1)), span, arg.id))
            }
            ("lnot", ExprKind::Const(Const::Atom(a))) if a == "true" => StepResult::Stepped(
                Expr::new(ExprKind::Const(Const::Atom("false".into())), span, arg.id),
            ),
            ("lnot", ExprKind::Const(Const::Atom(a))) if a == "false" => StepResult::Stepped(
                Expr::new(ExprKind::Const(Const::Atom("true".into())), span, arg.id),
            ),
            _ => StepResult::Stuck,
        }
    }

    /// Iterates [`Evaluator::step`] at most `fuel` times.
    pub fn eval(&self, e: Expr, fuel: u64) -> EvalResult {
        let mut cur = e;
        for _ in 0..fuel {
            match self.step(&cur) {
                StepResult::Value => return EvalResult::Done(cur),
                StepResult::Stuck => return EvalResult::Stuck(cur),
                StepResult::Stepped(next) => cur = next,
            }
        }
        if cur.is_value() {
            EvalResult::Done(cur)
        } else {
            EvalResult::OutOfFuel(cur)
        }
    }
}

/// Capture-free substitution of a closed value for a variable.
pub fn subst(e: &Expr, var: &Symbol, value: &Expr) -> Expr {
    let kind = match &e.kind {
        ExprKind::Var(x) if x == var => return value.clone(),
        ExprKind::Var(x) => ExprKind::Var(x.clone()),
        ExprKind::Const(c) => ExprKind::Const(c.clone()),
        ExprKind::Builtin(b) => ExprKind::Builtin(b.clone()),
        ExprKind::App(f, a) => ExprKind::App(
            Box::new(subst(f, var, value)),
            Box::new(subst(a, var, value)),
        ),
        ExprKind::Lambda {
            param,
            annot,
            body,
            resolved,
        } => {
            let body = if param == var {
                body.clone()
            } else {
                Box::new(subst(body, var, value))
            };
            ExprKind::Lambda {
                param: param.clone(),
                annot: annot.clone(),
                body,
                resolved: resolved.clone(),
            }
        }
        ExprKind::Proj(side, inner) => ExprKind::Proj(*side, Box::new(subst(inner, var, value))),
        ExprKind::Pair(l, r) => ExprKind::Pair(
            Box::new(subst(l, var, value)),
            Box::new(subst(r, var, value)),
        ),
        ExprKind::TypeCase {
            scrut,
            test,
            then_branch,
            else_branch,
        } => ExprKind::TypeCase {
            scrut: Box::new(subst(scrut, var, value)),
            test: *test,
            then_branch: Box::new(subst(then_branch, var, value)),
            else_branch: Box::new(subst(else_branch, var, value)),
        },
        ExprKind::Record(fields) => ExprKind::Record(
            fields
                .iter()
                .map(|(l, v)| (l.clone(), subst(v, var, value)))
                .collect(),
        ),
        ExprKind::FieldUpdate(s, l, v) => ExprKind::FieldUpdate(
            Box::new(subst(s, var, value)),
            l.clone(),
            Box::new(subst(v, var, value)),
        ),
        ExprKind::FieldDel(s, l) => ExprKind::FieldDel(Box::new(subst(s, var, value)), l.clone()),
        ExprKind::FieldSel(s, l) => ExprKind::FieldSel(Box::new(subst(s, var, value)), l.clone()),
        ExprKind::Let { name, bound, body } => {
            let body = if name == var {
                body.clone()
            } else {
                Box::new(subst(body, var, value))
            };
            ExprKind::Let {
                name: name.clone(),
                bound: Box::new(subst(bound, var, value)),
                body,
            }
        }
    };
    Expr::new(kind, e.span, e.id)
}
