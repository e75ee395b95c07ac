//! Top-level sessions: named type declarations, checked bindings, reports.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::builtins::default_builtins;
use crate::checker::{CheckConfig, Checker, TypeEnv};
use crate::diag::{Severity, TypeError};
use crate::eval::{EvalResult, Evaluator};
use crate::infer::simplify_arrows;
use crate::syntax::ast::{Expr, ExprKind, Symbol};
use crate::syntax::parser::{parse_program, Decl, TypeNames};
use crate::syntax::pretty::pretty_type;
use crate::types::{TypeId, TypeStore};

#[derive(Debug, Clone)]
pub struct Global {
    pub name: String,
    pub ty: TypeId,
    /// Elaborated, fully closed definition (globals and builtins already
    /// substituted); used when evaluating later expressions.
    pub value: Expr,
}

/// Accumulated top-level state: type names, builtins and checked bindings.
pub struct Session {
    pub store: TypeStore,
    pub type_names: TypeNames,
    pub cfg: CheckConfig,
    pub fuel: u64,
    pub builtins: BTreeMap<String, TypeId>,
    pub globals: Vec<Global>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeclReport {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: Option<String>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
#[serde(transparent)]
pub struct Report {
    pub decls: Vec<DeclReport>,
}

impl Report {
    pub fn has_errors(&self) -> bool {
        self.decls.iter().any(|d| !d.errors.is_empty())
    }

    pub fn has_warnings(&self) -> bool {
        self.decls.iter().any(|d| !d.warnings.is_empty())
    }

    /// Plain-text rendering: one `name : type` line per binding followed by
    /// its diagnostics.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for d in &self.decls {
            if let Some(ty) = &d.ty {
                out.push_str(&format!("{} : {}\n", d.name, ty));
            }
            for w in &d.warnings {
                out.push_str(&format!("{w}\n"));
            }
            for e in &d.errors {
                out.push_str(&format!("{e}\n"));
            }
        }
        out
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

impl Session {
    pub fn new(cfg: CheckConfig) -> Self {
        let store = TypeStore::new();
        let builtins = default_builtins(&store);
        Session {
            store,
            type_names: TypeNames::new(),
            cfg,
            fuel: 10_000,
            builtins,
            globals: Vec::new(),
        }
    }

    pub fn add_builtins(&mut self, map: BTreeMap<String, TypeId>) {
        self.builtins.extend(map);
    }

    /// Typing environment seen by a new declaration: builtins first, then
    /// every earlier binding.
    pub fn env(&self) -> TypeEnv {
        let mut env = TypeEnv::new();
        for (name, t) in &self.builtins {
            env.bind_var(name, *t);
        }
        for g in &self.globals {
            env.bind_var(&g.name, g.ty);
        }
        env
    }

    pub fn checker(&self) -> Checker<'_> {
        Checker::new(&self.store, self.cfg.clone(), self.builtins.clone())
    }

    /// Parses and checks a whole source file, accumulating its declarations.
    pub fn check_source(&mut self, src: &str) -> Report {
        let mut report = Report::default();
        let program = match parse_program(&self.store, &self.type_names, src) {
            Ok(p) => p,
            Err(e) => {
                report.decls.push(DeclReport {
                    name: "<syntax>".into(),
                    ty: None,
                    warnings: Vec::new(),
                    errors: vec![e.to_string()],
                });
                return report;
            }
        };
        for decl in program.decls {
            match decl {
                Decl::TypeGroup { bindings } => {
                    for (name, t) in bindings {
                        self.type_names.insert(name, t);
                    }
                }
                Decl::Let { name, expr, .. } => {
                    report.decls.push(self.check_binding(&name, &expr));
                }
            }
        }
        report
    }

    /// Checks one binding and installs it on success.
    pub fn check_binding(&mut self, name: &str, expr: &Expr) -> DeclReport {
        let checker = self.checker();
        let env = self.env();
        let result = checker.type_of(&env, expr);
        let diags = checker.take_diags();
        let warnings = diags
            .iter()
            .filter(|d| d.severity == Severity::Warning)
            .map(|d| d.to_string())
            .collect();
        match result {
            Ok(ty) => {
                let ty = simplify_arrows(&self.store, ty);
                let elaborated = elaborate(expr, &checker.lambda_types.borrow());
                let value = self.close_expr(&elaborated);
                self.globals.push(Global {
                    name: name.to_string(),
                    ty,
                    value,
                });
                DeclReport {
                    name: name.to_string(),
                    ty: Some(pretty_type(&self.store, ty)),
                    warnings,
                    errors: Vec::new(),
                }
            }
            Err(e) => DeclReport {
                name: name.to_string(),
                ty: None,
                warnings,
                errors: vec![e.to_string()],
            },
        }
    }

    /// Type of an expression under the current session bindings.
    pub fn type_check(&self, expr: &Expr) -> (Result<TypeId, TypeError>, Vec<String>) {
        let checker = self.checker();
        let env = self.env();
        let r = checker.type_of(&env, expr);
        let warnings = checker.take_diags().iter().map(|d| d.to_string()).collect();
        (r.map(|t| simplify_arrows(&self.store, t)), warnings)
    }

    /// Evaluates `expr` with session globals substituted in.
    pub fn eval(&self, expr: &Expr) -> EvalResult {
        let checker = self.checker();
        let env = self.env();
        let _ = checker.type_of(&env, expr);
        let elaborated = elaborate(expr, &checker.lambda_types.borrow());
        let closed = self.close_expr(&elaborated);
        let ev = Evaluator::new(&self.store, self.builtins.clone());
        ev.eval(closed, self.fuel)
    }

    /// Substitutes global bindings and builtin references for free
    /// variables, producing a closed expression.
    pub fn close_expr(&self, e: &Expr) -> Expr {
        let mut bound = Vec::new();
        self.close_rec(e, &mut bound)
    }

    fn close_rec(&self, e: &Expr, bound: &mut Vec<Symbol>) -> Expr {
        let kind = match &e.kind {
            ExprKind::Var(x) if !bound.contains(x) => {
                if let Some(g) = self.globals.iter().rev().find(|g| g.name == *x) {
                    return g.value.clone();
                }
                if self.builtins.contains_key(x) {
                    ExprKind::Builtin(x.clone())
                } else {
                    ExprKind::Var(x.clone())
                }
            }
            ExprKind::Var(x) => ExprKind::Var(x.clone()),
            ExprKind::Const(c) => ExprKind::Const(c.clone()),
            ExprKind::Builtin(b) => ExprKind::Builtin(b.clone()),
            ExprKind::App(f, a) => ExprKind::App(
                Box::new(self.close_rec(f, bound)),
                Box::new(self.close_rec(a, bound)),
            ),
            ExprKind::Lambda {
                param,
                annot,
                body,
                resolved,
            } => {
                bound.push(param.clone());
                let body = Box::new(self.close_rec(body, bound));
                bound.pop();
                ExprKind::Lambda {
                    param: param.clone(),
                    annot: annot.clone(),
                    body,
                    resolved: resolved.clone(),
                }
            }
            ExprKind::Proj(side, inner) => {
                ExprKind::Proj(*side, Box::new(self.close_rec(inner, bound)))
            }
            ExprKind::Pair(l, r) => ExprKind::Pair(
                Box::new(self.close_rec(l, bound)),
                Box::new(self.close_rec(r, bound)),
            ),
            ExprKind::TypeCase {
                scrut,
                test,
                then_branch,
                else_branch,
            } => ExprKind::TypeCase {
                scrut: Box::new(self.close_rec(scrut, bound)),
                test: *test,
                then_branch: Box::new(self.close_rec(then_branch, bound)),
                else_branch: Box::new(self.close_rec(else_branch, bound)),
            },
            ExprKind::Record(fields) => ExprKind::Record(
                fields
                    .iter()
                    .map(|(l, v)| (l.clone(), self.close_rec(v, bound)))
                    .collect(),
            ),
            ExprKind::FieldUpdate(s, l, v) => ExprKind::FieldUpdate(
                Box::new(self.close_rec(s, bound)),
                l.clone(),
                Box::new(self.close_rec(v, bound)),
            ),
            ExprKind::FieldDel(s, l) => {
                ExprKind::FieldDel(Box::new(self.close_rec(s, bound)), l.clone())
            }
            ExprKind::FieldSel(s, l) => {
                ExprKind::FieldSel(Box::new(self.close_rec(s, bound)), l.clone())
            }
            ExprKind::Let {
                name,
                bound: b,
                body,
            } => {
                let b2 = Box::new(self.close_rec(b, bound));
                bound.push(name.clone());
                let body = Box::new(self.close_rec(body, bound));
                bound.pop();
                ExprKind::Let {
                    name: name.clone(),
                    bound: b2,
                    body,
                }
            }
        };
        Expr::new(kind, e.span, e.id)
    }
}

/// Copies the expression, attaching the arrows each lambda was checked
/// with; they become the lambda's most specific type at run time.
fn elaborate(
    e: &Expr,
    lambda_types: &std::collections::HashMap<crate::syntax::ast::NodeId, Vec<(TypeId, TypeId)>>,
) -> Expr {
    let kind = match &e.kind {
        ExprKind::Lambda {
            param,
            annot,
            body,
            resolved,
        } => ExprKind::Lambda {
            param: param.clone(),
            annot: annot.clone(),
            body: Box::new(elaborate(body, lambda_types)),
            resolved: lambda_types
                .get(&e.id)
                .cloned()
                .or_else(|| resolved.clone()),
        },
        ExprKind::App(f, a) => ExprKind::App(
            Box::new(elaborate(f, lambda_types)),
            Box::new(elaborate(a, lambda_types)),
        ),
        ExprKind::Proj(side, inner) => {
            ExprKind::Proj(*side, Box::new(elaborate(inner, lambda_types)))
        }
        ExprKind::Pair(l, r) => ExprKind::Pair(
            Box::new(elaborate(l, lambda_types)),
            Box::new(elaborate(r, lambda_types)),
        ),
        ExprKind::TypeCase {
            scrut,
            test,
            then_branch,
            else_branch,
        } => ExprKind::TypeCase {
            scrut: Box::new(elaborate(scrut, lambda_types)),
            test: *test,
            then_branch: Box::new(elaborate(then_branch, lambda_types)),
            else_branch: Box::new(elaborate(else_branch, lambda_types)),
        },
        ExprKind::Record(fields) => ExprKind::Record(
            fields
                .iter()
                .map(|(l, v)| (l.clone(), elaborate(v, lambda_types)))
                .collect(),
        ),
        ExprKind::FieldUpdate(s, l, v) => ExprKind::FieldUpdate(
            Box::new(elaborate(s, lambda_types)),
            l.clone(),
            Box::new(elaborate(v, lambda_types)),
        ),
        ExprKind::FieldDel(s, l) => {
            ExprKind::FieldDel(Box::new(elaborate(s, lambda_types)), l.clone())
        }
        ExprKind::FieldSel(s, l) => {
            ExprKind::FieldSel(Box::new(elaborate(s, lambda_types)), l.clone())
        }
        ExprKind::Let { name, bound, body } => ExprKind::Let {
            name: name.clone(),
            bound: Box::new(elaborate(bound, lambda_types)),
            body: Box::new(elaborate(body, lambda_types)),
        },
        other => other.clone(),
    };
    Expr::new(kind, e.span, e.id)
}
