//! The flow-sensitive typing algorithm.
//!
//! Type environments map whole expressions, not just variables, to types.
//! Typing a type-case refines the environment for each branch: every
//! occurrence inside the tested expression receives the strongest type that
//! can be deduced from the outcome of the test, by walking its path through
//! applications, pairs, projections and record operations.  The walk is
//! iterated a bounded number of times because an occurrence refined in one
//! pass can improve what the next pass deduces elsewhere.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::diag::{Diagnostic, Severity, TypeError};
use crate::syntax::ast::{
    expr_equal, occ, sub_occurrences, Const, Expr, ExprKind, NodeId, Path, PathStep, ProjSide,
    Symbol,
};
use crate::syntax::pretty::pretty_type;
use crate::typeops;
use crate::types::{TypeId, TypeStore};

/// Which reconstruction rule annotation-free lambdas use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbsInfMode {
    /// Check the body once per candidate plus once for the declared domain.
    Plus,
    /// Check the candidates and only the residual part of the domain not
    /// covered by any candidate.
    #[default]
    PlusPlus,
}

#[derive(Debug, Clone)]
pub struct CheckConfig {
    /// Fixed refinement budget; `None` picks twice the depth of the tested
    /// expression (at least 2).
    pub iters: Option<u32>,
    pub allow_arrow_tests: bool,
    pub absinf: AbsInfMode,
    /// Emit unreachable-branch warnings.
    pub warnings: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            iters: None,
            allow_arrow_tests: false,
            absinf: AbsInfMode::default(),
            warnings: true,
        }
    }
}

/// Environment of typing hypotheses, keyed by expressions.
#[derive(Debug, Default)]
pub struct TypeEnv {
    entries: Vec<(Expr, TypeId)>,
    /// Lazily computed absurdity flag; reset on mutation.
    bottom: std::cell::Cell<Option<bool>>,
}

impl Clone for TypeEnv {
    fn clone(&self) -> Self {
        TypeEnv {
            entries: self.entries.clone(),
            bottom: self.bottom.clone(),
        }
    }
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn from_vars<I: IntoIterator<Item = (Symbol, TypeId)>>(vars: I) -> Self {
        let mut env = TypeEnv::new();
        for (name, t) in vars {
            env.bind_var(&name, t);
        }
        env
    }

    pub fn bind_var(&mut self, name: &str, t: TypeId) {
        let e = Expr::new(
            ExprKind::Var(name.to_string()),
            Default::default(),
            NodeId(u32::MAX),
        );
        self.set(e, t);
    }

    pub fn lookup(&self, e: &Expr) -> Option<TypeId> {
        self.entries
            .iter()
            .find(|(k, _)| expr_equal(k, e))
            .map(|(_, t)| *t)
    }

    pub fn lookup_var(&self, name: &str) -> Option<TypeId> {
        self.entries
            .iter()
            .find(|(k, _)| matches!(&k.kind, ExprKind::Var(v) if v == name))
            .map(|(_, t)| *t)
    }

    /// Replaces the binding for `e` or appends one.
    pub fn set(&mut self, e: Expr, t: TypeId) {
        self.bottom.set(None);
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| expr_equal(k, &e)) {
            slot.1 = t;
        } else {
            self.entries.push((e, t));
        }
    }

    /// A copy of the environment without the hypothesis for `e`.
    pub fn without(&self, e: &Expr) -> TypeEnv {
        TypeEnv {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| !expr_equal(k, e))
                .cloned()
                .collect(),
            bottom: std::cell::Cell::new(None),
        }
    }

    /// An environment is absurd when one of its hypotheses is empty.
    pub fn is_bottom(&self, store: &TypeStore) -> bool {
        if let Some(b) = self.bottom.get() {
            return b;
        }
        let b = self.entries.iter().any(|(_, t)| store.is_empty(*t));
        self.bottom.set(Some(b));
        b
    }

    /// Cache key: variable entries by name, occurrence entries by the node
    /// identity of their key expression.
    pub(crate) fn fingerprint(&self) -> Vec<(EntryKey, TypeId)> {
        let mut v: Vec<(EntryKey, TypeId)> = self
            .entries
            .iter()
            .map(|(e, t)| {
                let k = match &e.kind {
                    ExprKind::Var(x) => EntryKey::Var(x.clone()),
                    _ => EntryKey::Node(e.id),
                };
                (k, *t)
            })
            .collect();
        v.sort();
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Expr, TypeId)> {
        self.entries.iter().map(|(e, t)| (e, *t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Candidate argument types per variable, harvested from type-cases and
/// overloaded applications in a function body.
#[derive(Debug, Clone, Default)]
pub struct PsiMap {
    entries: Vec<(Symbol, Vec<TypeId>)>,
}

impl PsiMap {
    pub fn new() -> Self {
        PsiMap::default()
    }

    pub fn add(&mut self, store: &TypeStore, var: &str, t: TypeId) {
        let slot = match self.entries.iter_mut().find(|(v, _)| v == var) {
            Some((_, ts)) => ts,
            None => {
                self.entries.push((var.to_string(), Vec::new()));
                &mut self.entries.last_mut().unwrap().1
            }
        };
        if !slot.iter().any(|&u| store.equiv(u, t)) {
            slot.push(t);
        }
    }

    pub fn get(&self, var: &str) -> &[TypeId] {
        self.entries
            .iter()
            .find(|(v, _)| v == var)
            .map(|(_, ts)| ts.as_slice())
            .unwrap_or(&[])
    }

    pub fn remove(&mut self, var: &str) -> Vec<TypeId> {
        if let Some(i) = self.entries.iter().position(|(v, _)| v == var) {
            self.entries.remove(i).1
        } else {
            Vec::new()
        }
    }

    pub fn merge(&mut self, store: &TypeStore, other: PsiMap) {
        for (var, ts) in other.entries {
            for t in ts {
                self.add(store, &var, t);
            }
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(v, _)| v.as_str())
    }
}

pub struct Checker<'s> {
    pub store: &'s TypeStore,
    pub cfg: CheckConfig,
    pub(crate) builtins: BTreeMap<String, TypeId>,
    diags: RefCell<Vec<Diagnostic>>,
    quiet: RefCell<u32>,
    pub(crate) lambda_types: RefCell<HashMap<NodeId, Vec<(TypeId, TypeId)>>>,
    pub(crate) lambda_memo: RefCell<HashMap<LambdaMemoKey, LambdaMemoValue>>,
}

pub(crate) type LambdaMemoKey = (NodeId, Vec<(EntryKey, TypeId)>, bool);
pub(crate) type LambdaMemoValue = (
    Result<TypeId, TypeError>,
    PsiMap,
    Option<Vec<(TypeId, TypeId)>>,
);

impl<'s> Checker<'s> {
    pub fn new(store: &'s TypeStore, cfg: CheckConfig, builtins: BTreeMap<String, TypeId>) -> Self {
        Checker {
            store,
            cfg,
            builtins,
            diags: RefCell::new(Vec::new()),
            quiet: RefCell::new(0),
            lambda_types: RefCell::new(HashMap::new()),
            lambda_memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn take_diags(&self) -> Vec<Diagnostic> {
        std::mem::take(&mut self.diags.borrow_mut())
    }

    pub(crate) fn warn(&self, span: crate::diag::Span, message: String) {
        if !self.cfg.warnings || *self.quiet.borrow() > 0 {
            return;
        }
        let d = Diagnostic {
            span,
            severity: Severity::Warning,
            message,
        };
        let mut diags = self.diags.borrow_mut();
        if !diags.contains(&d) {
            diags.push(d);
        }
    }

    pub(crate) fn is_quiet(&self) -> bool {
        *self.quiet.borrow() > 0
    }

    pub(crate) fn quietly<T>(&self, f: impl FnOnce() -> T) -> T {
        *self.quiet.borrow_mut() += 1;
        let r = f();
        *self.quiet.borrow_mut() -= 1;
        r
    }

    /// The algorithmic type of `e` under `env`.
    pub fn type_of(&self, env: &TypeEnv, e: &Expr) -> Result<TypeId, TypeError> {
        let mut psi = PsiMap::new();
        self.infer_type(env, e, &mut psi)
    }

    /// The candidate-type map of `e` under `env`.
    pub fn collect_psi(&self, env: &TypeEnv, e: &Expr) -> Result<PsiMap, TypeError> {
        let mut psi = PsiMap::new();
        self.infer_type(env, e, &mut psi)?;
        Ok(psi)
    }

    /// Core recursion: computes the type and accumulates candidate types.
    pub(crate) fn infer_type(
        &self,
        env: &TypeEnv,
        e: &Expr,
        psi: &mut PsiMap,
    ) -> Result<TypeId, TypeError> {
        let store = self.store;
        // an absurd hypothesis types everything, with priority over all rules
        if env.is_bottom(store) {
            return Ok(store.empty());
        }
        if let ExprKind::Var(name) = &e.kind {
            let t = env
                .lookup_var(name)
                .ok_or_else(|| TypeError::UnboundVariable {
                    span: e.span,
                    name: name.clone(),
                })?;
            psi.add(store, name, t);
            return Ok(t);
        }
        // a non-variable hypothesis is intersected with the type computed
        // without it
        if let Some(hyp) = env.lookup(e) {
            let reduced = env.without(e);
            let t = self.infer_type(&reduced, e, psi)?;
            return Ok(store.inter(hyp, t));
        }
        match &e.kind {
            ExprKind::Var(_) => unreachable!(),
            ExprKind::Const(c) => Ok(self.const_type(c)),
            ExprKind::Builtin(name) => {
                self.builtins
                    .get(name)
                    .copied()
                    .ok_or_else(|| TypeError::UnboundVariable {
                        span: e.span,
                        name: name.clone(),
                    })
            }
            ExprKind::App(f, a) => {
                let tf = self.infer_type(env, f, psi)?;
                let ta = self.infer_type(env, a, psi)?;
                if !store.subtype(tf, store.arrow_any()) {
                    return Err(TypeError::NotAFunction { span: f.span });
                }
                let d = typeops::dom(store, tf).map_err(|e2| self.at(e2, f.span))?;
                if !store.subtype(ta, d) {
                    return Err(TypeError::ArgumentOutsideDomain {
                        span: a.span,
                        arg: pretty_type(store, ta),
                        dom: pretty_type(store, d),
                    });
                }
                let result = typeops::apply(store, tf, ta).map_err(|e2| self.at(e2, e.span))?;
                // applying an overloaded function to a variable suggests the
                // domains of its arrows as candidate types for the variable
                if let ExprKind::Var(x) = &a.kind {
                    for summand in store.arrow_summands_nonempty(tf) {
                        for arrow in summand {
                            let cand = store.inter(ta, arrow.dom);
                            if !store.is_empty(cand) {
                                psi.add(store, x, cand);
                            }
                        }
                    }
                }
                Ok(result)
            }
            ExprKind::Lambda { .. } => self.infer_lambda(env, e, psi),
            ExprKind::Proj(side, inner) => {
                let t = self.infer_type(env, inner, psi)?;
                if !store.subtype(t, store.product_any()) {
                    return Err(TypeError::NotAProduct { span: inner.span });
                }
                let r = match side {
                    ProjSide::First => typeops::proj1(store, t),
                    ProjSide::Second => typeops::proj2(store, t),
                };
                r.map_err(|e2| self.at(e2, e.span))
            }
            ExprKind::Pair(l, r) => {
                let tl = self.infer_type(env, l, psi)?;
                let tr = self.infer_type(env, r, psi)?;
                Ok(store.product(tl, tr))
            }
            ExprKind::TypeCase {
                scrut,
                test,
                then_branch,
                else_branch,
            } => {
                self.check_test_type(*test, e)?;
                let _t0 = self.infer_type(env, scrut, psi)?;
                let env_then = self.refine(env, scrut, *test);
                let env_else = self.refine(env, scrut, store.neg(*test));
                if env_then.is_bottom(store) {
                    self.warn(then_branch.span, "unreachable expression".into());
                }
                if env_else.is_bottom(store) {
                    self.warn(else_branch.span, "unreachable expression".into());
                }
                self.harvest_assignments(scrut, &env_then, &env_else, psi);
                let t1 = self.infer_type(&env_then, then_branch, psi)?;
                let t2 = self.infer_type(&env_else, else_branch, psi)?;
                Ok(store.union(t1, t2))
            }
            ExprKind::Record(fields) => {
                let mut row = BTreeMap::new();
                for (label, value) in fields {
                    let t = self.infer_type(env, value, psi)?;
                    row.insert(store.label_id(label), t);
                }
                Ok(store.record_row(row, store.undef()))
            }
            ExprKind::FieldUpdate(subject, label, value) => {
                let t1 = self.infer_type(env, subject, psi)?;
                if !store.subtype(t1, store.record_any()) {
                    return Err(TypeError::NotARecord { span: subject.span });
                }
                let t2 = self.infer_type(env, value, psi)?;
                let update = store.record_closed(vec![(store.label_id(label), t2)]);
                typeops::rec_merge(store, t1, update).map_err(|e2| self.at(e2, e.span))
            }
            ExprKind::FieldDel(subject, label) => {
                let t = self.infer_type(env, subject, psi)?;
                if !store.subtype(t, store.record_any()) {
                    return Err(TypeError::NotARecord { span: subject.span });
                }
                typeops::rec_del(store, t, store.label_id(label)).map_err(|e2| self.at(e2, e.span))
            }
            ExprKind::FieldSel(subject, label) => {
                let t = self.infer_type(env, subject, psi)?;
                if !store.subtype(t, store.record_any()) {
                    return Err(TypeError::NotARecord { span: subject.span });
                }
                typeops::rec_proj(store, store.label_id(label), t).map_err(|e2| self.at(e2, e.span))
            }
            ExprKind::Let { name, bound, body } => {
                let tb = self.infer_type(env, bound, psi)?;
                let mut inner = env.clone();
                inner.bind_var(name, tb);
                let saved = psi.remove(name);
                let r = self.infer_type(&inner, body, psi);
                psi.remove(name);
                for t in saved {
                    psi.add(store, name, t);
                }
                r
            }
        }
    }

    pub(crate) fn const_type(&self, c: &Const) -> TypeId {
        let store = self.store;
        match c {
            Const::Int(n) => store.int(*n),
            Const::Atom(a) => store.atom(a),
            Const::Char(c) => store.char(*c),
            Const::Str(s) => store.string(s),
        }
    }

    fn at(&self, err: TypeError, span: crate::diag::Span) -> TypeError {
        match err {
            TypeError::NotAFunction { .. } => TypeError::NotAFunction { span },
            TypeError::ArgumentOutsideDomain { arg, dom, .. } => {
                TypeError::ArgumentOutsideDomain { span, arg, dom }
            }
            TypeError::NotAProduct { .. } => TypeError::NotAProduct { span },
            TypeError::NotARecord { .. } => TypeError::NotARecord { span },
            TypeError::MissingField { label, .. } => TypeError::MissingField { span, label },
            other => other,
        }
    }

    /// Records the types a test assigns to the variables inside the tested
    /// expression as candidate argument types, whether or not the variables
    /// occur again in the branches.
    pub(crate) fn harvest_assignments(
        &self,
        scrut: &Expr,
        env_then: &TypeEnv,
        env_else: &TypeEnv,
        psi: &mut PsiMap,
    ) {
        let store = self.store;
        for (_, sub) in sub_occurrences(scrut) {
            if let ExprKind::Var(x) = &sub.kind {
                for env in [env_then, env_else] {
                    if let Some(t) = env.lookup_var(x) {
                        if !store.is_empty(t) {
                            psi.add(store, x, t);
                        }
                    }
                }
            }
        }
    }

    /// Tests may only discriminate functions at the granularity of
    /// `Empty -> Any`.
    fn check_test_type(&self, test: TypeId, e: &Expr) -> Result<(), TypeError> {
        if self.cfg.allow_arrow_tests {
            return Ok(());
        }
        let store = self.store;
        let functional = store.inter(test, store.arrow_any());
        if store.is_empty(functional) || store.equiv(functional, store.arrow_any()) {
            Ok(())
        } else {
            Err(TypeError::ArrowTest { span: e.span })
        }
    }

    // ---- occurrence refinement ----------------------------------------------

    /// Refinement budget for a tested expression.
    fn budget(&self, scrut: &Expr) -> u32 {
        self.cfg
            .iters
            .unwrap_or_else(|| (2 * scrut.depth() as u32).max(2))
    }

    /// Iterates [`Checker::refine_step`] up to the budget, stopping early on
    /// a fixpoint.
    pub fn refine(&self, env: &TypeEnv, scrut: &Expr, test: TypeId) -> TypeEnv {
        let mut cur = env.clone();
        for _ in 0..self.budget(scrut) {
            let next = self.refine_step(&cur, scrut, test);
            if envs_equal(&cur, &next) {
                return next;
            }
            cur = next;
        }
        cur
    }

    /// One refinement pass: rebinds every occurrence of the tested
    /// expression to the intersection of the types deduced for each of its
    /// paths, leaving other hypotheses unchanged.
    pub fn refine_step(&self, env: &TypeEnv, scrut: &Expr, test: TypeId) -> TypeEnv {
        let store = self.store;
        let occs = sub_occurrences(scrut);
        // group paths that lead to the same expression
        let mut groups: Vec<(&Expr, Vec<&Path>)> = Vec::new();
        for (path, sub) in &occs {
            match groups.iter_mut().find(|(g, _)| expr_equal(g, sub)) {
                Some((_, paths)) => paths.push(path),
                None => groups.push((sub, vec![path])),
            }
        }
        let mut cache: RefineCache = HashMap::new();
        let mut next = env.clone();
        for (sub, paths) in groups {
            let mut acc: Option<TypeId> = None;
            let mut failed = None;
            for path in paths {
                match self.env_at(env, scrut, test, path, &mut cache) {
                    Ok(t) => acc = Some(acc.map_or(t, |a| store.inter(a, t))),
                    Err(err) => failed = Some(err),
                }
            }
            match failed {
                None => {
                    if let Some(t) = acc {
                        next.set(sub.clone(), t);
                    }
                }
                Some(err) => {
                    // keep the previous hypothesis for this occurrence
                    self.warn(
                        scrut.span,
                        format!("refinement skipped for an occurrence: {err}"),
                    );
                }
            }
        }
        next
    }

    /// Refined type of the occurrence at `path`: what the test outcome says
    /// about it, intersected with its own type under the current hypotheses.
    pub(crate) fn env_at(
        &self,
        env: &TypeEnv,
        scrut: &Expr,
        test: TypeId,
        path: &[PathStep],
        cache: &mut RefineCache,
    ) -> Result<TypeId, TypeError> {
        let key = (path.to_vec(), RefineKind::EnvAt);
        if let Some(r) = cache.get(&key) {
            return r.clone();
        }
        let r = (|| {
            let c = self.constr(env, scrut, test, path, cache)?;
            let t = self.type_of_occurrence(env, scrut, path, cache)?;
            Ok(self.store.inter(c, t))
        })();
        cache.insert(key, r.clone());
        r
    }

    /// Type of the occurrence at `path` under the current hypotheses,
    /// memoised per refinement pass.
    fn type_of_occurrence(
        &self,
        env: &TypeEnv,
        scrut: &Expr,
        path: &[PathStep],
        cache: &mut RefineCache,
    ) -> Result<TypeId, TypeError> {
        let key = (path.to_vec(), RefineKind::TypeOf);
        if let Some(r) = cache.get(&key) {
            return r.clone();
        }
        let sub = occ(scrut, path).expect("path validated by caller");
        let r = self.quietly(|| self.type_of(env, sub));
        cache.insert(key, r.clone());
        r
    }

    /// What the test outcome alone says about the occurrence at `path`,
    /// derived from its parent.
    pub(crate) fn constr(
        &self,
        env: &TypeEnv,
        scrut: &Expr,
        test: TypeId,
        path: &[PathStep],
        cache: &mut RefineCache,
    ) -> Result<TypeId, TypeError> {
        let key = (path.to_vec(), RefineKind::Constr);
        if let Some(r) = cache.get(&key) {
            return r.clone();
        }
        let store = self.store;
        let r = (|| {
            let Some((step, prefix)) = path.split_last() else {
                return Ok(test);
            };
            match step {
                PathStep::Fun => {
                    // the function cannot map the (refined) argument outside
                    // the (refined) result
                    let mut arg_path = prefix.to_vec();
                    arg_path.push(PathStep::Arg);
                    let arg_t = self.env_at(env, scrut, test, &arg_path, cache)?;
                    let res_t = self.env_at(env, scrut, test, prefix, cache)?;
                    Ok(store.neg(store.arrow(arg_t, store.neg(res_t))))
                }
                PathStep::Arg => {
                    let mut fun_path = prefix.to_vec();
                    fun_path.push(PathStep::Fun);
                    let tf = self.type_of_occurrence(env, scrut, &fun_path, cache)?;
                    let res_t = self.env_at(env, scrut, test, prefix, cache)?;
                    typeops::worra(store, tf, res_t)
                }
                PathStep::PairL => {
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    typeops::proj1(store, t)
                }
                PathStep::PairR => {
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    typeops::proj2(store, t)
                }
                PathStep::Fst => {
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    Ok(store.product(t, store.any()))
                }
                PathStep::Snd => {
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    Ok(store.product(store.any(), t))
                }
                PathStep::Sel(label) => {
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    Ok(store.record_open(vec![(store.label_id(label), t)]))
                }
                PathStep::Del(label) | PathStep::UpdSubj(label) => {
                    // the original field is gone, so only its absence is known
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    let deleted = typeops::rec_del(store, t, store.label_id(label))?;
                    let forget = store.record_closed(vec![(store.label_id(label), store.omega())]);
                    typeops::rec_merge(store, deleted, forget)
                }
                PathStep::UpdField(label) => {
                    let t = self.env_at(env, scrut, test, prefix, cache)?;
                    typeops::rec_proj(store, store.label_id(label), t)
                }
            }
        })();
        cache.insert(key, r.clone());
        r
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum EntryKey {
    Var(Symbol),
    Node(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum RefineKind {
    Constr,
    EnvAt,
    TypeOf,
}

pub(crate) type RefineCache = HashMap<(Path, RefineKind), Result<TypeId, TypeError>>;

fn envs_equal(a: &TypeEnv, b: &TypeEnv) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|((e1, t1), (e2, t2))| t1 == t2 && expr_equal(e1, e2))
}
