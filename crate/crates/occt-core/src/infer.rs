//! Intersection-type reconstruction for lambdas.
//!
//! Checking a body collects, per parameter, the set of candidate argument
//! types observed at its occurrences: the refined types at type-cases and
//! the arrow domains of overloaded functions it is passed to.  The body is
//! then re-checked under each candidate and the lambda receives the
//! intersection of the resulting arrows.  In the default mode the declared
//! domain itself is only re-checked on its residual part not covered by any
//! candidate; the alternative mode keeps the full-domain arrow.

use crate::checker::{AbsInfMode, CheckConfig, Checker, PsiMap, TypeEnv};
use crate::diag::TypeError;
use crate::syntax::ast::{Expr, ExprKind, LambdaAnnot};
use crate::syntax::pretty::pretty_type;
use crate::types::{TypeId, TypeStore};

impl<'s> Checker<'s> {
    /// Types a lambda node, reconstructing its arrow intersection.  Results
    /// are memoised per environment fingerprint: candidate re-checks of an
    /// enclosing function re-analyse nested lambdas under identical
    /// hypotheses many times over.
    pub(crate) fn infer_lambda(
        &self,
        env: &TypeEnv,
        lam: &Expr,
        psi_out: &mut PsiMap,
    ) -> Result<TypeId, TypeError> {
        let key = (lam.id, env.fingerprint(), self.is_quiet());
        if let Some((res, psi_c, pairs)) = self.lambda_memo.borrow().get(&key).cloned() {
            if let Some(pairs) = pairs {
                self.lambda_types.borrow_mut().insert(lam.id, pairs);
            }
            psi_out.merge(self.store, psi_c);
            return res;
        }
        let mut psi_contrib = PsiMap::new();
        let res = self.infer_lambda_inner(env, lam, &mut psi_contrib);
        let pairs = self.lambda_types.borrow().get(&lam.id).cloned();
        self.lambda_memo
            .borrow_mut()
            .insert(key, (res.clone(), psi_contrib.clone(), pairs));
        psi_out.merge(self.store, psi_contrib);
        res
    }

    fn infer_lambda_inner(
        &self,
        env: &TypeEnv,
        lam: &Expr,
        psi_out: &mut PsiMap,
    ) -> Result<TypeId, TypeError> {
        let ExprKind::Lambda {
            param, annot, body, ..
        } = &lam.kind
        else {
            unreachable!("infer_lambda expects a lambda node");
        };
        let store = self.store;
        let pairs = match annot {
            LambdaAnnot::Domain(domain) => {
                let mut body_psi = PsiMap::new();
                let bind = |t: TypeId| {
                    let mut e = env.clone();
                    e.bind_var(param, t);
                    e
                };
                let base = self.infer_type(&bind(*domain), body, &mut body_psi);
                if base.is_err() {
                    // candidates may still carve out a typeable partition
                    body_psi = PsiMap::new();
                    self.psi_salvage(&bind(*domain), body, &mut body_psi);
                }
                let candidates: Vec<TypeId> = body_psi
                    .get(param)
                    .iter()
                    .copied()
                    .filter(|&u| !store.is_empty(u))
                    .collect();
                let mut pairs: Vec<(TypeId, TypeId)> = Vec::new();
                match self.cfg.absinf {
                    AbsInfMode::Plus => {
                        let t = base.clone()?;
                        pairs.push((*domain, t));
                    }
                    AbsInfMode::PlusPlus => {
                        let covered = store.union_all(candidates.iter().copied());
                        let residual = store.diff(*domain, covered);
                        if !store.is_empty(residual) {
                            let t = match self.infer_type(&bind(residual), body, &mut PsiMap::new())
                            {
                                Ok(t) => t,
                                Err(e) => {
                                    // fall back to the error of the broad
                                    // check when it is the more useful one
                                    return Err(base.clone().err().unwrap_or(e));
                                }
                            };
                            pairs.push((residual, t));
                        }
                    }
                }
                for &u in &candidates {
                    if pairs.iter().any(|(d, _)| store.equiv(*d, u)) {
                        continue;
                    }
                    if let Ok(w) =
                        self.quietly(|| self.infer_type(&bind(u), body, &mut PsiMap::new()))
                    {
                        pairs.push((u, w));
                    }
                }
                if pairs.is_empty() {
                    return Err(match base {
                        Err(e) => e,
                        Ok(_) => TypeError::NoValidArrow { span: lam.span },
                    });
                }
                let stripped = {
                    body_psi.remove(param);
                    body_psi
                };
                psi_out.merge(store, stripped);
                pairs
            }
            LambdaAnnot::Arrows(arrows) => {
                let mut pairs: Vec<(TypeId, TypeId)> = Vec::new();
                let mut extra: Vec<(TypeId, TypeId)> = Vec::new();
                for &(s_i, t_i) in arrows {
                    let mut env_i = env.clone();
                    env_i.bind_var(param, s_i);
                    let mut psi_i = PsiMap::new();
                    let got = self.infer_type(&env_i, body, &mut psi_i)?;
                    if !store.subtype(got, t_i) {
                        return Err(TypeError::AnnotationViolation {
                            span: lam.span,
                            arrow: format!(
                                "{} -> {}",
                                pretty_type(store, s_i),
                                pretty_type(store, t_i)
                            ),
                            got: pretty_type(store, got),
                        });
                    }
                    pairs.push((s_i, t_i));
                    for &u in psi_i.get(param) {
                        if store.is_empty(u) {
                            continue;
                        }
                        let mut env_u = env.clone();
                        env_u.bind_var(param, u);
                        if let Ok(w) =
                            self.quietly(|| self.infer_type(&env_u, body, &mut PsiMap::new()))
                        {
                            extra.push((u, w));
                        }
                    }
                    psi_i.remove(param);
                    psi_out.merge(store, psi_i);
                }
                for (u, w) in extra {
                    if !pairs
                        .iter()
                        .any(|&(d, c)| store.equiv(d, u) && store.equiv(c, w))
                    {
                        pairs.push((u, w));
                    }
                }
                pairs
            }
        };
        let simplified = simplify_arrow_pairs(store, pairs);
        self.lambda_types
            .borrow_mut()
            .insert(lam.id, simplified.clone());
        Ok(store.inter_all(simplified.into_iter().map(|(d, c)| store.arrow(d, c))))
    }

    /// Error-tolerant walk that only harvests candidate types; used when the
    /// body does not type under the full declared domain.
    fn psi_salvage(&self, env: &TypeEnv, e: &Expr, psi: &mut PsiMap) {
        let store = self.store;
        if env.is_bottom(store) {
            return;
        }
        match &e.kind {
            ExprKind::Var(name) => {
                if let Some(t) = env.lookup_var(name) {
                    psi.add(store, name, t);
                }
            }
            ExprKind::Const(_) | ExprKind::Builtin(_) | ExprKind::Record(_) => {}
            ExprKind::App(f, a) => {
                self.psi_salvage(env, f, psi);
                self.psi_salvage(env, a, psi);
                if let ExprKind::Var(x) = &a.kind {
                    let ok = self.quietly(|| {
                        Ok::<_, TypeError>((self.type_of(env, f)?, self.type_of(env, a)?))
                    });
                    if let Ok((tf, ta)) = ok {
                        if store.subtype(tf, store.arrow_any()) {
                            for summand in store.arrow_summands_nonempty(tf) {
                                for arrow in summand {
                                    let cand = store.inter(ta, arrow.dom);
                                    if !store.is_empty(cand) {
                                        psi.add(store, x, cand);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            ExprKind::Lambda {
                param, annot, body, ..
            } => {
                let domain = match annot {
                    LambdaAnnot::Domain(d) => *d,
                    LambdaAnnot::Arrows(arrows) => store.union_all(arrows.iter().map(|&(d, _)| d)),
                };
                let mut inner = env.clone();
                inner.bind_var(param, domain);
                let saved = psi.remove(param);
                self.psi_salvage(&inner, body, psi);
                psi.remove(param);
                for t in saved {
                    psi.add(store, param, t);
                }
            }
            ExprKind::Proj(_, inner) => self.psi_salvage(env, inner, psi),
            ExprKind::Pair(l, r) => {
                self.psi_salvage(env, l, psi);
                self.psi_salvage(env, r, psi);
            }
            ExprKind::TypeCase {
                scrut,
                test,
                then_branch,
                else_branch,
            } => {
                self.psi_salvage(env, scrut, psi);
                let scrut_ok = self.quietly(|| self.type_of(env, scrut)).is_ok();
                let (env_then, env_else) = if scrut_ok {
                    (
                        self.quietly(|| self.refine(env, scrut, *test)),
                        self.quietly(|| self.refine(env, scrut, store.neg(*test))),
                    )
                } else {
                    (env.clone(), env.clone())
                };
                if scrut_ok {
                    self.harvest_assignments(scrut, &env_then, &env_else, psi);
                }
                self.psi_salvage(&env_then, then_branch, psi);
                self.psi_salvage(&env_else, else_branch, psi);
            }
            ExprKind::FieldUpdate(subject, _, value) => {
                self.psi_salvage(env, subject, psi);
                self.psi_salvage(env, value, psi);
            }
            ExprKind::FieldDel(subject, _) | ExprKind::FieldSel(subject, _) => {
                self.psi_salvage(env, subject, psi);
            }
            ExprKind::Let { name, bound, body } => {
                self.psi_salvage(env, bound, psi);
                let mut inner = env.clone();
                if let Ok(tb) = self.quietly(|| self.type_of(env, bound)) {
                    inner.bind_var(name, tb);
                }
                let saved = psi.remove(name);
                self.psi_salvage(&inner, body, psi);
                psi.remove(name);
                for t in saved {
                    psi.add(store, name, t);
                }
            }
        }
    }
}

/// Drops every arrow implied by the intersection of the others.
pub fn simplify_arrow_pairs(
    store: &TypeStore,
    pairs: Vec<(TypeId, TypeId)>,
) -> Vec<(TypeId, TypeId)> {
    let mut pairs: Vec<(TypeId, TypeId)> = {
        let mut out: Vec<(TypeId, TypeId)> = Vec::new();
        for (d, c) in pairs {
            if !out
                .iter()
                .any(|&(d2, c2)| store.equiv(d, d2) && store.equiv(c, c2))
            {
                out.push((d, c));
            }
        }
        out
    };
    loop {
        let mut dropped = false;
        for i in 0..pairs.len() {
            if pairs.len() == 1 {
                break;
            }
            let rest = store.inter_all(
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, &(d, c))| store.arrow(d, c)),
            );
            let this = store.arrow(pairs[i].0, pairs[i].1);
            if store.subtype(rest, this) {
                pairs.remove(i);
                dropped = true;
                break;
            }
        }
        if !dropped {
            return pairs;
        }
    }
}

/// Simplifies an intersection of arrows by removing redundant members; any
/// other type is returned unchanged.
pub fn simplify_arrows(store: &TypeStore, t: TypeId) -> TypeId {
    let d = store.desc(t);
    if d.arrows.summands.len() != 1 || !d.arrows.summands[0].neg.is_empty() {
        return t;
    }
    let non_arrow = store.diff(t, store.arrow_any());
    if !store.is_empty(non_arrow) {
        return t;
    }
    let pairs: Vec<(TypeId, TypeId)> = d.arrows.summands[0]
        .pos
        .iter()
        .map(|&i| {
            let a = store.arrow_atom(i);
            (a.dom, a.cod)
        })
        .collect();
    if pairs.is_empty() {
        return t;
    }
    let simplified = simplify_arrow_pairs(store, pairs);
    store.inter_all(simplified.into_iter().map(|(d, c)| store.arrow(d, c)))
}

/// Reconstruction rule used when checking a whole program: see
/// [`CheckConfig::absinf`].  These wrappers force a specific rule for one
/// lambda, regardless of the configured default.
pub fn infer_lambda_plus(
    store: &TypeStore,
    env: &TypeEnv,
    lam: &Expr,
) -> Result<TypeId, TypeError> {
    let cfg = CheckConfig {
        absinf: AbsInfMode::Plus,
        ..CheckConfig::default()
    };
    let checker = Checker::new(store, cfg, Default::default());
    checker.type_of(env, lam)
}

pub fn infer_lambda_plusplus(
    store: &TypeStore,
    env: &TypeEnv,
    lam: &Expr,
) -> Result<TypeId, TypeError> {
    let cfg = CheckConfig {
        absinf: AbsInfMode::PlusPlus,
        ..CheckConfig::default()
    };
    let checker = Checker::new(store, cfg, Default::default());
    checker.type_of(env, lam)
}

/// Checks a lambda with an explicit arrow intersection annotation.
pub fn infer_lambda_multi(
    store: &TypeStore,
    env: &TypeEnv,
    lam: &Expr,
) -> Result<TypeId, TypeError> {
    debug_assert!(matches!(
        &lam.kind,
        ExprKind::Lambda {
            annot: LambdaAnnot::Arrows(_),
            ..
        }
    ));
    let checker = Checker::new(store, CheckConfig::default(), Default::default());
    checker.type_of(env, lam)
}
