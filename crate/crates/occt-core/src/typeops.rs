//! Operators on function, product and record types used by the typing rules.
//!
//! All operators work on the disjunctive normal form of their argument with
//! empty summands dropped.  Subset explorations are capped at
//! [`ARROW_SUBSET_CAP`] positive atoms per summand.

use std::collections::BTreeMap;

use crate::diag::TypeError;
use crate::types::{LabelId, TypeId, TypeStore};

pub const ARROW_SUBSET_CAP: usize = 16;

fn check_cap(n: usize) -> Result<(), TypeError> {
    if n > ARROW_SUBSET_CAP {
        Err(TypeError::ArrowSummandTooLarge {
            count: n,
            cap: ARROW_SUBSET_CAP,
        })
    } else {
        Ok(())
    }
}

const OP_DOM: u8 = 0;
const OP_APPLY: u8 = 1;
const OP_WORRA: u8 = 2;

/// Largest type `u` such that `t ≤ u -> Any`: the set of arguments every
/// function in `t` accepts.
pub fn dom(store: &TypeStore, t: TypeId) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.arrow_any()) {
        return Err(TypeError::NotAFunction {
            span: Default::default(),
        });
    }
    if let Some(&d) = store.op_memo.lock().unwrap().get(&(OP_DOM, t, t)) {
        return Ok(d);
    }
    let mut out = store.any();
    for summand in store.arrow_summands_nonempty(t) {
        let d = store.union_all(summand.iter().map(|a| a.dom));
        out = store.inter(out, d);
    }
    store.op_memo.lock().unwrap().insert((OP_DOM, t, t), out);
    Ok(out)
}

/// Smallest type `u` such that `t ≤ s -> u`: the best result type for
/// applying a function of type `t` to an argument of type `s`.
///
/// When `s` avoids every summand's domain entirely the result is `Empty`
/// (the application can never produce a value).
pub fn apply(store: &TypeStore, t: TypeId, s: TypeId) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.arrow_any()) {
        return Err(TypeError::NotAFunction {
            span: Default::default(),
        });
    }
    let d = dom(store, t)?;
    if !store.subtype(s, d) {
        return Err(TypeError::ArgumentOutsideDomain {
            span: Default::default(),
            arg: String::new(),
            dom: String::new(),
        });
    }
    if let Some(&r) = store.op_memo.lock().unwrap().get(&(OP_APPLY, t, s)) {
        return Ok(r);
    }
    let mut out = store.empty();
    for summand in store.arrow_summands_nonempty(t) {
        let n = summand.len();
        check_cap(n)?;
        let full: u64 = (1u64 << n) - 1;
        // arguments that avoid the domains in `q` select the other arrows
        for q in 0..=full {
            if q == full && n > 0 {
                continue; // proper subsets only
            }
            if n == 0 && q > 0 {
                break;
            }
            let avoided = store.union_all(
                summand
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| q >> i & 1 == 1)
                    .map(|(_, a)| a.dom),
            );
            if store.subtype(s, avoided) {
                continue;
            }
            if n == 0 {
                break; // no arrows left to produce a result
            }
            let mut cods = store.any();
            for (i, a) in summand.iter().enumerate() {
                if q >> i & 1 == 0 {
                    cods = store.inter(cods, a.cod);
                }
            }
            out = store.union(out, cods);
        }
    }
    store.op_memo.lock().unwrap().insert((OP_APPLY, t, s), out);
    Ok(out)
}

/// Smallest `u ≤ dom t` such that applying `t` to any argument outside `u`
/// cannot produce a result in `s`; in other words the arguments that *may*
/// make a function of type `t` return a result in `s`.
pub fn worra(store: &TypeStore, t: TypeId, s: TypeId) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.arrow_any()) {
        return Err(TypeError::NotAFunction {
            span: Default::default(),
        });
    }
    if let Some(&r) = store.op_memo.lock().unwrap().get(&(OP_WORRA, t, s)) {
        return Ok(r);
    }
    let d = dom(store, t)?;
    let mut out = store.empty();
    for summand in store.arrow_summands_nonempty(t) {
        let n = summand.len();
        check_cap(n)?;
        let full: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
        // partition dom t by which subset of domains the argument selects;
        // a cell stays only if the arrows it selects may still yield s
        for p in 0..=full {
            let mut cods = store.any();
            for (i, a) in summand.iter().enumerate() {
                if p >> i & 1 == 1 {
                    cods = store.inter(cods, a.cod);
                }
            }
            if store.is_empty(store.inter(s, cods)) {
                continue;
            }
            let mut cell = d;
            for (i, a) in summand.iter().enumerate() {
                if p >> i & 1 == 1 {
                    cell = store.inter(cell, a.dom);
                } else {
                    cell = store.diff(cell, a.dom);
                }
            }
            out = store.union(out, cell);
        }
    }
    store.op_memo.lock().unwrap().insert((OP_WORRA, t, s), out);
    Ok(out)
}

/// Same operator computed by the dual closed formula (an intersection of
/// unions of negated domains); kept as an independent route for
/// differential testing.
pub fn worra_alt(store: &TypeStore, t: TypeId, s: TypeId) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.arrow_any()) {
        return Err(TypeError::NotAFunction {
            span: Default::default(),
        });
    }
    let d = dom(store, t)?;
    let mut out = store.empty();
    for summand in store.arrow_summands_nonempty(t) {
        let n = summand.len();
        check_cap(n)?;
        let full: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
        let mut acc = store.omega();
        for p in 0..=full {
            let mut cods_neg = store.empty();
            for (i, a) in summand.iter().enumerate() {
                if p >> i & 1 == 1 {
                    cods_neg = store.union(cods_neg, store.neg(a.cod));
                }
            }
            if !store.subtype(s, cods_neg) {
                continue;
            }
            let mut doms_neg = store.empty();
            for (i, a) in summand.iter().enumerate() {
                if p >> i & 1 == 1 {
                    doms_neg = store.union(doms_neg, store.neg(a.dom));
                }
            }
            acc = store.inter(acc, doms_neg);
        }
        out = store.union(out, acc);
    }
    Ok(store.inter(d, out))
}

/// Smallest `u` with `t ≤ (u, Any)`.
pub fn proj1(store: &TypeStore, t: TypeId) -> Result<TypeId, TypeError> {
    proj(store, t, true)
}

/// Smallest `u` with `t ≤ (Any, u)`.
pub fn proj2(store: &TypeStore, t: TypeId) -> Result<TypeId, TypeError> {
    proj(store, t, false)
}

fn proj(store: &TypeStore, t: TypeId, first: bool) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.product_any()) {
        return Err(TypeError::NotAProduct {
            span: Default::default(),
        });
    }
    let mut out = store.empty();
    for (left, right, negs) in store.product_summands_nonempty(t) {
        let n = negs.len();
        check_cap(n)?;
        let full: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
        // rows in `m` are escaped on the projected side, the others on the
        // opposite side (which must then still be inhabited)
        for m in 0..=full {
            let mut this_side = if first { left } else { right };
            let mut other_side = if first { right } else { left };
            for (i, a) in negs.iter().enumerate() {
                let (this_a, other_a) = if first {
                    (a.left, a.right)
                } else {
                    (a.right, a.left)
                };
                if m >> i & 1 == 1 {
                    this_side = store.diff(this_side, this_a);
                } else {
                    other_side = store.diff(other_side, other_a);
                }
            }
            if !store.is_empty(other_side) {
                out = store.union(out, this_side);
            }
        }
    }
    Ok(out)
}

/// Per-label projections of a record summand: the minimal row covering it.
fn summand_row(
    store: &TypeStore,
    pos: &[crate::types::RecordAtom],
    neg: &[crate::types::RecordAtom],
    want: &[LabelId],
) -> (Vec<(LabelId, TypeId)>, TypeId) {
    let norm = store.normalize_record_summand(pos, neg, want, true);
    let n_real = norm.labels.len();
    let mut fields = Vec::with_capacity(n_real);
    for c in 0..n_real {
        fields.push((norm.labels[c], store.record_summand_proj(&norm, c)));
    }
    let probe = norm.pos.len() - 1;
    let default = store.record_summand_proj(&norm, probe);
    (fields, default)
}

/// Everything that can sit at label `l` across the record type `t`,
/// including the absence constant when the field may be undefined.
pub fn rec_field(store: &TypeStore, label: LabelId, t: TypeId) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.record_any()) {
        return Err(TypeError::NotARecord {
            span: Default::default(),
        });
    }
    let mut out = store.empty();
    for (pos, neg) in store.record_summands_nonempty(t) {
        let norm = store.normalize_record_summand(&pos, &neg, &[label], false);
        let c = norm.labels.iter().position(|&l| l == label).unwrap();
        out = store.union(out, store.record_summand_proj(&norm, c));
    }
    Ok(out)
}

/// Type of field `l` in the record type `t`.  Fails with `MissingField`
/// when some value of `t` may lack the field.
pub fn rec_proj(store: &TypeStore, label: LabelId, t: TypeId) -> Result<TypeId, TypeError> {
    let out = rec_field(store, label, t)?;
    if !store.is_empty(store.inter(out, store.undef())) {
        return Err(TypeError::MissingField {
            span: Default::default(),
            label: store.label_name(label),
        });
    }
    Ok(out)
}

/// Record merge: fields of `t2` override those of `t1`; a field optional in
/// `t2` may fall back to the `t1` field.
pub fn rec_merge(store: &TypeStore, t1: TypeId, t2: TypeId) -> Result<TypeId, TypeError> {
    if !store.subtype(t1, store.record_any()) || !store.subtype(t2, store.record_any()) {
        return Err(TypeError::NotARecord {
            span: Default::default(),
        });
    }
    let lhs = store.record_summands_nonempty(t1);
    let rhs = store.record_summands_nonempty(t2);
    let mut out = store.empty();
    for (pos1, neg1) in &lhs {
        for (pos2, neg2) in &rhs {
            let mut labels: Vec<LabelId> = Vec::new();
            for row in pos1.iter().chain(neg1).chain(pos2.iter()).chain(neg2) {
                labels.extend(row.fields.keys().copied());
            }
            labels.sort_unstable();
            labels.dedup();
            let (f1, d1) = summand_row(store, pos1, neg1, &labels);
            let (f2, d2) = summand_row(store, pos2, neg2, &labels);
            let merged_field = |a: TypeId, b: TypeId| -> TypeId {
                if store.is_empty(store.inter(b, store.undef())) {
                    b
                } else {
                    store.union(a, store.diff(b, store.undef()))
                }
            };
            let mut fields = BTreeMap::new();
            for ((l, a), (_, b)) in f1.iter().zip(f2.iter()) {
                fields.insert(*l, merged_field(*a, *b));
            }
            let default = merged_field(d1, d2);
            out = store.union(out, store.record_row(fields, default));
        }
    }
    Ok(out)
}

/// Record with the field `l` removed: `l` becomes undefined, every other
/// field is preserved.
pub fn rec_del(store: &TypeStore, t: TypeId, label: LabelId) -> Result<TypeId, TypeError> {
    if !store.subtype(t, store.record_any()) {
        return Err(TypeError::NotARecord {
            span: Default::default(),
        });
    }
    let mut out = store.empty();
    for (pos, neg) in store.record_summands_nonempty(t) {
        let (fields, default) = summand_row(store, &pos, &neg, &[label]);
        let mut map: BTreeMap<LabelId, TypeId> = fields.into_iter().collect();
        map.insert(label, store.undef());
        out = store.union(out, store.record_row(map, default));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subtype::record_row_of;

    fn store() -> TypeStore {
        TypeStore::new()
    }

    #[test]
    fn dom_of_overloaded_functions() {
        let s = store();
        let t = s.inter(
            s.arrow(s.int_any(), s.int_any()),
            s.arrow(s.string_any(), s.string_any()),
        );
        let d = dom(&s, t).unwrap();
        assert!(s.equiv(d, s.union(s.int_any(), s.string_any())));

        let t1 = s.inter(
            s.arrow(s.bool_ty(), s.bool_ty()),
            s.arrow(s.int_any(), s.union(s.string_any(), s.int_any())),
        );
        let d1 = dom(&s, t1).unwrap();
        assert!(s.equiv(d1, s.union(s.int_any(), s.bool_ty())));

        let all = s.arrow(s.empty(), s.any());
        assert!(s.equiv(dom(&s, all).unwrap(), s.empty()));
    }

    #[test]
    fn dom_rejects_non_functions() {
        let s = store();
        assert!(matches!(
            dom(&s, s.int_any()),
            Err(TypeError::NotAFunction { .. })
        ));
    }

    #[test]
    fn apply_selects_matching_arrows() {
        let s = store();
        let f = s.arrow(s.int_any(), s.bool_ty());
        assert!(s.equiv(apply(&s, f, s.int_any()).unwrap(), s.bool_ty()));

        let t = s.inter(
            s.arrow(s.int_any(), s.int_any()),
            s.arrow(s.string_any(), s.string_any()),
        );
        let both = s.union(s.int_any(), s.string_any());
        assert!(s.equiv(apply(&s, t, both).unwrap(), both));
        assert!(s.equiv(apply(&s, t, s.int_any()).unwrap(), s.int_any()));
        assert!(matches!(
            apply(&s, t, s.bool_ty()),
            Err(TypeError::ArgumentOutsideDomain { .. })
        ));
    }

    #[test]
    fn apply_detects_vacuous_applications() {
        let s = store();
        // both arrows apply to Int arguments, so results live in Int & Bool = Empty
        let f = s.inter(
            s.arrow(s.int_any(), s.int_any()),
            s.arrow(s.any(), s.bool_ty()),
        );
        assert!(s.is_empty(apply(&s, f, s.int_any()).unwrap()));
        assert!(s.equiv(apply(&s, f, s.any()).unwrap(), s.bool_ty()));
    }

    #[test]
    fn worra_intro_example() {
        let s = store();
        let t = s.inter(
            s.arrow(s.bool_ty(), s.bool_ty()),
            s.arrow(s.int_any(), s.union(s.string_any(), s.int_any())),
        );
        let w = worra(&s, t, s.string_any()).unwrap();
        assert!(s.equiv(w, s.int_any()));
        let w2 = worra_alt(&s, t, s.string_any()).unwrap();
        assert!(s.equiv(w2, s.int_any()));
    }

    #[test]
    fn worra_is_zero_when_no_result_fits() {
        let s = store();
        let t = s.arrow(s.int_any(), s.int_any());
        // applying anything can never give Bool
        let w = worra(&s, t, s.bool_ty()).unwrap();
        assert!(s.is_empty(w));
        // u = Empty already satisfies the defining inequality
        let w0 = worra(&s, t, s.empty()).unwrap();
        assert!(s.is_empty(w0));
    }

    #[test]
    fn projections_of_product_unions() {
        let s = store();
        let t = s.union(
            s.product(s.int_any(), s.bool_ty()),
            s.product(s.string_any(), s.char_any()),
        );
        assert!(s.equiv(proj1(&s, t).unwrap(), s.union(s.int_any(), s.string_any())));
        assert!(s.equiv(proj2(&s, t).unwrap(), s.union(s.bool_ty(), s.char_any())));
        assert!(s.equiv(
            proj1(&s, s.product(s.int_any(), s.bool_ty())).unwrap(),
            s.int_any()
        ));
        assert!(matches!(
            proj1(&s, s.int_any()),
            Err(TypeError::NotAProduct { .. })
        ));
    }

    #[test]
    fn projection_sees_through_negated_products() {
        let s = store();
        let ib = s.union(s.int_any(), s.bool_ty());
        // (Int|Bool, Int|Bool) & ~(Int, Int)
        let t = s.diff(s.product(ib, ib), s.product(s.int_any(), s.int_any()));
        // the first component may still be Int (paired with Bool)
        assert!(s.equiv(proj1(&s, t).unwrap(), ib));
        // but ((Int, Int|Bool) & ~(Int, Int)) projects to (Int, Bool)
        let u = s.diff(
            s.product(s.int_any(), ib),
            s.product(s.int_any(), s.int_any()),
        );
        assert!(s.equiv(proj2(&s, u).unwrap(), s.bool_ty()));
    }

    #[test]
    fn record_projection() {
        let s = store();
        let r = record_row_of(&s, &[("a", s.int_any()), ("b", s.bool_ty())], false);
        let a = s.label_id("a");
        assert!(s.equiv(rec_proj(&s, a, r).unwrap(), s.int_any()));
        let missing = record_row_of(&s, &[("b", s.int_any())], false);
        assert!(matches!(
            rec_proj(&s, a, missing),
            Err(TypeError::MissingField { .. })
        ));
        let union = s.union(
            record_row_of(&s, &[("a", s.int_any())], true),
            record_row_of(&s, &[("a", s.bool_ty())], true),
        );
        assert!(s.equiv(
            rec_proj(&s, a, union).unwrap(),
            s.union(s.int_any(), s.bool_ty())
        ));
    }

    #[test]
    fn record_merge_field_override_and_option() {
        let s = store();
        let a = s.label_id("a");
        // a definite field in the update wins
        let base = record_row_of(&s, &[("a", s.int_any())], true);
        let upd = record_row_of(&s, &[("a", s.bool_ty())], false);
        let merged = rec_merge(&s, base, upd).unwrap();
        assert!(s.equiv(rec_proj(&s, a, merged).unwrap(), s.bool_ty()));
        // an optional field falls back to the original
        let base2 = record_row_of(&s, &[("a", s.int_any())], false);
        let upd2 = record_row_of(&s, &[("a", s.optional(s.bool_ty()))], false);
        let merged2 = rec_merge(&s, base2, upd2).unwrap();
        assert!(s.equiv(
            rec_proj(&s, a, merged2).unwrap(),
            s.union(s.int_any(), s.bool_ty())
        ));
    }

    #[test]
    fn record_update_narrowing_example() {
        let s = store();
        // ({a=Int, b=Bool ..} | {a=Bool, b=Int ..}) & {a=Int ..}, then forget a
        let r1 = record_row_of(&s, &[("a", s.int_any()), ("b", s.bool_ty())], true);
        let r2 = record_row_of(&s, &[("a", s.bool_ty()), ("b", s.int_any())], true);
        let guard = record_row_of(&s, &[("a", s.int_any())], true);
        let narrowed = s.inter(s.union(r1, r2), guard);
        let forgotten = rec_merge(
            &s,
            rec_del(&s, narrowed, s.label_id("a")).unwrap(),
            record_row_of(&s, &[("a", s.optional(s.any()))], false),
        )
        .unwrap();
        let expect = record_row_of(&s, &[("b", s.bool_ty())], true);
        assert!(s.equiv(forgotten, expect));
        let b = s.label_id("b");
        assert!(s.equiv(rec_proj(&s, b, forgotten).unwrap(), s.bool_ty()));
    }

    #[test]
    fn record_delete_preserves_other_fields() {
        let s = store();
        let r = record_row_of(&s, &[("a", s.int_any()), ("b", s.bool_ty())], false);
        let d = rec_del(&s, r, s.label_id("a")).unwrap();
        let b = s.label_id("b");
        assert!(s.equiv(rec_proj(&s, b, d).unwrap(), s.bool_ty()));
        assert!(matches!(
            rec_proj(&s, s.label_id("a"), d),
            Err(TypeError::MissingField { .. })
        ));
        // deleting from the top record type leaves an open record without a
        let top_del = rec_del(&s, s.record_any(), s.label_id("a")).unwrap();
        let expect = s.record_row(
            std::iter::once((s.label_id("a"), s.undef())).collect(),
            s.omega(),
        );
        assert!(s.equiv(top_del, expect));
        // deletion of an absent field keeps the others
        let open_a = record_row_of(&s, &[("a", s.int_any())], true);
        let d2 = rec_del(&s, open_a, s.label_id("b")).unwrap();
        assert!(s.equiv(rec_proj(&s, s.label_id("a"), d2).unwrap(), s.int_any()));
    }
}
