//! Emptiness, subtyping and equivalence.
//!
//! `s ≤ t` holds iff `s ∧ ¬t` is empty, so everything reduces to deciding
//! whether a type is inhabited.  Base kinds are immediate; constructor kinds
//! are checked summand by summand on the disjunctive normal form.  Cycles
//! through recursive types are handled coinductively: a type is assumed
//! empty while its own check is in progress, and a conclusion that leaned on
//! such an assumption is only cached once the assumption's own check
//! succeeds.

use std::collections::BTreeMap;
use std::collections::HashMap;

use crate::types::{
    ArrowAtom, LabelId, ProductAtom, RecordAtom, SetMod, TypeDesc, TypeId, TypeStore,
};

/// Disjunctive normal form of a type: per-kind summands of positive and
/// negative constructor atoms, plus the base-kind sets.
#[derive(Debug, Clone)]
pub struct Dnf {
    pub ints: SetMod<i64>,
    pub chars: SetMod<char>,
    pub strings: SetMod<String>,
    pub atoms: SetMod<crate::types::AtomId>,
    pub undef: bool,
    pub arrows: Vec<(Vec<ArrowAtom>, Vec<ArrowAtom>)>,
    pub products: Vec<(Vec<ProductAtom>, Vec<ProductAtom>)>,
    pub records: Vec<(Vec<RecordAtom>, Vec<RecordAtom>)>,
}

const NO_DEP: usize = usize::MAX;

pub(crate) struct EmpCtx {
    stack_pos: HashMap<TypeId, usize>,
    pending: Vec<(TypeId, usize)>,
    frame_low: usize,
}

impl EmpCtx {
    fn new() -> Self {
        EmpCtx {
            stack_pos: HashMap::new(),
            pending: Vec::new(),
            frame_low: NO_DEP,
        }
    }
}

impl TypeStore {
    /// True iff no value inhabits `t`.
    pub fn is_empty(&self, t: TypeId) -> bool {
        let mut ctx = EmpCtx::new();
        let r = self.emp(t, &mut ctx);
        debug_assert!(ctx.stack_pos.is_empty());
        r
    }

    pub fn subtype(&self, s: TypeId, t: TypeId) -> bool {
        s == t || self.is_empty(self.diff(s, t))
    }

    pub fn equiv(&self, s: TypeId, t: TypeId) -> bool {
        self.subtype(s, t) && self.subtype(t, s)
    }

    pub(crate) fn emp(&self, t: TypeId, ctx: &mut EmpCtx) -> bool {
        if let Some(&b) = self.empty_memo.lock().unwrap().get(&t) {
            return b;
        }
        if let Some(&i) = ctx.stack_pos.get(&t) {
            ctx.frame_low = ctx.frame_low.min(i);
            return true;
        }
        if let Some(&(_, l)) = ctx.pending.iter().find(|(u, _)| *u == t) {
            ctx.frame_low = ctx.frame_low.min(l);
            return true;
        }
        let k = ctx.stack_pos.len();
        ctx.stack_pos.insert(t, k);
        let saved = std::mem::replace(&mut ctx.frame_low, NO_DEP);
        let desc = self.desc(t);
        let r = self.emp_desc(&desc, ctx);
        let low = ctx.frame_low;
        ctx.stack_pos.remove(&t);
        ctx.frame_low = saved;
        if !r {
            // a witness is absolute even under provisional assumptions:
            // assumptions only force more things empty, never fewer
            self.empty_memo.lock().unwrap().insert(t, false);
            ctx.pending.retain(|&(_, l)| l < k);
            false
        } else if low >= k {
            // the proof used no hypothesis below this frame: discharge it
            let mut memo = self.empty_memo.lock().unwrap();
            memo.insert(t, true);
            ctx.pending.retain(|&(u, l)| {
                if l >= k {
                    memo.insert(u, true);
                    false
                } else {
                    true
                }
            });
            true
        } else {
            for p in ctx.pending.iter_mut() {
                if p.1 >= k {
                    p.1 = low;
                }
            }
            ctx.pending.push((t, low));
            ctx.frame_low = ctx.frame_low.min(low);
            true
        }
    }

    fn emp_desc(&self, d: &TypeDesc, ctx: &mut EmpCtx) -> bool {
        if !d.ints.is_empty()
            || !d.chars.is_empty()
            || !d.strings.is_empty()
            || !d.atoms.is_empty()
            || d.undef
        {
            return false;
        }
        for s in &d.arrows.summands {
            let pos: Vec<ArrowAtom> = s.pos.iter().map(|&i| self.arrow_atom(i)).collect();
            let neg: Vec<ArrowAtom> = s.neg.iter().map(|&i| self.arrow_atom(i)).collect();
            if !self.arrow_summand_empty(&pos, &neg, ctx) {
                return false;
            }
        }
        for s in &d.products.summands {
            let pos: Vec<ProductAtom> = s.pos.iter().map(|&i| self.product_atom(i)).collect();
            let neg: Vec<ProductAtom> = s.neg.iter().map(|&i| self.product_atom(i)).collect();
            if !self.product_summand_empty(&pos, &neg, ctx) {
                return false;
            }
        }
        for s in &d.records.summands {
            let pos: Vec<RecordAtom> = s.pos.iter().map(|&i| self.record_atom(i)).collect();
            let neg: Vec<RecordAtom> = s.neg.iter().map(|&i| self.record_atom(i)).collect();
            let norm = self.normalize_record_summand(&pos, &neg, &[], false);
            if !self.record_summand_empty(&norm, ctx) {
                return false;
            }
        }
        true
    }

    // ---- arrows -------------------------------------------------------------

    /// `⋀ pos ∧ ⋀ ¬neg` (within the function kind) is empty iff some negated
    /// arrow subsumes the positive intersection.
    fn arrow_summand_empty(&self, pos: &[ArrowAtom], neg: &[ArrowAtom], ctx: &mut EmpCtx) -> bool {
        neg.iter()
            .any(|n| self.arrow_subsume(pos, n.dom, n.cod, ctx))
    }

    /// Decides `⋀ pos ≤ s → t`.
    fn arrow_subsume(&self, pos: &[ArrowAtom], s: TypeId, t: TypeId, ctx: &mut EmpCtx) -> bool {
        let s = self.inter(s, self.any());
        let n = pos.len();
        assert!(
            n <= 22,
            "arrow intersection too large for subset exploration"
        );
        let dom_all = self.union_all(pos.iter().map(|a| a.dom));
        if !self.emp(self.diff(s, dom_all), ctx) {
            return false;
        }
        // for every proper subset of domains the argument may avoid, the
        // codomains of the remaining arrows must fit in t
        let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        for mask in 0..full {
            let avoided = self.union_all(
                pos.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, a)| a.dom),
            );
            if self.emp(self.diff(s, avoided), ctx) {
                continue;
            }
            let mut cods = self.any();
            for (i, a) in pos.iter().enumerate() {
                if mask >> i & 1 == 0 {
                    cods = self.inter(cods, a.cod);
                }
            }
            if !self.emp(self.diff(cods, t), ctx) {
                return false;
            }
        }
        true
    }

    // ---- products -----------------------------------------------------------

    fn product_summand_empty(
        &self,
        pos: &[ProductAtom],
        neg: &[ProductAtom],
        ctx: &mut EmpCtx,
    ) -> bool {
        let mut left = self.any();
        let mut right = self.any();
        for p in pos {
            left = self.inter(left, p.left);
            right = self.inter(right, p.right);
        }
        self.product_rec(left, right, neg, ctx)
    }

    fn product_rec(
        &self,
        left: TypeId,
        right: TypeId,
        negs: &[ProductAtom],
        ctx: &mut EmpCtx,
    ) -> bool {
        if self.emp(left, ctx) || self.emp(right, ctx) {
            return true;
        }
        let Some((n, rest)) = negs.split_first() else {
            return false;
        };
        // a pair escaping n does so on the left or on the right component
        self.product_rec(self.diff(left, n.left), right, rest, ctx)
            && self.product_rec(left, self.diff(right, n.right), rest, ctx)
    }

    // ---- records ------------------------------------------------------------

    /// Normalises a record summand over an explicit finite support.  The
    /// first `labels.len()` coordinates are real labels; the following ones
    /// are representative fresh labels, one per negated row (a record may
    /// always carry an extra field at a label nobody mentions, which is how
    /// it escapes a negated row outside the common support), plus an
    /// optional probe coordinate used to read back the default.
    pub(crate) fn normalize_record_summand(
        &self,
        pos: &[RecordAtom],
        neg: &[RecordAtom],
        extra_labels: &[LabelId],
        probe_default: bool,
    ) -> NormRec {
        let mut labels: Vec<LabelId> = Vec::new();
        for row in pos.iter().chain(neg.iter()) {
            labels.extend(row.fields.keys().copied());
        }
        labels.extend(extra_labels.iter().copied());
        labels.sort_unstable();
        labels.dedup();
        let n_real = labels.len();
        let n_synth = neg.len() + usize::from(probe_default);
        let row_at = |row: &RecordAtom, c: usize| -> TypeId {
            if c < n_real {
                row.fields.get(&labels[c]).copied().unwrap_or(row.default)
            } else {
                row.default
            }
        };
        let pos_default = pos
            .iter()
            .fold(self.omega(), |acc, r| self.inter(acc, r.default));
        let mut pos_fields = Vec::with_capacity(n_real + n_synth);
        for c in 0..n_real + n_synth {
            let t = pos
                .iter()
                .fold(self.omega(), |acc, r| self.inter(acc, row_at(r, c)));
            pos_fields.push(t);
        }
        let negs = neg
            .iter()
            .map(|r| {
                (0..n_real + n_synth)
                    .map(|c| row_at(r, c))
                    .collect::<Vec<_>>()
            })
            .collect();
        NormRec {
            labels,
            pos: pos_fields,
            pos_default,
            negs,
        }
    }

    pub(crate) fn record_summand_empty(&self, norm: &NormRec, ctx: &mut EmpCtx) -> bool {
        // all labels outside the support hold the absence constant, so the
        // default of the positive part must admit it
        if self.emp(self.inter(norm.pos_default, self.undef()), ctx) {
            return true;
        }
        self.record_rec(norm.pos.clone(), &norm.negs, ctx)
    }

    fn record_rec(&self, pos: Vec<TypeId>, negs: &[Vec<TypeId>], ctx: &mut EmpCtx) -> bool {
        if pos.iter().any(|&t| self.emp(t, ctx)) {
            return true;
        }
        let Some((n, rest)) = negs.split_first() else {
            return false;
        };
        for c in 0..pos.len() {
            let mut p = pos.clone();
            p[c] = self.diff(p[c], n[c]);
            if !self.record_rec(p, rest, ctx) {
                return false;
            }
        }
        true
    }

    /// Union of the possible values at coordinate `c` across the summand.
    pub(crate) fn record_summand_proj(&self, norm: &NormRec, c: usize) -> TypeId {
        let mut ctx = EmpCtx::new();
        let n = norm.negs.len();
        assert!(n <= 22, "record summand too large for subset exploration");
        let full: u64 = (1u64 << n) - 1;
        let mut out = self.empty();
        if self.emp(self.inter(norm.pos_default, self.undef()), &mut ctx) {
            return out;
        }
        for mask in 0..=full {
            // rows in `mask` are escaped at some other coordinate; the rest
            // are escaped here by the projected value itself
            let mut blocked = self.empty();
            for (i, row) in norm.negs.iter().enumerate() {
                if mask >> i & 1 == 0 {
                    blocked = self.union(blocked, row[c]);
                }
            }
            let contribution = self.diff(norm.pos[c], blocked);
            if self.emp(contribution, &mut ctx) {
                continue;
            }
            // the remaining coordinates must accommodate the escaped rows
            let reduced_pos: Vec<TypeId> = drop_idx(&norm.pos, c).collect();
            let reduced_negs: Vec<Vec<TypeId>> = norm
                .negs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, row)| drop_idx(row, c).collect())
                .collect();
            if !self.record_rec(reduced_pos, &reduced_negs, &mut ctx) {
                out = self.union(out, contribution);
            }
        }
        out
    }

    // ---- DNF view -----------------------------------------------------------

    pub fn dnf(&self, t: TypeId) -> Dnf {
        let d = self.desc(t);
        let arrows = d
            .arrows
            .summands
            .iter()
            .map(|s| {
                (
                    s.pos.iter().map(|&i| self.arrow_atom(i)).collect(),
                    s.neg.iter().map(|&i| self.arrow_atom(i)).collect(),
                )
            })
            .collect();
        let products = d
            .products
            .summands
            .iter()
            .map(|s| {
                (
                    s.pos.iter().map(|&i| self.product_atom(i)).collect(),
                    s.neg.iter().map(|&i| self.product_atom(i)).collect(),
                )
            })
            .collect();
        let records = d
            .records
            .summands
            .iter()
            .map(|s| {
                (
                    s.pos.iter().map(|&i| self.record_atom(i)).collect(),
                    s.neg.iter().map(|&i| self.record_atom(i)).collect(),
                )
            })
            .collect();
        Dnf {
            ints: d.ints,
            chars: d.chars,
            strings: d.strings,
            atoms: d.atoms,
            undef: d.undef,
            arrows,
            products,
            records,
        }
    }

    /// Positive arrows of each non-empty arrow summand of `t`.
    pub fn arrow_summands_nonempty(&self, t: TypeId) -> Vec<Vec<ArrowAtom>> {
        if let Some(v) = self.summand_memo.lock().unwrap().get(&t) {
            return v.clone();
        }
        let d = self.desc(t);
        let mut out = Vec::new();
        for s in &d.arrows.summands {
            let mut one = self.arrow_any();
            for &p in &s.pos {
                let a = self.arrow_atom(p);
                one = self.inter(one, self.arrow(a.dom, a.cod));
            }
            for &n in &s.neg {
                let a = self.arrow_atom(n);
                one = self.diff(one, self.arrow(a.dom, a.cod));
            }
            if !self.is_empty(one) {
                out.push(s.pos.iter().map(|&i| self.arrow_atom(i)).collect());
            }
        }
        self.summand_memo.lock().unwrap().insert(t, out.clone());
        out
    }

    /// Record summands of `t` (positive and negative rows), non-empty only.
    pub fn record_summands_nonempty(&self, t: TypeId) -> Vec<(Vec<RecordAtom>, Vec<RecordAtom>)> {
        let d = self.desc(t);
        let mut out = Vec::new();
        for s in &d.records.summands {
            let pos: Vec<RecordAtom> = s.pos.iter().map(|&i| self.record_atom(i)).collect();
            let neg: Vec<RecordAtom> = s.neg.iter().map(|&i| self.record_atom(i)).collect();
            let norm = self.normalize_record_summand(&pos, &neg, &[], false);
            let mut ctx = EmpCtx::new();
            if !self.record_summand_empty(&norm, &mut ctx) {
                out.push((pos, neg));
            }
        }
        out
    }

    /// Product summands of `t` as `(left, right, negated-atoms)` with the
    /// positive part already intersected, non-empty only.
    pub fn product_summands_nonempty(&self, t: TypeId) -> Vec<(TypeId, TypeId, Vec<ProductAtom>)> {
        let d = self.desc(t);
        let mut out = Vec::new();
        for s in &d.products.summands {
            let mut left = self.any();
            let mut right = self.any();
            for &i in &s.pos {
                let a = self.product_atom(i);
                left = self.inter(left, a.left);
                right = self.inter(right, a.right);
            }
            let neg: Vec<ProductAtom> = s.neg.iter().map(|&i| self.product_atom(i)).collect();
            let mut ctx = EmpCtx::new();
            if !self.product_rec(left, right, &neg, &mut ctx) {
                out.push((left, right, neg));
            }
        }
        out
    }
}

/// Record summand normalised over a finite support; see
/// [`TypeStore::normalize_record_summand`].
pub(crate) struct NormRec {
    pub labels: Vec<LabelId>,
    pub pos: Vec<TypeId>,
    pub pos_default: TypeId,
    pub negs: Vec<Vec<TypeId>>,
}

fn drop_idx<'a, T: Copy>(v: &'a [T], idx: usize) -> impl Iterator<Item = T> + 'a {
    v.iter()
        .enumerate()
        .filter(move |(i, _)| *i != idx)
        .map(|(_, t)| *t)
}

/// Convenience used by tests and callers that build rows directly.
pub fn record_row_of(store: &TypeStore, fields: &[(&str, TypeId)], open: bool) -> TypeId {
    let map: BTreeMap<LabelId, TypeId> = fields
        .iter()
        .map(|(l, t)| (store.label_id(l), *t))
        .collect();
    store.record_row(map, if open { store.omega() } else { store.undef() })
}
