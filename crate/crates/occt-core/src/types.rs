//! Interned, possibly-recursive set-theoretic types.
//!
//! A type is a point in the boolean algebra over a universe of values that is
//! partitioned into kinds: integers, characters, strings, atoms (nullary
//! constants such as `true`, `false`, `nil`), functions, products and
//! records, plus the special singleton `Undef` that lies *outside* the top
//! type `Any` and is inhabited only by the field-absence constant.  Negation
//! complements within the full universe `Any | Undef`.
//!
//! Base kinds are finite or cofinite sets of singletons; constructor kinds
//! (arrows, products, records) are stored as a normalised sum of products
//! over interned constructor atoms.  Recursion is represented by back-edges:
//! a constructor atom refers to other [`TypeId`]s, and `recursive` patches
//! equation bodies onto pre-allocated identifiers, so every cycle passes
//! through a constructor.
//!
//! Structurally equal construction sequences yield identity-equal nodes; all
//! tables are interior-mutable behind mutexes so constructed types can be
//! shared freely.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use crate::diag::TypeError;

/// Handle of an interned type node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u32);

/// Handle of an interned atom constant name (`true`, `nil`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub u32);

/// Handle of an interned record label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u32);

/// Finite or cofinite set of singletons of one base kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetMod<T: Ord> {
    Finite(BTreeSet<T>),
    Cofinite(BTreeSet<T>),
}

impl<T: Ord + Clone> SetMod<T> {
    pub fn empty() -> Self {
        SetMod::Finite(BTreeSet::new())
    }

    pub fn full() -> Self {
        SetMod::Cofinite(BTreeSet::new())
    }

    pub fn singleton(v: T) -> Self {
        SetMod::Finite(std::iter::once(v).collect())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SetMod::Finite(s) if s.is_empty())
    }

    pub fn is_full(&self) -> bool {
        matches!(self, SetMod::Cofinite(s) if s.is_empty())
    }

    pub fn contains(&self, v: &T) -> bool {
        match self {
            SetMod::Finite(s) => s.contains(v),
            SetMod::Cofinite(s) => !s.contains(v),
        }
    }

    pub fn complement(&self) -> Self {
        match self {
            SetMod::Finite(s) => SetMod::Cofinite(s.clone()),
            SetMod::Cofinite(s) => SetMod::Finite(s.clone()),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        use SetMod::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a.union(b).cloned().collect()),
            (Finite(a), Cofinite(b)) => Cofinite(b.difference(a).cloned().collect()),
            (Cofinite(a), Finite(b)) => Cofinite(a.difference(b).cloned().collect()),
            (Cofinite(a), Cofinite(b)) => Cofinite(a.intersection(b).cloned().collect()),
        }
    }

    pub fn inter(&self, other: &Self) -> Self {
        self.complement().union(&other.complement()).complement()
    }
}

/// One summand of a sum-of-products: positive and negated constructor atoms.
/// Both sides are sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Summand {
    pub pos: Vec<u32>,
    pub neg: Vec<u32>,
}

/// Normalised sum of products over constructor atoms of one kind.
/// No summands means the empty set; a single summand with no literals is the
/// whole kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sop {
    pub summands: Vec<Summand>,
}

fn sorted_dedup(mut v: Vec<u32>) -> Vec<u32> {
    v.sort_unstable();
    v.dedup();
    v
}

fn subset(a: &[u32], b: &[u32]) -> bool {
    // both sorted
    let mut i = 0;
    for x in a {
        while i < b.len() && b[i] < *x {
            i += 1;
        }
        if i >= b.len() || b[i] != *x {
            return false;
        }
    }
    true
}

fn intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

impl Sop {
    pub fn empty() -> Self {
        Sop {
            summands: Vec::new(),
        }
    }

    pub fn full() -> Self {
        Sop {
            summands: vec![Summand {
                pos: Vec::new(),
                neg: Vec::new(),
            }],
        }
    }

    pub fn atom(a: u32) -> Self {
        Sop {
            summands: vec![Summand {
                pos: vec![a],
                neg: Vec::new(),
            }],
        }
    }

    pub fn is_syntactically_empty(&self) -> bool {
        self.summands.is_empty()
    }

    fn normalize(mut summands: Vec<Summand>) -> Sop {
        summands = summands
            .into_iter()
            .map(|s| Summand {
                pos: sorted_dedup(s.pos),
                neg: sorted_dedup(s.neg),
            })
            .filter(|s| !intersects(&s.pos, &s.neg))
            .collect();
        summands.sort();
        summands.dedup();
        // absorption: drop a summand subsumed literal-wise by a weaker one
        let keep: Vec<bool> = summands
            .iter()
            .enumerate()
            .map(|(i, s)| {
                !summands.iter().enumerate().any(|(j, t)| {
                    j != i
                        && subset(&t.pos, &s.pos)
                        && subset(&t.neg, &s.neg)
                        && (t.pos.len() < s.pos.len() || t.neg.len() < s.neg.len() || j < i)
                })
            })
            .collect();
        let summands = summands
            .into_iter()
            .zip(keep)
            .filter_map(|(s, k)| k.then_some(s))
            .collect();
        Sop { summands }
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.summands.clone();
        v.extend(other.summands.iter().cloned());
        Sop::normalize(v)
    }

    pub fn inter(&self, other: &Self) -> Self {
        let mut v = Vec::new();
        for a in &self.summands {
            for b in &other.summands {
                let mut pos = a.pos.clone();
                pos.extend_from_slice(&b.pos);
                let mut neg = a.neg.clone();
                neg.extend_from_slice(&b.neg);
                v.push(Summand { pos, neg });
            }
        }
        Sop::normalize(v)
    }

    pub fn complement(&self) -> Self {
        // De Morgan: complement each summand to a union of literals, then
        // intersect the results.
        let mut acc = Sop::full();
        for s in &self.summands {
            let mut lits = Vec::new();
            for &p in &s.pos {
                lits.push(Summand {
                    pos: Vec::new(),
                    neg: vec![p],
                });
            }
            for &n in &s.neg {
                lits.push(Summand {
                    pos: vec![n],
                    neg: Vec::new(),
                });
            }
            acc = acc.inter(&Sop::normalize(lits));
            if acc.summands.is_empty() {
                break;
            }
        }
        acc
    }
}

/// Interned descriptor: the boolean-algebra point, one component per kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeDesc {
    pub ints: SetMod<i64>,
    pub chars: SetMod<char>,
    pub strings: SetMod<String>,
    pub atoms: SetMod<AtomId>,
    pub arrows: Sop,
    pub products: Sop,
    pub records: Sop,
    pub undef: bool,
}

impl TypeDesc {
    fn empty() -> Self {
        TypeDesc {
            ints: SetMod::empty(),
            chars: SetMod::empty(),
            strings: SetMod::empty(),
            atoms: SetMod::empty(),
            arrows: Sop::empty(),
            products: Sop::empty(),
            records: Sop::empty(),
            undef: false,
        }
    }

    fn full() -> Self {
        TypeDesc {
            ints: SetMod::full(),
            chars: SetMod::full(),
            strings: SetMod::full(),
            atoms: SetMod::full(),
            arrows: Sop::full(),
            products: Sop::full(),
            records: Sop::full(),
            undef: true,
        }
    }

    fn union(&self, other: &Self) -> Self {
        TypeDesc {
            ints: self.ints.union(&other.ints),
            chars: self.chars.union(&other.chars),
            strings: self.strings.union(&other.strings),
            atoms: self.atoms.union(&other.atoms),
            arrows: self.arrows.union(&other.arrows),
            products: self.products.union(&other.products),
            records: self.records.union(&other.records),
            undef: self.undef || other.undef,
        }
    }

    fn inter(&self, other: &Self) -> Self {
        TypeDesc {
            ints: self.ints.inter(&other.ints),
            chars: self.chars.inter(&other.chars),
            strings: self.strings.inter(&other.strings),
            atoms: self.atoms.inter(&other.atoms),
            arrows: self.arrows.inter(&other.arrows),
            products: self.products.inter(&other.products),
            records: self.records.inter(&other.records),
            undef: self.undef && other.undef,
        }
    }

    fn complement(&self) -> Self {
        TypeDesc {
            ints: self.ints.complement(),
            chars: self.chars.complement(),
            strings: self.strings.complement(),
            atoms: self.atoms.complement(),
            arrows: self.arrows.complement(),
            products: self.products.complement(),
            records: self.records.complement(),
            undef: !self.undef,
        }
    }
}

/// Function-type constructor atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArrowAtom {
    pub dom: TypeId,
    pub cod: TypeId,
}

/// Product-type constructor atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductAtom {
    pub left: TypeId,
    pub right: TypeId,
}

/// Record row: a quasi-constant function from labels to types.  The finitely
/// many `fields` map to their own types and every other label maps to
/// `default`.  Fields whose type equals the default are dropped on interning.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecordAtom {
    pub fields: BTreeMap<LabelId, TypeId>,
    pub default: TypeId,
}

/// Symbolic type term used to build (possibly mutually recursive) types.
#[derive(Debug, Clone)]
pub enum TyExpr {
    /// Reference to the `i`-th equation of the group under construction.
    Ref(usize),
    /// An already-interned type.
    Done(TypeId),
    Arrow(Box<TyExpr>, Box<TyExpr>),
    Product(Box<TyExpr>, Box<TyExpr>),
    /// `(label, field type, optional)` pairs plus `open` flag.
    Record(Vec<(String, TyExpr, bool)>, bool),
    Union(Box<TyExpr>, Box<TyExpr>),
    Inter(Box<TyExpr>, Box<TyExpr>),
    Neg(Box<TyExpr>),
    Diff(Box<TyExpr>, Box<TyExpr>),
}

#[derive(Default)]
struct Tables {
    descs: Vec<TypeDesc>,
    intern: HashMap<TypeDesc, TypeId>,
    /// ids whose descriptor was patched after allocation; they are kept out
    /// of the intern map
    cyclic: BTreeSet<u32>,
    arrows: Vec<ArrowAtom>,
    arrow_intern: HashMap<ArrowAtom, u32>,
    products: Vec<ProductAtom>,
    product_intern: HashMap<ProductAtom, u32>,
    records: Vec<RecordAtom>,
    record_intern: HashMap<RecordAtom, u32>,
    atoms: Vec<String>,
    atom_intern: HashMap<String, u32>,
    labels: Vec<String>,
    label_intern: HashMap<String, u32>,
}

/// Shared registry of interned types plus the memo tables of the subtyping
/// engine.  All mutation is serialised internally; handles are plain indices
/// and can cross threads.
pub struct TypeStore {
    tables: Mutex<Tables>,
    pub(crate) empty_memo: Mutex<HashMap<TypeId, bool>>,
    pub(crate) summand_memo: Mutex<HashMap<TypeId, Vec<Vec<ArrowAtom>>>>,
    pub(crate) op_memo: Mutex<HashMap<(u8, TypeId, TypeId), TypeId>>,
    cached: Cached,
}

#[derive(Clone, Copy)]
struct Cached {
    empty: TypeId,
    any: TypeId,
    omega: TypeId,
    undef: TypeId,
}

impl Default for TypeStore {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeStore {
    pub fn new() -> Self {
        let mut tables = Tables::default();
        let empty = Self::intern_in(&mut tables, TypeDesc::empty());
        let full = Self::intern_in(&mut tables, TypeDesc::full());
        let any = Self::intern_in(
            &mut tables,
            TypeDesc {
                undef: false,
                ..TypeDesc::full()
            },
        );
        let undef = Self::intern_in(
            &mut tables,
            TypeDesc {
                undef: true,
                ..TypeDesc::empty()
            },
        );
        // seed the well-known atoms so their ids are stable
        for name in ["true", "false", "nil", "unit"] {
            let id = tables.atoms.len() as u32;
            tables.atoms.push(name.to_string());
            tables.atom_intern.insert(name.to_string(), id);
        }
        TypeStore {
            tables: Mutex::new(tables),
            empty_memo: Mutex::new(HashMap::new()),
            summand_memo: Mutex::new(HashMap::new()),
            op_memo: Mutex::new(HashMap::new()),
            cached: Cached {
                empty,
                any,
                omega: full,
                undef,
            },
        }
    }

    fn intern_in(tables: &mut Tables, desc: TypeDesc) -> TypeId {
        if let Some(&id) = tables.intern.get(&desc) {
            return id;
        }
        let id = TypeId(tables.descs.len() as u32);
        tables.descs.push(desc.clone());
        tables.intern.insert(desc, id);
        id
    }

    fn intern(&self, desc: TypeDesc) -> TypeId {
        let mut tables = self.tables.lock().unwrap();
        Self::intern_in(&mut tables, desc)
    }

    pub fn desc(&self, id: TypeId) -> TypeDesc {
        self.tables.lock().unwrap().descs[id.0 as usize].clone()
    }

    /// Drops the memoised emptiness and operator answers; used to check
    /// that caching is observation-free.
    pub fn clear_memos(&self) {
        self.empty_memo.lock().unwrap().clear();
        self.summand_memo.lock().unwrap().clear();
        self.op_memo.lock().unwrap().clear();
    }

    // ---- leaf constructors -------------------------------------------------

    pub fn empty(&self) -> TypeId {
        self.cached.empty
    }

    /// Top type of values (`Any`); does not contain the field-absence
    /// constant.
    pub fn any(&self) -> TypeId {
        self.cached.any
    }

    /// Full universe: `Any | Undef`.
    pub fn omega(&self) -> TypeId {
        self.cached.omega
    }

    pub fn undef(&self) -> TypeId {
        self.cached.undef
    }

    pub fn int_any(&self) -> TypeId {
        self.intern(TypeDesc {
            ints: SetMod::full(),
            ..TypeDesc::empty()
        })
    }

    pub fn int(&self, n: i64) -> TypeId {
        self.intern(TypeDesc {
            ints: SetMod::singleton(n),
            ..TypeDesc::empty()
        })
    }

    pub fn int_set(&self, s: SetMod<i64>) -> TypeId {
        self.intern(TypeDesc {
            ints: s,
            ..TypeDesc::empty()
        })
    }

    pub fn char_any(&self) -> TypeId {
        self.intern(TypeDesc {
            chars: SetMod::full(),
            ..TypeDesc::empty()
        })
    }

    pub fn char(&self, c: char) -> TypeId {
        self.intern(TypeDesc {
            chars: SetMod::singleton(c),
            ..TypeDesc::empty()
        })
    }

    pub fn string_any(&self) -> TypeId {
        self.intern(TypeDesc {
            strings: SetMod::full(),
            ..TypeDesc::empty()
        })
    }

    pub fn string(&self, s: &str) -> TypeId {
        self.intern(TypeDesc {
            strings: SetMod::singleton(s.to_string()),
            ..TypeDesc::empty()
        })
    }

    pub fn atom_id(&self, name: &str) -> AtomId {
        let mut tables = self.tables.lock().unwrap();
        if let Some(&id) = tables.atom_intern.get(name) {
            return AtomId(id);
        }
        let id = tables.atoms.len() as u32;
        tables.atoms.push(name.to_string());
        tables.atom_intern.insert(name.to_string(), id);
        AtomId(id)
    }

    pub fn atom_name(&self, id: AtomId) -> String {
        self.tables.lock().unwrap().atoms[id.0 as usize].clone()
    }

    pub fn atom(&self, name: &str) -> TypeId {
        let id = self.atom_id(name);
        self.intern(TypeDesc {
            atoms: SetMod::singleton(id),
            ..TypeDesc::empty()
        })
    }

    pub fn atom_any(&self) -> TypeId {
        self.intern(TypeDesc {
            atoms: SetMod::full(),
            ..TypeDesc::empty()
        })
    }

    pub fn bool_ty(&self) -> TypeId {
        self.union(self.atom("true"), self.atom("false"))
    }

    pub fn nil(&self) -> TypeId {
        self.atom("nil")
    }

    pub fn label_id(&self, name: &str) -> LabelId {
        let mut tables = self.tables.lock().unwrap();
        if let Some(&id) = tables.label_intern.get(name) {
            return LabelId(id);
        }
        let id = tables.labels.len() as u32;
        tables.labels.push(name.to_string());
        tables.label_intern.insert(name.to_string(), id);
        LabelId(id)
    }

    pub fn label_name(&self, id: LabelId) -> String {
        self.tables.lock().unwrap().labels[id.0 as usize].clone()
    }

    // ---- constructor types -------------------------------------------------

    pub fn arrow(&self, dom: TypeId, cod: TypeId) -> TypeId {
        let atom = {
            let mut tables = self.tables.lock().unwrap();
            let a = ArrowAtom { dom, cod };
            match tables.arrow_intern.get(&a) {
                Some(&i) => i,
                None => {
                    let i = tables.arrows.len() as u32;
                    tables.arrows.push(a);
                    tables.arrow_intern.insert(a, i);
                    i
                }
            }
        };
        self.intern(TypeDesc {
            arrows: Sop::atom(atom),
            ..TypeDesc::empty()
        })
    }

    /// The type of all functions.
    pub fn arrow_any(&self) -> TypeId {
        self.intern(TypeDesc {
            arrows: Sop::full(),
            ..TypeDesc::empty()
        })
    }

    pub fn arrow_atom(&self, idx: u32) -> ArrowAtom {
        self.tables.lock().unwrap().arrows[idx as usize]
    }

    pub fn product(&self, left: TypeId, right: TypeId) -> TypeId {
        let atom = {
            let mut tables = self.tables.lock().unwrap();
            let a = ProductAtom { left, right };
            match tables.product_intern.get(&a) {
                Some(&i) => i,
                None => {
                    let i = tables.products.len() as u32;
                    tables.products.push(a);
                    tables.product_intern.insert(a, i);
                    i
                }
            }
        };
        self.intern(TypeDesc {
            products: Sop::atom(atom),
            ..TypeDesc::empty()
        })
    }

    pub fn product_any(&self) -> TypeId {
        self.intern(TypeDesc {
            products: Sop::full(),
            ..TypeDesc::empty()
        })
    }

    pub fn product_atom(&self, idx: u32) -> ProductAtom {
        self.tables.lock().unwrap().products[idx as usize]
    }

    /// Interns a record row.  Fields equal to the default are dropped.
    pub fn record_row(&self, fields: BTreeMap<LabelId, TypeId>, default: TypeId) -> TypeId {
        let fields: BTreeMap<LabelId, TypeId> =
            fields.into_iter().filter(|(_, t)| *t != default).collect();
        let atom = {
            let mut tables = self.tables.lock().unwrap();
            let a = RecordAtom { fields, default };
            match tables.record_intern.get(&a) {
                Some(&i) => i,
                None => {
                    let i = tables.records.len() as u32;
                    tables.records.push(a.clone());
                    tables.record_intern.insert(a, i);
                    i
                }
            }
        };
        self.intern(TypeDesc {
            records: Sop::atom(atom),
            ..TypeDesc::empty()
        })
    }

    pub fn record_atom(&self, idx: u32) -> RecordAtom {
        self.tables.lock().unwrap().records[idx as usize].clone()
    }

    /// Closed record: absent labels are undefined.
    pub fn record_closed(&self, fields: Vec<(LabelId, TypeId)>) -> TypeId {
        self.record_row(fields.into_iter().collect(), self.undef())
    }

    /// Open record: absent labels may hold anything or be undefined.
    pub fn record_open(&self, fields: Vec<(LabelId, TypeId)>) -> TypeId {
        self.record_row(fields.into_iter().collect(), self.omega())
    }

    /// The largest record type `{ .. }`.
    pub fn record_any(&self) -> TypeId {
        self.intern(TypeDesc {
            records: Sop::full(),
            ..TypeDesc::empty()
        })
    }

    /// Field type for an optional field `l =? t`.
    pub fn optional(&self, t: TypeId) -> TypeId {
        self.union(t, self.undef())
    }

    // ---- connectives -------------------------------------------------------

    pub fn union(&self, a: TypeId, b: TypeId) -> TypeId {
        if a == b {
            return a;
        }
        let d = self.desc(a).union(&self.desc(b));
        self.intern(d)
    }

    pub fn inter(&self, a: TypeId, b: TypeId) -> TypeId {
        if a == b {
            return a;
        }
        let d = self.desc(a).inter(&self.desc(b));
        self.intern(d)
    }

    /// Complement within the full universe `Any | Undef`.
    pub fn neg(&self, a: TypeId) -> TypeId {
        let d = self.desc(a).complement();
        self.intern(d)
    }

    pub fn diff(&self, a: TypeId, b: TypeId) -> TypeId {
        self.inter(a, self.neg(b))
    }

    pub fn union_all<I: IntoIterator<Item = TypeId>>(&self, it: I) -> TypeId {
        it.into_iter()
            .fold(self.empty(), |acc, t| self.union(acc, t))
    }

    pub fn inter_all<I: IntoIterator<Item = TypeId>>(&self, it: I) -> TypeId {
        it.into_iter()
            .fold(self.omega(), |acc, t| self.inter(acc, t))
    }

    // ---- recursive types ---------------------------------------------------

    /// Builds a group of mutually recursive types.  Every reference cycle
    /// must cross a type constructor; a cycle made only of connectives is
    /// rejected.
    pub fn recursive(&self, names: &[String], bodies: &[TyExpr]) -> Result<Vec<TypeId>, TypeError> {
        assert_eq!(names.len(), bodies.len());
        let n = bodies.len();
        // connective-level dependency graph
        let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, b) in bodies.iter().enumerate() {
            collect_connective_refs(b, &mut deps[i]);
        }
        // topological order; a cycle is a contractivity violation
        let mut order = Vec::new();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        fn visit(
            i: usize,
            deps: &[BTreeSet<usize>],
            state: &mut [u8],
            order: &mut Vec<usize>,
            names: &[String],
        ) -> Result<(), TypeError> {
            match state[i] {
                1 => {
                    return Err(TypeError::ContractivityViolation {
                        name: names[i].clone(),
                    })
                }
                2 => return Ok(()),
                _ => {}
            }
            state[i] = 1;
            for &j in &deps[i] {
                visit(j, deps, state, order, names)?;
            }
            state[i] = 2;
            order.push(i);
            Ok(())
        }
        for i in 0..n {
            visit(i, &deps, &mut state, &mut order, names)?;
        }
        // allocate placeholder nodes, kept out of the intern map
        let ids: Vec<TypeId> = {
            let mut tables = self.tables.lock().unwrap();
            (0..n)
                .map(|_| {
                    let id = TypeId(tables.descs.len() as u32);
                    tables.descs.push(TypeDesc::empty());
                    tables.cyclic.insert(id.0);
                    id
                })
                .collect()
        };
        // evaluate bodies in dependency order and patch the placeholders
        for &i in &order {
            let t = self.build_with(&bodies[i], &ids)?;
            let d = self.desc(t);
            let mut tables = self.tables.lock().unwrap();
            tables.descs[ids[i].0 as usize] = d;
        }
        self.clear_memos();
        Ok(ids)
    }

    /// Evaluates a symbolic term; `refs` resolves equation back-references.
    pub fn build_with(&self, e: &TyExpr, refs: &[TypeId]) -> Result<TypeId, TypeError> {
        Ok(match e {
            TyExpr::Ref(i) => refs[*i],
            TyExpr::Done(t) => *t,
            TyExpr::Arrow(d, c) => self.arrow(self.build_with(d, refs)?, self.build_with(c, refs)?),
            TyExpr::Product(l, r) => {
                self.product(self.build_with(l, refs)?, self.build_with(r, refs)?)
            }
            TyExpr::Record(fields, open) => {
                let mut map = BTreeMap::new();
                for (name, fe, optional) in fields {
                    let mut t = self.build_with(fe, refs)?;
                    if *optional {
                        t = self.optional(t);
                    }
                    map.insert(self.label_id(name), t);
                }
                let default = if *open { self.omega() } else { self.undef() };
                self.record_row(map, default)
            }
            TyExpr::Union(a, b) => self.union(self.build_with(a, refs)?, self.build_with(b, refs)?),
            TyExpr::Inter(a, b) => self.inter(self.build_with(a, refs)?, self.build_with(b, refs)?),
            TyExpr::Neg(a) => self.neg(self.build_with(a, refs)?),
            TyExpr::Diff(a, b) => self.diff(self.build_with(a, refs)?, self.build_with(b, refs)?),
        })
    }

    pub fn build(&self, e: &TyExpr) -> Result<TypeId, TypeError> {
        self.build_with(e, &[])
    }
}

fn collect_connective_refs(e: &TyExpr, out: &mut BTreeSet<usize>) {
    match e {
        TyExpr::Ref(i) => {
            out.insert(*i);
        }
        TyExpr::Union(a, b) | TyExpr::Inter(a, b) | TyExpr::Diff(a, b) => {
            collect_connective_refs(a, out);
            collect_connective_refs(b, out);
        }
        TyExpr::Neg(a) => collect_connective_refs(a, out),
        // constructors guard their arguments: recursion through them is fine
        TyExpr::Done(_) | TyExpr::Arrow(..) | TyExpr::Product(..) | TyExpr::Record(..) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_identity() {
        let s = TypeStore::new();
        assert_eq!(s.int_any(), s.int_any());
        assert_eq!(s.int(42), s.int(42));
        assert_ne!(s.int(42), s.int(43));
        let a = s.union(s.int_any(), s.bool_ty());
        let b = s.union(s.int_any(), s.bool_ty());
        assert_eq!(a, b);
        let c = s.union(s.bool_ty(), s.int_any());
        assert_eq!(a, c, "union is order-insensitive after normalisation");
    }

    #[test]
    fn bool_is_true_or_false() {
        let s = TypeStore::new();
        let b = s.bool_ty();
        let tf = s.union(s.atom("true"), s.atom("false"));
        assert_eq!(b, tf);
    }

    #[test]
    fn derived_connectives() {
        let s = TypeStore::new();
        let t = s.int_any();
        assert_eq!(s.diff(s.any(), t), s.inter(s.any(), s.neg(t)));
        assert_eq!(s.inter(t, t), t);
        assert_eq!(s.union(t, t), t);
    }

    #[test]
    fn recursive_list_builds() {
        let s = TypeStore::new();
        // X = nil | (Int, X)
        let body = TyExpr::Union(
            Box::new(TyExpr::Done(s.nil())),
            Box::new(TyExpr::Product(
                Box::new(TyExpr::Done(s.int_any())),
                Box::new(TyExpr::Ref(0)),
            )),
        );
        let ids = s.recursive(&["X".into()], &[body]).unwrap();
        assert_eq!(ids.len(), 1);
    }

    #[test]
    fn contractivity_violations() {
        let s = TypeStore::new();
        // X = X | X
        let body = TyExpr::Union(Box::new(TyExpr::Ref(0)), Box::new(TyExpr::Ref(0)));
        let err = s.recursive(&["X".into()], &[body]).unwrap_err();
        assert!(matches!(err, TypeError::ContractivityViolation { .. }));
        // X = ~X
        let body = TyExpr::Neg(Box::new(TyExpr::Ref(0)));
        let err = s.recursive(&["X".into()], &[body]).unwrap_err();
        assert!(matches!(err, TypeError::ContractivityViolation { .. }));
    }

    #[test]
    fn mutual_recursion_through_constructors() {
        let s = TypeStore::new();
        // X = nil | (Int, Y) and Y = X
        let bx = TyExpr::Union(
            Box::new(TyExpr::Done(s.nil())),
            Box::new(TyExpr::Product(
                Box::new(TyExpr::Done(s.int_any())),
                Box::new(TyExpr::Ref(1)),
            )),
        );
        let by = TyExpr::Ref(0);
        let ids = s.recursive(&["X".into(), "Y".into()], &[bx, by]).unwrap();
        assert_eq!(s.desc(ids[0]), s.desc(ids[1]));
    }
}
