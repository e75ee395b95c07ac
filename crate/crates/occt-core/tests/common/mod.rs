//! Deterministic generators shared by the property and acceptance suites.
#![allow(dead_code)] // each test binary uses a different subset

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use occt_core::types::{TypeId, TypeStore};

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Small base types: kind tops, singletons and simple unions.
    pub fn base_type(&mut self, s: &TypeStore) -> TypeId {
        match self.rng.gen_range(0..10) {
            0 => s.int_any(),
            1 => s.bool_ty(),
            2 => s.string_any(),
            3 => s.char_any(),
            4 => s.int(self.rng.gen_range(0..4)),
            5 => s.atom("true"),
            6 => s.atom("false"),
            7 => s.union(s.int_any(), s.bool_ty()),
            8 => s.diff(s.any(), s.int_any()),
            _ => s.union(s.int(1), s.string_any()),
        }
    }

    /// Random type of bounded depth over all connectives and constructors.
    pub fn small_type(&mut self, s: &TypeStore, depth: u32) -> TypeId {
        if depth == 0 {
            return match self.rng.gen_range(0..8) {
                0 => s.empty(),
                1 => s.any(),
                _ => self.base_type(s),
            };
        }
        match self.rng.gen_range(0..8) {
            0 => {
                let a = self.small_type(s, depth - 1);
                let b = self.small_type(s, depth - 1);
                s.union(a, b)
            }
            1 => {
                let a = self.small_type(s, depth - 1);
                let b = self.small_type(s, depth - 1);
                s.inter(a, b)
            }
            2 => {
                let a = self.small_type(s, depth - 1);
                s.neg(a)
            }
            3 => {
                let a = self.small_type(s, depth - 1);
                let b = self.small_type(s, depth - 1);
                s.product(a, b)
            }
            4 => {
                let a = self.small_type(s, depth - 1);
                let b = self.small_type(s, depth - 1);
                s.arrow(a, b)
            }
            5 => {
                let a = self.small_type(s, depth - 1);
                let fields = vec![(s.label_id("a"), a)];
                if self.rng.gen_bool(0.5) {
                    s.record_closed(fields)
                } else {
                    s.record_open(fields)
                }
            }
            _ => self.base_type(s),
        }
    }

    /// Union of intersections of arrows over base types.
    pub fn arrow_dnf(&mut self, s: &TypeStore) -> TypeId {
        let summands = self.rng.gen_range(1..=3);
        let mut out = s.empty();
        for _ in 0..summands {
            let arrows = self.rng.gen_range(1..=3);
            let mut summand = s.arrow_any();
            for _ in 0..arrows {
                let d = self.base_type(s);
                let c = self.base_type(s);
                summand = s.inter(summand, s.arrow(d, c));
            }
            out = s.union(out, summand);
        }
        out
    }

    /// Record types built from rows, unions, intersections and the odd
    /// negated row.
    pub fn record_type(&mut self, s: &TypeStore, depth: u32) -> TypeId {
        let labels = ["a", "b", "c"];
        let mut row = Vec::new();
        for l in labels {
            match self.rng.gen_range(0..4) {
                0 => {}
                1 => row.push((s.label_id(l), self.base_type(s))),
                2 => row.push((s.label_id(l), s.optional(self.base_type(s)))),
                _ => row.push((s.label_id(l), s.union(s.int(1), s.bool_ty()))),
            }
        }
        let base = if self.rng.gen_bool(0.5) {
            s.record_closed(row)
        } else {
            s.record_open(row)
        };
        if depth == 0 {
            return base;
        }
        match self.rng.gen_range(0..4) {
            0 => s.union(base, self.record_type(s, depth - 1)),
            1 => s.inter(
                s.record_any(),
                s.inter(base, self.record_type(s, depth - 1)),
            ),
            2 => s.diff(base, self.record_type(s, depth - 1)),
            _ => base,
        }
    }

    /// Source text of a random well-typed closed program expression.  The
    /// prelude defines `not_`, `or_`, `and_`, `is_int` (see
    /// [`soundness_prelude`]).
    pub fn program(&mut self, depth: u32) -> String {
        self.expr_of(depth, Kind::Any)
    }

    fn expr_of(&mut self, depth: u32, kind: Kind) -> String {
        if depth == 0 {
            return self.leaf(kind);
        }
        match kind {
            Kind::Int => match self.rng.gen_range(0..5) {
                0 => format!("incr ({})", self.expr_of(depth - 1, Kind::Int)),
                1 => format!(
                    "if ({}) is Int then ({}) else ({})",
                    self.expr_of(depth - 1, Kind::Any),
                    self.expr_of(depth - 1, Kind::Int),
                    self.expr_of(depth - 1, Kind::Int)
                ),
                2 => format!(
                    "fst ({}, {})",
                    self.expr_of(depth - 1, Kind::Int),
                    self.leaf(Kind::Any)
                ),
                3 => format!("let v = ({}) in incr v", self.expr_of(depth - 1, Kind::Int)),
                _ => self.leaf(Kind::Int),
            },
            Kind::Bool => match self.rng.gen_range(0..5) {
                0 => format!("not_ ({})", self.expr_of(depth - 1, Kind::Any)),
                1 => format!(
                    "or_ ({}) ({})",
                    self.expr_of(depth - 1, Kind::Bool),
                    self.expr_of(depth - 1, Kind::Bool)
                ),
                2 => format!("is_int ({})", self.expr_of(depth - 1, Kind::Any)),
                3 => format!(
                    "if ({}) is true then false else true",
                    self.expr_of(depth - 1, Kind::Bool)
                ),
                _ => self.leaf(Kind::Bool),
            },
            Kind::Any => match self.rng.gen_range(0..7) {
                0 => format!(
                    "({}, {})",
                    self.expr_of(depth - 1, Kind::Any),
                    self.expr_of(depth - 1, Kind::Any)
                ),
                1 => format!(
                    "snd ({}, {})",
                    self.leaf(Kind::Any),
                    self.expr_of(depth - 1, Kind::Any)
                ),
                2 => self.expr_of(depth - 1, Kind::Int),
                3 => self.expr_of(depth - 1, Kind::Bool),
                4 => format!("{{{{}} with a = {}}}.a", self.expr_of(depth - 1, Kind::Any)),
                5 => format!(
                    "(fun (x : Any) -> (x, x)) ({})",
                    self.expr_of(depth - 1, Kind::Any)
                ),
                _ => self.leaf(Kind::Any),
            },
        }
    }

    fn leaf(&mut self, kind: Kind) -> String {
        match kind {
            Kind::Int => self.rng.gen_range(0..5).to_string(),
            Kind::Bool => if self.rng.gen_bool(0.5) {
                "true"
            } else {
                "false"
            }
            .to_string(),
            Kind::Any => match self.rng.gen_range(0..6) {
                0 => "42".into(),
                1 => "true".into(),
                2 => "nil".into(),
                3 => "'c'".into(),
                4 => "\"s\"".into(),
                _ => "(1, false)".into(),
            },
        }
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Int,
    Bool,
    Any,
}

pub fn soundness_prelude() -> &'static str {
    concat!(
        "let not_ = fun (x : Any) -> if x is True then false else true\n",
        "let or_ = fun (x : Any) -> fun (y: Any) -> if x is True then true else if y is True then true else false\n",
        "let and_ = fun (x : Any) -> fun (y : Any) -> if not_ (or_ (not_ x) (not_ y)) is True then true else false\n",
        "let is_int = fun (x : Any) -> if x is Int then true else false\n",
    )
}
