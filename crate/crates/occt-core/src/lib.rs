//! Type checker for a small call-by-value functional language with
//! set-theoretic types (unions, intersections, negations, recursive types),
//! type-cases that narrow arbitrary tested sub-expressions, and
//! reconstruction of intersection (overloaded) types for functions.
//!
//! The crate is organised around a shared [`types::TypeStore`] that interns
//! every type; all other modules are pure functions over store handles:
//!
//! * [`types`]: construction and interning of types,
//! * [`subtype`]: emptiness, subtyping and equivalence,
//! * [`typeops`]: operators on function, product and record types,
//! * [`syntax`]: AST, parser, occurrence paths and pretty-printing,
//! * [`checker`]: the flow-sensitive typing algorithm,
//! * [`infer`]: intersection-type reconstruction for lambdas,
//! * [`eval`]: a small-step interpreter,
//! * [`session`]: top-level declarations, reports, builtins.

pub mod builtins;
pub mod checker;
pub mod diag;
pub mod eval;
pub mod infer;
pub mod session;
pub mod subtype;
pub mod syntax;
pub mod typeops;
pub mod types;

pub use diag::{Diagnostic, Severity, Span, TypeError};
pub use types::{TypeId, TypeStore};
