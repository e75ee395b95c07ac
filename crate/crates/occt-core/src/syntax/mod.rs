//! Surface language: abstract syntax, occurrence paths, parser and printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::{
    expr_equal, occ, sub_occurrences, Const, Expr, ExprKind, LambdaAnnot, Path, PathStep, ProjSide,
};
pub use parser::{parse_expr_or_decl, parse_program, Decl, Program, TopLevel, TypeNames};
pub use pretty::pretty_type;
