//! Built-in functions available to every program.
//!
//! The defaults are `incr : Int -> Int` and `lnot : Bool -> Bool`
//! (projections are syntax, not builtins).  Additional builtins can be
//! declared in a file of `name : Type` lines; `#` starts a comment.  A
//! builtin declared without a delta rule participates in checking but gets
//! stuck if a program tries to reduce an application of it.

use std::collections::BTreeMap;

use crate::diag::TypeError;
use crate::syntax::parser::{parse_type, TypeNames};
use crate::types::{TypeId, TypeStore};

pub fn default_builtins(store: &TypeStore) -> BTreeMap<String, TypeId> {
    let mut map = BTreeMap::new();
    map.insert(
        "incr".to_string(),
        store.arrow(store.int_any(), store.int_any()),
    );
    map.insert(
        "lnot".to_string(),
        store.arrow(store.bool_ty(), store.bool_ty()),
    );
    map
}

/// Parses a builtins file: one `name : Type` per line.
pub fn parse_builtins(
    store: &TypeStore,
    names: &TypeNames,
    src: &str,
) -> Result<BTreeMap<String, TypeId>, TypeError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, ty_src)) = line.split_once(':') else {
            return Err(TypeError::Syntax {
                span: crate::diag::Span::new(idx as u32 + 1, 1, idx as u32 + 1, 1),
                message: format!("expected `name : Type`, got `{line}`"),
            });
        };
        let t = parse_type(store, names, ty_src.trim())?;
        map.insert(name.trim().to_string(), t);
    }
    Ok(map)
}
