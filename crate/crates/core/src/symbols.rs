//! Reserved symbol namespace for symbols introduced by approximation and by
//! the grounding oracles. The parser rejects user symbols in this space.

use crate::terms::Symbol;

/// The single projection predicate.
pub const PROJECTION_PRED: &str = "T";
const PROJECTION_FN_PREFIX: &str = "f_";
const SHALLOW_PREFIX: &str = "S_";
const FRESH_CONST_PREFIX: &str = "sk_";

pub fn projection_fn(pred: &Symbol) -> Symbol {
    Symbol::new(&format!("{PROJECTION_FN_PREFIX}{pred}"))
}

/// Predicate encoded by a projection function symbol.
pub fn projected_pred(f: &Symbol) -> Option<Symbol> {
    f.as_str().strip_prefix(PROJECTION_FN_PREFIX).map(Symbol::new)
}

pub fn is_projection_fn(f: &Symbol) -> bool {
    f.as_str().starts_with(PROJECTION_FN_PREFIX)
}

pub fn shallow_pred(n: usize) -> Symbol {
    Symbol::new(&format!("{SHALLOW_PREFIX}{n}"))
}

pub fn is_shallow_pred(p: &Symbol) -> bool {
    p.as_str().starts_with(SHALLOW_PREFIX)
}

pub fn fresh_constant(n: usize) -> Symbol {
    Symbol::new(&format!("{FRESH_CONST_PREFIX}{n}"))
}

pub fn is_reserved(name: &str) -> bool {
    name == PROJECTION_PRED
        || name.starts_with(PROJECTION_FN_PREFIX)
        || name.starts_with(SHALLOW_PREFIX)
        || name.starts_with(FRESH_CONST_PREFIX)
}
