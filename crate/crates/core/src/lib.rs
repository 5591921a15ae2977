//! Theorem proving and model building for equality-free clause logic by
//! over-approximation into the monadic shallow linear Horn (mslH) fragment.
//!
//! The pipeline: [`approximation`] maps a clause set into mslH while
//! recording an ancestor trace, [`saturation`] decides the approximation,
//! [`cores`] turns a refutation into a conflicting core, [`lifting`] walks
//! the trace backwards, and [`refinement`] instantiates the original set
//! whenever lifting fails. [`engine`] drives the loop and [`model`]
//! answers queries against the saturated approximation when the input is
//! satisfiable.

pub mod approximation;
pub mod clause_set;
pub mod cores;
pub mod engine;
pub mod error;
pub mod ground;
pub mod lifting;
pub mod model;
pub mod ordering;
pub mod refinement;
pub mod saturation;
pub mod symbols;
pub mod syntax;
pub mod terms;

pub use clause_set::{ClauseId, ClauseSet};
pub use error::{Error, Result};
pub use terms::{
    classify, skeleton, Atom, Classification, Clause, LitRef, Position, Signature, Subst, Symbol,
    Term, Var,
};
