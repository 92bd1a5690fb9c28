//! Degree-k normal forms (constituents) for additive logics whose
//! non-propositional connectives may be partial, with a constructive rewriter
//! into finite disjunctions of constituents and bounded semantic checkers.

pub mod cli;
pub mod constituents;
pub mod domain;
pub mod error;
pub mod logics;
pub mod rewriter;
pub mod syntax;

pub use error::{Error, Result};
