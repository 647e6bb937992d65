//! Positive branching-program proof toolkit.
//!
//! Formulas are hash-consed eNDT terms (`term`), branching programs live in
//! `bp`, the four sequent dialects and their checker are in `sequent`, and
//! the proof generators are split between `lemmas`, `php` and `sim`.

// Sequents are built from `&[a.clone()]` cedents throughout; `slice::from_ref`
// would only obscure that.
#![allow(clippy::cloned_ref_to_slice_refs)]

pub mod bp;
pub mod corpus;
pub mod dialect;
pub mod lemmas;
pub mod oracle;
pub mod php;
pub mod sequent;
pub mod sim;
pub mod term;

pub use dialect::Dialect;
pub use sequent::{Justification, Line, Proof, Rule, Sequent};
pub use term::{Assignment, ExtAxiomSet, ExtVar, Formula, Kind, Literal, PropVar, TruthTable};
