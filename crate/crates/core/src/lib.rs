//! Generalized set-assignment semantics for Parry-style analytic implication
//! and Epstein-style dependence logics.
//!
//! The crate evaluates formulas in finite gE-models, decides both consequence
//! relations model by model, bridges topic-augmented Kripke models to the
//! algebraic side, checks Hilbert proofs, and searches bounded model spaces
//! for countermodels.

pub mod calculus;
pub mod content_algebra;
pub mod formula;
pub mod ge_model;
pub mod kripke;
pub mod par;
pub mod search;
pub mod soundness;
pub mod truth_algebra;

pub use formula::{parse, Formula};
pub use ge_model::{GEModel, LogicVariant, SemValue};
