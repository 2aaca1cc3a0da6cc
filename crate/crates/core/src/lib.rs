//! Model checking and formula translation for multi-agent epistemic
//! probability logic where agents may interpret propositions differently.
//!
//! - [`formula`]: syntax, parser, printer, abbreviation expansion.
//! - [`structure`]: finite structures, assumption checks, prior generation.
//! - [`semantics`]: the five truth relations and common belief.
//! - [`transforms`]: model constructions relating the semantics.
//! - [`translation`]: compilation into the unambiguous indexed language.
//! - [`generate`] and [`campaign`]: seeded random models and formulas, and
//!   the randomized equivalence checks built on them.

pub mod campaign;
pub mod formula;
pub mod generate;
pub mod rational;
pub mod semantics;
pub mod stateset;
pub mod structure;
pub mod transforms;
pub mod translation;

pub use formula::{parse, AgentId, AgentSet, Formula, SurfaceFormula};
pub use rational::Rational;
pub use semantics::{Batch, Checker, EvalError, EvalMode};
pub use stateset::StateSet;
pub use structure::{Structure, StructureError};
