//! Algebraic probabilistic logic programming over pluggable label algebras.
//!
//! Programs are sets of ground algebraic facts (atoms carrying a label),
//! definite background clauses, queries and evidence. A query label is the
//! sum over all interpretations of the facts entailing the query of the
//! product of the literal labels in that interpretation; conditional labels
//! divide the query-and-evidence label by the evidence label.
//!
//! Three label algebras ("parametrisations") are provided:
//!
//! * [`semiring::ProbSemiring`] — exact probabilities, the classical case;
//! * [`semiring::SlSemiring`] — subjective-logic opinions combined with the
//!   standard opinion sum / product / division operators;
//! * [`semiring::BetaSemiring`] — opinions treated as Beta-distributed random
//!   variables, combined by moment matching on means and variances.
//!
//! The [`experiment`] module reproduces sparse-data benchmarks on Bayesian
//! networks: ground-truth sampling, observation-based labelling, RMSE and
//! calibration reporting.

pub mod bayesnet;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod opinion;
pub mod parser;
pub mod program;
pub mod semiring;

pub use error::{Error, Result};
pub use opinion::{BetaParams, ObservationCounts, Opinion, PriorConfig};
pub use program::Program;
