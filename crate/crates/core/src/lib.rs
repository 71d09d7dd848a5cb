//! Interactive fault localization for propositional knowledge bases.
//!
//! A knowledge base is split into possibly faulty axioms, trusted background
//! axioms, and positive/negative test cases. The engine computes minimal
//! diagnoses (sets of axioms whose removal repairs the KB) and asks an expert
//! questions about axioms until a single diagnosis remains. Questions are
//! either *normal* queries (sets of axioms) or *singleton* queries (exactly
//! one axiom), chosen by a two-stage search over q-partitions.

pub mod diagnosis;
pub mod error;
pub mod examples;
pub mod expert;
pub mod fpi;
pub mod harness;
pub mod heuristics;
pub mod logic;
pub mod qpartition;
pub mod search;
pub mod service;
pub mod session;

pub use error::{Error, Result};
