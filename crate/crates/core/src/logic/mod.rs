//! Propositional formulas, the KB text format, and a complete
//! consistency/entailment oracle.

mod cnf;
mod formula;
mod parser;
pub mod sat;
mod theory;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use cnf::{to_clauses, ClauseSet, Literal};
pub use formula::Formula;
pub use parser::{parse_formula, parse_kb, render_kb, ParseError, ParsedKb};
pub use theory::{entails, is_consistent, Theory, DEFAULT_BUDGET};

/// Prefix reserved for auxiliary atoms introduced by clausification.
pub const RESERVED_PREFIX: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("satisfiability check exceeded its budget of {budget} decisions")]
    BudgetExceeded { budget: u64 },
}

/// Identifier of an axiom within one KB file. Ids follow file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AxiomId(pub u32);

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Axiom {
    pub id: AxiomId,
    pub formula: Formula,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.formula.fmt(f)
    }
}
