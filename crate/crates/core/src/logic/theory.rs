use std::collections::HashMap;

use super::cnf::{Encoder, Root};
use super::formula::Formula;
use super::sat::{self, Lit};
use super::LogicError;

/// Default decision budget for a single satisfiability call.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone)]
struct Slot {
    /// Clauses asserting the formula.
    asserted: Vec<Vec<Lit>>,
    /// Clauses defining `root <-> formula`, over an auxiliary range disjoint
    /// from `asserted`.
    defined: Vec<Vec<Lit>>,
    root: Root,
}

/// A fixed list of formulas ("slots"), clausified once, against which
/// consistency and entailment of slot subsets can be decided.
///
/// Every slot gets its own auxiliary variables, so any subset of slot
/// encodings can be combined without interference.
#[derive(Debug, Clone)]
pub struct Theory {
    slots: Vec<Slot>,
    num_vars: u32,
    budget: u64,
}

impl Theory {
    pub fn new<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Self {
        Self::with_budget(formulas, DEFAULT_BUDGET)
    }

    pub fn with_budget<'a>(formulas: impl IntoIterator<Item = &'a Formula>, budget: u64) -> Self {
        let formulas: Vec<&Formula> = formulas.into_iter().collect();
        let mut atoms: HashMap<&str, u32> = HashMap::new();
        for f in &formulas {
            for a in f.atoms() {
                let next = atoms.len() as u32;
                atoms.entry(a).or_insert(next);
            }
        }
        let lookup = |name: &str| atoms[name];
        let mut enc = Encoder::new(atoms.len() as u32);
        let mut slots = Vec::with_capacity(formulas.len());
        for f in formulas {
            enc.assert(f, &lookup);
            let asserted = std::mem::take(&mut enc.clauses);
            let root = enc.define_root(f, &lookup);
            let defined = std::mem::take(&mut enc.clauses);
            slots.push(Slot { asserted, defined, root });
        }
        Theory { slots, num_vars: enc.next_var, budget }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Whether the conjunction of the given slots is satisfiable.
    pub fn is_consistent(&self, kb: &[usize]) -> Result<bool, LogicError> {
        let clauses = kb.iter().flat_map(|&s| self.slots[s].asserted.iter().map(Vec::as_slice));
        sat::solve(self.num_vars, clauses, self.budget)
    }

    /// Whether the slots in `kb` entail the conjunction of the slots in
    /// `goal`. An inconsistent `kb` entails everything.
    pub fn entails(&self, kb: &[usize], goal: &[usize]) -> Result<bool, LogicError> {
        let mut negated_goal = Vec::new();
        for &g in goal {
            match self.slots[g].root {
                Root::Const(true) => {}
                // a false conjunct makes the negated goal trivially true
                Root::Const(false) => return self.is_consistent(kb).map(|c| !c),
                Root::Lit(r) => negated_goal.push(!r),
            }
        }
        let definitions = goal.iter().flat_map(|&g| self.slots[g].defined.iter().map(Vec::as_slice));
        let asserted = kb.iter().flat_map(|&s| self.slots[s].asserted.iter().map(Vec::as_slice));
        let clauses = asserted.chain(definitions).chain(std::iter::once(negated_goal.as_slice()));
        sat::solve(self.num_vars, clauses, self.budget).map(|sat| !sat)
    }
}

/// Whether `formulas` are jointly satisfiable.
pub fn is_consistent(formulas: &[Formula]) -> Result<bool, LogicError> {
    let theory = Theory::new(formulas);
    let all: Vec<usize> = (0..theory.len()).collect();
    theory.is_consistent(&all)
}

/// Whether `kb` entails the conjunction of `goal`.
pub fn entails(kb: &[Formula], goal: &[Formula]) -> Result<bool, LogicError> {
    let theory = Theory::new(kb.iter().chain(goal));
    let kb_slots: Vec<usize> = (0..kb.len()).collect();
    let goal_slots: Vec<usize> = (kb.len()..kb.len() + goal.len()).collect();
    theory.entails(&kb_slots, &goal_slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn fs(src: &[&str]) -> Vec<Formula> {
        src.iter().map(|s| parse_formula(s).unwrap()).collect()
    }

    #[test]
    fn consistency_examples() {
        assert!(!is_consistent(&fs(&["a", "!a"])).unwrap());
        assert!(is_consistent(&[]).unwrap());
        assert!(is_consistent(&fs(&["a <-> !b", "a | b"])).unwrap());
        assert!(!is_consistent(&fs(&["a <-> !a"])).unwrap());
    }

    #[test]
    fn entailment_examples() {
        assert!(entails(&fs(&["a", "a -> b"]), &fs(&["b"])).unwrap());
        assert!(!entails(&[], &fs(&["a"])).unwrap());
        let running = fs(&["ar -> w", "w -> au", "au -> e & p", "ar"]);
        assert!(entails(&running, &fs(&["e"])).unwrap());
        assert!(entails(&running, &fs(&["e", "p", "ar -> au"])).unwrap());
        assert!(!entails(&running[1..], &fs(&["e"])).unwrap());
        // inconsistent kb entails anything
        assert!(entails(&fs(&["x", "!x"]), &fs(&["y"])).unwrap());
        assert!(entails(&[], &fs(&["true", "y | !y"])).unwrap());
        assert!(!entails(&fs(&["y"]), &fs(&["false"])).unwrap());
    }

    #[test]
    fn budget_exhaustion_propagates() {
        let theory = Theory::with_budget(&fs(&["a | b", "c | d"]), 0);
        assert_eq!(theory.is_consistent(&[0, 1]), Err(LogicError::BudgetExceeded { budget: 0 }));
    }
}
