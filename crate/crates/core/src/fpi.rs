//! Fault localization problem instances: possibly faulty axioms `O`,
//! background `B`, positive test cases `P` and negative test cases `N`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{parse_kb, Axiom, AxiomId, Formula, ParsedKb, Theory, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Origin {
    Initial,
    ExpertAnswer { step: usize },
}

/// A conjunction of formulas that must (positive) or must not (negative) be
/// entailed by the intended KB.
#[derive(Debug, Clone)]
pub struct TestCase {
    pub axioms: Vec<Formula>,
    pub polarity: Polarity,
    pub origin: Origin,
}

impl TestCase {
    pub fn new(axioms: Vec<Formula>, polarity: Polarity, origin: Origin) -> Result<Self> {
        if axioms.is_empty() {
            return Err(Error::EmptyTestCase);
        }
        Ok(TestCase { axioms, polarity, origin })
    }

    /// Canonical identity: the set of formulas. Order, duplicates and
    /// origin are irrelevant.
    pub fn key(&self) -> BTreeSet<&Formula> {
        self.axioms.iter().collect()
    }
}

impl PartialEq for TestCase {
    fn eq(&self, other: &Self) -> bool {
        self.polarity == other.polarity && self.key() == other.key()
    }
}

/// A set of axiom ids from `O`, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Diagnosis(BTreeSet<AxiomId>);

impl Diagnosis {
    pub fn new(ids: impl IntoIterator<Item = AxiomId>) -> Self {
        Diagnosis(ids.into_iter().collect())
    }

    pub fn empty() -> Self {
        Diagnosis::default()
    }

    pub fn ids(&self) -> &BTreeSet<AxiomId> {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = AxiomId> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, id: AxiomId) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &Diagnosis) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Diagnosis) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn with(&self, id: AxiomId) -> Diagnosis {
        let mut ids = self.0.clone();
        ids.insert(id);
        Diagnosis(ids)
    }

    pub fn without(&self, id: AxiomId) -> Diagnosis {
        let mut ids = self.0.clone();
        ids.remove(&id);
        Diagnosis(ids)
    }
}

impl FromIterator<AxiomId> for Diagnosis {
    fn from_iter<I: IntoIterator<Item = AxiomId>>(iter: I) -> Self {
        Diagnosis::new(iter)
    }
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("]")
    }
}

/// Slot layout of the cached reasoner.
#[derive(Debug)]
struct Reasoner {
    theory: Theory,
    o_slot: HashMap<AxiomId, usize>,
    /// B and U_P slots: always part of the reasoning context.
    context: Vec<usize>,
    negatives: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Fpi {
    o: Vec<Axiom>,
    b: Vec<Axiom>,
    p: Vec<TestCase>,
    n: Vec<TestCase>,
    budget: u64,
    reasoner: OnceLock<Arc<Reasoner>>,
}

impl PartialEq for Fpi {
    fn eq(&self, other: &Self) -> bool {
        self.o == other.o && self.b == other.b && self.p == other.p && self.n == other.n
    }
}

impl Fpi {
    pub fn new(o: Vec<Axiom>, b: Vec<Axiom>, p: Vec<TestCase>, n: Vec<TestCase>) -> Result<Self> {
        if let Some(ax) = o.iter().find(|ax| b.iter().any(|bx| bx.formula == ax.formula)) {
            return Err(Error::OverlappingAxiom(ax.formula.to_string()));
        }
        if p.iter().chain(&n).any(|tc| tc.axioms.is_empty()) {
            return Err(Error::EmptyTestCase);
        }
        let mut fpi = Fpi { o, b, p: Vec::new(), n: Vec::new(), budget: DEFAULT_BUDGET, reasoner: OnceLock::new() };
        for tc in p.into_iter().chain(n) {
            fpi.push_test_case(tc);
        }
        Ok(fpi)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_parsed(parse_kb(text)?)
    }

    pub fn from_parsed(kb: ParsedKb) -> Result<Self> {
        let p = kb.p.into_iter().map(|fs| TestCase::new(fs, Polarity::Positive, Origin::Initial));
        let n = kb.n.into_iter().map(|fs| TestCase::new(fs, Polarity::Negative, Origin::Initial));
        let p = p.collect::<Result<Vec<_>>>()?;
        let n = n.collect::<Result<Vec<_>>>()?;
        Fpi::new(kb.o, kb.b, p, n)
    }

    /// Decision budget for each satisfiability call.
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self.reasoner = OnceLock::new();
        self
    }

    pub fn o(&self) -> &[Axiom] {
        &self.o
    }

    pub fn b(&self) -> &[Axiom] {
        &self.b
    }

    pub fn positives(&self) -> &[TestCase] {
        &self.p
    }

    pub fn negatives(&self) -> &[TestCase] {
        &self.n
    }

    pub fn axiom(&self, id: AxiomId) -> Option<&Axiom> {
        self.o.iter().find(|ax| ax.id == id)
    }

    pub fn o_ids(&self) -> impl Iterator<Item = AxiomId> + '_ {
        self.o.iter().map(|ax| ax.id)
    }

    /// Union of all positive test cases.
    pub fn u_p(&self) -> impl Iterator<Item = &Formula> {
        self.p.iter().flat_map(|tc| tc.axioms.iter())
    }

    fn push_test_case(&mut self, tc: TestCase) -> bool {
        let list = match tc.polarity {
            Polarity::Positive => &mut self.p,
            Polarity::Negative => &mut self.n,
        };
        if list.contains(&tc) {
            return false;
        }
        list.push(tc);
        true
    }

    /// Returns the FPI extended by `tc`. Identical test cases are not added twice.
    pub fn add_test_case(&self, tc: TestCase) -> Result<Fpi> {
        if tc.axioms.is_empty() {
            return Err(Error::EmptyTestCase);
        }
        let mut next = Fpi {
            o: self.o.clone(),
            b: self.b.clone(),
            p: self.p.clone(),
            n: self.n.clone(),
            budget: self.budget,
            reasoner: OnceLock::new(),
        };
        if !next.push_test_case(tc) {
            next.reasoner = self.reasoner.clone();
        }
        Ok(next)
    }

    fn reasoner(&self) -> &Reasoner {
        self.reasoner.get_or_init(|| {
            let mut formulas: Vec<&Formula> = self.o.iter().map(|ax| &ax.formula).collect();
            let o_slot = self.o.iter().enumerate().map(|(i, ax)| (ax.id, i)).collect();
            let mut context = Vec::new();
            for f in self.b.iter().map(|ax| &ax.formula).chain(self.u_p()) {
                context.push(formulas.len());
                formulas.push(f);
            }
            let mut negatives = Vec::new();
            for tc in &self.n {
                let start = formulas.len();
                formulas.extend(tc.axioms.iter());
                negatives.push((start..formulas.len()).collect());
            }
            let theory = Theory::with_budget(formulas, self.budget);
            Arc::new(Reasoner { theory, o_slot, context, negatives })
        })
    }

    fn slots(&self, kept: impl IntoIterator<Item = AxiomId>) -> Result<Vec<usize>> {
        let r = self.reasoner();
        let mut kb = r.context.clone();
        for id in kept {
            kb.push(*r.o_slot.get(&id).ok_or(Error::UnknownAxiom(id))?);
        }
        Ok(kb)
    }

    /// Whether `kept ∪ B ∪ U_P` meets every requirement: consistency and no
    /// negative test case entailed. Positive test cases hold trivially since
    /// `U_P` is part of the context.
    pub fn satisfies_requirements(&self, kept: impl IntoIterator<Item = AxiomId>) -> Result<bool> {
        let kb = self.slots(kept)?;
        let r = self.reasoner();
        if !r.theory.is_consistent(&kb)? {
            return Ok(false);
        }
        for neg in &r.negatives {
            if r.theory.entails(&kb, neg)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether removing `removed` from `O` yields a KB meeting all requirements.
    pub fn check_requirements(&self, removed: &Diagnosis) -> Result<bool> {
        if let Some(id) = removed.iter().find(|id| !self.reasoner().o_slot.contains_key(id)) {
            return Err(Error::UnknownAxiom(id));
        }
        self.satisfies_requirements(self.o_ids().filter(|id| !removed.contains(*id)))
    }

    /// A diagnosis is minimal iff it is one and no single-element removal is;
    /// sufficient because violations are monotone in the kept axioms.
    pub fn is_minimal_diagnosis(&self, d: &Diagnosis) -> Result<bool> {
        if !self.check_requirements(d)? {
            return Ok(false);
        }
        for id in d.iter() {
            if self.check_requirements(&d.without(id))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `(O \ removed) ∪ B ∪ U_P` entails the conjunction of the `goal` axioms of `O`.
    pub fn entails_axioms(&self, removed: &Diagnosis, goal: &[AxiomId]) -> Result<bool> {
        let kb = self.slots(self.o_ids().filter(|id| !removed.contains(*id)))?;
        let r = self.reasoner();
        let goal: Vec<usize> =
            goal.iter().map(|id| r.o_slot.get(id).copied().ok_or(Error::UnknownAxiom(*id))).collect::<Result<_>>()?;
        Ok(r.theory.entails(&kb, &goal)?)
    }

    /// Whether `(O \ removed) ∪ B ∪ U_P` entails the conjunction of arbitrary formulas.
    pub fn entails_formulas(&self, removed: &Diagnosis, goal: &[Formula]) -> Result<bool> {
        let kb: Vec<Formula> = self
            .o
            .iter()
            .filter(|ax| !removed.contains(ax.id))
            .map(|ax| ax.formula.clone())
            .chain(self.b.iter().map(|ax| ax.formula.clone()))
            .chain(self.u_p().cloned())
            .collect();
        let theory = Theory::with_budget(kb.iter().chain(goal), self.budget);
        let kb_slots: Vec<usize> = (0..kb.len()).collect();
        let goal_slots: Vec<usize> = (kb.len()..kb.len() + goal.len()).collect();
        Ok(theory.entails(&kb_slots, &goal_slots)?)
    }

    /// Whether the FPI violates any requirement with nothing removed.
    pub fn has_violation(&self) -> Result<bool> {
        Ok(!self.check_requirements(&Diagnosis::empty())?)
    }
}
