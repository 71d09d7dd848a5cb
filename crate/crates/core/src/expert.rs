//! Simulated experts that answer queries according to a known actual
//! diagnosis, and the translation of answers into new test cases.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpi::{Diagnosis, Fpi, Origin, Polarity, TestCase};
use crate::logic::{AxiomId, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpertType {
    /// Classifies the query as a whole.
    QueryBased,
    /// Names one false axiom.
    Minimalist,
    /// Names the true axioms up to and including the first false one.
    Pragmatist,
    /// Classifies every axiom.
    Maximalist,
}

impl ExpertType {
    pub const ALL: [ExpertType; 4] =
        [ExpertType::QueryBased, ExpertType::Minimalist, ExpertType::Pragmatist, ExpertType::Maximalist];

    pub fn name(self) -> &'static str {
        match self {
            ExpertType::QueryBased => "query-based",
            ExpertType::Minimalist => "minimalist",
            ExpertType::Pragmatist => "pragmatist",
            ExpertType::Maximalist => "maximalist",
        }
    }

    pub fn is_axiom_based(self) -> bool {
        self != ExpertType::QueryBased
    }
}

impl fmt::Display for ExpertType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExpertType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExpertType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown expert type `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Y,
    N,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Y => "y",
            Label::N => "n",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Answer {
    pub label: Label,
    pub positives: Vec<AxiomId>,
    pub negatives: Vec<AxiomId>,
    pub axioms_inspected: usize,
    pub axioms_classified: usize,
    /// Whether the query is recorded as one test case rather than per axiom.
    pub whole_query: bool,
}

impl Answer {
    /// A label for the query as a whole. A `y` vouches for every axiom.
    pub fn whole(q: &[AxiomId], label: Label) -> Answer {
        Answer {
            label,
            positives: if label == Label::Y { q.to_vec() } else { Vec::new() },
            negatives: Vec::new(),
            axioms_inspected: q.len(),
            axioms_classified: q.len(),
            whole_query: true,
        }
    }

    /// Axiom-level labels for part of `q`. Valid when some axiom is labelled
    /// `n` or every axiom of `q` is labelled `y`.
    pub fn from_labels(q: &[AxiomId], labels: &[(AxiomId, Label)]) -> Result<Answer> {
        let mut positives = Vec::new();
        let mut negatives = Vec::new();
        for &id in q {
            match labels.iter().filter(|(a, _)| *a == id).map(|(_, l)| *l).collect::<Vec<_>>()[..] {
                [] => {}
                [Label::Y] => positives.push(id),
                [Label::N] => negatives.push(id),
                _ => return Err(Error::InvalidAnswer(format!("axiom {id} is labelled more than once"))),
            }
        }
        if let Some((id, _)) = labels.iter().find(|(a, _)| !q.contains(a)) {
            return Err(Error::InvalidAnswer(format!("axiom {id} is not part of the current query")));
        }
        if negatives.is_empty() && positives.len() < q.len() {
            return Err(Error::InvalidAnswer("label some axiom n or every axiom y".into()));
        }
        let classified = positives.len() + negatives.len();
        Ok(Answer {
            label: if negatives.is_empty() { Label::Y } else { Label::N },
            positives,
            negatives,
            axioms_inspected: classified,
            axioms_classified: classified,
            whole_query: false,
        })
    }
}

/// The actual diagnosis a simulated expert answers by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroundTruth {
    pub actual_diagnosis: Diagnosis,
}

impl GroundTruth {
    pub fn new(actual_diagnosis: Diagnosis) -> Self {
        GroundTruth { actual_diagnosis }
    }

    /// Checks that the actual diagnosis is a minimal diagnosis of `fpi`.
    pub fn validate(&self, fpi: &Fpi) -> Result<()> {
        if !fpi.is_minimal_diagnosis(&self.actual_diagnosis)? {
            return Err(Error::InvalidGroundTruth(format!(
                "{} is not a minimal diagnosis of the KB",
                self.actual_diagnosis
            )));
        }
        Ok(())
    }
}

/// `y` iff the repaired KB `(O \ D*) ∪ B ∪ U_P` entails axiom `id` of `O`.
pub fn axiom_label(gt: &GroundTruth, fpi: &Fpi, id: AxiomId) -> Result<Label> {
    Ok(if fpi.entails_axioms(&gt.actual_diagnosis, &[id])? { Label::Y } else { Label::N })
}

/// Like [`axiom_label`] for an arbitrary formula.
pub fn formula_label(gt: &GroundTruth, fpi: &Fpi, f: &Formula) -> Result<Label> {
    Ok(if fpi.entails_formulas(&gt.actual_diagnosis, std::slice::from_ref(f))? { Label::Y } else { Label::N })
}

/// Answers `q` (axioms in ascending id order) the way an expert of type `t` would.
pub fn answer_query(gt: &GroundTruth, fpi: &Fpi, q: &[AxiomId], t: ExpertType) -> Result<Answer> {
    if q.is_empty() {
        return Err(Error::NoQuery("the query is empty".into()));
    }
    let mut labels = Vec::with_capacity(q.len());
    for &id in q {
        let label = axiom_label(gt, fpi, id)?;
        labels.push((id, label));
        if label == Label::N && t != ExpertType::Maximalist {
            break;
        }
    }
    let first_negative = labels.iter().position(|(_, l)| *l == Label::N);
    let Some(pos) = first_negative else {
        let mut ans = Answer::whole(q, Label::Y);
        if t.is_axiom_based() {
            ans.positives = q.to_vec();
            ans.whole_query = false;
        }
        return Ok(ans);
    };
    let of = |l: Label| labels.iter().filter(|(_, x)| *x == l).map(|(a, _)| *a).collect::<Vec<_>>();
    let ans = match t {
        ExpertType::QueryBased => Answer::whole(q, Label::N),
        ExpertType::Minimalist => Answer {
            label: Label::N,
            positives: Vec::new(),
            negatives: vec![labels[pos].0],
            axioms_inspected: pos + 1,
            axioms_classified: 1,
            whole_query: false,
        },
        ExpertType::Pragmatist => Answer {
            label: Label::N,
            positives: of(Label::Y),
            negatives: vec![labels[pos].0],
            axioms_inspected: pos + 1,
            axioms_classified: pos + 1,
            whole_query: false,
        },
        ExpertType::Maximalist => Answer {
            label: Label::N,
            positives: of(Label::Y),
            negatives: of(Label::N),
            axioms_inspected: q.len(),
            axioms_classified: q.len(),
            whole_query: false,
        },
    };
    Ok(ans)
}

/// Adds the test cases justified by `ans` to `fpi`. Whole-query answers add
/// `q` as one test case; axiom-level answers add one test case per axiom.
pub fn incorporate_answer(fpi: &Fpi, q: &[AxiomId], ans: &Answer, step: usize) -> Result<Fpi> {
    let origin = Origin::ExpertAnswer { step };
    let formula = |id: AxiomId| fpi.axiom(id).map(|ax| ax.formula.clone()).ok_or(Error::UnknownAxiom(id));
    let mut next = fpi.clone();
    if ans.whole_query {
        let fs = q.iter().map(|&id| formula(id)).collect::<Result<Vec<_>>>()?;
        let polarity = if ans.label == Label::Y { Polarity::Positive } else { Polarity::Negative };
        return next.add_test_case(TestCase::new(fs, polarity, origin)?);
    }
    for &id in &ans.positives {
        next = next.add_test_case(TestCase::new(vec![formula(id)?], Polarity::Positive, origin)?)?;
    }
    for &id in &ans.negatives {
        next = next.add_test_case(TestCase::new(vec![formula(id)?], Polarity::Negative, origin)?)?;
    }
    Ok(next)
}
