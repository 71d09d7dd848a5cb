//! Minimal conflicts, minimal diagnoses, and diagnosis probabilities.

mod conflict;
mod hstree;
mod probability;

pub use conflict::{find_minimal_conflict, Conflict};
pub use hstree::{enumerate_minimal_diagnoses, Enumeration, HsTree};
pub use probability::{assign_probabilities, DiagnosisDistribution};

use crate::error::Result;
use crate::fpi::{Diagnosis, Fpi};

/// Keeps the diagnoses that still satisfy every requirement of `fpi`.
pub fn filter_diagnoses(fpi: &Fpi, diagnoses: &[Diagnosis]) -> Result<Vec<Diagnosis>> {
    let mut kept = Vec::with_capacity(diagnoses.len());
    for d in diagnoses {
        if fpi.check_requirements(d)? {
            kept.push(d.clone());
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::RUNNING_EXAMPLE;
    use crate::fpi::{Origin, Polarity, TestCase};
    use crate::logic::AxiomId;

    fn d(ids: &[u32]) -> Diagnosis {
        ids.iter().map(|&i| AxiomId(i)).collect()
    }

    fn with_test_case(fpi: &Fpi, id: u32, polarity: Polarity) -> Fpi {
        let f = fpi.axiom(AxiomId(id)).unwrap().formula.clone();
        fpi.add_test_case(TestCase::new(vec![f], polarity, Origin::Initial).unwrap()).unwrap()
    }

    #[test]
    fn filtering_after_new_test_cases() {
        let fpi = Fpi::parse(RUNNING_EXAMPLE).unwrap();
        let all = vec![d(&[1]), d(&[2]), d(&[3])];
        assert_eq!(filter_diagnoses(&fpi, &all).unwrap(), all);
        let neg = with_test_case(&fpi, 3, Polarity::Negative);
        assert_eq!(filter_diagnoses(&neg, &all).unwrap(), vec![d(&[3])]);
        let pos = with_test_case(&fpi, 1, Polarity::Positive);
        assert_eq!(filter_diagnoses(&pos, &all).unwrap(), vec![d(&[2]), d(&[3])]);
    }
}
