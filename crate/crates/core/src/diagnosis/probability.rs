use std::collections::BTreeMap;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fpi::Diagnosis;

/// Normalized weights over a set of diagnoses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosisDistribution {
    weights: BTreeMap<Diagnosis, f64>,
}

/// Independent uniform `(0,1)` draws per diagnosis, normalized.
pub fn assign_probabilities(diagnoses: &[Diagnosis], seed: u64) -> DiagnosisDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = diagnoses.iter().map(|d| (d.clone(), rng.sample::<f64, _>(Open01)));
    DiagnosisDistribution::normalized(raw)
}

impl DiagnosisDistribution {
    pub fn uniform(diagnoses: &[Diagnosis]) -> Self {
        Self::normalized(diagnoses.iter().map(|d| (d.clone(), 1.0)))
    }

    fn normalized(raw: impl IntoIterator<Item = (Diagnosis, f64)>) -> Self {
        let mut weights: BTreeMap<Diagnosis, f64> = raw.into_iter().collect();
        let total: f64 = weights.values().sum();
        if total > 0.0 {
            weights.values_mut().for_each(|w| *w /= total);
        }
        DiagnosisDistribution { weights }
    }

    /// Weight of `d`, zero if unknown.
    pub fn p(&self, d: &Diagnosis) -> f64 {
        self.weights.get(d).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Diagnosis, f64)> {
        self.weights.iter().map(|(d, w)| (d, *w))
    }

    /// Distribution over `current`: known diagnoses keep their weight,
    /// new ones get the mean weight of the known ones, then all is
    /// renormalized. Falls back to uniform if nothing is known.
    pub fn refresh(&self, current: &[Diagnosis]) -> Self {
        let known: Vec<f64> = current.iter().filter_map(|d| self.weights.get(d).copied()).collect();
        if known.is_empty() {
            return Self::uniform(current);
        }
        let mean = known.iter().sum::<f64>() / known.len() as f64;
        Self::normalized(current.iter().map(|d| (d.clone(), self.weights.get(d).copied().unwrap_or(mean))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::AxiomId;

    fn d(ids: &[u32]) -> Diagnosis {
        ids.iter().map(|&i| AxiomId(i)).collect()
    }

    #[test]
    fn single_diagnosis_has_weight_one() {
        let dist = assign_probabilities(&[d(&[1])], 3);
        assert_eq!(dist.p(&d(&[1])), 1.0);
    }

    #[test]
    fn seeded_and_normalized() {
        let ds: Vec<Diagnosis> = (1..=7).map(|i| d(&[i])).collect();
        let a = assign_probabilities(&ds, 42);
        assert_eq!(a, assign_probabilities(&ds, 42));
        assert_ne!(a, assign_probabilities(&ds, 43));
        assert!(a.iter().all(|(_, w)| w > 0.0));
        assert!((a.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn refresh_keeps_ratios_and_gives_newcomers_the_mean() {
        let dist = DiagnosisDistribution::normalized([(d(&[1]), 0.2), (d(&[2]), 0.6), (d(&[3]), 0.2)]);
        let next = dist.refresh(&[d(&[2]), d(&[3]), d(&[4])]);
        // survivors 0.6 and 0.2, newcomer 0.4, total 1.2
        assert!((next.p(&d(&[2])) - 0.5).abs() < 1e-12);
        assert!((next.p(&d(&[3])) - 0.2 / 1.2).abs() < 1e-12);
        assert!((next.p(&d(&[4])) - 0.4 / 1.2).abs() < 1e-12);
        let fresh = dist.refresh(&[d(&[5]), d(&[6])]);
        assert_eq!(fresh.p(&d(&[5])), 0.5);
    }
}
