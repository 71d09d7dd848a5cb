//! Q-partitions over a fixed list of diagnoses, their traits and
//! axioms-traits matrices, the two successor functions, and query extraction.
//!
//! Diagnoses are referred to by their index in the ambient list `ds`; every
//! part of a partition is kept in ascending index order.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpi::Diagnosis;
use crate::logic::AxiomId;

pub type Trait = BTreeSet<AxiomId>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QPartition {
    pub d_plus: Vec<usize>,
    pub d_minus: Vec<usize>,
    pub d_zero: Vec<usize>,
}

impl QPartition {
    /// The search root `⟨∅, D, ∅⟩`.
    pub fn root(n: usize) -> Self {
        QPartition { d_plus: Vec::new(), d_minus: (0..n).collect(), d_zero: Vec::new() }
    }

    /// Partition with the given `D−`; everything else goes to `D+`.
    pub fn from_minus(n: usize, d_minus: impl IntoIterator<Item = usize>) -> Self {
        let d_minus: BTreeSet<usize> = d_minus.into_iter().collect();
        QPartition {
            d_plus: (0..n).filter(|i| !d_minus.contains(i)).collect(),
            d_minus: d_minus.into_iter().collect(),
            d_zero: Vec::new(),
        }
    }

    pub fn total(&self) -> usize {
        self.d_plus.len() + self.d_minus.len() + self.d_zero.len()
    }

    /// `[|D+|, |D−|]`
    pub fn sizes(&self) -> [usize; 2] {
        [self.d_plus.len(), self.d_minus.len()]
    }
}

/// Union of the diagnoses at `idx`.
pub fn union_of(ds: &[Diagnosis], idx: &[usize]) -> BTreeSet<AxiomId> {
    idx.iter().flat_map(|&i| ds[i].iter()).collect()
}

/// Intersection of the diagnoses at `idx`; empty for no diagnoses.
pub fn intersection_of(ds: &[Diagnosis], idx: &[usize]) -> BTreeSet<AxiomId> {
    let mut it = idx.iter();
    let Some(&first) = it.next() else { return BTreeSet::new() };
    let mut acc = ds[first].ids().clone();
    for &i in it {
        acc.retain(|id| ds[i].contains(*id));
    }
    acc
}

/// `D_i \ U(D+)` for every `D_i` in `D−`, in `D−` order.
pub fn compute_traits(ds: &[Diagnosis], p: &QPartition) -> Vec<Trait> {
    let u = union_of(ds, &p.d_plus);
    p.d_minus.iter().map(|&i| ds[i].iter().filter(|id| !u.contains(id)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtmRow {
    pub axiom: AxiomId,
    pub bits: Vec<bool>,
}

impl AtmRow {
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j)
    }

    fn all_ones(&self) -> bool {
        self.bits.iter().all(|b| *b)
    }

    /// Every 1 of `other` is also a 1 here.
    fn dominates(&self, other: &AtmRow) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| *a || !*b)
    }
}

/// Axioms-traits matrix: one row per axiom occurring in some trait (ascending
/// id), one column per `D−` diagnosis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atm {
    pub columns: Vec<usize>,
    pub rows: Vec<AtmRow>,
}

impl Atm {
    pub fn row(&self, axiom: AxiomId) -> Option<&AtmRow> {
        self.rows.iter().find(|r| r.axiom == axiom)
    }
}

pub fn build_atm(ds: &[Diagnosis], p: &QPartition) -> Atm {
    let traits = compute_traits(ds, p);
    let axioms: BTreeSet<AxiomId> = traits.iter().flatten().copied().collect();
    let rows = axioms
        .into_iter()
        .map(|axiom| AtmRow { axiom, bits: traits.iter().map(|t| t.contains(&axiom)).collect() })
        .collect();
    Atm { columns: p.d_minus.clone(), rows }
}

/// Rows with a 0 entry that no other such row strictly dominates, ascending
/// by axiom. All-ones rows take no part in the domination test.
pub fn superior_rows(atm: &Atm) -> Vec<AxiomId> {
    let candidates: Vec<&AtmRow> = atm.rows.iter().filter(|r| !r.all_ones()).collect();
    candidates
        .iter()
        .filter(|r| !candidates.iter().any(|o| o.dominates(r) && !r.dominates(o)))
        .map(|r| r.axiom)
        .collect()
}

/// Moves each group of equal subset-minimal traits to `D+`. Empty unless at
/// least two distinct subset-minimal traits exist. Groups are ordered by trait.
pub fn normal_successors(ds: &[Diagnosis], p: &QPartition) -> Vec<QPartition> {
    let traits = compute_traits(ds, p);
    let minimal: BTreeSet<&Trait> =
        traits.iter().filter(|t| !traits.iter().any(|o| o.len() < t.len() && o.is_subset(t))).collect();
    if minimal.len() < 2 {
        return Vec::new();
    }
    minimal
        .into_iter()
        .map(|m| {
            let (moved, rest): (Vec<_>, Vec<_>) =
                p.d_minus.iter().copied().zip(&traits).partition(|(_, t)| *t == m);
            let mut d_plus: Vec<usize> = p.d_plus.iter().copied().chain(moved.into_iter().map(|(i, _)| i)).collect();
            d_plus.sort_unstable();
            QPartition { d_plus, d_minus: rest.into_iter().map(|(i, _)| i).collect(), d_zero: p.d_zero.clone() }
        })
        .collect()
}

/// One successor per superior row: `D−` are the columns with a 1 in that row.
/// Identical rows give the same successor once. Ordered by axiom id.
pub fn singleton_successors(ds: &[Diagnosis], p: &QPartition) -> Vec<QPartition> {
    let atm = build_atm(ds, p);
    let mut out: Vec<QPartition> = Vec::new();
    for axiom in superior_rows(&atm) {
        let row = atm.row(axiom).expect("superior rows come from the matrix");
        let next = QPartition::from_minus(ds.len(), row.ones().map(|j| atm.columns[j]));
        if !out.contains(&next) {
            out.push(next);
        }
    }
    out
}

/// Axioms whose rows are all ones, i.e. the axioms shared by every trait.
pub fn extract_singleton_queries(ds: &[Diagnosis], p: &QPartition) -> Vec<AxiomId> {
    if p.d_minus.is_empty() {
        return Vec::new();
    }
    build_atm(ds, p).rows.into_iter().filter(AtmRow::all_ones).map(|r| r.axiom).collect()
}

/// A minimum-cardinality hitting set of `traits`; among those of equal size
/// the lexicographically smallest sorted id list wins.
pub fn min_card_hitting_set(traits: &[Trait]) -> Result<BTreeSet<AxiomId>> {
    if traits.is_empty() || traits.iter().any(|t| t.is_empty()) {
        return Err(Error::NoQuery("the partition has an empty trait".into()));
    }
    let mut best: Option<Vec<AxiomId>> = None;
    let mut current = Vec::new();
    hitting_set_search(traits, &mut current, &mut best);
    Ok(best.expect("non-empty traits always have a hitting set").into_iter().collect())
}

fn hitting_set_search(traits: &[Trait], current: &mut Vec<AxiomId>, best: &mut Option<Vec<AxiomId>>) {
    let Some(unhit) = traits.iter().find(|t| !current.iter().any(|a| t.contains(a))) else {
        let mut candidate = current.clone();
        candidate.sort_unstable();
        let better = match best {
            None => true,
            Some(b) => candidate.len() < b.len() || (candidate.len() == b.len() && candidate < *b),
        };
        if better {
            *best = Some(candidate);
        }
        return;
    };
    if best.as_ref().is_some_and(|b| current.len() >= b.len()) {
        return;
    }
    for &axiom in unhit {
        current.push(axiom);
        hitting_set_search(traits, current, best);
        current.pop();
    }
}

/// Minimum-cardinality query for `p`: a hitting set of all its traits.
pub fn min_card_hitting_set_query(ds: &[Diagnosis], p: &QPartition) -> Result<BTreeSet<AxiomId>> {
    min_card_hitting_set(&compute_traits(ds, p))
}

/// `D+` = diagnoses disjoint from `q`, `D−` = diagnoses meeting `q`.
pub fn explicit_query_partition(ds: &[Diagnosis], q: &BTreeSet<AxiomId>) -> QPartition {
    QPartition::from_minus(ds.len(), (0..ds.len()).filter(|&i| ds[i].iter().any(|id| q.contains(&id))))
}

/// Whether `p` admits some query: both sides non-empty, nothing in `D0`,
/// and every trait non-empty.
pub fn admits_query(ds: &[Diagnosis], p: &QPartition) -> bool {
    !p.d_plus.is_empty()
        && !p.d_minus.is_empty()
        && p.d_zero.is_empty()
        && compute_traits(ds, p).iter().all(|t| !t.is_empty())
}
