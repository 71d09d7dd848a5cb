//! Brute-force oracles and random instance builders shared by the test targets.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fl_core::fpi::{Diagnosis, Fpi};
use fl_core::logic::{AxiomId, Formula};
use fl_core::qpartition::{QPartition, Trait};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn d(ids: &[u32]) -> Diagnosis {
    ids.iter().map(|&i| AxiomId(i)).collect()
}

/// A random antichain of `2..=max_d` non-empty diagnoses over axioms `1..=universe`.
pub fn random_diagnoses(rng: &mut impl Rng, max_d: usize, universe: u32) -> Vec<Diagnosis> {
    loop {
        let want = rng.gen_range(2..=max_d);
        let mut ds: Vec<Diagnosis> = Vec::new();
        for _ in 0..want * 8 {
            if ds.len() == want {
                break;
            }
            let size = rng.gen_range(1..=3.min(universe as usize));
            let mut ids: Vec<u32> = (1..=universe).collect();
            ids.shuffle(rng);
            let cand = d(&ids[..size]);
            if ds.iter().all(|x| !x.is_subset(&cand) && !cand.is_subset(x)) {
                ds.push(cand);
            }
        }
        if ds.len() >= 2 {
            ds.sort();
            return ds;
        }
    }
}

/// All subsets of `universe` as sorted id sets, smallest first.
pub fn subsets(universe: &[AxiomId]) -> Vec<BTreeSet<AxiomId>> {
    let mut out: Vec<BTreeSet<AxiomId>> = (0u32..1 << universe.len())
        .map(|mask| universe.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| *a).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.iter().cmp(b.iter())));
    out
}

pub fn hits_all(h: &BTreeSet<AxiomId>, traits: &[Trait]) -> bool {
    traits.iter().all(|t| !t.is_disjoint(h))
}

/// Every minimum-cardinality hitting set of `traits`, by enumeration.
pub fn brute_min_hitting_sets(traits: &[Trait]) -> Vec<BTreeSet<AxiomId>> {
    let universe: Vec<AxiomId> = traits.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let all: Vec<_> = subsets(&universe).into_iter().filter(|h| hits_all(h, traits)).collect();
    let Some(min) = all.iter().map(BTreeSet::len).min() else { return Vec::new() };
    all.into_iter().filter(|h| h.len() == min).collect()
}

pub fn union(ds: &[Diagnosis]) -> BTreeSet<AxiomId> {
    ds.iter().flat_map(|d| d.iter()).collect()
}

pub fn intersection(ds: &[Diagnosis]) -> BTreeSet<AxiomId> {
    let mut it = ds.iter();
    let Some(first) = it.next() else { return BTreeSet::new() };
    it.fold(first.ids().clone(), |acc, d| acc.intersection(d.ids()).copied().collect())
}

fn atom(i: u32) -> Formula {
    Formula::atom(format!("x{i}"))
}

/// An FPI whose minimal diagnoses are exactly `ds`: axiom `i` is the atom `xi`
/// and every minimal hitting set of `ds` is a negative test case.
pub fn fpi_with_diagnoses(ds: &[Diagnosis]) -> Fpi {
    let max = ds.iter().flat_map(|d| d.iter()).map(|a| a.0).max().unwrap_or(1);
    let universe: Vec<AxiomId> = (1..=max).map(AxiomId).collect();
    let traits: Vec<Trait> = ds.iter().map(|d| d.ids().clone()).collect();
    let hs: Vec<BTreeSet<AxiomId>> = subsets(&universe).into_iter().filter(|h| hits_all(h, &traits)).collect();
    let conflicts: Vec<&BTreeSet<AxiomId>> =
        hs.iter().filter(|h| !hs.iter().any(|g| g.len() < h.len() && g.is_subset(h))).collect();
    let mut text: String = (1..=max).map(|i| format!("o: x{i}\n")).collect();
    for c in conflicts {
        let conj: Vec<String> = c.iter().map(|a| format!("x{}", a.0)).collect();
        text.push_str(&format!("n: {}\n", conj.join(" & ")));
    }
    Fpi::parse(&text).expect("constructed KB parses")
}

/// The q-partition of `q` as decided by the reasoner: `D+` if `O \ Di`
/// entails `q`, `D−` if `O \ Di ∪ q` violates a requirement, `D0` otherwise.
pub fn reasoner_qpartition(fpi: &Fpi, ds: &[Diagnosis], q: &BTreeSet<AxiomId>) -> QPartition {
    let q_ids: Vec<AxiomId> = q.iter().copied().collect();
    let mut p = QPartition { d_plus: vec![], d_minus: vec![], d_zero: vec![] };
    for (i, di) in ds.iter().enumerate() {
        if fpi.entails_axioms(di, &q_ids).unwrap() {
            p.d_plus.push(i);
        } else {
            let kept = fpi.o_ids().filter(|id| !di.contains(*id) || q.contains(id));
            if fpi.satisfies_requirements(kept).unwrap() {
                p.d_zero.push(i);
            } else {
                p.d_minus.push(i);
            }
        }
    }
    p
}

/// A random FPI over at most `atoms` atoms with `|O| ≤ max_o`, biased
/// towards implication chains so that violations are common.
pub fn random_fpi(rng: &mut impl Rng, max_o: usize, atoms: u32) -> Fpi {
    let x = |rng: &mut dyn rand::RngCore| atom(rng.gen_range(0..atoms));
    let formula = |rng: &mut dyn rand::RngCore| -> Formula {
        match rng.gen_range(0..10) {
            0..=4 => Formula::implies(x(rng), x(rng)),
            5 => Formula::implies(Formula::and(vec![x(rng), x(rng)]), x(rng)),
            6 => Formula::implies(x(rng), Formula::not(x(rng))),
            7 => Formula::or(vec![x(rng), x(rng)]),
            8 => Formula::implies(x(rng), Formula::or(vec![x(rng), x(rng)])),
            _ => Formula::not(Formula::and(vec![x(rng), x(rng)])),
        }
    };
    loop {
        let n_o = rng.gen_range(2..=max_o);
        let mut o: Vec<Formula> = Vec::new();
        while o.len() < n_o {
            let f = formula(rng);
            if !o.contains(&f) {
                o.push(f);
            }
        }
        let mut text = String::new();
        for f in &o {
            text.push_str(&format!("o: {f}\n"));
        }
        let mut facts: Vec<u32> = (0..atoms).collect();
        facts.shuffle(rng);
        let (b, rest) = facts.split_at(rng.gen_range(1..=2));
        let (n, rest) = rest.split_at(rng.gen_range(1..=2));
        for &f in b {
            if !o.contains(&atom(f)) {
                text.push_str(&format!("b: {}\n", atom(f)));
            }
        }
        for &f in n {
            text.push_str(&format!("n: {}\n", atom(f)));
        }
        if rng.gen_bool(0.3) {
            text.push_str(&format!("p: {}\n", atom(rest[0])));
        }
        if let Ok(fpi) = Fpi::parse(&text) {
            return fpi;
        }
    }
}

/// Minimal diagnoses of `fpi` by checking every subset of `O`; `None` when
/// even removing all of `O` leaves a violation.
pub fn brute_minimal_diagnoses(fpi: &Fpi) -> Option<Vec<Diagnosis>> {
    let ids: Vec<AxiomId> = fpi.o_ids().collect();
    let all: Vec<Diagnosis> = subsets(&ids)
        .into_iter()
        .map(Diagnosis::new)
        .filter(|cand| fpi.check_requirements(cand).unwrap())
        .collect();
    if all.is_empty() {
        return None;
    }
    let mut min: Vec<Diagnosis> =
        all.iter().filter(|x| !all.iter().any(|y| y.len() < x.len() && y.is_subset(x))).cloned().collect();
    min.sort();
    Some(min)
}

/// Like [`random_fpi`], redrawn until the oracle finds a violation. Returns
/// the FPI with its brute-force minimal diagnoses (`None`: no diagnosis).
pub fn random_faulty_fpi(rng: &mut impl Rng, max_o: usize, atoms: u32) -> (Fpi, Option<Vec<Diagnosis>>) {
    loop {
        let fpi = random_fpi(rng, max_o, atoms);
        let oracle = brute_minimal_diagnoses(&fpi);
        if oracle.as_ref().is_none_or(|ds| ds != &vec![Diagnosis::empty()]) {
            return (fpi, oracle);
        }
    }
}
