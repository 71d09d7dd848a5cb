use std::collections::{HashSet, VecDeque};

use super::conflict::{find_minimal_conflict, Conflict};
use crate::error::{Error, Result};
use crate::fpi::{Diagnosis, Fpi};
use crate::logic::AxiomId;

/// Outcome of one hitting-set tree run.
#[derive(Debug, Clone, Default)]
pub struct Enumeration {
    pub diagnoses: Vec<Diagnosis>,
    /// Every minimal conflict computed while labelling nodes.
    pub conflicts: Vec<Conflict>,
}

/// Breadth-first hitting-set tree over minimal conflicts.
pub struct HsTree<'a> {
    fpi: &'a Fpi,
    o: Vec<AxiomId>,
}

impl<'a> HsTree<'a> {
    pub fn new(fpi: &'a Fpi) -> Self {
        HsTree { fpi, o: fpi.o_ids().collect() }
    }

    /// Finds up to `limit` minimal diagnoses, smallest first.
    pub fn run(&self, limit: usize) -> Result<Enumeration> {
        let mut out = Enumeration::default();
        if limit == 0 {
            return Ok(out);
        }
        let mut queue: VecDeque<Diagnosis> = VecDeque::from([Diagnosis::empty()]);
        let mut seen: HashSet<Diagnosis> = HashSet::new();

        while let Some(path) = queue.pop_front() {
            if out.diagnoses.iter().any(|d| d.is_subset(&path)) {
                continue;
            }
            let label = match out.conflicts.iter().find(|c| c.is_disjoint(&path)) {
                Some(c) => Some(c.clone()),
                None => {
                    let kept: Vec<AxiomId> = self.o.iter().copied().filter(|id| !path.contains(*id)).collect();
                    let found = find_minimal_conflict(self.fpi, &kept)?;
                    if let Some(c) = &found {
                        if c.is_empty() {
                            return Err(Error::NoDiagnosis);
                        }
                        out.conflicts.push(c.clone());
                    }
                    found
                }
            };
            match label {
                None => {
                    out.diagnoses.push(path);
                    if out.diagnoses.len() >= limit {
                        break;
                    }
                }
                Some(conflict) => {
                    for id in conflict.iter() {
                        let child = path.with(id);
                        if seen.insert(child.clone()) {
                            queue.push_back(child);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Up to `limit` minimal diagnoses of `fpi` in minimum-cardinality-first order.
pub fn enumerate_minimal_diagnoses(fpi: &Fpi, limit: usize) -> Result<Vec<Diagnosis>> {
    Ok(HsTree::new(fpi).run(limit)?.diagnoses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::RUNNING_EXAMPLE;

    fn d(ids: &[u32]) -> Diagnosis {
        ids.iter().map(|&i| AxiomId(i)).collect()
    }

    #[test]
    fn running_example() {
        let fpi = Fpi::parse(RUNNING_EXAMPLE).unwrap();
        assert_eq!(enumerate_minimal_diagnoses(&fpi, 10).unwrap(), vec![d(&[1]), d(&[2]), d(&[3])]);
        assert_eq!(enumerate_minimal_diagnoses(&fpi, 2).unwrap(), vec![d(&[1]), d(&[2])]);
    }

    #[test]
    fn no_violation_gives_empty_diagnosis() {
        let fpi = Fpi::parse("o: a -> b\nb: a").unwrap();
        assert_eq!(enumerate_minimal_diagnoses(&fpi, 10).unwrap(), vec![Diagnosis::empty()]);
    }

    #[test]
    fn broken_background_has_no_diagnosis() {
        let fpi = Fpi::parse("o: c\nb: a\nb: !a").unwrap();
        assert!(matches!(enumerate_minimal_diagnoses(&fpi, 10), Err(Error::NoDiagnosis)));
    }

    #[test]
    fn two_conflicts() {
        // conflicts {1,2} and {2,3,4}: diagnoses {2}, {1,3}, {1,4}
        let fpi = Fpi::parse("o: a\no: !a & !b\no: b | c\no: !c\nb: true").unwrap();
        let ds = enumerate_minimal_diagnoses(&fpi, 10).unwrap();
        assert_eq!(ds, vec![d(&[2]), d(&[1, 3]), d(&[1, 4])]);
    }
}
