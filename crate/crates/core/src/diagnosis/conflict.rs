use crate::error::Result;
use crate::fpi::{Diagnosis, Fpi};
use crate::logic::AxiomId;

/// A set of axioms from `O` that together with `B ∪ U_P` violates a requirement.
pub type Conflict = Diagnosis;

/// Divide-and-conquer search for a subset-minimal conflict among `candidates`.
/// Returns `None` when `candidates ∪ B ∪ U_P` meets every requirement, and
/// the empty conflict when `B ∪ U_P` alone does not.
pub fn find_minimal_conflict(fpi: &Fpi, candidates: &[AxiomId]) -> Result<Option<Conflict>> {
    if fpi.satisfies_requirements(candidates.iter().copied())? {
        return Ok(None);
    }
    let mut found = Vec::new();
    quick_xplain(fpi, &[], true, candidates, &mut found)?;
    Ok(Some(Diagnosis::new(found)))
}

fn violated(fpi: &Fpi, kept: &[AxiomId]) -> Result<bool> {
    Ok(!fpi.satisfies_requirements(kept.iter().copied())?)
}

/// Precondition: `background ∪ candidates` violates a requirement.
fn quick_xplain(
    fpi: &Fpi,
    background: &[AxiomId],
    background_grew: bool,
    candidates: &[AxiomId],
    out: &mut Vec<AxiomId>,
) -> Result<()> {
    if background_grew && violated(fpi, background)? {
        return Ok(());
    }
    if candidates.len() <= 1 {
        out.extend_from_slice(candidates);
        return Ok(());
    }
    let (left, right) = candidates.split_at(candidates.len() / 2);

    let with_left: Vec<AxiomId> = background.iter().chain(left).copied().collect();
    let mut from_right = Vec::new();
    quick_xplain(fpi, &with_left, true, right, &mut from_right)?;

    let with_right: Vec<AxiomId> = background.iter().chain(&from_right).copied().collect();
    quick_xplain(fpi, &with_right, !from_right.is_empty(), left, out)?;
    out.extend(from_right);
    Ok(())
}
