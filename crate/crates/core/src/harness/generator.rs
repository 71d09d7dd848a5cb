//! Random faulty KBs: layered Horn implication chains over `x0..xN`, plus
//! injected axioms that each break a requirement on their own.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnosis::enumerate_minimal_diagnoses;
use crate::error::{Error, Result};
use crate::expert::GroundTruth;
use crate::fpi::{Diagnosis, Fpi};
use crate::logic::{AxiomId, Formula};

const MAX_ATTEMPTS: usize = 500;
/// Upper end of the minimal-diagnosis count accepted for a generated KB.
pub const MAX_DIAGNOSES: usize = 30;

fn default_min_diagnoses() -> usize {
    3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorSpec {
    pub atoms: usize,
    pub chain_length: usize,
    pub num_faults: usize,
    pub seed: u64,
    /// Fewest minimal diagnoses the KB must have.
    #[serde(default = "default_min_diagnoses")]
    pub min_diagnoses: usize,
}

impl GeneratorSpec {
    pub fn new(atoms: usize, num_faults: usize, seed: u64) -> Self {
        GeneratorSpec { atoms, chain_length: 3, num_faults, seed, min_diagnoses: default_min_diagnoses() }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedKb {
    pub text: String,
    pub truth: GroundTruth,
    pub num_diagnoses: usize,
}

impl GeneratedKb {
    pub fn truth_json(&self) -> String {
        serde_json::to_string_pretty(&self.truth).expect("ground truth serializes") + "\n"
    }
}

/// `body -> head` with a conjunctive or disjunctive body.
#[derive(Debug, Clone)]
struct Rule {
    body: Vec<usize>,
    any: bool,
    head: Vec<usize>,
}

impl Rule {
    fn formula(&self) -> Formula {
        let atoms = |v: &[usize]| v.iter().map(|&i| Formula::atom(format!("x{i}"))).collect::<Vec<_>>();
        let body = if self.any { Formula::or(atoms(&self.body)) } else { Formula::and(atoms(&self.body)) };
        Formula::implies(body, Formula::and(atoms(&self.head)))
    }

    fn fires(&self, known: &BTreeSet<usize>) -> bool {
        if self.any {
            self.body.iter().any(|a| known.contains(a))
        } else {
            self.body.iter().all(|a| known.contains(a))
        }
    }
}

fn closure(facts: &[usize], rules: &[Rule]) -> BTreeSet<usize> {
    let mut known: BTreeSet<usize> = facts.iter().copied().collect();
    loop {
        let before = known.len();
        for r in rules {
            if r.fires(&known) {
                known.extend(r.head.iter().copied());
            }
        }
        if known.len() == before {
            return known;
        }
    }
}

enum Line {
    O(Formula, bool),
    B(Formula),
    N(Formula),
}

fn attempt(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Option<(String, Vec<usize>)> {
    let n = spec.atoms;
    let layers = spec.chain_length.max(1) + 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let width = n.div_ceil(layers);
    let layer: Vec<&[usize]> = order.chunks(width).collect();

    let facts: Vec<usize> = layer[0].iter().copied().take(2.max(layer[0].len() / 2)).collect();
    let mut rules = Vec::new();
    for l in 1..layer.len() {
        for &head in layer[l] {
            let earlier: Vec<usize> = layer[..l].iter().flat_map(|s| s.iter().copied()).collect();
            let prev = layer[l - 1];
            let first = *prev.choose(rng)?;
            let rule = match rng.gen_range(0..10) {
                0..=5 => Rule { body: vec![first], any: false, head: vec![head] },
                6 | 7 => {
                    let second = *earlier.choose(rng)?;
                    Rule { body: dedup(vec![first, second]), any: false, head: vec![head] }
                }
                _ => {
                    let second = *earlier.choose(rng)?;
                    Rule { body: dedup(vec![first, second]), any: true, head: vec![head] }
                }
            };
            rules.push(rule);
        }
    }
    let derivable = closure(&facts, &rules);
    let deep: Vec<usize> =
        layer[1..].iter().flat_map(|s| s.iter().copied()).filter(|a| derivable.contains(a)).collect();
    let underivable: Vec<usize> = (0..n).filter(|a| !derivable.contains(a)).collect();
    if deep.len() < 2 {
        return None;
    }

    let mut lines: Vec<Line> = facts.iter().map(|&f| Line::B(Formula::atom(format!("x{f}")))).collect();
    let mut o: Vec<(Formula, bool)> = rules.iter().map(|r| (r.formula(), false)).collect();
    let mut negatives = Vec::new();
    for _ in 0..spec.num_faults {
        let a = *deep.choose(rng)?;
        let fault = if underivable.is_empty() || rng.gen_bool(0.5) {
            let b = *deep.iter().filter(|&&b| b != a).collect::<Vec<_>>().choose(rng)?;
            Formula::implies(Formula::atom(format!("x{a}")), Formula::not(Formula::atom(format!("x{b}"))))
        } else {
            let c = *underivable.choose(rng)?;
            let f = Formula::atom(format!("x{c}"));
            if !negatives.contains(&f) {
                negatives.push(f.clone());
            }
            Formula::implies(Formula::atom(format!("x{a}")), f)
        };
        if o.iter().any(|(f, _)| *f == fault) {
            return None;
        }
        o.push((fault, true));
    }
    o.shuffle(rng);
    lines.extend(o.into_iter().map(|(f, faulty)| Line::O(f, faulty)));
    lines.extend(negatives.into_iter().map(Line::N));

    let mut text = format!(
        "# generated: atoms={} chainLength={} faults={} seed={}\n",
        spec.atoms, spec.chain_length, spec.num_faults, spec.seed
    );
    let mut faults = Vec::new();
    let mut id = 0;
    for line in &lines {
        match line {
            Line::O(f, faulty) => {
                id += 1;
                if *faulty {
                    faults.push(id);
                }
                writeln!(text, "o: {f}").ok()?;
            }
            Line::B(f) => {
                id += 1;
                writeln!(text, "b: {f}").ok()?;
            }
            Line::N(f) => writeln!(text, "n: {f}").ok()?,
        }
    }
    Some((text, faults))
}

fn dedup(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Generates a KB whose injected faults form a minimal diagnosis among at
/// least two and at most a few dozen. Deterministic per spec.
pub fn generate_faulty_kb(spec: &GeneratorSpec) -> Result<GeneratedKb> {
    if spec.num_faults == 0 {
        return Err(Error::Generation("at least one fault is required".into()));
    }
    if spec.atoms < 4 {
        return Err(Error::Generation("at least four atoms are required".into()));
    }
    if spec.min_diagnoses > MAX_DIAGNOSES {
        return Err(Error::Generation(format!("at most {MAX_DIAGNOSES} diagnoses can be requested")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..MAX_ATTEMPTS {
        let Some((text, faults)) = attempt(spec, &mut rng) else { continue };
        let fpi = Fpi::parse(&text)?;
        let actual: Diagnosis = faults.into_iter().map(|i| AxiomId(i as u32)).collect();
        if !fpi.is_minimal_diagnosis(&actual)? {
            continue;
        }
        let ds = enumerate_minimal_diagnoses(&fpi, MAX_DIAGNOSES + 1)?;
        if ds.len() < spec.min_diagnoses.max(2) || ds.len() > MAX_DIAGNOSES {
            continue;
        }
        return Ok(GeneratedKb { text, truth: GroundTruth::new(actual), num_diagnoses: ds.len() });
    }
    Err(Error::Generation(format!("no suitable KB after {MAX_ATTEMPTS} attempts")))
}
