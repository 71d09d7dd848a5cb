//! Two-stage query selection: a depth-first, locally best-first search with
//! backtracking over q-partitions, then a cheapest query for the winner.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnosis::DiagnosisDistribution;
use crate::error::{Error, Result};
use crate::fpi::Diagnosis;
use crate::heuristics::{score, HeuristicId, HeuristicParams, Score};
use crate::logic::AxiomId;
use crate::qpartition::{
    admits_query, extract_singleton_queries, min_card_hitting_set_query, normal_successors, singleton_successors,
    QPartition,
};

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchConfig {
    pub heuristic: HeuristicId,
    #[serde(flatten)]
    pub params: HeuristicParams,
    pub singleton: bool,
    pub seed: u64,
    pub node_budget: usize,
}

impl SearchConfig {
    pub fn new(heuristic: HeuristicId, singleton: bool, seed: u64) -> Self {
        SearchConfig { heuristic, params: HeuristicParams::default(), singleton, seed, node_budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchStats {
    /// Distinct q-partitions generated, the root included.
    pub generated_qpartitions: usize,
    pub expanded_nodes: usize,
    /// Longest successor chain below the root.
    pub max_depth: usize,
    pub budget_exhausted: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
struct Node {
    partition: QPartition,
    score: Score,
    valid: bool,
    depth: usize,
}

struct Search<'a> {
    ds: &'a [Diagnosis],
    dist: &'a DiagnosisDistribution,
    cfg: &'a SearchConfig,
    rng: ChaCha8Rng,
    seen: HashSet<Vec<usize>>,
    stats: SearchStats,
}

impl Search<'_> {
    fn successors(&mut self, parent: &QPartition, depth: usize) -> Vec<Node> {
        self.stats.expanded_nodes += 1;
        let raw =
            if self.cfg.singleton { singleton_successors(self.ds, parent) } else { normal_successors(self.ds, parent) };
        let mut nodes = Vec::new();
        for partition in raw {
            if !self.seen.insert(partition.d_plus.clone()) {
                continue;
            }
            self.stats.generated_qpartitions += 1;
            let valid = admits_query(self.ds, &partition)
                && (!self.cfg.singleton || !extract_singleton_queries(self.ds, &partition).is_empty());
            let score = score(self.cfg.heuristic, self.ds, &partition, self.dist, &self.cfg.params, &mut self.rng);
            nodes.push(Node { partition, score, valid, depth });
        }
        // stable: equal scores keep successor order
        nodes.sort_by(|a, b| a.score.rank(&b.score));
        nodes.reverse();
        nodes
    }

    fn run(&mut self) -> Option<Node> {
        let root = QPartition::root(self.ds.len());
        self.seen.insert(root.d_plus.clone());
        self.stats.generated_qpartitions = 1;
        // each frame holds the unexplored siblings, best last
        let mut stack = vec![self.successors(&root, 1)];
        let mut best: Option<Node> = None;
        while let Some(frame) = stack.last_mut() {
            let Some(node) = frame.pop() else {
                stack.pop();
                continue;
            };
            self.stats.max_depth = self.stats.max_depth.max(node.depth);
            if node.valid {
                if node.score.is_goal() {
                    return Some(node);
                }
                if best.as_ref().is_none_or(|b| node.score.is_better_than(&b.score)) {
                    best = Some(node.clone());
                }
            }
            if self.stats.expanded_nodes >= self.cfg.node_budget {
                self.stats.budget_exhausted = true;
                break;
            }
            let children = self.successors(&node.partition, node.depth + 1);
            stack.push(children);
        }
        best
    }
}

/// Best q-partition of `ds` under the configured heuristic. The root
/// `⟨∅, D, ∅⟩` is never returned.
pub fn find_best_qpartition(
    ds: &[Diagnosis],
    dist: &DiagnosisDistribution,
    cfg: &SearchConfig,
) -> Result<(QPartition, Score, SearchStats)> {
    if ds.len() < 2 {
        return Err(Error::NoQuery(format!("{} diagnosis cannot be discriminated", ds.len())));
    }
    let start = Instant::now();
    let mut search = Search {
        ds,
        dist,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        seen: HashSet::new(),
        stats: SearchStats::default(),
    };
    let best = search.run();
    let mut stats = search.stats;
    stats.wall_time = start.elapsed();
    let node = best.ok_or_else(|| Error::NoQuery("no q-partition admitting a query was reached".into()))?;
    Ok((node.partition, node.score, stats))
}

/// Cheapest query for `p`: the lowest-id axiom shared by all traits in
/// singleton mode, a minimum-cardinality hitting set of the traits otherwise.
pub fn find_best_query_for_qpartition(
    ds: &[Diagnosis],
    p: &QPartition,
    singleton: bool,
) -> Result<BTreeSet<AxiomId>> {
    if singleton {
        let first = extract_singleton_queries(ds, p)
            .into_iter()
            .next()
            .ok_or_else(|| Error::NoQuery("the partition admits no singleton query".into()))?;
        Ok(BTreeSet::from([first]))
    } else {
        min_card_hitting_set_query(ds, p)
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub query: BTreeSet<AxiomId>,
    pub partition: QPartition,
    pub score: Score,
    pub stats: SearchStats,
}

pub fn select_query(ds: &[Diagnosis], dist: &DiagnosisDistribution, cfg: &SearchConfig) -> Result<Selection> {
    let start = Instant::now();
    let (partition, score, mut stats) = find_best_qpartition(ds, dist, cfg)?;
    let query = find_best_query_for_qpartition(ds, &partition, cfg.singleton)?;
    stats.wall_time = start.elapsed();
    Ok(Selection { query, partition, score, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpartition::union_of;

    fn d(ids: &[u32]) -> Diagnosis {
        ids.iter().map(|&i| AxiomId(i)).collect()
    }

    fn example_d() -> Vec<Diagnosis> {
        vec![d(&[2, 3]), d(&[2, 5]), d(&[2, 6]), d(&[2, 7]), d(&[1, 4, 7]), d(&[3, 4, 7])]
    }

    #[test]
    fn singleton_spl_reaches_an_even_split() {
        let ds = example_d();
        let dist = DiagnosisDistribution::uniform(&ds);
        let cfg = SearchConfig::new(HeuristicId::Spl, true, 1);
        let (p, score, stats) = find_best_qpartition(&ds, &dist, &cfg).unwrap();
        assert_eq!(p.sizes(), [3, 3]);
        assert_eq!(score.value, 0.0);
        assert!(!extract_singleton_queries(&ds, &p).is_empty());
        assert!(stats.generated_qpartitions <= union_of(&ds, &(0..6).collect::<Vec<_>>()).len() + 1);
        assert!(stats.max_depth <= ds.len());
    }

    #[test]
    fn two_diagnoses() {
        let ds = vec![d(&[1]), d(&[2])];
        let dist = DiagnosisDistribution::uniform(&ds);
        for h in HeuristicId::ALL {
            let (p, _, _) = find_best_qpartition(&ds, &dist, &SearchConfig::new(h, true, 5)).unwrap();
            assert_eq!(p.sizes(), [1, 1]);
        }
    }

    #[test]
    fn stage_two_examples() {
        let ds = example_d();
        let p123 = QPartition::from_minus(6, [3, 4, 5]);
        assert_eq!(find_best_query_for_qpartition(&ds, &p123, true).unwrap(), BTreeSet::from([AxiomId(7)]));
        let p5 = QPartition::from_minus(6, [0, 1, 2, 3, 5]);
        assert_eq!(find_best_query_for_qpartition(&ds, &p5, false).unwrap(), BTreeSet::from([AxiomId(2), AxiomId(3)]));
        assert!(find_best_query_for_qpartition(&ds, &p5, true).is_err());
    }

    #[test]
    fn running_example_selection() {
        let ds = vec![d(&[1]), d(&[2]), d(&[3])];
        let dist = DiagnosisDistribution::uniform(&ds);
        let sel = select_query(&ds, &dist, &SearchConfig::new(HeuristicId::Ent, true, 0)).unwrap();
        assert_eq!(sel.query.len(), 1);
        assert_eq!(sel.partition.sizes(), [2, 1]);
        let normal = select_query(&ds, &dist, &SearchConfig::new(HeuristicId::Ent, false, 0)).unwrap();
        assert!(!normal.query.is_empty());
        assert!(select_query(&ds[..1], &dist, &SearchConfig::new(HeuristicId::Ent, true, 0)).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = example_d();
        let dist = crate::diagnosis::assign_probabilities(&ds, 9);
        for h in HeuristicId::ALL {
            for singleton in [true, false] {
                let cfg = SearchConfig::new(h, singleton, 77);
                let a = select_query(&ds, &dist, &cfg).unwrap();
                let b = select_query(&ds, &dist, &cfg).unwrap();
                assert_eq!((a.query, a.partition), (b.query, b.partition));
            }
        }
    }
}
