//! Batch runs of simulated sessions over a matrix of KBs, heuristics,
//! expert types and query modes.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnosis::enumerate_minimal_diagnoses;
use crate::error::{Error, Result};
use crate::expert::{ExpertType, GroundTruth};
use crate::fpi::Fpi;
use crate::heuristics::{HeuristicId, HeuristicParams};
use crate::search::{SearchConfig, DEFAULT_NODE_BUDGET};
use crate::session::{Session, SessionConfig, DEFAULT_LEADING_DIAGNOSES};

/// Actual diagnoses are drawn from at most this many minimal diagnoses.
pub const TRUTH_POOL: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    Normal,
    Singleton,
}

impl QueryMode {
    pub fn is_singleton(self) -> bool {
        self == QueryMode::Singleton
    }

    pub fn name(self) -> &'static str {
        match self {
            QueryMode::Normal => "normal",
            QueryMode::Singleton => "singleton",
        }
    }
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(QueryMode::Normal),
            "singleton" => Ok(QueryMode::Singleton),
            _ => Err(Error::InvalidConfig(format!("unknown query mode `{s}`"))),
        }
    }
}

fn default_sessions() -> usize {
    20
}

fn default_modes() -> Vec<QueryMode> {
    vec![QueryMode::Normal, QueryMode::Singleton]
}

fn default_leading() -> usize {
    DEFAULT_LEADING_DIAGNOSES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentPlan {
    pub kbs: Vec<PathBuf>,
    pub heuristics: Vec<HeuristicId>,
    pub expert_types: Vec<ExpertType>,
    #[serde(default = "default_modes")]
    pub query_modes: Vec<QueryMode>,
    #[serde(default = "default_sessions")]
    pub sessions_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_leading")]
    pub leading_diagnoses: usize,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Output prefix for the CSV files, relative to the plan file.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentPlan {
    /// Parses a plan; relative KB paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut plan: ExperimentPlan =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("plan: {}", e.message())))?;
        for kb in &mut plan.kbs {
            if kb.is_relative() {
                *kb = base_dir.join(&*kb);
            }
        }
        if let Some(out) = &mut plan.out {
            if out.is_relative() {
                *out = base_dir.join(&*out);
            }
        }
        plan.params().validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn params(&self) -> HeuristicParams {
        let d = HeuristicParams::default();
        HeuristicParams { cautiousness: self.c.unwrap_or(d.cautiousness), epsilon: self.epsilon.unwrap_or(d.epsilon) }
    }
}

/// Seed of the `i`-th session on KB `kb_index`. Every heuristic, expert type
/// and query mode sees the same seeds, so cells are paired.
pub fn session_seed(base_seed: u64, kb_index: usize, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((kb_index as u64) << 32) | i as u64);
    rand::RngCore::next_u64(&mut rng)
}

/// One KB under test.
#[derive(Debug, Clone)]
pub struct KbInput {
    pub name: String,
    pub fpi: Fpi,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionRow {
    pub kb: String,
    pub heuristic: HeuristicId,
    pub expert_type: ExpertType,
    pub query_mode: QueryMode,
    pub seed: u64,
    pub num_queries: usize,
    pub num_axioms: usize,
    pub num_axioms_classified: usize,
    pub mean_time_per_query_ms: f64,
    #[serde(rename = "meanQPsPerQuery")]
    pub mean_qps_per_query: f64,
    pub final_diagnosis_matches_truth: bool,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AggregateRow {
    pub kb: String,
    pub heuristic: HeuristicId,
    pub expert_type: ExpertType,
    pub query_mode: QueryMode,
    pub sessions: usize,
    pub failures: usize,
    pub mean_queries: f64,
    pub mean_axioms: f64,
    pub mean_time_per_query_ms: f64,
    #[serde(rename = "meanQPsPerQuery")]
    pub mean_qps_per_query: f64,
    /// `100·(meanAxNormal − meanAxSingleton)/meanAxSingleton` for this
    /// KB, heuristic and expert type; empty unless both modes ran.
    pub ax_overhead_pct: Option<f64>,
}

/// Directional checks per KB.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrendRow {
    pub kb: String,
    pub ax_normal_query_based: f64,
    pub ax_normal_minimalist: f64,
    pub ax_normal_pragmatist: f64,
    pub ax_normal_maximalist: f64,
    pub ax_singleton: f64,
    pub qps_normal: f64,
    pub qps_singleton: f64,
    /// Pragmatist needs no more axioms than any other type for normal queries.
    pub pragmatist_cheapest: bool,
    /// Singleton search generates at most half the q-partitions of normal search.
    pub singleton_qps_at_most_half: bool,
    /// Singleton queries need no more axioms than query-based normal queries.
    pub singleton_beats_query_based: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentResults {
    pub rows: Vec<SessionRow>,
    pub aggregate: Vec<AggregateRow>,
    pub trends: Vec<TrendRow>,
}

struct Job {
    kb_index: usize,
    heuristic: HeuristicId,
    expert: ExpertType,
    mode: QueryMode,
    i: usize,
}

/// Picks the actual diagnosis for a session among the first minimal diagnoses.
pub fn sample_truth(fpi: &Fpi, seed: u64) -> Result<GroundTruth> {
    let pool = enumerate_minimal_diagnoses(fpi, TRUTH_POOL)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7275_7468);
    let d = pool.choose(&mut rng).ok_or(Error::NoDiagnosis)?;
    Ok(GroundTruth::new(d.clone()))
}

fn run_one(kb: &KbInput, truth: &Result<GroundTruth>, job: &Job, seed: u64, plan: &ExperimentPlan) -> SessionRow {
    let mut row = SessionRow {
        kb: kb.name.clone(),
        heuristic: job.heuristic,
        expert_type: job.expert,
        query_mode: job.mode,
        seed,
        num_queries: 0,
        num_axioms: 0,
        num_axioms_classified: 0,
        mean_time_per_query_ms: 0.0,
        mean_qps_per_query: 0.0,
        final_diagnosis_matches_truth: false,
        status: "ok".into(),
    };
    let outcome = (|| -> Result<()> {
        let truth = truth.as_ref().map_err(|e| Error::InvalidGroundTruth(e.to_string()))?;
        let search = SearchConfig {
            heuristic: job.heuristic,
            params: plan.params(),
            singleton: job.mode.is_singleton(),
            seed,
            node_budget: DEFAULT_NODE_BUDGET,
        };
        let mut config = SessionConfig::new(search, Some(job.expert), seed);
        config.leading_diagnoses = plan.leading_diagnoses;
        let mut session = Session::start(kb.fpi.clone(), config)?;
        session.run_simulated(truth, job.expert)?;
        let s = session.summarize()?;
        row.num_queries = s.num_queries;
        row.num_axioms = s.num_axioms;
        row.num_axioms_classified = s.num_axioms_classified;
        row.mean_time_per_query_ms = s.mean_time_per_query_ms;
        row.mean_qps_per_query = s.mean_qps_per_query;
        row.final_diagnosis_matches_truth = s.final_diagnosis == truth.actual_diagnosis;
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = format!("error: {e}");
    }
    row
}

/// Runs every session of the plan; failures become rows, never aborts.
pub fn run_experiments(plan: &ExperimentPlan, kbs: &[KbInput]) -> ExperimentResults {
    let mut jobs = Vec::new();
    for kb_index in 0..kbs.len() {
        for &heuristic in &plan.heuristics {
            for &expert in &plan.expert_types {
                for &mode in &plan.query_modes {
                    for i in 0..plan.sessions_per_cell {
                        jobs.push(Job { kb_index, heuristic, expert, mode, i });
                    }
                }
            }
        }
    }
    let truths: Vec<Vec<(u64, Result<GroundTruth>)>> = kbs
        .par_iter()
        .enumerate()
        .map(|(k, kb)| {
            (0..plan.sessions_per_cell)
                .map(|i| {
                    let seed = session_seed(plan.base_seed, k, i);
                    (seed, sample_truth(&kb.fpi, seed))
                })
                .collect()
        })
        .collect();
    let rows: Vec<SessionRow> = jobs
        .par_iter()
        .map(|job| {
            let (seed, truth) = &truths[job.kb_index][job.i];
            run_one(&kbs[job.kb_index], truth, job, *seed, plan)
        })
        .collect();
    let aggregate = aggregate(&rows);
    let trends = trends(&rows, kbs);
    ExperimentResults { rows, aggregate, trends }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

type CellKey = (String, HeuristicId, ExpertType, QueryMode);

fn aggregate(rows: &[SessionRow]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<CellKey, Vec<&SessionRow>> = BTreeMap::new();
    let mut order: Vec<CellKey> = Vec::new();
    for r in rows {
        let key = (r.kb.clone(), r.heuristic, r.expert_type, r.query_mode);
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().push(r);
    }
    let mean_ax = |key: &CellKey| -> Option<f64> {
        let ok: Vec<&&SessionRow> = cells.get(key)?.iter().filter(|r| r.status == "ok").collect();
        (!ok.is_empty()).then(|| mean(ok.iter().map(|r| r.num_axioms as f64)))
    };
    order
        .iter()
        .map(|key| {
            let cell = &cells[key];
            let ok: Vec<&&SessionRow> = cell.iter().filter(|r| r.status == "ok").collect();
            let normal = (key.0.clone(), key.1, key.2, QueryMode::Normal);
            let single = (key.0.clone(), key.1, key.2, QueryMode::Singleton);
            let overhead = match (mean_ax(&normal), mean_ax(&single)) {
                (Some(n), Some(s)) if s > 0.0 => Some(100.0 * (n - s) / s),
                _ => None,
            };
            AggregateRow {
                kb: key.0.clone(),
                heuristic: key.1,
                expert_type: key.2,
                query_mode: key.3,
                sessions: cell.len(),
                failures: cell.len() - ok.len(),
                mean_queries: mean(ok.iter().map(|r| r.num_queries as f64)),
                mean_axioms: mean(ok.iter().map(|r| r.num_axioms as f64)),
                mean_time_per_query_ms: mean(ok.iter().map(|r| r.mean_time_per_query_ms)),
                mean_qps_per_query: mean(ok.iter().map(|r| r.mean_qps_per_query)),
                ax_overhead_pct: overhead,
            }
        })
        .collect()
}

fn trends(rows: &[SessionRow], kbs: &[KbInput]) -> Vec<TrendRow> {
    kbs.iter()
        .filter_map(|kb| {
            let of = |mode: QueryMode, expert: Option<ExpertType>| {
                rows.iter().filter(move |r| {
                    r.kb == kb.name
                        && r.status == "ok"
                        && r.query_mode == mode
                        && expert.is_none_or(|t| r.expert_type == t)
                })
            };
            let ax = |mode, expert| mean(of(mode, expert).map(|r| r.num_axioms as f64));
            let qps = |mode| mean(of(mode, None).map(|r| r.mean_qps_per_query));
            let normal = |t| ax(QueryMode::Normal, Some(t));
            let row = TrendRow {
                kb: kb.name.clone(),
                ax_normal_query_based: normal(ExpertType::QueryBased),
                ax_normal_minimalist: normal(ExpertType::Minimalist),
                ax_normal_pragmatist: normal(ExpertType::Pragmatist),
                ax_normal_maximalist: normal(ExpertType::Maximalist),
                ax_singleton: ax(QueryMode::Singleton, None),
                qps_normal: qps(QueryMode::Normal),
                qps_singleton: qps(QueryMode::Singleton),
                pragmatist_cheapest: false,
                singleton_qps_at_most_half: false,
                singleton_beats_query_based: false,
            };
            if row.ax_singleton.is_nan() && row.ax_normal_pragmatist.is_nan() {
                return None;
            }
            let p = row.ax_normal_pragmatist;
            Some(TrendRow {
                pragmatist_cheapest: p <= row.ax_normal_minimalist
                    && p <= row.ax_normal_maximalist
                    && p <= row.ax_normal_query_based,
                singleton_qps_at_most_half: row.qps_singleton <= 0.5 * row.qps_normal,
                singleton_beats_query_based: row.ax_singleton <= row.ax_normal_query_based,
                ..row
            })
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

impl ExperimentResults {
    /// Writes `<prefix>.csv`, `<prefix>_aggregate.csv` and `<prefix>_trends.csv`.
    pub fn write(&self, prefix: &Path) -> Result<[PathBuf; 3]> {
        let with = |suffix: &str| {
            let mut name = prefix.file_name().map(|n| n.to_os_string()).unwrap_or_else(|| "results".into());
            name.push(suffix);
            prefix.with_file_name(name)
        };
        let paths = [with(".csv"), with("_aggregate.csv"), with("_trends.csv")];
        if let Some(dir) = paths[0].parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        write_csv(&paths[0], &self.rows)?;
        write_csv(&paths[1], &self.aggregate)?;
        write_csv(&paths[2], &self.trends)?;
        Ok(paths)
    }
}

/// Loads the plan's KBs, naming each by its file stem.
pub fn load_kbs(plan: &ExperimentPlan) -> Result<Vec<KbInput>> {
    plan.kbs
        .iter()
        .map(|path| {
            let text = std::fs::read_to_string(path)?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(KbInput { name, fpi: Fpi::parse(&text)? })
        })
        .collect()
}
