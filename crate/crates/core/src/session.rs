//! The sequential diagnosis loop: compute diagnoses, select a query, take
//! the answer, add the resulting test cases, and repeat until one minimal
//! diagnosis is left.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnosis::{assign_probabilities, enumerate_minimal_diagnoses, filter_diagnoses, DiagnosisDistribution};
use crate::error::{Error, Result};
use crate::expert::{answer_query, incorporate_answer, Answer, ExpertType, GroundTruth, Label};
use crate::fpi::{Diagnosis, Fpi};
use crate::logic::AxiomId;
use crate::qpartition::QPartition;
use crate::search::{select_query, SearchConfig};

pub const DEFAULT_LEADING_DIAGNOSES: usize = 10;
/// Guard against answer sources that never let a session finish.
pub const MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SessionConfig {
    pub leading_diagnoses: usize,
    pub search: SearchConfig,
    /// `None` when answers come from outside.
    pub expert: Option<ExpertType>,
    pub seed: u64,
}

impl SessionConfig {
    pub fn new(search: SearchConfig, expert: Option<ExpertType>, seed: u64) -> Self {
        SessionConfig { leading_diagnoses: DEFAULT_LEADING_DIAGNOSES, search, expert, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.leading_diagnoses < 2 {
            return Err(Error::InvalidConfig("leadingDiagnoses must be at least 2".into()));
        }
        self.search.params.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Running,
    Done {
        #[serde(rename = "finalDiagnosis")]
        final_diagnosis: Diagnosis,
    },
    Failed {
        reason: String,
    },
}

/// The query awaiting an answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PendingQuery {
    pub step: usize,
    pub query: Vec<AxiomId>,
    pub partition: QPartition,
    pub time_ms: f64,
    pub generated_qps: usize,
}

/// One line of the session log.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepRecord {
    pub step: usize,
    pub query_axiom_ids: Vec<AxiomId>,
    pub query_rendering: Vec<String>,
    pub qpartition_sizes: [usize; 2],
    pub label: Label,
    pub positives: Vec<AxiomId>,
    pub negatives: Vec<AxiomId>,
    pub axioms_inspected: usize,
    pub axioms_classified: usize,
    pub time_per_query_ms: f64,
    #[serde(rename = "generatedQPs")]
    pub generated_qps: usize,
    pub remaining_diagnoses: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub num_queries: usize,
    pub num_axioms: usize,
    pub num_axioms_classified: usize,
    pub mean_time_per_query_ms: f64,
    #[serde(rename = "meanQPsPerQuery")]
    pub mean_qps_per_query: f64,
    pub final_diagnosis: Diagnosis,
}

#[derive(Debug, Clone)]
pub struct Session {
    config: SessionConfig,
    fpi: Fpi,
    diagnoses: Vec<Diagnosis>,
    initial_diagnoses: usize,
    dist: DiagnosisDistribution,
    records: Vec<StepRecord>,
    status: Status,
    pending: Option<PendingQuery>,
}

impl Session {
    /// Computes the initial diagnoses and, unless only one exists, the first query.
    pub fn start(fpi: Fpi, config: SessionConfig) -> Result<Session> {
        config.validate()?;
        if !fpi.has_violation()? {
            return Err(Error::NoViolation);
        }
        let diagnoses = enumerate_minimal_diagnoses(&fpi, config.leading_diagnoses)?;
        let dist = assign_probabilities(&diagnoses, config.seed);
        let mut session = Session {
            config,
            fpi,
            initial_diagnoses: diagnoses.len(),
            diagnoses,
            dist,
            records: Vec::new(),
            status: Status::Running,
            pending: None,
        };
        session.advance()?;
        Ok(session)
    }

    /// Like [`Session::start`], also checking that `gt` fits the KB.
    pub fn start_with_truth(fpi: Fpi, config: SessionConfig, gt: &GroundTruth) -> Result<Session> {
        gt.validate(&fpi)?;
        Session::start(fpi, config)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn fpi(&self) -> &Fpi {
        &self.fpi
    }

    pub fn diagnoses(&self) -> &[Diagnosis] {
        &self.diagnoses
    }

    pub fn distribution(&self) -> &DiagnosisDistribution {
        &self.dist
    }

    pub fn initial_diagnoses(&self) -> usize {
        self.initial_diagnoses
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn pending(&self) -> Option<&PendingQuery> {
        self.pending.as_ref()
    }

    /// Number of answered queries.
    pub fn step_count(&self) -> usize {
        self.records.len()
    }

    pub fn is_running(&self) -> bool {
        self.status == Status::Running
    }

    /// Finishes if one diagnosis is left, otherwise selects the next query.
    fn advance(&mut self) -> Result<()> {
        if self.diagnoses.len() == 1 {
            self.status = Status::Done { final_diagnosis: self.diagnoses[0].clone() };
            self.pending = None;
            return Ok(());
        }
        let mut search = self.config.search.clone();
        search.seed = search.seed.wrapping_add(self.records.len() as u64);
        let started = Instant::now();
        let selection = select_query(&self.diagnoses, &self.dist, &search);
        let time_ms = started.elapsed().as_secs_f64() * 1000.0;
        let selection = selection.inspect_err(|e| self.fail(e))?;
        self.pending = Some(PendingQuery {
            step: self.records.len() + 1,
            query: selection.query.into_iter().collect(),
            partition: selection.partition,
            time_ms,
            generated_qps: selection.stats.generated_qpartitions,
        });
        Ok(())
    }

    fn fail(&mut self, e: &Error) {
        self.status = Status::Failed { reason: e.to_string() };
        self.pending = None;
    }

    /// Incorporates the answer to the pending query.
    pub fn submit(&mut self, answer: Answer) -> Result<()> {
        if !self.is_running() {
            return Err(Error::SessionFinished);
        }
        let pending = self.pending.clone().ok_or(Error::SessionFinished)?;
        if self.records.len() >= MAX_STEPS {
            let e = Error::InvalidAnswer(format!("no result after {MAX_STEPS} queries"));
            self.fail(&e);
            return Err(e);
        }
        let result = self.incorporate(&pending, &answer);
        result.inspect_err(|e| self.fail(e))?;
        let rendering = pending
            .query
            .iter()
            .map(|&id| self.fpi.axiom(id).map(|ax| ax.to_string()).unwrap_or_default())
            .collect();
        self.records.push(StepRecord {
            step: pending.step,
            query_axiom_ids: pending.query.clone(),
            query_rendering: rendering,
            qpartition_sizes: pending.partition.sizes(),
            label: answer.label,
            positives: answer.positives,
            negatives: answer.negatives,
            axioms_inspected: answer.axioms_inspected,
            axioms_classified: answer.axioms_classified,
            time_per_query_ms: pending.time_ms,
            generated_qps: pending.generated_qps,
            remaining_diagnoses: self.diagnoses.len(),
        });
        self.advance()
    }

    fn incorporate(&mut self, pending: &PendingQuery, answer: &Answer) -> Result<()> {
        let fpi = incorporate_answer(&self.fpi, &pending.query, answer, pending.step)?;
        let kept = filter_diagnoses(&fpi, &self.diagnoses)?;
        let fresh = enumerate_minimal_diagnoses(&fpi, self.config.leading_diagnoses)?;
        let diagnoses = if fresh.len() <= 1 {
            fresh
        } else {
            let mut all = kept;
            for d in fresh {
                if !all.contains(&d) {
                    all.push(d);
                }
            }
            all.truncate(self.config.leading_diagnoses);
            all
        };
        self.dist = self.dist.refresh(&diagnoses);
        self.diagnoses = diagnoses;
        self.fpi = fpi;
        Ok(())
    }

    /// Answers the pending query with `provider` and incorporates the answer.
    pub fn step(&mut self, provider: &mut dyn FnMut(&Fpi, &[AxiomId]) -> Result<Answer>) -> Result<()> {
        if !self.is_running() {
            return Err(Error::SessionFinished);
        }
        let query = self.pending.as_ref().ok_or(Error::SessionFinished)?.query.clone();
        let answer = provider(&self.fpi, &query)?;
        self.submit(answer)
    }

    /// Runs to the end with a simulated expert.
    pub fn run_simulated(&mut self, gt: &GroundTruth, t: ExpertType) -> Result<()> {
        while self.is_running() {
            self.step(&mut |fpi, q| answer_query(gt, fpi, q, t))?;
        }
        Ok(())
    }

    pub fn summarize(&self) -> Result<Summary> {
        let Status::Done { final_diagnosis } = &self.status else {
            return Err(Error::SessionNotFinished);
        };
        let n = self.records.len();
        let mean = |f: fn(&StepRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                self.records.iter().map(f).sum::<f64>() / n as f64
            }
        };
        Ok(Summary {
            num_queries: n,
            num_axioms: self.records.iter().map(|r| r.axioms_inspected).sum(),
            num_axioms_classified: self.records.iter().map(|r| r.axioms_classified).sum(),
            mean_time_per_query_ms: mean(|r| r.time_per_query_ms),
            mean_qps_per_query: mean(|r| r.generated_qps as f64),
            final_diagnosis: final_diagnosis.clone(),
        })
    }

    /// The header record followed by one record per answered query.
    pub fn write_log(&self, out: &mut impl Write) -> Result<()> {
        #[derive(Serialize)]
        #[serde(rename_all = "camelCase")]
        struct Header<'a> {
            config: &'a SessionConfig,
            seed: u64,
            initial_diagnoses: usize,
        }
        let header =
            Header { config: &self.config, seed: self.config.seed, initial_diagnoses: self.initial_diagnoses };
        serde_json::to_writer(&mut *out, &header)?;
        out.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut *out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::RUNNING_EXAMPLE;
    use crate::heuristics::HeuristicId;

    fn d(ids: &[u32]) -> Diagnosis {
        ids.iter().map(|&i| AxiomId(i)).collect()
    }

    fn config(singleton: bool, expert: ExpertType) -> SessionConfig {
        SessionConfig::new(SearchConfig::new(HeuristicId::Ent, singleton, 3), Some(expert), 11)
    }

    #[test]
    fn running_example_sessions() {
        let gt = GroundTruth::new(d(&[3]));
        for singleton in [true, false] {
            for t in ExpertType::ALL {
                let fpi = Fpi::parse(RUNNING_EXAMPLE).unwrap();
                let mut s = Session::start_with_truth(fpi, config(singleton, t), &gt).unwrap();
                assert_eq!(s.diagnoses(), &[d(&[1]), d(&[2]), d(&[3])]);
                s.run_simulated(&gt, t).unwrap();
                let sum = s.summarize().unwrap();
                assert_eq!(sum.final_diagnosis, d(&[3]));
                assert!((1..=2).contains(&sum.num_queries));
                if singleton {
                    assert_eq!(sum.num_axioms, sum.num_queries);
                }
                assert_eq!(sum, s.summarize().unwrap());
            }
        }
    }

    #[test]
    fn finished_and_invalid_sessions() {
        let clean = Fpi::parse("o: a -> b\nb: a").unwrap();
        assert!(matches!(Session::start(clean, config(true, ExpertType::Pragmatist)), Err(Error::NoViolation)));

        let unique = Fpi::parse("o: a\nb: !a").unwrap();
        let mut s = Session::start(unique, config(true, ExpertType::Pragmatist)).unwrap();
        let sum = s.summarize().unwrap();
        assert_eq!((sum.num_queries, sum.num_axioms, sum.mean_time_per_query_ms), (0, 0, 0.0));
        assert!(matches!(s.submit(Answer::whole(&[AxiomId(1)], Label::Y)), Err(Error::SessionFinished)));

        let fpi = Fpi::parse(RUNNING_EXAMPLE).unwrap();
        let s = Session::start(fpi, config(true, ExpertType::Pragmatist)).unwrap();
        assert!(matches!(s.summarize(), Err(Error::SessionNotFinished)));
    }

    #[test]
    fn log_has_header_and_steps() {
        let gt = GroundTruth::new(d(&[3]));
        let fpi = Fpi::parse(RUNNING_EXAMPLE).unwrap();
        let mut s = Session::start(fpi, config(false, ExpertType::QueryBased)).unwrap();
        s.run_simulated(&gt, ExpertType::QueryBased).unwrap();
        let mut buf = Vec::new();
        s.write_log(&mut buf).unwrap();
        let lines: Vec<serde_json::Value> =
            String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), s.step_count() + 1);
        assert_eq!(lines[0]["seed"], 11);
        for key in [
            "step",
            "queryAxiomIds",
            "queryRendering",
            "qpartitionSizes",
            "label",
            "positives",
            "negatives",
            "axiomsInspected",
            "timePerQueryMs",
            "generatedQPs",
            "remainingDiagnoses",
        ] {
            assert!(lines[1].get(key).is_some(), "missing {key}");
        }
    }
}
