//! Faulty-KB generation and batch experiments.

mod experiment;
mod generator;

pub use experiment::{
    load_kbs, run_experiments, sample_truth, session_seed, AggregateRow, ExperimentPlan, ExperimentResults, KbInput,
    QueryMode, SessionRow, TrendRow, TRUTH_POOL,
};
pub use generator::{generate_faulty_kb, GeneratedKb, GeneratorSpec};
