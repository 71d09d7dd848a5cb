use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use fl_core::expert::{ExpertType, GroundTruth};
use fl_core::fpi::Fpi;
use fl_core::harness::{
    generate_faulty_kb, load_kbs, run_experiments, sample_truth, ExperimentPlan, GeneratorSpec, QueryMode,
};
use fl_core::heuristics::{HeuristicId, HeuristicParams};
use fl_core::search::{SearchConfig, DEFAULT_NODE_BUDGET};
use fl_core::service::{self, ServiceConfig, DEFAULT_IDLE_TIMEOUT};
use fl_core::session::{Session, SessionConfig, DEFAULT_LEADING_DIAGNOSES};

#[derive(Parser)]
#[command(name = "fl", version, about = "Interactive fault localization for propositional KBs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment plan and write per-session, aggregate and trend CSVs.
    Run {
        #[arg(long)]
        plan: PathBuf,
        /// Output prefix; overrides the plan's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a faulty KB plus a `<file>.truth.json` sidecar.
    Gen {
        #[arg(long)]
        atoms: usize,
        #[arg(long)]
        faults: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        chain_length: usize,
        #[arg(long, default_value_t = 3)]
        min_diagnoses: usize,
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Run one simulated session and print its JSON-lines log.
    Session {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        mode: QueryMode,
        #[arg(long)]
        heuristic: HeuristicId,
        #[arg(long)]
        expert: ExpertType,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ground truth JSON; sampled from the seed when absent.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Write the log here instead of stdout.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_LEADING_DIAGNOSES)]
        leading_diagnoses: usize,
    },
    /// Serve the JSON API. FL_PORT overrides --port.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory for logs of completed sessions.
        #[arg(long)]
        persist_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_IDLE_TIMEOUT.as_secs())]
        idle_timeout_secs: u64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { plan, out } => run(&plan, out),
        Command::Gen { atoms, faults, seed, chain_length, min_diagnoses, out } => {
            let spec = GeneratorSpec { atoms, chain_length, num_faults: faults, seed, min_diagnoses };
            let kb = generate_faulty_kb(&spec)?;
            fs::write(&out, &kb.text).with_context(|| format!("writing {}", out.display()))?;
            let sidecar = truth_sidecar(&out);
            fs::write(&sidecar, kb.truth_json()).with_context(|| format!("writing {}", sidecar.display()))?;
            eprintln!("{} minimal diagnoses; truth in {}", kb.num_diagnoses, sidecar.display());
            Ok(())
        }
        Command::Session { kb, mode, heuristic, expert, seed, truth, log, leading_diagnoses } => {
            let text = fs::read_to_string(&kb).with_context(|| format!("reading {}", kb.display()))?;
            let fpi = Fpi::parse(&text).with_context(|| format!("parsing {}", kb.display()))?;
            let gt = match truth {
                Some(path) => serde_json::from_str::<GroundTruth>(&fs::read_to_string(&path)?)
                    .with_context(|| format!("reading {}", path.display()))?,
                None => sample_truth(&fpi, seed)?,
            };
            let search = SearchConfig {
                heuristic,
                params: HeuristicParams::default(),
                singleton: mode.is_singleton(),
                seed,
                node_budget: DEFAULT_NODE_BUDGET,
            };
            let mut config = SessionConfig::new(search, Some(expert), seed);
            config.leading_diagnoses = leading_diagnoses;
            let mut session = Session::start_with_truth(fpi, config, &gt)?;
            session.run_simulated(&gt, expert)?;
            match log {
                Some(path) => session.write_log(&mut fs::File::create(&path)?)?,
                None => session.write_log(&mut io::stdout().lock())?,
            }
            let summary = session.summarize()?;
            eprintln!("{}", serde_json::to_string(&summary)?);
            if summary.final_diagnosis != gt.actual_diagnosis {
                bail!("final diagnosis {} differs from the ground truth", summary.final_diagnosis);
            }
            Ok(())
        }
        Command::Serve { port, persist_dir, idle_timeout_secs } => {
            let port = match std::env::var("FL_PORT") {
                Ok(v) => v.parse().with_context(|| format!("FL_PORT=`{v}` is not a port"))?,
                Err(_) => port,
            };
            let config = ServiceConfig { idle_timeout: Duration::from_secs(idle_timeout_secs), persist_dir };
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("listening on port {port}");
            rt.block_on(service::serve(port, config))?;
            Ok(())
        }
    }
}

fn truth_sidecar(kb: &Path) -> PathBuf {
    let mut s = kb.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

fn run(plan_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let plan = ExperimentPlan::load(plan_path).with_context(|| format!("loading {}", plan_path.display()))?;
    let prefix = out.or_else(|| plan.out.clone()).unwrap_or_else(|| plan_path.with_extension(""));
    let kbs = load_kbs(&plan)?;
    let results = run_experiments(&plan, &kbs);
    results.write(&prefix)?;
    let failed = results.rows.iter().filter(|r| r.status != "ok").count();
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{} sessions, {} failed; CSVs at {}*.csv", results.rows.len(), failed, prefix.display())?;
    for t in &results.trends {
        writeln!(
            stdout,
            "{}: pragmatist cheapest {}, singleton QPs <= half {}, singleton #Ax <= query-based {}",
            t.kb, t.pragmatist_cheapest, t.singleton_qps_at_most_half, t.singleton_beats_query_based
        )?;
    }
    Ok(())
}
