//! The `labelcut` command line: instance generation and ingestion, scenario
//! resampling, solving, brute-force checking and benchmark plans.
//!
//! Exit codes: 0 on success, 2 on a parse or usage error, 3 when a solve hit
//! its time limit with a nonzero gap, 1 on anything else.

pub mod bench;
pub mod report;
pub mod snap;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use labelcut_core::generate::{
    generate_instance, instance_from_edges, sample_scenarios, GenConfig, GraphModel, LabelClass,
};
use labelcut_core::io::{load_instance, write_instance};
use labelcut_core::master::brute_force_oracle_with_cap;
use labelcut_core::{branch_and_benders_cut, Error, Instance, Setting, SolverSettings};

use crate::bench::{Aggregation, BenchPlan};
use crate::report::{append_rows, RunRecord, SOLVE_HEADER};

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_TIME_LIMIT: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    /// An input file that could be read but not accepted.
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Parse { .. } | Error::InvalidConfig(_))
            | CliError::Input { .. }
            | CliError::Usage(_) => EXIT_PARSE,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Done,
    /// The time limit ran out before the gap closed.
    TimeLimit,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Done => 0,
            Status::TimeLimit => EXIT_TIME_LIMIT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "labelcut",
    version,
    about = "Label blocking against independent-cascade spread"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic BA or ER instance.
    Generate(GenerateArgs),
    /// Build an instance from a SNAP edge list.
    IngestSnap(IngestArgs),
    /// Replace the scenarios of an instance with a fresh sample.
    Sample(SampleArgs),
    /// Solve an instance and print one report row.
    Solve(SolveArgs),
    /// Enumerate every feasible blocking.
    Oracle(OracleArgs),
    /// Run a benchmark plan and write per-run and per-setting mean rows.
    Bench(BenchArgs),
}

/// Labels, scenarios, seeds and budget shared by `generate` and `ingest-snap`.
#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Number of blockable labels n_L; label 0 is added as the unblockable one.
    #[arg(long, default_value_t = 20)]
    pub labels: u32,
    /// Label distribution class (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub class: u8,
    #[arg(long, default_value_t = 0.1)]
    pub plive: f64,
    #[arg(long, default_value_t = 50)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 50)]
    pub seeds: usize,
    /// Reverse-reachable sets used for seed selection.
    #[arg(long, default_value_t = 1000)]
    pub rr: usize,
    #[arg(long, default_value_t = 4.0)]
    pub budget: f64,
    /// Add parallel arcs with distinct labels.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long, default_value_t = 0)]
    pub rng: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self, model: GraphModel, nodes: usize, edges: usize) -> Result<GenConfig, CliError> {
        Ok(GenConfig {
            model,
            nodes,
            edges,
            blockable_labels: self.labels,
            label_class: LabelClass::from_number(self.class)?,
            p_live: self.plive,
            scenario_count: self.scenarios,
            seed_count: self.seeds,
            rr_samples: self.rr,
            budget: self.budget,
            parallel_arcs: self.parallel,
            rng_seed: self.rng,
        })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "ba")]
    pub model: GraphModel,
    #[arg(long, default_value_t = 1000)]
    pub nodes: usize,
    /// Undirected edges; each becomes two arcs.
    #[arg(long, default_value_t = 5000)]
    pub edges: usize,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Treat each line as an undirected edge and add both arcs.
    #[arg(long)]
    pub undirected: bool,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 0.1)]
    pub plive: f64,
    #[arg(long, default_value_t = 0)]
    pub rng: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// LP, I, I+, I+S, I+SF, I+SFP, I+SFH or G (case-insensitive).
    #[arg(long, default_value = "I+SFP")]
    pub setting: Setting,
    /// Fraction of scenarios searched for violated cuts per round.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub timelimit: Option<f64>,
    /// Overrides the budget stored in the instance.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Append the row to this CSV file as well.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print every separated cut to stderr.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub budget: Option<f64>,
    /// Maximum number of feasible subsets to visit.
    #[arg(long, default_value_t = labelcut_core::master::DEFAULT_ORACLE_CAP)]
    pub cap: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// CSV plan with columns instance,setting,budget,timelimit.
    #[arg(long, conflicts_with_all = ["instances", "settings"])]
    pub plan: Option<PathBuf>,
    /// Instances to cross with --settings.
    #[arg(long, num_args = 1..)]
    pub instances: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "I,I+S,I+SFP")]
    pub settings: Vec<Setting>,
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub timelimit: Option<f64>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Concurrent runs; each run is still timed on its own.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Omit the per-setting mean rows.
    #[arg(long)]
    pub per_run: bool,
}

pub fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::IngestSnap(a) => cmd_ingest_snap(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn seconds(v: Option<f64>, flag: &str) -> Result<Option<Duration>, CliError> {
    v.map(|s| Duration::try_from_secs_f64(s).map_err(|_| CliError::Usage(format!("invalid --{flag} {s}"))))
        .transpose()
}

/// I/O failures keep their own exit code; anything else is bad input.
pub fn load(path: &Path) -> Result<Instance, CliError> {
    load_instance(path).map_err(|e| match e {
        Error::Io(io) => CliError::Io(io),
        source => CliError::Input {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn load_with_budget(path: &Path, budget: Option<f64>) -> Result<Instance, CliError> {
    let instance = load(path)?;
    Ok(match budget {
        Some(b) => instance.with_budget(b)?,
        None => instance,
    })
}

fn display_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<Status, CliError> {
    let instance = generate_instance(&a.pipeline.config(a.model, a.nodes, a.edges)?)?;
    emit(a.pipeline.out.as_deref(), &write_instance(&instance))?;
    Ok(Status::Done)
}

pub fn cmd_ingest_snap(a: &IngestArgs) -> Result<Status, CliError> {
    let text = fs::read_to_string(&a.input)?;
    let graph = snap::parse_snap(&text, a.undirected).map_err(|source| CliError::Input {
        path: a.input.clone(),
        source,
    })?;
    eprintln!(
        "{} nodes, {} edges ({} self-loops and {} repeats dropped)",
        graph.node_count,
        graph.edges.len(),
        graph.self_loops,
        graph.duplicates
    );
    let config = a
        .pipeline
        .config(GraphModel::Er, graph.node_count, graph.edges.len())?;
    let instance = instance_from_edges(graph.node_count, &graph.edges, a.undirected, &config)?;
    emit(a.pipeline.out.as_deref(), &write_instance(&instance))?;
    Ok(Status::Done)
}

pub fn cmd_sample(a: &SampleArgs) -> Result<Status, CliError> {
    let instance = load(&a.instance)?;
    let scenarios = sample_scenarios(instance.graph(), a.plive, a.scenarios, a.rng)?;
    emit(
        a.out.as_deref(),
        &write_instance(&instance.with_scenarios(scenarios)?),
    )?;
    Ok(Status::Done)
}

pub fn cmd_solve(a: &SolveArgs) -> Result<Status, CliError> {
    let instance = load_with_budget(&a.instance, a.budget)?;
    let mut settings = SolverSettings::for_setting(a.setting).with_trace(a.trace);
    if let Some(tau) = a.tau {
        settings = settings.with_tau(tau);
    }
    settings.time_limit = seconds(a.timelimit, "timelimit")?;
    let report = branch_and_benders_cut(&instance, &settings)?;
    for line in &report.trace {
        eprintln!("{line}");
    }
    let blocked: Vec<String> = report.blocked.iter().map(|l| l.to_string()).collect();
    let value = report
        .objective
        .map(|o| o.to_string())
        .unwrap_or_else(|| "none".into());
    eprintln!("blocked {{{}}} objective {value}", blocked.join(","));
    let row = RunRecord::from_report(&display_name(&a.instance), &report).fields();
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(SOLVE_HEADER)?;
    w.write_record(&row)?;
    w.flush()?;
    if let Some(path) = &a.report {
        append_rows(path, &SOLVE_HEADER, &[row])?;
    }
    let open_gap = report.gap_percent().is_some_and(|g| g > 0.0);
    Ok(if settings.time_limit.is_some() && !report.optimal && open_gap {
        Status::TimeLimit
    } else {
        Status::Done
    })
}

pub const ORACLE_HEADER: [&str; 4] = ["instance", "blocked", "objective", "UB"];

pub fn cmd_oracle(a: &OracleArgs) -> Result<Status, CliError> {
    let instance = load_with_budget(&a.instance, a.budget)?;
    let (blocked, value) = brute_force_oracle_with_cap(&instance, a.cap)?;
    let labels: Vec<String> = blocked.iter().map(|l| l.to_string()).collect();
    let row = vec![
        display_name(&a.instance),
        labels.join(" "),
        value.to_string(),
        format!("{:.4}", labelcut_core::master::ratio_f64(value)),
    ];
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(ORACLE_HEADER)?;
    w.write_record(&row)?;
    w.flush()?;
    if let Some(path) = &a.report {
        append_rows(path, &ORACLE_HEADER, &[row])?;
    }
    Ok(Status::Done)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<Status, CliError> {
    let mut plan = match &a.plan {
        Some(path) => {
            let base = path.parent().unwrap_or(Path::new("."));
            BenchPlan::parse(&fs::read_to_string(path)?, base)?
        }
        None if a.instances.is_empty() => {
            return Err(CliError::Usage("bench needs --plan or --instances".into()));
        }
        None => BenchPlan::cross(
            &a.instances,
            &a.settings,
            a.budget,
            seconds(a.timelimit, "timelimit")?,
        ),
    };
    if a.per_run {
        plan.aggregation = Aggregation::PerRun;
    }
    plan.check()?;
    match &a.out {
        Some(path) => bench::run_plan(&plan, a.jobs, fs::File::create(path)?)?,
        None => bench::run_plan(&plan, a.jobs, io::stdout())?,
    };
    Ok(Status::Done)
}
