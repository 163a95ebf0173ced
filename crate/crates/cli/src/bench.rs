//! Benchmark plans: a list of solver runs, executed in order, with one CSV row
//! per run and a mean row per setting.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use labelcut_core::{branch_and_benders_cut, Error, Setting, SolverSettings};
use rayon::prelude::*;

use crate::report::{mean_fields, RowSink, RunRecord, SOLVE_HEADER};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub instance: PathBuf,
    pub setting: Setting,
    /// Overrides the budget stored in the instance file.
    pub budget: Option<f64>,
    pub time_limit: Option<Duration>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    PerRun,
    /// Run rows followed by one mean row per setting.
    PerSettingMeans,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub runs: Vec<BenchRun>,
    pub aggregation: Aggregation,
}

pub fn bench_header() -> Vec<&'static str> {
    let mut h = SOLVE_HEADER.to_vec();
    h.push("nOpt");
    h
}

impl BenchPlan {
    /// Every instance under every setting, instance-major.
    pub fn cross(
        instances: &[PathBuf],
        settings: &[Setting],
        budget: Option<f64>,
        time_limit: Option<Duration>,
    ) -> Self {
        let runs = instances
            .iter()
            .flat_map(|i| {
                settings.iter().map(move |&setting| BenchRun {
                    instance: i.clone(),
                    setting,
                    budget,
                    time_limit,
                })
            })
            .collect();
        BenchPlan {
            runs,
            aggregation: Aggregation::PerSettingMeans,
        }
    }

    /// CSV with header `instance,setting,budget,timelimit`; the last two may
    /// be empty. Relative instance paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut runs = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let record = record?;
            let bad = |message: String| CliError::Core(Error::Parse { line, message });
            let field = |j: usize| record.get(j).unwrap_or("");
            if field(0).is_empty() {
                return Err(bad("missing instance path".into()));
            }
            let setting: Setting = field(1).parse().map_err(|e: Error| bad(e.to_string()))?;
            let number = |j: usize, what: &str| -> Result<Option<f64>, CliError> {
                match field(j) {
                    "" => Ok(None),
                    s => s
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite() && *v >= 0.0)
                        .map(Some)
                        .ok_or_else(|| bad(format!("invalid {what} `{s}`"))),
                }
            };
            runs.push(BenchRun {
                instance: base.join(field(0)),
                setting,
                budget: number(2, "budget")?,
                time_limit: number(3, "time limit")?.map(Duration::from_secs_f64),
            });
        }
        Ok(BenchPlan {
            runs,
            aggregation: Aggregation::PerSettingMeans,
        })
    }

    /// Loads every instance up front so a bad file fails before any timing.
    pub fn check(&self) -> Result<(), CliError> {
        for run in &self.runs {
            crate::load(&run.instance)?;
        }
        Ok(())
    }
}

fn execute(run: &BenchRun) -> Result<RunRecord, CliError> {
    let mut instance = crate::load(&run.instance)?;
    if let Some(b) = run.budget {
        instance = instance.with_budget(b)?;
    }
    let mut settings = SolverSettings::for_setting(run.setting);
    settings.time_limit = run.time_limit;
    let report = branch_and_benders_cut(&instance, &settings)?;
    let name = run
        .instance
        .file_name()
        .map(|s| s.to_string_lossy())
        .unwrap_or_default();
    Ok(RunRecord::from_report(&name, &report))
}

/// Runs the plan and writes rows as they finish. With `jobs > 1` runs execute
/// concurrently and their rows appear in completion order; each run still
/// times only itself.
pub fn run_plan<W: Write + Send>(plan: &BenchPlan, jobs: usize, out: W) -> Result<Vec<RunRecord>, CliError> {
    let mut header = bench_header();
    if plan.aggregation == Aggregation::PerRun {
        header.pop();
    }
    let sink = Mutex::new(RowSink::new(out, &header)?);
    let pad = plan.aggregation == Aggregation::PerSettingMeans;
    let emit = |record: &RunRecord| -> Result<(), CliError> {
        let mut row = record.fields();
        if pad {
            row.push(String::new());
        }
        sink.lock().expect("row sink poisoned").push(&row)?;
        Ok(())
    };
    let records: Vec<RunRecord> = if jobs <= 1 {
        plan.runs
            .iter()
            .map(|r| {
                let rec = execute(r)?;
                emit(&rec)?;
                Ok(rec)
            })
            .collect::<Result<_, CliError>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(|| {
            plan.runs
                .par_iter()
                .map(|r| {
                    let rec = execute(r)?;
                    emit(&rec)?;
                    Ok(rec)
                })
                .collect::<Result<_, CliError>>()
        })?
    };
    if pad {
        let mut by_setting: BTreeMap<usize, (String, Vec<&RunRecord>)> = BTreeMap::new();
        for (run, rec) in plan.runs.iter().zip(&records) {
            let order = Setting::EXACT
                .iter()
                .position(|&s| s == run.setting)
                .unwrap_or(Setting::EXACT.len());
            by_setting
                .entry(order)
                .or_insert_with(|| (rec.setting.clone(), Vec::new()))
                .1
                .push(rec);
        }
        let mut sink = sink.into_inner().expect("row sink poisoned");
        for (setting, runs) in by_setting.values() {
            sink.push(&mean_fields(setting, runs))?;
        }
    }
    Ok(records)
}
