//! CSV rows for solve and bench output.
//!
//! Columns: `instance,setting,t_s,UB,LB,gap,LB0,nBB,nIntCut,nFrCut,opt`. `gap`
//! is in percent. Fields without a value (the lower bounds of the greedy
//! heuristic) are left empty. Bench output appends `nOpt`, filled only on the
//! per-setting mean rows, whose `instance` field reads `mean`.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use labelcut_core::SolveReport;

pub const SOLVE_HEADER: [&str; 11] = [
    "instance", "setting", "t_s", "UB", "LB", "gap", "LB0", "nBB", "nIntCut", "nFrCut", "opt",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub setting: String,
    pub seconds: f64,
    pub upper: f64,
    pub lower: Option<f64>,
    pub gap: Option<f64>,
    pub root: Option<f64>,
    pub nodes: u64,
    pub int_cuts: u64,
    pub frac_cuts: u64,
    pub optimal: bool,
}

impl RunRecord {
    pub fn from_report(instance: &str, report: &SolveReport) -> Self {
        RunRecord {
            instance: instance.to_string(),
            setting: report.setting.to_string(),
            seconds: report.elapsed.as_secs_f64(),
            upper: report.upper_bound,
            lower: report.lower_bound,
            gap: report.gap_percent(),
            root: report.root_bound,
            nodes: report.nodes,
            int_cuts: report.int_cuts,
            frac_cuts: report.frac_cuts,
            optimal: report.optimal,
        }
    }

    pub fn fields(&self) -> Vec<String> {
        vec![
            self.instance.clone(),
            self.setting.clone(),
            format!("{:.3}", self.seconds),
            format!("{:.4}", self.upper),
            opt4(self.lower),
            opt4(self.gap),
            opt4(self.root),
            self.nodes.to_string(),
            self.int_cuts.to_string(),
            self.frac_cuts.to_string(),
            u8::from(self.optimal).to_string(),
        ]
    }
}

fn opt4(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_default()
}

/// Per-setting means over `runs`; optional columns average only the runs
/// that have them.
pub fn mean_fields(setting: &str, runs: &[&RunRecord]) -> Vec<String> {
    let n = runs.len().max(1) as f64;
    let mean = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
    let mean_opt = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
        let vals: Vec<f64> = runs.iter().filter_map(|r| f(r)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    vec![
        "mean".into(),
        setting.into(),
        format!("{:.3}", mean(&|r| r.seconds)),
        format!("{:.4}", mean(&|r| r.upper)),
        opt4(mean_opt(&|r| r.lower)),
        opt4(mean_opt(&|r| r.gap)),
        opt4(mean_opt(&|r| r.root)),
        format!("{:.1}", mean(&|r| r.nodes as f64)),
        format!("{:.1}", mean(&|r| r.int_cuts as f64)),
        format!("{:.1}", mean(&|r| r.frac_cuts as f64)),
        String::new(),
        runs.iter().filter(|r| r.optimal).count().to_string(),
    ]
}

/// Appends rows to `path`, writing `header` first when the file is new or empty.
pub fn append_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> csv::Result<()> {
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let fresh = file.metadata()?.len() == 0;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    if fresh {
        w.write_record(header)?;
    }
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writer that flushes after every row, so an interrupted run keeps its rows.
pub struct RowSink<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RowSink<W> {
    pub fn new(out: W, header: &[&str]) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(header)?;
        inner.flush()?;
        Ok(RowSink { inner })
    }

    pub fn push(&mut self, row: &[String]) -> csv::Result<()> {
        self.inner.write_record(row)?;
        self.inner.flush()?;
        Ok(())
    }
}
