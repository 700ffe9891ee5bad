//! Sweep execution and CSV output.
//!
//! Layout under the output directory:
//! `runs/<run_id>.csv` holds one row per epoch, `summary.csv` one row per
//! completed run (its final epoch), `skipped.csv` every cell that failed its
//! capacity check or its run, and `scaling.csv` the final-epoch throughput,
//! storage efficiency and security per scheme, with one column per `N`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use polyshard::schemes::SchemeKind;
use polyshard::sim::{run, CsvRow, MetricsRecord, RunConfig};
use serde::Serialize;
use thiserror::Error;

use crate::config::SweepSpec;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output to {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub const RUN_HEADER: [&str; 15] = [
    "run_id",
    "scheme",
    "N",
    "K",
    "mu",
    "t",
    "c_rho_total",
    "c_psi_total",
    "c_chi_total",
    "c_f",
    "lambda",
    "gamma",
    "beta",
    "violations",
    "wall_ms",
];

pub const SUMMARY_HEADER: [&str; 10] = [
    "run_id",
    "scheme",
    "N",
    "K",
    "mu",
    "t",
    "lambda",
    "gamma",
    "beta",
    "violations",
];

/// Final-epoch values of one run; every field is a column of the run's
/// last CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub mu: String,
    pub t: usize,
    pub lambda: f64,
    pub gamma: String,
    pub beta: usize,
    pub violations: usize,
}

impl From<&CsvRow> for RunSummary {
    fn from(r: &CsvRow) -> Self {
        RunSummary {
            run_id: r.run_id.clone(),
            scheme: r.scheme.clone(),
            n: r.n,
            k: r.k,
            mu: r.mu.clone(),
            t: r.t,
            lambda: r.lambda,
            gamma: r.gamma.clone(),
            beta: r.beta,
            violations: r.violations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedRun {
    pub run_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepReport {
    pub completed: Vec<RunSummary>,
    pub skipped: Vec<SkippedRun>,
}

pub fn csv_rows(run_id: &str, config: &RunConfig, records: &[MetricsRecord]) -> Vec<CsvRow> {
    records
        .iter()
        .map(|r| r.row(run_id, config.scheme, config.mu()))
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SweepError + '_ {
    move |source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `header` then `rows` with LF terminators.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), SweepError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let csv_err = |source| SweepError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Runs one configuration and writes its per-epoch CSV.
pub fn run_one(
    run_id: &str,
    config: &RunConfig,
    out_dir: &Path,
) -> Result<Result<Vec<CsvRow>, String>, SweepError> {
    let out = match run(config) {
        Ok(out) => out,
        Err(e) => return Ok(Err(e.to_string())),
    };
    let rows = csv_rows(run_id, config, &out.records);
    write_csv(
        &out_dir.join("runs").join(format!("{run_id}.csv")),
        &RUN_HEADER,
        &rows,
    )?;
    Ok(Ok(rows))
}

/// Runs every cell of `spec` in order. Failed cells are recorded and the
/// sweep continues.
pub fn run_sweep(
    spec: &SweepSpec,
    out_dir: &Path,
    wall_clock: bool,
) -> Result<SweepReport, SweepError> {
    let mut report = SweepReport::default();
    for cell in spec.cells() {
        let mut config = match cell.config {
            Ok(c) => c,
            Err(reason) => {
                report.skipped.push(SkippedRun {
                    run_id: cell.run_id,
                    reason,
                });
                continue;
            }
        };
        config.wall_clock = wall_clock;
        match run_one(&cell.run_id, &config, out_dir)? {
            Ok(rows) => match rows.last() {
                Some(last) => report.completed.push(last.into()),
                None => report.skipped.push(SkippedRun {
                    run_id: cell.run_id,
                    reason: "no epochs".to_string(),
                }),
            },
            Err(reason) => report.skipped.push(SkippedRun {
                run_id: cell.run_id,
                reason,
            }),
        }
    }
    write_csv(
        &out_dir.join("summary.csv"),
        &SUMMARY_HEADER,
        &report.completed,
    )?;
    write_csv(
        &out_dir.join("skipped.csv"),
        &["run_id", "reason"],
        &report.skipped,
    )?;
    let table = scaling_table(&report.completed);
    fs::write(out_dir.join("scaling.csv"), &table).map_err(io_err(&out_dir.join("scaling.csv")))?;
    Ok(report)
}

fn scheme_rank(name: &str) -> usize {
    SchemeKind::ALL
        .iter()
        .position(|k| k.name() == name)
        .unwrap_or(usize::MAX)
}

/// Metric-by-scheme rows over one column per `N`. Each cell averages the
/// completed runs of that scheme and `N` (seeds and `mu` values); `gamma`
/// and `beta` are printed as they appear in the CSV when all runs agree.
pub fn scaling_table(summaries: &[RunSummary]) -> String {
    let mut ns: Vec<usize> = summaries.iter().map(|s| s.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut schemes: Vec<&str> = summaries.iter().map(|s| s.scheme.as_str()).collect();
    schemes.sort_by_key(|s| (scheme_rank(s), s.to_string()));
    schemes.dedup();
    let mut cells: BTreeMap<(&str, usize), Vec<&RunSummary>> = BTreeMap::new();
    for s in summaries {
        cells.entry((s.scheme.as_str(), s.n)).or_default().push(s);
    }
    let mut out = String::from("metric,scheme");
    for n in &ns {
        out.push_str(&format!(",{n}"));
    }
    out.push('\n');
    let agree = |runs: &[&RunSummary], f: &dyn Fn(&RunSummary) -> String| {
        let first = f(runs[0]);
        if runs.iter().all(|r| f(r) == first) {
            first
        } else {
            "mixed".to_string()
        }
    };
    for metric in ["lambda", "gamma", "beta"] {
        for scheme in &schemes {
            out.push_str(&format!("{metric},{scheme}"));
            for &n in &ns {
                out.push(',');
                let Some(runs) = cells.get(&(*scheme, n)) else {
                    continue;
                };
                let value = match metric {
                    "lambda" => format!(
                        "{:.4}",
                        runs.iter().map(|r| r.lambda).sum::<f64>() / runs.len() as f64
                    ),
                    "gamma" => agree(runs, &|r| r.gamma.clone()),
                    _ => agree(runs, &|r| r.beta.to_string()),
                };
                out.push_str(&value);
            }
            out.push('\n');
        }
    }
    out
}

/// Parses a value column of [`scaling_table`] output.
pub fn scaling_cell(table: &str, metric: &str, scheme: &str, n: usize) -> Option<String> {
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next()?.split(',').collect();
    let col = header.iter().position(|h| *h == n.to_string())?;
    lines
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|cols| cols[0] == metric && cols[1] == scheme)
        .and_then(|cols| cols.get(col).map(|c| c.to_string()))
        .filter(|c| !c.is_empty())
}
