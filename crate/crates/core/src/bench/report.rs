use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_rows, BenchRow};
use crate::{Error, Result};

/// Aggregates for one (scale, solver) group. Scale is the preset name, or
/// `file` for instances loaded from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scale: String,
    pub solver: String,
    pub rows: usize,
    pub errors: usize,
    pub median_objective: Option<f64>,
    pub median_log10_objective: Option<f64>,
    pub median_gap_percent: Option<f64>,
    pub median_wall_time_s: Option<f64>,
    /// Share of successful rows that are feasible after repair.
    pub feasibility_rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub summary: Vec<SummaryRow>,
    pub table: String,
    pub plot_path: PathBuf,
}

/// Median of the values; the mean of the middle two for even lengths.
/// NaNs are ignored.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

fn scale_key(row: &BenchRow) -> String {
    if row.preset.is_empty() {
        "file".into()
    } else {
        row.preset.clone()
    }
}

fn scale_rank(scale: &str) -> usize {
    match scale {
        "S" => 0,
        "M" => 1,
        "L" => 2,
        _ => 3,
    }
}

pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, String, String), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        let scale = scale_key(r);
        groups
            .entry((scale_rank(&scale), scale, r.solver.clone()))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((_, scale, solver), group)| {
            let ok: Vec<&BenchRow> = group.iter().copied().filter(|r| r.error.is_empty()).collect();
            let pick = |f: fn(&BenchRow) -> Option<f64>| median(&ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>());
            let feasible = ok.iter().filter(|r| r.feasible_post_repair == Some(true)).count();
            SummaryRow {
                scale,
                solver,
                rows: group.len(),
                errors: group.len() - ok.len(),
                median_objective: pick(|r| r.objective),
                median_log10_objective: pick(|r| r.log10_objective),
                median_gap_percent: pick(|r| r.gap_percent),
                median_wall_time_s: pick(|r| Some(r.wall_time_s)),
                feasibility_rate: (!ok.is_empty()).then(|| feasible as f64 / ok.len() as f64),
            }
        })
        .collect()
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

fn render(summary: &[SummaryRow]) -> String {
    let mut out = String::new();
    let mut current = None;
    for s in summary {
        if current != Some(&s.scale) {
            if current.is_some() {
                out.push('\n');
            }
            current = Some(&s.scale);
            let _ = writeln!(out, "scale {}", s.scale);
            let _ = writeln!(
                out,
                "{:<11} {:>5} {:>6} {:>14} {:>9} {:>12} {:>9}",
                "solver", "rows", "errors", "objective", "gap_%", "time_s", "feasible"
            );
        }
        let _ = writeln!(
            out,
            "{:<11} {:>5} {:>6} {:>14} {:>9} {:>12} {:>9}",
            s.solver,
            s.rows,
            s.errors,
            cell(s.median_objective, 2),
            cell(s.median_gap_percent, 3),
            cell(s.median_wall_time_s, 6),
            cell(s.feasibility_rate, 3),
        );
    }
    out
}

/// Reads `rows.csv` (or a directory containing it), prints per-scale
/// medians and writes `plot.csv` beside it.
pub fn report(path: &Path) -> Result<Report> {
    let rows_path = if path.is_dir() {
        path.join("rows.csv")
    } else {
        path.to_path_buf()
    };
    if !rows_path.is_file() {
        return Err(Error::NoResults(rows_path));
    }
    let rows = read_rows(&rows_path)?;
    if rows.is_empty() {
        return Err(Error::NoResults(rows_path));
    }
    let summary = summarize(&rows);
    let plot_path = rows_path.with_file_name("plot.csv");
    let mut w = csv::Writer::from_path(&plot_path)?;
    w.write_record(["scale", "solver", "median_log10_objective", "median_wall_time_s"])?;
    for s in &summary {
        w.write_record([
            s.scale.clone(),
            s.solver.clone(),
            s.median_log10_objective.map(|v| v.to_string()).unwrap_or_default(),
            s.median_wall_time_s.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(Report {
        table: render(&summary),
        summary,
        plot_path,
    })
}
