//! Benchmark harness: instances x solvers x seeds, written out as CSV rows,
//! a JSON summary and one audit file per row.
//!
//! `rows.csv` columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `instance` | instance id (`<preset>-<seed>` or the file stem) |
//! | `preset` | `S`/`M`/`L`, empty for file instances |
//! | `solver` | `exact`, `exhaustive`, `sa` or `cim` |
//! | `seed` | solver seed (and generation seed for presets) |
//! | `num_vars` | QUBO variables |
//! | `objective` | plan cost after decoding (and repair, when enabled) |
//! | `log10_objective` | `log10(objective)`, empty for zero cost |
//! | `raw_energy` | QUBO energy of the solver's bitstring |
//! | `feasible_pre_repair`, `feasible_post_repair` | constraint checks |
//! | `oracle_objective` | exact optimum, empty when over budget |
//! | `gap_percent` | `100 (objective - oracle) / oracle` for feasible plans |
//! | `wall_time_s` | seconds inside the solver call, microsecond resolution |
//! | `error` | failure message; empty on success |

mod report;

pub use report::{median, report, summarize, Report, SummaryRow};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::encoding::{build_encoding_for, encode_solution, fill_slack, EncodingScheme};
use crate::instance::{generate_instance, load_instance, GeneratorConfig, Preset, ProblemInstance};
use crate::qubo::{build_qubo, PenaltyMode, QuboProblem};
use crate::repair::decode_and_repair;
use crate::sip::{check_feasibility, evaluate_objective, solve_exact, ExactBounds, ExactSolution, ObjectiveBreakdown};
use crate::sip::{FeasibilityReport, SipSolution};
use crate::solvers::{solve_cim_sim, solve_exhaustive, solve_sa, AnnealSchedule, CimSchedule, SolveReport, SolverKind};
use crate::{Error, Execution, Result, DEFAULT_ALPHA, DEFAULT_BETA};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealOverrides {
    pub t_initial: Option<f64>,
    pub t_final: Option<f64>,
    pub sweeps: Option<usize>,
    pub restarts: Option<usize>,
}

impl AnnealOverrides {
    pub fn apply(&self, mut s: AnnealSchedule) -> AnnealSchedule {
        if let Some(v) = self.t_initial {
            s.t_initial = v;
        }
        if let Some(v) = self.t_final {
            s.t_final = v;
        }
        if let Some(v) = self.sweeps {
            s.sweeps = v;
        }
        if let Some(v) = self.restarts {
            s.restarts = v;
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CimOverrides {
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub pump_start: Option<f64>,
    pub pump_end: Option<f64>,
    pub coupling_strength: Option<f64>,
    pub noise_amplitude: Option<f64>,
    pub restarts: Option<usize>,
}

impl CimOverrides {
    pub fn apply(&self, mut s: CimSchedule) -> CimSchedule {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { s.$f = v; })*};
        }
        set!(steps, dt, pump_start, pump_end, coupling_strength, noise_amplitude, restarts);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub presets: Vec<Preset>,
    pub instance_files: Vec<PathBuf>,
    pub solvers: Vec<SolverKind>,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub beta: f64,
    pub penalty_mode: PenaltyMode,
    pub out_dir: PathBuf,
    pub repair: bool,
    /// Overrides `max_reserved` for generated instances.
    pub max_reserved: Option<u64>,
    /// Oracle search-space budget (first-stage assignments).
    pub oracle_budget: u64,
    pub sa: AnnealOverrides,
    pub cim: CimOverrides,
    /// Scheduling inside each solver call.
    pub execution: Execution,
    /// Run rows concurrently. Off by default so timings are not skewed by
    /// competing rows.
    pub parallel_rows: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            presets: vec![Preset::S],
            instance_files: Vec::new(),
            solvers: vec![SolverKind::Sa],
            seeds: vec![1],
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            penalty_mode: PenaltyMode::Paper,
            out_dir: PathBuf::from("results"),
            repair: true,
            max_reserved: None,
            oracle_budget: crate::sip::DEFAULT_BUDGET as u64,
            sa: AnnealOverrides::default(),
            cim: CimOverrides::default(),
            execution: Execution::Parallel,
            parallel_rows: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.presets.is_empty() && self.instance_files.is_empty() {
            return bad("no presets or instance files given");
        }
        if self.solvers.is_empty() {
            return bad("no solvers given");
        }
        if self.seeds.is_empty() {
            return bad("no seeds given");
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidPenalty {
                alpha: self.alpha,
                beta: self.beta,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub preset: String,
    pub solver: String,
    pub seed: u64,
    pub num_vars: usize,
    pub objective: Option<f64>,
    pub log10_objective: Option<f64>,
    pub raw_energy: Option<f64>,
    pub feasible_pre_repair: Option<bool>,
    pub feasible_post_repair: Option<bool>,
    pub oracle_objective: Option<f64>,
    pub gap_percent: Option<f64>,
    pub wall_time_s: f64,
    pub error: String,
}

/// Everything needed to audit one row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub solution: SipSolution,
    pub breakdown: ObjectiveBreakdown,
    pub feasibility: FeasibilityReport,
    pub report: Option<SolveReport>,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    pub summary: Vec<SummaryRow>,
    pub rows_path: PathBuf,
    pub summary_path: PathBuf,
}

struct Prepared {
    id: String,
    preset: Option<Preset>,
    instance: ProblemInstance,
    seeds: Vec<u64>,
    encoding: EncodingScheme,
    qubo: std::result::Result<QuboProblem, String>,
    oracle: std::result::Result<(ExactSolution, f64), String>,
}

fn prepare(config: &BenchConfig) -> Result<Vec<Prepared>> {
    let mut sources: Vec<(String, Option<Preset>, ProblemInstance, Vec<u64>)> = Vec::new();
    for &preset in &config.presets {
        let mut gen = GeneratorConfig::preset(preset);
        if let Some(x) = config.max_reserved {
            gen.max_reserved = x;
        }
        for &seed in &config.seeds {
            let instance = generate_instance(&gen, seed)?;
            sources.push((format!("{preset}-{seed}"), Some(preset), instance, vec![seed]));
        }
    }
    for path in &config.instance_files {
        let instance = load_instance(path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        sources.push((id, None, instance, config.seeds.clone()));
    }

    let prepared = config.execution.map_slice(&sources, |(id, preset, instance, seeds)| {
        let encoding = build_encoding_for(instance, config.penalty_mode);
        let qubo = build_qubo(instance, &encoding, config.alpha, config.beta, config.penalty_mode)
            .map_err(|e| e.to_string());
        let bounds = ExactBounds {
            budget: config.oracle_budget as u128,
            ..ExactBounds::for_instance(instance)
        };
        let start = Instant::now();
        let oracle = solve_exact(instance, &bounds, config.execution)
            .map(|s| (s, start.elapsed().as_secs_f64()))
            .map_err(|e| e.to_string());
        Prepared {
            id: id.clone(),
            preset: *preset,
            instance: instance.clone(),
            seeds: seeds.clone(),
            encoding,
            qubo,
            oracle,
        }
    });
    Ok(prepared)
}

fn micros(secs: f64) -> f64 {
    (secs * 1e6).round() / 1e6
}

struct RowResult {
    row: BenchRow,
    record: Option<SolutionRecord>,
}

fn run_row(config: &BenchConfig, p: &Prepared, solver: SolverKind, seed: u64) -> RowResult {
    let mut row = BenchRow {
        instance: p.id.clone(),
        preset: p.preset.map(|x| x.to_string()).unwrap_or_default(),
        solver: solver.name().to_string(),
        seed,
        num_vars: p.encoding.num_vars,
        objective: None,
        log10_objective: None,
        raw_energy: None,
        feasible_pre_repair: None,
        feasible_post_repair: None,
        oracle_objective: p.oracle.as_ref().ok().map(|o| o.0.breakdown.total),
        gap_percent: None,
        wall_time_s: 0.0,
        error: String::new(),
    };
    match execute(config, p, solver, seed, &mut row) {
        Ok((solution, feasibility, report)) => {
            let breakdown = evaluate_objective(&p.instance, &solution).expect("solution matches instance");
            let objective = breakdown.total;
            row.objective = Some(objective);
            row.log10_objective = (objective > 0.0).then(|| objective.log10());
            if let (Some(opt), true) = (row.oracle_objective, feasibility.feasible) {
                row.gap_percent = gap_percent(objective, opt);
            }
            let record = SolutionRecord {
                instance: p.id.clone(),
                solver: row.solver.clone(),
                seed,
                solution,
                breakdown,
                feasibility,
                report,
            };
            RowResult {
                row,
                record: Some(record),
            }
        }
        Err(e) => {
            row.error = e;
            RowResult { row, record: None }
        }
    }
}

fn gap_percent(objective: f64, optimum: f64) -> Option<f64> {
    if optimum > 0.0 {
        let g = 100.0 * (objective - optimum) / optimum;
        // Rounding noise on an optimal plan.
        Some(if g < 0.0 && g > -1e-9 { 0.0 } else { g })
    } else if objective == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

type Executed = (SipSolution, FeasibilityReport, Option<SolveReport>);

fn execute(
    config: &BenchConfig,
    p: &Prepared,
    solver: SolverKind,
    seed: u64,
    row: &mut BenchRow,
) -> std::result::Result<Executed, String> {
    if solver == SolverKind::Exact {
        let (exact, secs) = p.oracle.as_ref().map_err(|e| e.clone())?;
        row.wall_time_s = micros(*secs);
        if let Ok(q) = &p.qubo {
            if let Ok(mut bits) = encode_solution(&exact.solution, &q.encoding) {
                fill_slack(&mut bits, &exact.solution, &p.instance, &q.encoding).map_err(|e| e.to_string())?;
                row.raw_energy = Some(q.matrix.energy(&bits));
            }
        }
        let feas = check_feasibility(&p.instance, &exact.solution).map_err(|e| e.to_string())?;
        row.feasible_pre_repair = Some(feas.feasible);
        row.feasible_post_repair = Some(feas.feasible);
        return Ok((exact.solution.clone(), feas, None));
    }

    let q = p.qubo.as_ref().map_err(|e| e.clone())?;
    let start = Instant::now();
    let report = match solver {
        SolverKind::Exhaustive => solve_exhaustive(&q.matrix, config.execution),
        SolverKind::Sa => {
            let schedule = config.sa.apply(AnnealSchedule::default_for(&q.matrix));
            solve_sa(&q.matrix, &schedule, seed, config.execution)
        }
        SolverKind::Cim => {
            let schedule = config.cim.apply(CimSchedule::default_for(q.matrix.num_vars()));
            solve_cim_sim(&q.matrix, &schedule, seed, config.execution)
        }
        SolverKind::Exact => unreachable!(),
    }
    .map_err(|e| e.to_string())?;
    row.wall_time_s = micros(start.elapsed().as_secs_f64());
    row.raw_energy = Some(report.best_energy);

    let outcome = decode_and_repair(&report.best_bits, &p.instance, &q.encoding).map_err(|e| e.to_string())?;
    row.feasible_pre_repair = Some(outcome.before.feasible);
    let (solution, feas) = if config.repair {
        (outcome.solution, outcome.after)
    } else {
        (outcome.raw, outcome.before)
    };
    row.feasible_post_repair = Some(feas.feasible);
    Ok((solution, feas, Some(report)))
}

pub fn solution_file_name(instance: &str, solver: &str, seed: u64) -> String {
    format!("{instance}__{solver}__{seed}.json")
}

/// Runs the full matrix and writes `rows.csv`, `summary.json`,
/// `solutions/*.json` and `instances/*.json` under `config.out_dir`.
///
/// A failing row is recorded with its error message; the run continues.
pub fn run_bench(config: &BenchConfig) -> Result<BenchOutcome> {
    config.validate()?;
    let out = &config.out_dir;
    fs::create_dir_all(out.join("solutions"))?;
    fs::create_dir_all(out.join("instances"))?;

    let prepared = prepare(config)?;
    for p in &prepared {
        crate::instance::save_instance(&p.instance, out.join("instances").join(format!("{}.json", p.id)))?;
    }

    let mut tasks = Vec::new();
    for (pi, p) in prepared.iter().enumerate() {
        for &solver in &config.solvers {
            for &seed in &p.seeds {
                tasks.push((pi, solver, seed));
            }
        }
    }
    let row_exec = if config.parallel_rows {
        config.execution
    } else {
        Execution::Sequential
    };
    let results = row_exec.map_slice(&tasks, |&(pi, solver, seed)| run_row(config, &prepared[pi], solver, seed));

    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        if let Some(rec) = &r.record {
            let path = out.join("solutions").join(solution_file_name(&rec.instance, &rec.solver, rec.seed));
            let mut text = serde_json::to_string_pretty(rec)?;
            text.push('\n');
            fs::write(path, text)?;
        }
        rows.push(r.row);
    }

    let rows_path = out.join("rows.csv");
    write_rows(&rows_path, &rows)?;
    let summary = summarize(&rows);
    let summary_path = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(&summary_path, text)?;

    Ok(BenchOutcome {
        rows,
        summary,
        rows_path,
        summary_path,
    })
}

pub fn write_rows(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<BenchRow>> {
    let corrupt = |message: String| Error::CorruptResults {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| corrupt(e.to_string()))?;
    r.deserialize().map(|row| row.map_err(|e| corrupt(e.to_string()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_rules() {
        assert_eq!(gap_percent(110.0, 100.0), Some(10.0));
        assert_eq!(gap_percent(100.0 - 1e-13, 100.0), Some(0.0));
        assert_eq!(gap_percent(0.0, 0.0), Some(0.0));
        assert_eq!(gap_percent(5.0, 0.0), None);
    }

    #[test]
    fn overrides_apply() {
        let base = AnnealSchedule {
            t_initial: 5.0,
            t_final: 1.0,
            sweeps: 10,
            restarts: 2,
        };
        let o = AnnealOverrides {
            sweeps: Some(99),
            ..Default::default()
        };
        assert_eq!(o.apply(base).sweeps, 99);
        assert_eq!(o.apply(base).t_initial, 5.0);
        let c = CimOverrides {
            noise_amplitude: Some(0.0),
            restarts: Some(3),
            ..Default::default()
        };
        let s = c.apply(CimSchedule::default_for(4));
        assert_eq!((s.noise_amplitude, s.restarts, s.steps), (0.0, 3, 2000));
    }

    #[test]
    fn config_validation() {
        BenchConfig::default().validate().unwrap();
        let empty = BenchConfig {
            presets: vec![],
            ..Default::default()
        };
        assert!(empty.validate().is_err());
        let no_seeds = BenchConfig {
            seeds: vec![],
            ..Default::default()
        };
        assert!(no_seeds.validate().is_err());
        let no_solver = BenchConfig {
            solvers: vec![],
            ..Default::default()
        };
        assert!(no_solver.validate().is_err());
    }
}
