use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sipqubo::bench::{self, AnnealOverrides, BenchConfig, CimOverrides};
use sipqubo::qubo::{write_ising, write_qubo};
use sipqubo::solvers::SolverKind;
use sipqubo::{
    build_encoding_for, build_qubo, check_feasibility, decode_and_repair, evaluate_objective, generate_instance,
    load_instance, save_instance, solve_cim_sim, solve_exact, solve_exhaustive, solve_sa, to_ising, AnnealSchedule,
    CimSchedule, ExactBounds, Execution, GeneratorConfig, PenaltyMode, Preset, ProblemInstance, DEFAULT_ALPHA,
    DEFAULT_BETA,
};

#[derive(Parser)]
#[command(name = "sipqubo", version, about = "Stochastic subscription planning via QUBO solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Gen(GenArgs),
    /// Solve one instance with one solver.
    Solve(SolveArgs),
    /// Run instances x solvers x seeds and write results.
    Bench(BenchArgs),
    /// Summarise a results directory (or rows.csv).
    Report {
        path: PathBuf,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "S")]
    preset: Preset,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    max_reserved: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args, Default)]
struct ScheduleArgs {
    #[arg(long)]
    sa_t_initial: Option<f64>,
    #[arg(long)]
    sa_t_final: Option<f64>,
    #[arg(long)]
    sa_sweeps: Option<usize>,
    #[arg(long)]
    sa_restarts: Option<usize>,
    #[arg(long)]
    cim_steps: Option<usize>,
    #[arg(long)]
    cim_dt: Option<f64>,
    #[arg(long)]
    cim_pump_start: Option<f64>,
    #[arg(long)]
    cim_pump_end: Option<f64>,
    #[arg(long)]
    cim_coupling: Option<f64>,
    #[arg(long)]
    cim_noise: Option<f64>,
    #[arg(long)]
    cim_restarts: Option<usize>,
}

impl ScheduleArgs {
    fn sa(&self) -> AnnealOverrides {
        AnnealOverrides {
            t_initial: self.sa_t_initial,
            t_final: self.sa_t_final,
            sweeps: self.sa_sweeps,
            restarts: self.sa_restarts,
        }
    }

    fn cim(&self) -> CimOverrides {
        CimOverrides {
            steps: self.cim_steps,
            dt: self.cim_dt,
            pump_start: self.cim_pump_start,
            pump_end: self.cim_pump_end,
            coupling_strength: self.cim_coupling,
            noise_amplitude: self.cim_noise,
            restarts: self.cim_restarts,
        }
    }
}

fn merge_sa(base: &mut AnnealOverrides, o: AnnealOverrides) {
    base.t_initial = o.t_initial.or(base.t_initial);
    base.t_final = o.t_final.or(base.t_final);
    base.sweeps = o.sweeps.or(base.sweeps);
    base.restarts = o.restarts.or(base.restarts);
}

fn merge_cim(base: &mut CimOverrides, o: CimOverrides) {
    base.steps = o.steps.or(base.steps);
    base.dt = o.dt.or(base.dt);
    base.pump_start = o.pump_start.or(base.pump_start);
    base.pump_end = o.pump_end.or(base.pump_end);
    base.coupling_strength = o.coupling_strength.or(base.coupling_strength);
    base.noise_amplitude = o.noise_amplitude.or(base.noise_amplitude);
    base.restarts = o.restarts.or(base.restarts);
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file; otherwise one is generated from --preset/--seed.
    #[arg(long, conflicts_with = "preset")]
    instance: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "sa")]
    solver: SolverKind,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    #[arg(long, default_value = "paper")]
    penalty_mode: PenaltyMode,
    #[arg(long, value_enum, default_value = "on")]
    repair: Toggle,
    #[arg(long)]
    max_reserved: Option<u64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    export_qubo: Option<PathBuf>,
    #[arg(long)]
    export_ising: Option<PathBuf>,
    /// Write the plan and solver report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file with `BenchConfig` fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    preset: Vec<Preset>,
    #[arg(long, value_delimiter = ',')]
    instance: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    solver: Vec<SolverKind>,
    /// Seeds as a list (`1,2,5`) and/or inclusive ranges (`1-20`).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    penalty_mode: Option<PenaltyMode>,
    #[arg(long, value_enum)]
    repair: Option<Toggle>,
    #[arg(long)]
    max_reserved: Option<u64>,
    #[arg(long)]
    oracle_budget: Option<u64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    parallel_rows: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
                if a > b {
                    bail!("empty seed range `{part}`");
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?),
        }
    }
    if seeds.is_empty() {
        bail!("no seeds in `{text}`");
    }
    Ok(seeds)
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let mut config = GeneratorConfig::preset(args.preset);
    if let Some(x) = args.max_reserved {
        config.max_reserved = x;
    }
    let instance = generate_instance(&config, args.seed)?;
    save_instance(&instance, &args.out)?;
    println!(
        "wrote {} (msps={} edges={} scenarios={})",
        args.out.display(),
        instance.msps,
        instance.num_edges(),
        instance.num_scenarios()
    );
    Ok(())
}

fn load_or_generate(args: &SolveArgs) -> Result<ProblemInstance> {
    if let Some(path) = &args.instance {
        return Ok(load_instance(path)?);
    }
    let mut config = GeneratorConfig::preset(args.preset.unwrap_or(Preset::S));
    if let Some(x) = args.max_reserved {
        config.max_reserved = x;
    }
    Ok(generate_instance(&config, args.seed)?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn solve(args: SolveArgs) -> Result<()> {
    let instance = load_or_generate(&args)?;
    let exec = execution(args.sequential);

    if args.solver == SolverKind::Exact {
        let exact = solve_exact(&instance, &ExactBounds::for_instance(&instance), exec)?;
        println!("solver      exact");
        println!("objective   {}", exact.breakdown.total);
        println!("searched    {}", exact.search_space);
        if let Some(out) = &args.out {
            write_json(out, &exact)?;
        }
        return Ok(());
    }

    let encoding = build_encoding_for(&instance, args.penalty_mode);
    let problem = build_qubo(&instance, &encoding, args.alpha, args.beta, args.penalty_mode)?;
    if let Some(path) = &args.export_qubo {
        write_qubo(path, &problem.matrix, args.alpha, args.beta)?;
    }
    if let Some(path) = &args.export_ising {
        write_ising(path, &to_ising(&problem.matrix))?;
    }

    let q = &problem.matrix;
    let report = match args.solver {
        SolverKind::Exhaustive => solve_exhaustive(q, exec)?,
        SolverKind::Sa => solve_sa(q, &args.schedule.sa().apply(AnnealSchedule::default_for(q)), args.seed, exec)?,
        SolverKind::Cim => {
            let schedule = args.schedule.cim().apply(CimSchedule::default_for(q.num_vars()));
            solve_cim_sim(q, &schedule, args.seed, exec)?
        }
        SolverKind::Exact => unreachable!(),
    };
    let outcome = decode_and_repair(&report.best_bits, &instance, &encoding)?;
    let plan = match args.repair {
        Toggle::On => &outcome.solution,
        Toggle::Off => &outcome.raw,
    };
    let breakdown = evaluate_objective(&instance, plan)?;
    let feasibility = check_feasibility(&instance, plan)?;

    println!("solver      {}", report.solver_name);
    println!("variables   {}", q.num_vars());
    println!("energy      {}", report.best_energy);
    println!("objective   {}", breakdown.total);
    println!("feasible    {} (before repair: {})", feasibility.feasible, outcome.before.feasible);
    println!("wall_time_s {:.6}", report.wall_time);
    if !report.diverged_restarts.is_empty() {
        println!("diverged    {:?}", report.diverged_restarts);
    }
    if let Some(out) = &args.out {
        write_json(
            out,
            &serde_json::json!({
                "solution": plan,
                "breakdown": breakdown,
                "feasibility": feasibility,
                "report": report,
            }),
        )?;
    }
    Ok(())
}

fn bench_config(args: BenchArgs) -> Result<BenchConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => BenchConfig::default(),
    };
    if !args.preset.is_empty() || !args.instance.is_empty() {
        config.presets = args.preset;
        config.instance_files = args.instance;
    }
    if !args.solver.is_empty() {
        config.solvers = args.solver;
    }
    if let Some(s) = &args.seeds {
        config.seeds = parse_seeds(s)?;
    }
    config.alpha = args.alpha.unwrap_or(config.alpha);
    config.beta = args.beta.unwrap_or(config.beta);
    config.penalty_mode = args.penalty_mode.unwrap_or(config.penalty_mode);
    if let Some(r) = args.repair {
        config.repair = matches!(r, Toggle::On);
    }
    config.max_reserved = args.max_reserved.or(config.max_reserved);
    config.oracle_budget = args.oracle_budget.unwrap_or(config.oracle_budget);
    merge_sa(&mut config.sa, args.schedule.sa());
    merge_cim(&mut config.cim, args.schedule.cim());
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    if args.sequential {
        config.execution = Execution::Sequential;
    }
    config.parallel_rows |= args.parallel_rows;
    Ok(config)
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let config = bench_config(args)?;
    let outcome = bench::run_bench(&config)?;
    let failed = outcome.rows.iter().filter(|r| !r.error.is_empty()).count();
    println!("{} rows ({failed} with errors) -> {}", outcome.rows.len(), outcome.rows_path.display());
    for r in outcome.rows.iter().filter(|r| !r.error.is_empty()) {
        eprintln!("{} {} seed {}: {}", r.instance, r.solver, r.seed, r.error);
    }
    let report = bench::report(&outcome.rows_path)?;
    print!("{}", report.table);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Report { path } => bench::report(&path).map_err(Into::into).map(|r| {
            print!("{}", r.table);
            println!("plot data: {}", r.plot_path.display());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
