use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use replenish::experiment::{run_experiment, ExperimentConfig, PricingArg};
use replenish::format::{
    instance_to_string, parse_instance, set_to_vec, AuditJson, CostReportJson, ExactJson, LpJson, RatioInputJson,
    RatioOutputJson, ScheduleJson, TraceJson,
};
use replenish::generate::{generate_instance, GenFamily, GenSpec};
use replenish_core::covering::audit_all;
use replenish_core::lp::{solve_lp, LpOptions, LpSolution, DEFAULT_MAX_COLUMNS};
use replenish_core::model::Instance;
use replenish_core::oracle::exact_opt;
use replenish_core::ratiotsp::{min_ratio_exact, min_ratio_garg, RatioInstance};
use replenish_core::rounding::round;
use replenish_core::setfn::Metric;

#[derive(Parser)]
#[command(name = "replenish", version, about = "LP rounding for joint replenishment and inventory routing")]
struct Cli {
    /// Seed for generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Simplex optimality tolerance and LP feasibility tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for batch runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    JrpAdditive,
    JrpTable,
    JrpCardinality,
    JrpTree,
    JrpLaminar,
    IrpEuclidean,
    IrpRandomMetric,
}

impl FamilyArg {
    fn family(self) -> GenFamily {
        match self {
            FamilyArg::JrpAdditive => GenFamily::JrpAdditive,
            FamilyArg::JrpTable => GenFamily::JrpTable,
            FamilyArg::JrpCardinality => GenFamily::JrpCardinality,
            FamilyArg::JrpTree => GenFamily::JrpTree,
            FamilyArg::JrpLaminar => GenFamily::JrpLaminar,
            FamilyArg::IrpEuclidean => GenFamily::IrpEuclidean,
            FamilyArg::IrpRandomMetric => GenFamily::IrpRandomMetric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PricingFlag {
    Exact,
    TspDp,
    Garg,
}

impl PricingFlag {
    fn arg(self) -> PricingArg {
        match self {
            PricingFlag::Exact => PricingArg::Exact,
            PricingFlag::TspDp => PricingArg::TspDp,
            PricingFlag::Garg => PricingArg::Garg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RatioMode {
    Exact,
    Garg,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances, one JSON line each.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        t_max: Option<usize>,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        lifetime: Option<usize>,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Solve the LP relaxation by column generation.
    Lp {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        pricing: PricingFlag,
        #[arg(long, default_value_t = DEFAULT_MAX_COLUMNS)]
        max_columns: usize,
    },
    /// Round an LP solution and audit the result.
    Round {
        instance: PathBuf,
        /// LP solution JSON as written by `lp`.
        lp: PathBuf,
        #[arg(long)]
        rho_override: Option<u64>,
    },
    /// Exact optimum by exhaustive assignment enumeration.
    Exact { instance: PathBuf },
    /// Solve, round and audit in one step.
    Audit {
        instance: PathBuf,
        /// Use this LP solution instead of solving.
        #[arg(long)]
        lp: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "exact")]
        pricing: PricingFlag,
        #[arg(long)]
        rho_override: Option<u64>,
    },
    /// Minimum-ratio TSP on a metric with rewards.
    RatioTsp {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "exact")]
        mode: RatioMode,
    },
    /// Run a batch experiment from a JSON config.
    Bench {
        config: PathBuf,
        /// Add per-row wall-clock times (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn read_input(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&read_input(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn lp_options(cli: &Cli, pricing: PricingFlag, max_columns: usize) -> LpOptions {
    let mut options = LpOptions { pricing: pricing.arg().mode(), max_columns, ..LpOptions::default() };
    if let Some(tol) = cli.tol {
        options.simplex.optimality_tol = tol;
    }
    options
}

fn load_lp(cli: &Cli, instance: &Instance, path: &Path) -> Result<LpSolution> {
    let json: LpJson = serde_json::from_str(&read_input(path)?).context("LP solution JSON")?;
    let lp = json.to_solution(instance)?;
    lp.check_feasible(instance, cli.tol.unwrap_or(1e-6))?;
    Ok(lp)
}

/// Output text and whether every audit in it passed.
fn run(cli: &Cli) -> Result<(String, bool)> {
    match &cli.command {
        Command::Gen { family, n, n_max, t, t_max, density, alpha, lifetime, count } => {
            let mut spec = GenSpec::new(cli.seed, family.family(), (*n, n_max.unwrap_or(*n)), (*t, t_max.unwrap_or(*t)));
            spec.density = *density;
            spec.alpha = *alpha;
            spec.lifetime = *lifetime;
            let mut out = String::new();
            for id in 0..*count {
                out.push_str(&instance_to_string(&generate_instance(&spec, id as u64)?));
                out.push('\n');
            }
            Ok((out, true))
        }
        Command::Lp { instance, pricing, max_columns } => {
            let inst = load_instance(instance)?;
            let lp = solve_lp(&inst, &lp_options(cli, *pricing, *max_columns))?;
            let json = LpJson::from_solution(&lp, Some(pricing.arg().mode().name()));
            Ok((serde_json::to_string(&json)? + "\n", true))
        }
        Command::Round { instance, lp, rho_override } => {
            let inst = load_instance(instance)?;
            let lp = load_lp(cli, &inst, lp)?;
            round_and_audit(&inst, &lp, *rho_override)
        }
        Command::Exact { instance } => {
            let inst = load_instance(instance)?;
            let result = exact_opt(&inst)?;
            Ok((serde_json::to_string(&ExactJson::from_result(&result))? + "\n", true))
        }
        Command::Audit { instance, lp, pricing, rho_override } => {
            let inst = load_instance(instance)?;
            let lp = match lp {
                Some(path) => load_lp(cli, &inst, path)?,
                None => solve_lp(&inst, &lp_options(cli, *pricing, DEFAULT_MAX_COLUMNS))?,
            };
            let outcome = round(&inst, &lp, *rho_override)?;
            let report = audit_all(&inst, &lp, &outcome.trace, &outcome.cost)?;
            let json = AuditJson::from_report(&report);
            Ok((serde_json::to_string(&json)? + "\n", report.all_passed))
        }
        Command::RatioTsp { input, mode } => {
            let json: RatioInputJson = serde_json::from_str(&read_input(input)?).context("ratio-TSP JSON")?;
            let instance = RatioInstance::new(Metric::new(json.metric)?, json.rewards)?;
            let (solution, name) = match mode {
                RatioMode::Exact => (min_ratio_exact(&instance)?, "exact"),
                RatioMode::Garg => (min_ratio_garg(&instance)?, "garg"),
            };
            let out = RatioOutputJson { subset: set_to_vec(solution.subset), ratio: solution.ratio, mode: name.into() };
            Ok((serde_json::to_string(&out)? + "\n", true))
        }
        Command::Bench { config, timing } => {
            let config: ExperimentConfig = serde_json::from_str(&read_input(config)?).context("bench config JSON")?;
            let mut builder = rayon::ThreadPoolBuilder::new();
            if let Some(threads) = cli.threads {
                builder = builder.num_threads(threads);
            }
            let pool = builder.build()?;
            let start = std::time::Instant::now();
            let report = pool.install(|| run_experiment(&config, *timing));
            eprintln!("bench: {} instances in {:.2}s", report.rows.len(), start.elapsed().as_secs_f64());
            Ok((report.to_json_lines(), report.aggregate.all_passed))
        }
    }
}

fn round_and_audit(inst: &Instance, lp: &LpSolution, rho_override: Option<u64>) -> Result<(String, bool)> {
    let outcome = round(inst, lp, rho_override)?;
    let report = audit_all(inst, lp, &outcome.trace, &outcome.cost)?;
    let out = json!({
        "schedule": ScheduleJson::from_schedule(&outcome.schedule),
        "cost": CostReportJson::from_report(&outcome.cost),
        "trace": TraceJson::from_trace(&outcome.trace),
        "audit": AuditJson::from_report(&report),
    });
    Ok((serde_json::to_string(&out)? + "\n", report.all_passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, passed)) => {
            let written = match &cli.out {
                Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
                None => io::stdout().write_all(text.as_bytes()).map_err(Into::into),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more audits failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
