//! `cvm`: command-line front end for the checkpoint vs. migration models.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use cvm::failure::FailureModel;
use cvm::jobmix::JobMix;
use cvm::periodic::{
    min_waste_extended, mtbf_feasibility_threshold, optimal_period, waste_extended,
    yield_independent, yield_parallel,
};
use cvm::report::{render_scenario, render_yield, Format};
use cvm::scenario::{
    run_scenario, run_yield_table, Grid, PresetBook, Scenario, Workload, YieldSpec,
};
use cvm::sim::{simulate, Policy, SimConfig};
use cvm::spares::{availability_params, min_spares, SpareMethod};
use cvm::throughput::{
    throughput_checkpoint_sequential, throughput_migration_sequential, CostParams,
};
use cvm::units::parse_minutes;
use cvm::ModelError;

const EXIT_INVALID: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cvm",
    version,
    about = "Throughput of checkpointing vs. migration on failure-prone clusters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Improvement of migration over checkpointing on a (mu, N, epsilon) grid.
    Scenario(ScenarioArgs),
    /// Yield rho/N of parallel jobs under optimal periodic checkpointing.
    Yield(YieldArgs),
    /// Minimum number of spares for migration.
    Spares(SparesArgs),
    /// Optimal period, waste and MTBF threshold for periodic checkpointing.
    Periodic(PeriodicArgs),
    /// Monte Carlo simulation of one policy.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WorkloadArg {
    Seq,
    Par,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    LowerBound,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Checkpoint,
    Migration,
    Periodic,
}

fn minutes(s: &str) -> Result<f64, String> {
    parse_minutes(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct CostArgs {
    /// Checkpoint cost (minutes).
    #[arg(long = "C")]
    checkpoint: Option<f64>,
    /// Recovery cost (minutes).
    #[arg(long = "R")]
    recovery: Option<f64>,
    /// Reboot downtime (minutes).
    #[arg(long = "D")]
    downtime: Option<f64>,
    /// Migration cost (minutes).
    #[arg(long = "M")]
    migration: Option<f64>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Preset name, or `custom` together with --C --R --D --M.
    name: String,
    #[command(flatten)]
    costs: CostArgs,
    /// Machine counts (comma separated); defaults to the preset file's grid.
    #[arg(long = "N", value_delimiter = ',')]
    machines: Vec<u64>,
    /// MTBF values such as 1d,1w,1mo,1y or minutes.
    #[arg(long, value_delimiter = ',', value_parser = minutes)]
    mtbf: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    #[arg(long, value_enum, default_value_t = WorkloadArg::Seq)]
    workload: WorkloadArg,
    /// Probability that a job is sequential (parallel workload).
    #[arg(long, default_value_t = 0.25)]
    p1: f64,
    /// TOML preset file replacing the built-in presets.
    #[arg(long)]
    presets: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct YieldArgs {
    #[arg(long = "C", default_value_t = 1.0)]
    checkpoint: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    recovery: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    downtime: f64,
    #[arg(long, default_value_t = 0.25)]
    p1: f64,
    /// Machine counts (comma separated); default 2^8,2^11,2^14,2^17,2^20.
    #[arg(long = "N", value_delimiter = ',')]
    machines: Vec<u64>,
    /// MTBF values; default 1mo,1y.
    #[arg(long, value_delimiter = ',', value_parser = minutes)]
    mtbf: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SparesArgs {
    #[arg(long = "N")]
    machines: u64,
    #[arg(long, value_parser = minutes)]
    mtbf: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    migration: f64,
    #[arg(long = "D", default_value_t = 2.5)]
    downtime: f64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PeriodicArgs {
    #[arg(long = "C", default_value_t = 1.0)]
    checkpoint: f64,
    #[arg(long = "R", default_value_t = 1.0)]
    recovery: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    downtime: f64,
    #[arg(long, value_parser = minutes)]
    mtbf: f64,
    /// Evaluate the waste at this period instead of only the optimum.
    #[arg(long, value_parser = minutes)]
    period: Option<f64>,
    /// Also report the platform yield for this many machines.
    #[arg(long = "N")]
    machines: Option<u64>,
    #[arg(long, value_enum, default_value_t = WorkloadArg::Seq)]
    workload: WorkloadArg,
    #[arg(long, default_value_t = 0.25)]
    p1: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    policy: PolicyArg,
    #[arg(long = "N")]
    machines: u64,
    #[arg(long, value_parser = minutes)]
    mtbf: f64,
    /// Weibull shape; failures are exponential when omitted.
    #[arg(long)]
    weibull_shape: Option<f64>,
    #[arg(long = "C", default_value_t = 25.0)]
    checkpoint: f64,
    #[arg(long = "R", default_value_t = 25.0)]
    recovery: f64,
    #[arg(long = "D", default_value_t = 2.5)]
    downtime: f64,
    #[arg(long = "M", default_value_t = 1.0)]
    migration: f64,
    /// Spare pool size (migration); sized from --epsilon when omitted.
    #[arg(long)]
    spares: Option<u64>,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
    /// Checkpoint period (periodic); the optimal period when omitted.
    #[arg(long, value_parser = minutes)]
    period: Option<f64>,
    /// Job size 2^k for the periodic policy.
    #[arg(long, default_value_t = 0)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    replications: u32,
    #[arg(long, value_parser = minutes, default_value = "1000000")]
    horizon: f64,
    #[command(flatten)]
    output: OutputArgs,
}

enum Failure {
    Invalid(String),
    Infeasible(String),
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        if e.is_infeasible() {
            Failure::Infeasible(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scenario(a) => scenario(a),
        Command::Yield(a) => yield_table(a),
        Command::Spares(a) => spares(a),
        Command::Periodic(a) => periodic(a),
        Command::Simulate(a) => simulate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Invalid(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Invalid(e.to_string())),
    }
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn workload(w: WorkloadArg, p1: f64) -> Workload {
    match w {
        WorkloadArg::Seq => Workload::Sequential,
        WorkloadArg::Par => Workload::Parallel { p1 },
    }
}

fn scenario(a: ScenarioArgs) -> CliResult<()> {
    let book = match &a.presets {
        Some(path) => PresetBook::load(path)?,
        None => PresetBook::builtin(),
    };
    let c = &a.costs;
    let mut s = if a.name == "custom" {
        match (c.checkpoint, c.recovery, c.downtime, c.migration) {
            (Some(checkpoint), Some(recovery), Some(downtime), Some(migration)) => Scenario {
                name: "custom".to_string(),
                checkpoint,
                recovery,
                downtime,
                migration,
            },
            _ => {
                return Err(Failure::Invalid(
                    "a custom scenario needs --C, --R, --D and --M".to_string(),
                ))
            }
        }
    } else {
        book.get(&a.name)?.clone()
    };
    if let Some(x) = c.checkpoint {
        s.checkpoint = x;
    }
    if let Some(x) = c.recovery {
        s.recovery = x;
    }
    if let Some(x) = c.downtime {
        s.downtime = x;
    }
    if let Some(x) = c.migration {
        s.migration = x;
    }

    let mut grid: Grid = book.grid.clone();
    if !a.machines.is_empty() {
        grid.machines = a.machines;
    }
    if !a.mtbf.is_empty() {
        grid.mtbf = a.mtbf;
    }
    if !a.epsilon.is_empty() {
        grid.epsilon = a.epsilon;
    }

    let table = run_scenario(&s, &grid, workload(a.workload, a.p1))?;
    let format = Format::from(a.output.format);
    // The rendered table carries the warnings itself; anything else goes to
    // stderr so that the user still sees it.
    if format != Format::Table || a.output.out.is_some() {
        warn(&table.warnings);
    }
    emit(&render_scenario(&table, format)?, a.output.out.as_deref())
}

fn yield_table(a: YieldArgs) -> CliResult<()> {
    let mut spec = YieldSpec {
        checkpoint: a.checkpoint,
        recovery: a.recovery,
        downtime: a.downtime,
        p1: a.p1,
        ..YieldSpec::default()
    };
    if !a.machines.is_empty() {
        spec.machines = a.machines;
    }
    if !a.mtbf.is_empty() {
        spec.mtbf = a.mtbf;
    }
    let table = run_yield_table(&spec)?;
    emit(
        &render_yield(&table, a.output.format.into())?,
        a.output.out.as_deref(),
    )
}

/// Renders a flat record as aligned `key: value` lines, a two-line CSV or a
/// JSON object.
fn render_record(record: &[(&str, Value)], format: FormatArg) -> String {
    match format {
        FormatArg::Json => {
            let map: Map<String, Value> = record
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect();
            let mut s = serde_json::to_string_pretty(&Value::Object(map)).expect("serialisable");
            s.push('\n');
            s
        }
        FormatArg::Csv => {
            let header: Vec<&str> = record.iter().map(|(k, _)| *k).collect();
            let values: Vec<String> = record.iter().map(|(_, v)| csv_field(v)).collect();
            format!("{}\n{}\n", header.join(","), values.join(","))
        }
        FormatArg::Table => {
            let width = record.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            record
                .iter()
                .map(|(k, v)| format!("{k:<width$}  {}\n", plain(v)))
                .collect()
        }
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "n/a".to_string(),
        Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join("; "),
        other => other.to_string(),
    }
}

fn csv_field(v: &Value) -> String {
    let s = plain(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn spares(a: SparesArgs) -> CliResult<()> {
    let params = availability_params(a.mtbf, a.migration, a.downtime)?;
    let method = match a.method {
        MethodArg::Exact => SpareMethod::Exact,
        MethodArg::LowerBound => SpareMethod::LowerBound,
    };
    let sizing = min_spares(a.machines, params, a.epsilon, method)?;
    let record = [
        ("N", json!(a.machines)),
        ("mu_minutes", json!(a.mtbf)),
        ("M", json!(a.migration)),
        ("D", json!(a.downtime)),
        ("v", json!(params.v)),
        ("epsilon", json!(a.epsilon)),
        ("method", json!(method.name())),
        ("spares", json!(sizing.m)),
        ("achieved_success", json!(sizing.achieved_success)),
    ];
    emit(
        &render_record(&record, a.output.format),
        a.output.out.as_deref(),
    )
}

fn periodic(a: PeriodicArgs) -> CliResult<()> {
    let t_opt = optimal_period(a.checkpoint, a.mtbf)?;
    let w_min = min_waste_extended(a.checkpoint, a.mtbf, a.recovery, a.downtime)?;
    let threshold = mtbf_feasibility_threshold(a.checkpoint, a.recovery, a.downtime)?;
    let mut record = vec![
        ("C", json!(a.checkpoint)),
        ("R", json!(a.recovery)),
        ("D", json!(a.downtime)),
        ("mu_minutes", json!(a.mtbf)),
        ("T_opt", json!(t_opt)),
        ("W_min", json!(w_min.unclamped)),
        ("W_min_clamped", json!(w_min.clamped)),
        ("nu_b", json!(threshold.nu_b)),
        ("mu_min", json!(threshold.mu_min)),
    ];
    if let Some(t) = a.period {
        record.push(("T", json!(t)));
        record.push((
            "W_T",
            json!(waste_extended(
                a.checkpoint,
                t,
                a.mtbf,
                a.recovery,
                a.downtime
            )?),
        ));
    }
    if let Some(n) = a.machines {
        let rho = match workload(a.workload, a.p1) {
            Workload::Sequential => {
                yield_independent(n, a.checkpoint, a.mtbf, a.recovery, a.downtime)?
            }
            Workload::Parallel { p1 } => {
                let mix = JobMix::for_machines(n, p1)?;
                yield_parallel(&mix, a.checkpoint, a.mtbf, a.recovery, a.downtime)?
            }
        };
        record.push(("N", json!(n)));
        record.push(("rho", json!(rho)));
        record.push(("yield_pct", json!(100.0 * rho / n as f64)));
    }
    emit(
        &render_record(&record, a.output.format),
        a.output.out.as_deref(),
    )
}

fn simulate_cmd(a: SimulateArgs) -> CliResult<()> {
    let costs = CostParams::new(a.checkpoint, a.recovery, a.downtime, a.migration)?;
    let model = match a.weibull_shape {
        None => FailureModel::exponential(a.mtbf)?,
        Some(shape) => FailureModel::weibull_with_mean(a.mtbf, shape)?,
    };
    let mut record = vec![("N", json!(a.machines)), ("mu_minutes", json!(a.mtbf))];
    let (policy, analytic) = match a.policy {
        PolicyArg::Checkpoint => (
            Policy::PredictedCheckpoint,
            throughput_checkpoint_sequential(a.machines, a.mtbf, &costs)?,
        ),
        PolicyArg::Migration => {
            let m = match a.spares {
                Some(m) => m,
                None => {
                    let params = availability_params(a.mtbf, a.migration, a.downtime)?;
                    min_spares(a.machines, params, a.epsilon, SpareMethod::Exact)?.m
                }
            };
            record.push(("spares", json!(m)));
            (
                Policy::Migration { spares: m },
                throughput_migration_sequential(a.machines, m, a.mtbf, a.migration)?,
            )
        }
        PolicyArg::Periodic => {
            let group_mu = a.mtbf / 2f64.powi(a.k as i32);
            let period = match a.period {
                Some(t) => t,
                None => optimal_period(a.checkpoint, group_mu)?,
            };
            let waste = waste_extended(a.checkpoint, period, group_mu, a.recovery, a.downtime)?;
            record.push(("k", json!(a.k)));
            record.push(("period", json!(period)));
            record.push(("analytic_waste", json!(waste)));
            (
                Policy::Periodic {
                    period,
                    job_size_log2: a.k,
                },
                (1.0 - waste.min(1.0)) * 2f64.powi(a.k as i32),
            )
        }
    };
    let config = SimConfig {
        machines: a.machines,
        horizon: a.horizon,
        failure_model: model,
        costs,
        policy,
        seed: a.seed,
        replications: a.replications,
    };
    let r = simulate(&config)?;
    warn(&r.warnings);
    record.extend([
        ("analytic_throughput", json!(analytic)),
        ("mean_throughput", json!(r.mean_throughput)),
        ("ci95_halfwidth", json!(finite_or_null(r.ci95_halfwidth))),
        ("replications", json!(r.replications)),
        ("completed_replications", json!(r.completed_replications)),
        ("run_failure_rate", json!(r.run_failure_rate)),
        ("failures", json!(r.failures)),
        ("measured_waste", json!(r.measured_waste)),
        ("mean_loss_per_failure", json!(r.mean_loss_per_failure)),
        ("unavailable_fraction", json!(r.unavailable_fraction)),
        ("instant_success", json!(r.instant_success)),
        ("seed", json!(a.seed)),
        ("horizon", json!(a.horizon)),
    ]);
    emit(
        &render_record(&record, a.output.format),
        a.output.out.as_deref(),
    )
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
