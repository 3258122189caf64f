//! qcovert: covert-routing experiments from the command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible scenario.
//! Log verbosity comes from `RUST_LOG` (e.g. `RUST_LOG=debug` to watch
//! per-episode training progress).

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use qcovert_core::channel::build_gain_table;
use qcovert_core::harness::{
    emit_scenario_template, format_float, records_to_csv, run_single, run_sweep, Method,
    RunOverrides, RunStatus, SweepAxis, SweepSpec,
};
use qcovert_core::oracle::{dijkstra_optimal, OracleError};
use qcovert_core::scenario::Scenario;
use qcovert_core::topology::FeasibilityGraph;

#[derive(Parser)]
#[command(name = "qcovert", version, about = "Covert multi-hop routing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one routing method once and emit a single-record CSV.
    Run(RunArgs),
    /// Run a full experiment sweep (axis x seeds x methods) and emit CSV.
    Sweep(SweepArgs),
    /// Write the bundled 36-node example scenario to a file.
    Template(TemplateArgs),
    /// Parse a scenario, lint it, and report route feasibility.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct OverrideArgs {
    /// Training episodes (default 300).
    #[arg(long)]
    episodes: Option<u32>,
    /// Learning rate in [0, 1] (default 0.3).
    #[arg(long)]
    alpha: Option<f64>,
    /// Discount factor in [0, 1] (default 0.9).
    #[arg(long)]
    gamma: Option<f64>,
    /// Exploration probability in [0, 1] (default 0.1).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Per-hop throughput floor in bits/s, replacing the scenario's value.
    #[arg(long)]
    u_target: Option<f64>,
    /// Willie's X coordinate in meters, replacing the scenario's value.
    #[arg(long)]
    willie_x: Option<f64>,
    /// Willie's Y coordinate in meters, replacing the scenario's value.
    #[arg(long)]
    willie_y: Option<f64>,
}

impl OverrideArgs {
    fn to_overrides(&self, seed: Option<u64>) -> RunOverrides {
        RunOverrides {
            seed,
            episodes: self.episodes,
            alpha: self.alpha,
            gamma: self.gamma,
            epsilon: self.epsilon,
            u_target: self.u_target,
            willie_x: self.willie_x,
            willie_y: self.willie_y,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Routing method: qcovert, centralized, brute, closest, or bestdir.
    #[arg(long, value_parser = parse_method)]
    method: Method,
    /// Base RNG seed, replacing the scenario's value.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero the wall_time_ms column so reruns are byte-identical.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Swept quantity: willie_x, u_target, or episodes.
    #[arg(long, value_parser = parse_axis)]
    axis: SweepAxis,
    /// Axis values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Replicate seeds, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Methods to run in each cell, comma separated.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_method)]
    methods: Vec<Method>,
    #[command(flatten)]
    overrides: OverrideArgs,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero the wall_time_ms column so reruns are byte-identical.
    #[arg(long)]
    stable_output: bool,
}

#[derive(Args)]
struct TemplateArgs {
    /// Destination path for the scenario file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse()
}

fn main() {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match execute(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(1);
        }
    }
}

fn execute(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Run(args) => {
            let scenario = Scenario::load(&args.scenario).map_err(|e| e.to_string())?;
            let overrides = args.overrides.to_overrides(args.seed);
            let record =
                run_single(&scenario, args.method, &overrides).map_err(|e| e.to_string())?;
            let csv = records_to_csv(std::slice::from_ref(&record), args.stable_output);
            write_output(args.out.as_deref(), &csv)?;
            Ok(if record.status == RunStatus::Infeasible { 2 } else { 0 })
        }
        Command::Sweep(args) => {
            let scenario = Scenario::load(&args.scenario).map_err(|e| e.to_string())?;
            let spec = SweepSpec {
                axis: args.axis,
                values: args.values,
                seeds: args.seeds,
                methods: args.methods,
            };
            let overrides = args.overrides.to_overrides(None);
            let records = run_sweep(&scenario, &spec, &overrides).map_err(|e| e.to_string())?;
            let csv = records_to_csv(&records, args.stable_output);
            write_output(args.out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Template(args) => {
            emit_scenario_template(&args.out)
                .map_err(|e| format!("failed to write {}: {e}", args.out.display()))?;
            eprintln!("wrote scenario template to {}", args.out.display());
            Ok(0)
        }
        Command::Validate(args) => {
            let scenario = Scenario::load(&args.scenario).map_err(|e| e.to_string())?;
            let gains = build_gain_table(&scenario).map_err(|e| e.to_string())?;
            let graph = FeasibilityGraph::build(&gains, &scenario).map_err(|e| e.to_string())?;
            println!(
                "scenario ok: {} nodes, {} modalities, {} obstacles, {} feasible directed actions",
                scenario.nodes.len(),
                scenario.modalities.len(),
                scenario.obstacles.len(),
                graph.edges().len(),
            );
            match dijkstra_optimal(&gains, &scenario) {
                Ok(best) => {
                    println!(
                        "feasible: optimal dep {} via {} ({} hops)",
                        format_float(best.end_to_end_dep),
                        best.route.to_compact_string(),
                        best.route.hop_count(),
                    );
                    Ok(0)
                }
                Err(OracleError::Unreachable) => {
                    println!(
                        "infeasible: no route from {} to {} satisfies the {} bps per-hop floor",
                        scenario.source_id,
                        scenario.destination_id,
                        format_float(scenario.target_throughput),
                    );
                    Ok(2)
                }
                Err(e) => Err(e.to_string()),
            }
        }
    }
}

fn write_output(out: Option<&Path>, csv: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, csv)
            .map_err(|e| format!("failed to write {}: {e}", path.display())),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}
