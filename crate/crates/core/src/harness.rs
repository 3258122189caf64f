//! Experiment runner: method dispatch, overrides, sweeps, CSV emission, and
//! the bundled scenario template.
//!
//! Seed plumbing: one base seed (the scenario's `rng_seed`, or the `--seed`
//! override) drives the channel realization directly; the learning RNG uses
//! [`cell_seed`]`(base, axis_index, replicate_index)`, a splitmix64 mix, so
//! sweep cells explore independently while remaining individually
//! replayable. Single runs use axis and replicate index 0. The channel seed
//! is deliberately not mixed: moving Willie or changing the target leaves
//! node-to-node gains untouched, which keeps cross-cell comparisons paired.

use std::fmt;
use std::io;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::channel::{build_gain_table, ChannelError, GainTable};
use crate::metrics::{route_dep, route_throughput, MetricsError, Route};
use crate::oracle::{
    best_direction_to_destination, brute_force_optimal, closest_to_destination,
    dijkstra_optimal, OracleError,
};
use crate::qlearn::{extract_route, train, LearningConfig, QLearnError, RoutingProblem};
use crate::scenario::Scenario;
use crate::topology::TopologyError;

pub const CSV_HEADER: &str = "method,seed,willie_x,willie_y,u_target_bps,episodes,e2e_dep,e2e_throughput_bps,hop_count,route,wall_time_ms,status";

/// 12 significant digits: enough headroom over the 1e-12 recomputation
/// tolerances used throughout.
pub fn format_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Learning seed of one experiment cell: splitmix64 chain over the base
/// seed, the axis-value index, and the replicate index.
pub fn cell_seed(base_seed: u64, axis_index: u64, replicate_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed).wrapping_add(axis_index)).wrapping_add(replicate_index))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    BestDir,
    Brute,
    Centralized,
    Closest,
    QCovert,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::BestDir,
        Method::Brute,
        Method::Centralized,
        Method::Closest,
        Method::QCovert,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::BestDir => "bestdir",
            Method::Brute => "brute",
            Method::Centralized => "centralized",
            Method::Closest => "closest",
            Method::QCovert => "qcovert",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qcovert" => Ok(Method::QCovert),
            "centralized" => Ok(Method::Centralized),
            "brute" => Ok(Method::Brute),
            "closest" => Ok(Method::Closest),
            "bestdir" => Ok(Method::BestDir),
            other => Err(format!(
                "unknown method '{other}' (expected qcovert, centralized, brute, closest, or bestdir)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Infeasible,
    BaselineFailure,
    ExtractionFailure,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Infeasible => "infeasible",
            RunStatus::BaselineFailure => "baseline-failure",
            RunStatus::ExtractionFailure => "extraction-failure",
        }
    }
}

/// Optional knobs layered over the scenario file by the CLI.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub episodes: Option<u32>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub epsilon: Option<f64>,
    pub u_target: Option<f64>,
    pub willie_x: Option<f64>,
    pub willie_y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub method: Method,
    pub seed: u64,
    pub willie_x: f64,
    pub willie_y: f64,
    pub u_target_bps: f64,
    pub episodes: u32,
    pub e2e_dep: Option<f64>,
    pub e2e_throughput_bps: Option<f64>,
    pub hop_count: Option<usize>,
    pub route: Option<String>,
    pub wall_time_ms: u64,
    pub status: RunStatus,
}

impl ExperimentRecord {
    /// One CSV row. `stable_output` zeroes the wall time so reruns are
    /// byte-identical (the only nondeterministic column).
    pub fn to_csv_row(&self, stable_output: bool) -> String {
        let opt_f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.seed,
            format_float(self.willie_x),
            format_float(self.willie_y),
            format_float(self.u_target_bps),
            self.episodes,
            opt_f(self.e2e_dep),
            opt_f(self.e2e_throughput_bps),
            self.hop_count.map(|h| h.to_string()).unwrap_or_default(),
            self.route.clone().unwrap_or_default(),
            if stable_output { 0 } else { self.wall_time_ms },
            self.status.as_str(),
        )
    }
}

pub fn records_to_csv(records: &[ExperimentRecord], stable_output: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for record in records {
        out.push_str(&record.to_csv_row(stable_output));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    InvalidRequest(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Run one method once on the scenario (with overrides applied) and record
/// the outcome. Method-level failures (infeasible, stuck baseline, failed
/// extraction) land in the record's status; structural errors propagate.
pub fn run_single(
    scenario: &Scenario,
    method: Method,
    overrides: &RunOverrides,
) -> Result<ExperimentRecord, HarnessError> {
    run_cell(scenario, method, overrides, 0, 0)
}

fn run_cell(
    scenario: &Scenario,
    method: Method,
    overrides: &RunOverrides,
    axis_index: u64,
    replicate_index: u64,
) -> Result<ExperimentRecord, HarnessError> {
    let mut scenario = scenario.clone();
    if let Some(seed) = overrides.seed {
        scenario.rng_seed = seed;
    }
    if let Some(u) = overrides.u_target {
        scenario.target_throughput = u;
    }
    if let Some(x) = overrides.willie_x {
        scenario.willie_position.x = x;
    }
    if let Some(y) = overrides.willie_y {
        scenario.willie_position.y = y;
    }
    let mut config = LearningConfig::defaults(&scenario);
    if let Some(e) = overrides.episodes {
        config.episodes = e;
    }
    if let Some(a) = overrides.alpha {
        config.learning_rate = a;
    }
    if let Some(g) = overrides.gamma {
        config.discount = g;
    }
    if let Some(e) = overrides.epsilon {
        config.epsilon = e;
    }

    let gains = build_gain_table(&scenario)?;
    let started = Instant::now();
    let outcome = dispatch(
        &scenario,
        &gains,
        method,
        &config,
        cell_seed(scenario.rng_seed, axis_index, replicate_index),
    )?;
    let wall_time_ms = started.elapsed().as_millis() as u64;

    let mut record = ExperimentRecord {
        method,
        seed: scenario.rng_seed,
        willie_x: scenario.willie_position.x,
        willie_y: scenario.willie_position.y,
        u_target_bps: scenario.target_throughput,
        episodes: config.episodes,
        e2e_dep: None,
        e2e_throughput_bps: None,
        hop_count: None,
        route: None,
        wall_time_ms,
        status: RunStatus::Ok,
    };
    match outcome {
        Outcome::Success(route) => {
            // Every method's reported figures come from one recomputation
            // path, regardless of what the method computed internally.
            record.e2e_dep = Some(route_dep(&route, &gains, &scenario)?);
            record.e2e_throughput_bps = Some(route_throughput(&route, &gains, &scenario)?);
            record.hop_count = Some(route.hop_count());
            record.route = Some(route.to_compact_string());
        }
        Outcome::Failed(status) => record.status = status,
    }
    Ok(record)
}

enum Outcome {
    Success(Route),
    Failed(RunStatus),
}

fn dispatch(
    scenario: &Scenario,
    gains: &GainTable,
    method: Method,
    config: &LearningConfig,
    learning_seed: u64,
) -> Result<Outcome, HarnessError> {
    match method {
        Method::QCovert => {
            let outcome = match train(scenario, gains, config, learning_seed) {
                Ok(outcome) => outcome,
                Err(QLearnError::Infeasible { .. }) => {
                    return Ok(Outcome::Failed(RunStatus::Infeasible))
                }
                Err(QLearnError::InvalidConfig(msg)) => {
                    return Err(HarnessError::InvalidRequest(msg))
                }
                Err(QLearnError::Topology(e)) => return Err(e.into()),
                Err(QLearnError::Metrics(e)) => return Err(e.into()),
                Err(e @ QLearnError::ExtractionFailure { .. }) => {
                    unreachable!("train does not extract: {e}")
                }
            };
            let problem = RoutingProblem::build(scenario, gains).map_err(flatten_qlearn)?;
            match extract_route(&outcome.tables, &problem) {
                Ok(route) => Ok(Outcome::Success(route)),
                Err(QLearnError::ExtractionFailure { .. }) => {
                    Ok(Outcome::Failed(RunStatus::ExtractionFailure))
                }
                Err(e) => Err(flatten_qlearn(e)),
            }
        }
        Method::Centralized | Method::Brute => {
            let result = if method == Method::Centralized {
                dijkstra_optimal(gains, scenario)
            } else {
                brute_force_optimal(gains, scenario)
            };
            match result {
                Ok(r) => Ok(Outcome::Success(r.route)),
                Err(OracleError::Unreachable) => Ok(Outcome::Failed(RunStatus::Infeasible)),
                Err(OracleError::TooManyNodes { nodes }) => Err(HarnessError::InvalidRequest(
                    format!("brute force refused: {nodes} nodes"),
                )),
                Err(e) => Err(flatten_oracle(e)),
            }
        }
        Method::Closest | Method::BestDir => {
            let result = if method == Method::Closest {
                closest_to_destination(gains, scenario)
            } else {
                best_direction_to_destination(gains, scenario)
            };
            match result {
                Ok(r) => Ok(Outcome::Success(r.route)),
                Err(OracleError::Stuck { .. }) => {
                    Ok(Outcome::Failed(RunStatus::BaselineFailure))
                }
                Err(e) => Err(flatten_oracle(e)),
            }
        }
    }
}

fn flatten_qlearn(e: QLearnError) -> HarnessError {
    match e {
        QLearnError::Topology(t) => t.into(),
        QLearnError::Metrics(m) => m.into(),
        other => HarnessError::InvalidRequest(other.to_string()),
    }
}

fn flatten_oracle(e: OracleError) -> HarnessError {
    match e {
        OracleError::Topology(t) => t.into(),
        OracleError::Metrics(m) => m.into(),
        other => HarnessError::InvalidRequest(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    WillieX,
    UTarget,
    Episodes,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::WillieX => "willie_x",
            SweepAxis::UTarget => "u_target",
            SweepAxis::Episodes => "episodes",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "willie_x" => Ok(SweepAxis::WillieX),
            "u_target" => Ok(SweepAxis::UTarget),
            "episodes" => Ok(SweepAxis::Episodes),
            other => Err(format!(
                "unknown sweep axis '{other}' (expected willie_x, u_target, or episodes)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub methods: Vec<Method>,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.values.is_empty() || self.seeds.is_empty() || self.methods.is_empty() {
            return Err(HarnessError::InvalidRequest(
                "sweep needs at least one value, one seed, and one method".into(),
            ));
        }
        for &v in &self.values {
            if !v.is_finite() {
                return Err(HarnessError::InvalidRequest(format!(
                    "sweep value {v} is not finite"
                )));
            }
            if self.axis == SweepAxis::Episodes && (v < 0.0 || v.fract() != 0.0) {
                return Err(HarnessError::InvalidRequest(format!(
                    "episodes axis needs nonnegative integers, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Cartesian product of axis values, seeds, and methods; per-cell failures
/// land in the status column and the sweep continues. Output is sorted by
/// (method, axis value, seed).
pub fn run_sweep(
    scenario: &Scenario,
    spec: &SweepSpec,
    base_overrides: &RunOverrides,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    spec.validate()?;
    let mut records = Vec::new();
    for &method in &spec.methods {
        for (axis_index, &value) in spec.values.iter().enumerate() {
            for (replicate_index, &seed) in spec.seeds.iter().enumerate() {
                let mut overrides = *base_overrides;
                overrides.seed = Some(seed);
                match spec.axis {
                    SweepAxis::WillieX => overrides.willie_x = Some(value),
                    SweepAxis::UTarget => overrides.u_target = Some(value),
                    SweepAxis::Episodes => overrides.episodes = Some(value as u32),
                }
                let record = run_cell(
                    scenario,
                    method,
                    &overrides,
                    axis_index as u64,
                    replicate_index as u64,
                )?;
                records.push(record);
            }
        }
    }
    let axis_value = |r: &ExperimentRecord| match spec.axis {
        SweepAxis::WillieX => r.willie_x,
        SweepAxis::UTarget => r.u_target_bps,
        SweepAxis::Episodes => r.episodes as f64,
    };
    records.sort_by(|a, b| {
        a.method
            .as_str()
            .cmp(b.method.as_str())
            .then(axis_value(a).total_cmp(&axis_value(b)))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(records)
}

/// Write the bundled scenario to `path`.
pub fn emit_scenario_template(path: &Path) -> io::Result<()> {
    std::fs::write(path, SCENARIO_TEMPLATE)
}

/// A complete, commented 36-node scene. Layout and propagation constants
/// are synthetic stand-ins chosen to exercise the range-versus-covertness
/// tradeoff between bands; everything else matches the reference parameter
/// set (L = 100, P = 10 dBm, N0 = -80 dBm/Hz, 4 MHz bands, 0.5 Mbps target).
pub const SCENARIO_TEMPLATE: &str = r#"# Synthetic 36-node heterogeneous covert-routing scene.
#
# A 250 m x 250 m field with a 6 x 6 grid-like node layout (fixed jitter,
# all antennas at 3 m), three rectangular buildings, and a warden near the
# south edge. Node 8 (southwest quadrant) routes to node 29 (northeast
# quadrant), diagonally across the field and away from the warden.
#
# Propagation per modality follows log-distance path loss:
#   PL_dB(d) = reference_loss_db + 10 * pathloss_exponent * log10(d / 1 m)
#            + obstruction_loss_db * (building walls crossed) + shadowing
# The constants below are synthetic stand-ins: the low band carries far but
# is also loud at the warden; the high band dies quickly, which makes it the
# covert choice for short hops.
#
# transmit_power 0.01 W = 10 dBm; noise_psd 1e-11 W/Hz = -80 dBm/Hz.

source_id = 8
destination_id = 29
willie_position = [145.0, 15.0, 3.0]
transmit_power = 0.01
noise_psd = 1.0e-11
block_length = 100
target_throughput = 5.0e5
neighbor_radius = 75.0
rng_seed = 1

# 400 MHz: long reach, weak wall attenuation.
[[modalities]]
id = 1
center_frequency = 4.0e8
bandwidth = 4.0e6
pathloss_exponent = 1.2
reference_loss_db = 6.0
obstruction_loss_db = 2.0
shadowing_sigma_db = 2.0

# 900 MHz: mid reach.
[[modalities]]
id = 2
center_frequency = 9.0e8
bandwidth = 4.0e6
pathloss_exponent = 1.35
reference_loss_db = 8.0
obstruction_loss_db = 4.0
shadowing_sigma_db = 2.0

# 2.4 GHz: short reach, strong wall attenuation, most covert up close.
[[modalities]]
id = 3
center_frequency = 2.4e9
bandwidth = 4.0e6
pathloss_exponent = 1.5
reference_loss_db = 10.0
obstruction_loss_db = 7.0
shadowing_sigma_db = 2.0

# Buildings (axis-aligned boxes, ground to roof).
[[obstacles]]
min_corner = [95.0, 55.0, 0.0]
max_corner = [130.0, 90.0, 12.0]

[[obstacles]]
min_corner = [160.0, 140.0, 0.0]
max_corner = [195.0, 175.0, 12.0]

[[obstacles]]
min_corner = [40.0, 160.0, 0.0]
max_corner = [75.0, 195.0, 12.0]

[[nodes]]
id = 1
position = [2.0, 4.0, 3.0]

[[nodes]]
id = 2
position = [47.0, 1.0, 3.0]

[[nodes]]
id = 3
position = [104.0, 2.0, 3.0]

[[nodes]]
id = 4
position = [149.0, 5.0, 3.0]

[[nodes]]
id = 5
position = [200.0, 3.0, 3.0]

[[nodes]]
id = 6
position = [247.0, 0.0, 3.0]

[[nodes]]
id = 7
position = [0.0, 53.0, 3.0]

[[nodes]]
id = 8
position = [52.0, 48.0, 3.0]

[[nodes]]
id = 9
position = [96.0, 54.0, 3.0]

[[nodes]]
id = 10
position = [153.0, 47.0, 3.0]

[[nodes]]
id = 11
position = [196.0, 52.0, 3.0]

[[nodes]]
id = 12
position = [250.0, 55.0, 3.0]

[[nodes]]
id = 13
position = [4.0, 97.0, 3.0]

[[nodes]]
id = 14
position = [45.0, 103.0, 3.0]

[[nodes]]
id = 15
position = [102.0, 99.0, 3.0]

[[nodes]]
id = 16
position = [147.0, 96.0, 3.0]

[[nodes]]
id = 17
position = [204.0, 104.0, 3.0]

[[nodes]]
id = 18
position = [246.0, 98.0, 3.0]

[[nodes]]
id = 19
position = [1.0, 152.0, 3.0]

[[nodes]]
id = 20
position = [54.0, 147.0, 3.0]

[[nodes]]
id = 21
position = [98.0, 154.0, 3.0]

[[nodes]]
id = 22
position = [151.0, 148.0, 3.0]

[[nodes]]
id = 23
position = [198.0, 153.0, 3.0]

[[nodes]]
id = 24
position = [245.0, 151.0, 3.0]

[[nodes]]
id = 25
position = [3.0, 196.0, 3.0]

[[nodes]]
id = 26
position = [49.0, 203.0, 3.0]

[[nodes]]
id = 27
position = [105.0, 197.0, 3.0]

[[nodes]]
id = 28
position = [146.0, 204.0, 3.0]

[[nodes]]
id = 29
position = [202.0, 199.0, 3.0]

[[nodes]]
id = 30
position = [248.0, 202.0, 3.0]

[[nodes]]
id = 31
position = [0.0, 249.0, 3.0]

[[nodes]]
id = 32
position = [51.0, 246.0, 3.0]

[[nodes]]
id = 33
position = [97.0, 250.0, 3.0]

[[nodes]]
id = 34
position = [154.0, 247.0, 3.0]

[[nodes]]
id = 35
position = [199.0, 244.0, 3.0]

[[nodes]]
id = 36
position = [247.0, 250.0, 3.0]
"#;
