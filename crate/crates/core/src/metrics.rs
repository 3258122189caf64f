//! Covertness and throughput mathematics.
//!
//! Willie runs a radiometer on each hop: he averages received power over the
//! `L` channel uses of a slot and compares against a threshold. Under the
//! no-transmission hypothesis the scaled average `L*ybar/sigma0^2` is
//! Gamma(L, 1); under transmission the same holds with `sigma1^2 =
//! P*|g|^2 + sigma0^2`. Equating the two likelihoods gives the optimal
//! threshold
//!
//! ```text
//! delta* = sigma0^2 * sigma1^2 / (sigma1^2 - sigma0^2) * ln(sigma1^2 / sigma0^2)
//! ```
//!
//! and substituting it into missed-detection + false-alarm yields the closed
//! form implemented by [`hop_dep_from_params`], a difference of two
//! regularized incomplete gamma values at `L*(1+X)*ln(1+1/X)` and
//! `L*X*ln(1+1/X)`, with `X = sigma0^2 / (sigma1^2 - sigma0^2)`. A Monte
//! Carlo energy-detection oracle validates the closed form end to end.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::channel::GainTable;
use crate::gamma::regularized_gamma_pair;
use crate::scenario::{ModalityId, NodeId, Scenario};

/// Any hop DEP below this switches the route product to log space.
const LOG_SPACE_DEP_FLOOR: f64 = 1e-15;

/// One transmitter -> receiver link with a chosen modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hop {
    pub tx_id: NodeId,
    pub rx_id: NodeId,
    pub modality_id: ModalityId,
}

impl fmt::Display for Hop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}:{}", self.tx_id, self.rx_id, self.modality_id)
    }
}

/// An ordered chain of hops from source to destination.
///
/// Construction validates simplicity: consecutive hops chain, the first
/// transmitter is the source, the last receiver is the destination, and no
/// node appears twice in the node sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    hops: Vec<Hop>,
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("route must contain at least one hop")]
    EmptyRoute,
    #[error("hop {index} ({hop}) does not chain from previous receiver {expected}")]
    BrokenChain {
        index: usize,
        hop: Hop,
        expected: NodeId,
    },
    #[error("route must start at source {expected}, got {got}")]
    WrongSource { expected: NodeId, got: NodeId },
    #[error("route must end at destination {expected}, got {got}")]
    WrongDestination { expected: NodeId, got: NodeId },
    #[error("node {0} appears twice in the route (route must be simple)")]
    RepeatedNode(NodeId),
    #[error("hop {0} has identical transmitter and receiver")]
    SelfLoop(NodeId),
    #[error("signal-plus-noise variance {sigma1_sq} must exceed noise variance {sigma0_sq} (Willie receives no signal power)")]
    NoSignalPower { sigma0_sq: f64, sigma1_sq: f64 },
    #[error("detection parameters must be finite and positive: sigma0^2 = {sigma0_sq}, sigma1^2 = {sigma1_sq}")]
    InvalidVariances { sigma0_sq: f64, sigma1_sq: f64 },
    #[error("block length must be at least 1")]
    InvalidBlockLength,
    #[error("gain table has no entry for link ({tx} -> {rx}, modality {modality})")]
    MissingLink {
        tx: NodeId,
        rx: NodeId,
        modality: ModalityId,
    },
    #[error("gain table has no Willie entry for (tx {tx}, modality {modality})")]
    MissingWillieLink { tx: NodeId, modality: ModalityId },
    #[error("scenario has no modality {0}")]
    UnknownModality(ModalityId),
    #[error("route string segment '{0}' is not of the form tx-rx:m")]
    MalformedRouteSegment(String),
}

impl Route {
    pub fn new(hops: Vec<Hop>, source: NodeId, destination: NodeId) -> Result<Self, MetricsError> {
        let first = hops.first().ok_or(MetricsError::EmptyRoute)?;
        if first.tx_id != source {
            return Err(MetricsError::WrongSource {
                expected: source,
                got: first.tx_id,
            });
        }
        let last = hops.last().expect("nonempty");
        if last.rx_id != destination {
            return Err(MetricsError::WrongDestination {
                expected: destination,
                got: last.rx_id,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(first.tx_id);
        for (index, hop) in hops.iter().enumerate() {
            if hop.tx_id == hop.rx_id {
                return Err(MetricsError::SelfLoop(hop.tx_id));
            }
            if index > 0 {
                let expected = hops[index - 1].rx_id;
                if hop.tx_id != expected {
                    return Err(MetricsError::BrokenChain {
                        index,
                        hop: *hop,
                        expected,
                    });
                }
            }
            if !seen.insert(hop.rx_id) {
                return Err(MetricsError::RepeatedNode(hop.rx_id));
            }
        }
        Ok(Self { hops })
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    /// `tx-rx:m` segments joined by `|`, the CSV route encoding.
    pub fn to_compact_string(&self) -> String {
        self.hops
            .iter()
            .map(|h| h.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }

    /// Parse the CSV route encoding back into a validated route.
    pub fn from_compact_str(
        text: &str,
        source: NodeId,
        destination: NodeId,
    ) -> Result<Self, MetricsError> {
        let mut hops = Vec::new();
        for segment in text.split('|') {
            let bad = || MetricsError::MalformedRouteSegment(segment.to_string());
            let (pair, modality) = segment.split_once(':').ok_or_else(bad)?;
            let (tx, rx) = pair.split_once('-').ok_or_else(bad)?;
            hops.push(Hop {
                tx_id: NodeId(tx.parse().map_err(|_| bad())?),
                rx_id: NodeId(rx.parse().map_err(|_| bad())?),
                modality_id: ModalityId(modality.parse().map_err(|_| bad())?),
            });
        }
        Self::new(hops, source, destination)
    }
}

/// The radiometer statistics of one hop as seen by Willie.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    noise_variance: f64,
    signal_plus_noise_variance: f64,
    block_length: u32,
    x_ratio: f64,
}

impl DetectionParams {
    /// Build from the two hypothesis variances (watts) and block length.
    pub fn new(
        noise_variance: f64,
        signal_plus_noise_variance: f64,
        block_length: u32,
    ) -> Result<Self, MetricsError> {
        if !(noise_variance.is_finite()
            && signal_plus_noise_variance.is_finite()
            && noise_variance > 0.0)
        {
            return Err(MetricsError::InvalidVariances {
                sigma0_sq: noise_variance,
                sigma1_sq: signal_plus_noise_variance,
            });
        }
        if signal_plus_noise_variance <= noise_variance {
            return Err(MetricsError::NoSignalPower {
                sigma0_sq: noise_variance,
                sigma1_sq: signal_plus_noise_variance,
            });
        }
        if block_length < 1 {
            return Err(MetricsError::InvalidBlockLength);
        }
        let x_ratio = noise_variance / (signal_plus_noise_variance - noise_variance);
        Ok(Self {
            noise_variance,
            signal_plus_noise_variance,
            block_length,
            x_ratio,
        })
    }

    /// Build directly from the noise-to-received-signal ratio
    /// `X = sigma0^2 / (P |g|^2)`, with unit noise variance.
    pub fn from_x_ratio(x_ratio: f64, block_length: u32) -> Result<Self, MetricsError> {
        if !(x_ratio.is_finite() && x_ratio > 0.0) {
            return Err(MetricsError::InvalidVariances {
                sigma0_sq: 1.0,
                sigma1_sq: f64::NAN,
            });
        }
        Self::new(1.0, 1.0 + 1.0 / x_ratio, block_length)
    }

    /// Willie's view of a hop: `sigma0^2 = bandwidth * N0`,
    /// `sigma1^2 = P * |g_tx,W|^2 + sigma0^2`.
    pub fn for_hop(
        scenario: &Scenario,
        gains: &GainTable,
        tx: NodeId,
        modality_id: ModalityId,
    ) -> Result<Self, MetricsError> {
        let modality = scenario
            .modality(modality_id)
            .ok_or(MetricsError::UnknownModality(modality_id))?;
        let willie_gain = gains
            .willie_gain(tx, modality_id)
            .ok_or(MetricsError::MissingWillieLink { tx, modality: modality_id })?;
        let noise = modality.bandwidth * scenario.noise_psd;
        Self::new(
            noise,
            scenario.transmit_power * willie_gain + noise,
            scenario.block_length,
        )
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn signal_plus_noise_variance(&self) -> f64 {
        self.signal_plus_noise_variance
    }

    pub fn block_length(&self) -> u32 {
        self.block_length
    }

    pub fn x_ratio(&self) -> f64 {
        self.x_ratio
    }
}

/// The threshold minimizing missed detection + false alarm.
pub fn optimal_threshold(params: &DetectionParams) -> f64 {
    // ln1p keeps the log accurate when X is large (weak signal at Willie).
    params.noise_variance * (1.0 + params.x_ratio) * (1.0 / params.x_ratio).ln_1p()
}

/// Closed-form detection error probability of the optimal-threshold test.
///
/// Evaluated as `Q(L, a) + P(L, b)` with `a = L(1+X)ln(1+1/X)` and
/// `b = L X ln(1+1/X)`: each term comes from its well-conditioned branch, so
/// the result stays relatively accurate even when the DEP is tiny.
pub fn hop_dep_from_params(params: &DetectionParams) -> f64 {
    let l = params.block_length as f64;
    let x = params.x_ratio;
    let log_term = (1.0 / x).ln_1p();
    let upper_arg = l * (1.0 + x) * log_term;
    let lower_arg = l * x * log_term;
    let (_, q_upper) = regularized_gamma_pair(l, upper_arg).expect("valid by construction");
    let (p_lower, _) = regularized_gamma_pair(l, lower_arg).expect("valid by construction");
    (q_upper + p_lower).clamp(0.0, 1.0)
}

/// Missed detection and false alarm probabilities at an arbitrary threshold.
pub fn md_fa_probabilities(params: &DetectionParams, threshold: f64) -> (f64, f64) {
    assert!(
        threshold > 0.0 && threshold.is_finite(),
        "threshold must be positive and finite"
    );
    let l = params.block_length as f64;
    let (p_md, _) =
        regularized_gamma_pair(l, l * threshold / params.signal_plus_noise_variance)
            .expect("valid by construction");
    let (_, p_fa) = regularized_gamma_pair(l, l * threshold / params.noise_variance)
        .expect("valid by construction");
    (p_md, p_fa)
}

/// Monte Carlo estimate of missed detection + false alarm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McDepEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub p_md: f64,
    pub p_fa: f64,
}

/// Simulate the radiometer: complex circular Gaussian blocks under both
/// hypotheses (equal split), threshold test on the block-average power.
/// Reproducible given `seed`.
pub fn monte_carlo_dep(
    params: &DetectionParams,
    threshold: f64,
    trials: u64,
    seed: u64,
) -> McDepEstimate {
    assert!(trials >= 1_000, "need at least 1000 trials, got {trials}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = params.block_length as usize;

    let mut average_power = |variance: f64| -> f64 {
        // CN(0, v) has N(0, v/2) real and imaginary parts.
        let component_sigma = (variance / 2.0).sqrt();
        let mut sum = 0.0;
        for _ in 0..l {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let re = re * component_sigma;
            let im = im * component_sigma;
            sum += re * re + im * im;
        }
        sum / l as f64
    };

    let transmit_trials = trials / 2;
    let quiet_trials = trials - transmit_trials;

    let mut missed = 0u64;
    for _ in 0..transmit_trials {
        if average_power(params.signal_plus_noise_variance) <= threshold {
            missed += 1;
        }
    }
    let mut false_alarms = 0u64;
    for _ in 0..quiet_trials {
        if average_power(params.noise_variance) > threshold {
            false_alarms += 1;
        }
    }

    let p_md = missed as f64 / transmit_trials as f64;
    let p_fa = false_alarms as f64 / quiet_trials as f64;
    let variance = p_md * (1.0 - p_md) / transmit_trials as f64
        + p_fa * (1.0 - p_fa) / quiet_trials as f64;
    McDepEstimate {
        estimate: p_md + p_fa,
        std_error: variance.sqrt(),
        p_md,
        p_fa,
    }
}

/// DEP of a single hop, looked up through the gain table.
pub fn hop_dep(
    hop: &Hop,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<f64, MetricsError> {
    if gains.gain(hop.tx_id, hop.rx_id, hop.modality_id).is_none() {
        return Err(MetricsError::MissingLink {
            tx: hop.tx_id,
            rx: hop.rx_id,
            modality: hop.modality_id,
        });
    }
    let params = DetectionParams::for_hop(scenario, gains, hop.tx_id, hop.modality_id)?;
    Ok(hop_dep_from_params(&params))
}

/// End-to-end DEP of a route: product of per-hop DEPs. Switches to log-space
/// accumulation when any hop DEP dips below 1e-15 to avoid underflow.
pub fn route_dep(
    route: &Route,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<f64, MetricsError> {
    let deps = route
        .hops()
        .iter()
        .map(|h| hop_dep(h, gains, scenario))
        .collect::<Result<Vec<_>, _>>()?;
    if deps.iter().any(|&d| d < LOG_SPACE_DEP_FLOOR) {
        Ok(deps.iter().map(|d| d.ln()).sum::<f64>().exp())
    } else {
        Ok(deps.iter().product())
    }
}

/// Shannon throughput of one hop: `bandwidth * log2(1 + P |g|^2 / (bandwidth N0))`.
pub fn hop_throughput(
    hop: &Hop,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<f64, MetricsError> {
    let modality = scenario
        .modality(hop.modality_id)
        .ok_or(MetricsError::UnknownModality(hop.modality_id))?;
    let gain = gains
        .gain(hop.tx_id, hop.rx_id, hop.modality_id)
        .ok_or(MetricsError::MissingLink {
            tx: hop.tx_id,
            rx: hop.rx_id,
            modality: hop.modality_id,
        })?;
    let snr = scenario.transmit_power * gain / (modality.bandwidth * scenario.noise_psd);
    Ok(modality.bandwidth * (1.0 + snr).log2())
}

/// Bottleneck throughput of a route: the minimum over its hops.
pub fn route_throughput(
    route: &Route,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<f64, MetricsError> {
    let mut min = f64::INFINITY;
    for hop in route.hops() {
        min = min.min(hop_throughput(hop, gains, scenario)?);
    }
    Ok(min)
}
