//! Per-link power gains: the synthetic propagation model and the gain-table
//! ingestion path.
//!
//! Every downstream module consumes link quality exclusively through
//! [`GainTable`], so externally measured channels can replace the synthetic
//! model without touching routing or detection code. The synthetic model is
//! log-distance path loss with a per-crossing obstruction penalty and
//! lognormal shadowing:
//!
//! ```text
//! PL_dB = reference_loss_db
//!       + 10 * pathloss_exponent * log10(max(d, 1 m))
//!       + obstruction_loss_db * (obstacles crossed)
//!       + N(0, shadowing_sigma_db^2)
//! gain  = 10^(-PL_dB / 10)
//! ```
//!
//! Shadowing draws are consumed in a fixed canonical order (node links sorted
//! by `(tx, rx, modality)`, then Willie links sorted by `(tx, modality)`), so
//! a `(Scenario, seed)` pair always yields the same table regardless of query
//! order, and moving Willie never perturbs node-to-node gains.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::geometry::Point3;
use crate::scenario::{ModalityId, NodeId, Obstacle, Scenario};

/// Reference distance of the log-distance model, in meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// Linear power gains for every covered link.
///
/// Immutable after construction; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    links: BTreeMap<(NodeId, NodeId, ModalityId), f64>,
    willie: BTreeMap<(NodeId, ModalityId), f64>,
}

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("nodes {a} and {b} are at zero distance (degenerate geometry)")]
    DegenerateNodePair { a: NodeId, b: NodeId },
    #[error("node {0} sits exactly at Willie's position (degenerate geometry)")]
    DegenerateWillieLink(NodeId),
    #[error("gain for ({tx} -> {rx}, modality {modality}) must be positive and finite, got {gain}")]
    InvalidGain {
        tx: NodeId,
        rx: String,
        modality: ModalityId,
        gain: f64,
    },
    #[error("failed to access gain table file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("gain table line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("gain table line {line}: unknown {what} id {id}")]
    UnknownId {
        line: usize,
        what: &'static str,
        id: i64,
    },
    #[error("gain table line {line}: duplicate entry for ({tx} -> {rx}, modality {modality})")]
    Duplicate {
        line: usize,
        tx: NodeId,
        rx: String,
        modality: ModalityId,
    },
    #[error("gain table does not cover link ({tx} -> {rx}, modality {modality})")]
    MissingCoverage {
        tx: NodeId,
        rx: String,
        modality: ModalityId,
    },
}

impl GainTable {
    /// Assemble a table from explicit link maps, checking gain validity.
    pub fn from_parts(
        links: BTreeMap<(NodeId, NodeId, ModalityId), f64>,
        willie: BTreeMap<(NodeId, ModalityId), f64>,
    ) -> Result<Self, ChannelError> {
        for (&(tx, rx, m), &g) in &links {
            if !(g > 0.0 && g.is_finite()) {
                return Err(ChannelError::InvalidGain {
                    tx,
                    rx: rx.to_string(),
                    modality: m,
                    gain: g,
                });
            }
        }
        for (&(tx, m), &g) in &willie {
            if !(g > 0.0 && g.is_finite()) {
                return Err(ChannelError::InvalidGain {
                    tx,
                    rx: "W".to_string(),
                    modality: m,
                    gain: g,
                });
            }
        }
        Ok(Self { links, willie })
    }

    /// Linear power gain of the (tx -> rx) link under `modality`.
    pub fn gain(&self, tx: NodeId, rx: NodeId, modality: ModalityId) -> Option<f64> {
        self.links.get(&(tx, rx, modality)).copied()
    }

    /// Linear power gain of the (tx -> Willie) link under `modality`.
    pub fn willie_gain(&self, tx: NodeId, modality: ModalityId) -> Option<f64> {
        self.willie.get(&(tx, modality)).copied()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn willie_link_count(&self) -> usize {
        self.willie.len()
    }

    /// Verify that every link required by `scenario` is present: each ordered
    /// node pair within `neighbor_radius` for every modality, and each
    /// node-to-Willie link for every modality.
    pub fn validate_coverage(&self, scenario: &Scenario) -> Result<(), ChannelError> {
        let (pair_links, willie_links) = required_links(scenario);
        for (tx, rx, m) in pair_links {
            if !self.links.contains_key(&(tx, rx, m)) {
                return Err(ChannelError::MissingCoverage {
                    tx,
                    rx: rx.to_string(),
                    modality: m,
                });
            }
        }
        for (tx, m) in willie_links {
            if !self.willie.contains_key(&(tx, m)) {
                return Err(ChannelError::MissingCoverage {
                    tx,
                    rx: "W".to_string(),
                    modality: m,
                });
            }
        }
        Ok(())
    }

    /// Write the table as `tx,rx,modality,gain_linear` rows (header included,
    /// `rx = -1` for Willie links). Output is byte-stable: rows follow the
    /// canonical link order and floats use shortest round-trip formatting.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ChannelError> {
        let path = path.as_ref();
        let mut out = String::from("tx,rx,modality,gain_linear\n");
        for (&(tx, rx, m), &g) in &self.links {
            out.push_str(&format!("{tx},{rx},{m},{g}\n"));
        }
        for (&(tx, m), &g) in &self.willie {
            out.push_str(&format!("{tx},-1,{m},{g}\n"));
        }
        let mut file = std::fs::File::create(path).map_err(|source| ChannelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        file.write_all(out.as_bytes()).map_err(|source| ChannelError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Ordered node pairs crossed with modalities (sorted by tx, rx, modality).
pub type PairLinkKeys = Vec<(NodeId, NodeId, ModalityId)>;
/// Node-to-Willie links (sorted by tx, modality).
pub type WillieLinkKeys = Vec<(NodeId, ModalityId)>;

/// The canonical list of links a scenario requires: ordered node pairs within
/// `neighbor_radius` crossed with all modalities, then all node-to-Willie
/// links.
pub fn required_links(scenario: &Scenario) -> (PairLinkKeys, WillieLinkKeys) {
    let ids = scenario.sorted_node_ids();
    let mods = scenario.sorted_modality_ids();
    let pos = scenario.position_index();
    let mut pairs = Vec::new();
    for &tx in &ids {
        for &rx in &ids {
            if tx == rx {
                continue;
            }
            if pos[&tx].distance(&pos[&rx]) <= scenario.neighbor_radius {
                for &m in &mods {
                    pairs.push((tx, rx, m));
                }
            }
        }
    }
    let mut willie = Vec::new();
    for &tx in &ids {
        for &m in &mods {
            willie.push((tx, m));
        }
    }
    (pairs, willie)
}

/// Number of obstacles whose box the segment `p1 -> p2` intersects. Touching
/// a face counts as an intersection.
pub fn segment_obstruction_count(p1: &Point3, p2: &Point3, obstacles: &[Obstacle]) -> usize {
    obstacles
        .iter()
        .filter(|o| segment_intersects_box(p1, p2, o))
        .count()
}

/// Slab-interval test of the closed segment against the closed box.
fn segment_intersects_box(p1: &Point3, p2: &Point3, obstacle: &Obstacle) -> bool {
    let origin = [p1.x, p1.y, p1.z];
    let delta = [p2.x - p1.x, p2.y - p1.y, p2.z - p1.z];
    let lo = [
        obstacle.min_corner.x,
        obstacle.min_corner.y,
        obstacle.min_corner.z,
    ];
    let hi = [
        obstacle.max_corner.x,
        obstacle.max_corner.y,
        obstacle.max_corner.z,
    ];

    let mut t_enter: f64 = 0.0;
    let mut t_exit: f64 = 1.0;
    for axis in 0..3 {
        if delta[axis] == 0.0 {
            if origin[axis] < lo[axis] || origin[axis] > hi[axis] {
                return false;
            }
        } else {
            let mut t1 = (lo[axis] - origin[axis]) / delta[axis];
            let mut t2 = (hi[axis] - origin[axis]) / delta[axis];
            if t1 > t2 {
                std::mem::swap(&mut t1, &mut t2);
            }
            t_enter = t_enter.max(t1);
            t_exit = t_exit.min(t2);
            if t_enter > t_exit {
                return false;
            }
        }
    }
    true
}

/// Build the synthetic gain table for a scenario. Deterministic given
/// `scenario.rng_seed`.
pub fn build_gain_table(scenario: &Scenario) -> Result<GainTable, ChannelError> {
    let pos = scenario.position_index();
    let (pair_links, willie_links) = required_links(scenario);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);

    let mut links = BTreeMap::new();
    for (tx, rx, m) in pair_links {
        let d = pos[&tx].distance(&pos[&rx]);
        if d == 0.0 {
            return Err(ChannelError::DegenerateNodePair { a: tx, b: rx });
        }
        let modality = scenario.modality(m).expect("validated modality id");
        let crossings = segment_obstruction_count(&pos[&tx], &pos[&rx], &scenario.obstacles);
        let shadow: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let gain = path_gain(modality, d, crossings, shadow);
        links.insert((tx, rx, m), gain);
    }

    let mut willie = BTreeMap::new();
    for (tx, m) in willie_links {
        let d = pos[&tx].distance(&scenario.willie_position);
        if d == 0.0 {
            return Err(ChannelError::DegenerateWillieLink(tx));
        }
        let modality = scenario.modality(m).expect("validated modality id");
        let crossings =
            segment_obstruction_count(&pos[&tx], &scenario.willie_position, &scenario.obstacles);
        let shadow: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
        let gain = path_gain(modality, d, crossings, shadow);
        willie.insert((tx, m), gain);
    }

    GainTable::from_parts(links, willie)
}

/// Linear gain of one link from the log-distance model.
fn path_gain(
    modality: &crate::scenario::Modality,
    distance: f64,
    crossings: usize,
    standard_normal_draw: f64,
) -> f64 {
    let d = distance.max(REFERENCE_DISTANCE_M);
    let pl_db = modality.reference_loss_db
        + 10.0 * modality.pathloss_exponent * (d / REFERENCE_DISTANCE_M).log10()
        + modality.obstruction_loss_db * crossings as f64
        + modality.shadowing_sigma_db * standard_normal_draw;
    10f64.powf(-pl_db / 10.0)
}

/// Parse a gain-table file and check it covers everything `scenario` needs.
pub fn load_gain_table(
    path: impl AsRef<Path>,
    scenario: &Scenario,
) -> Result<GainTable, ChannelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ChannelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let table = parse_gain_table(&text, scenario)?;
    table.validate_coverage(scenario)?;
    Ok(table)
}

fn parse_gain_table(text: &str, scenario: &Scenario) -> Result<GainTable, ChannelError> {
    let node_ids: Vec<NodeId> = scenario.sorted_node_ids();
    let modality_ids: Vec<ModalityId> = scenario.sorted_modality_ids();

    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "tx,rx,modality,gain_linear" => {}
        Some((_, header)) => {
            return Err(ChannelError::Malformed {
                line: 1,
                message: format!(
                    "expected header 'tx,rx,modality,gain_linear', got '{}'",
                    header.trim()
                ),
            })
        }
        None => {
            return Err(ChannelError::Malformed {
                line: 1,
                message: "empty file".to_string(),
            })
        }
    }

    let mut links = BTreeMap::new();
    let mut willie = BTreeMap::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(ChannelError::Malformed {
                line: line_no,
                message: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let parse_int = |s: &str, what: &'static str| -> Result<i64, ChannelError> {
            s.trim().parse::<i64>().map_err(|_| ChannelError::Malformed {
                line: line_no,
                message: format!("{what} '{s}' is not an integer"),
            })
        };
        let tx_raw = parse_int(fields[0], "tx")?;
        let rx_raw = parse_int(fields[1], "rx")?;
        let m_raw = parse_int(fields[2], "modality")?;
        let gain: f64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| ChannelError::Malformed {
                line: line_no,
                message: format!("gain '{}' is not a number", fields[3]),
            })?;

        let tx = NodeId(u32::try_from(tx_raw).map_err(|_| ChannelError::UnknownId {
            line: line_no,
            what: "tx node",
            id: tx_raw,
        })?);
        if !node_ids.contains(&tx) {
            return Err(ChannelError::UnknownId {
                line: line_no,
                what: "tx node",
                id: tx_raw,
            });
        }
        let m = ModalityId(u32::try_from(m_raw).map_err(|_| ChannelError::UnknownId {
            line: line_no,
            what: "modality",
            id: m_raw,
        })?);
        if !modality_ids.contains(&m) {
            return Err(ChannelError::UnknownId {
                line: line_no,
                what: "modality",
                id: m_raw,
            });
        }
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(ChannelError::InvalidGain {
                tx,
                rx: if rx_raw == -1 {
                    "W".to_string()
                } else {
                    rx_raw.to_string()
                },
                modality: m,
                gain,
            });
        }

        if rx_raw == -1 {
            if willie.insert((tx, m), gain).is_some() {
                return Err(ChannelError::Duplicate {
                    line: line_no,
                    tx,
                    rx: "W".to_string(),
                    modality: m,
                });
            }
        } else {
            let rx = NodeId(u32::try_from(rx_raw).map_err(|_| ChannelError::UnknownId {
                line: line_no,
                what: "rx node",
                id: rx_raw,
            })?);
            if !node_ids.contains(&rx) {
                return Err(ChannelError::UnknownId {
                    line: line_no,
                    what: "rx node",
                    id: rx_raw,
                });
            }
            if links.insert((tx, rx, m), gain).is_some() {
                return Err(ChannelError::Duplicate {
                    line: line_no,
                    tx,
                    rx: rx.to_string(),
                    modality: m,
                });
            }
        }
    }

    GainTable::from_parts(links, willie)
}
