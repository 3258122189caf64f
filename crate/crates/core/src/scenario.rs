//! Scene description: nodes, obstacles, communication modalities, and the
//! physical parameters of one experiment.
//!
//! Scenarios live on disk as TOML (see the bundled template emitted by the
//! CLI). Every field is mandatory except `obstacles`, which defaults to an
//! empty list. Units are SI: meters, watts, watts/Hz, bits/s, Hz.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point3;

/// Identifier of a legitimate node.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a communication modality.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ModalityId(pub u32);

impl fmt::Display for ModalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A legitimate node: candidate transmitter, receiver, or relay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDef {
    pub id: NodeId,
    /// Position in meters.
    pub position: Point3,
}

/// One selectable communication mode with its propagation behavior.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Modality {
    pub id: ModalityId,
    /// Center frequency in Hz. Carried for reporting; the synthetic
    /// propagation model encodes frequency effects in the loss parameters.
    pub center_frequency: f64,
    /// Occupied bandwidth in Hz.
    pub bandwidth: f64,
    /// Log-distance path loss exponent.
    pub pathloss_exponent: f64,
    /// Path loss in dB at the 1 m reference distance.
    pub reference_loss_db: f64,
    /// Extra loss in dB for each obstacle the link segment crosses.
    pub obstruction_loss_db: f64,
    /// Standard deviation of the lognormal shadowing term, in dB.
    pub shadowing_sigma_db: f64,
}

/// Axis-aligned box obstacle, corners in meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Obstacle {
    pub min_corner: Point3,
    pub max_corner: Point3,
}

impl Obstacle {
    /// Whether `p` lies inside or on the boundary of the box.
    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= self.min_corner.x
            && p.x <= self.max_corner.x
            && p.y >= self.min_corner.y
            && p.y <= self.max_corner.y
            && p.z >= self.min_corner.z
            && p.z <= self.max_corner.z
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<NodeDef>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    pub modalities: Vec<Modality>,
    pub source_id: NodeId,
    pub destination_id: NodeId,
    /// Willie's position in meters.
    pub willie_position: Point3,
    /// Transmit power P at every transmitter, in watts.
    pub transmit_power: f64,
    /// Noise power spectral density N0, in watts/Hz.
    pub noise_psd: f64,
    /// Channel uses per communication slot (L).
    pub block_length: u32,
    /// Required end-to-end throughput, in bits/s.
    pub target_throughput: f64,
    /// Two nodes are neighbors iff their distance is at most this, in meters.
    pub neighbor_radius: f64,
    /// Seed for the shadowing draws of the synthetic channel.
    pub rng_seed: u64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario:{}", problems.iter().map(|p| format!("\n  - {p}")).collect::<String>())]
    Invalid { problems: Vec<String> },
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Parse and validate a scenario from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Check every structural invariant, reporting all violations at once.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let mut problems = Vec::new();

        if self.nodes.len() < 2 {
            problems.push(format!("need at least 2 nodes, got {}", self.nodes.len()));
        }
        let mut seen = BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id) {
                problems.push(format!("duplicate node id {}", node.id));
            }
            if !node.position.is_finite() {
                problems.push(format!("node {} has a non-finite position", node.id));
            }
        }

        if self.modalities.is_empty() {
            problems.push("need at least one modality".to_string());
        }
        let mut seen_m = BTreeSet::new();
        for m in &self.modalities {
            if !seen_m.insert(m.id) {
                problems.push(format!("duplicate modality id {}", m.id));
            }
            if !(m.bandwidth > 0.0 && m.bandwidth.is_finite()) {
                problems.push(format!("modality {}: bandwidth must be > 0", m.id));
            }
            if !(m.pathloss_exponent >= 1.0 && m.pathloss_exponent.is_finite()) {
                problems.push(format!("modality {}: pathloss_exponent must be >= 1", m.id));
            }
            for (name, v) in [
                ("reference_loss_db", m.reference_loss_db),
                ("obstruction_loss_db", m.obstruction_loss_db),
                ("shadowing_sigma_db", m.shadowing_sigma_db),
            ] {
                if !(v >= 0.0 && v.is_finite()) {
                    problems.push(format!("modality {}: {name} must be >= 0", m.id));
                }
            }
            if !m.center_frequency.is_finite() || m.center_frequency <= 0.0 {
                problems.push(format!("modality {}: center_frequency must be > 0", m.id));
            }
        }

        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.min_corner.is_finite() || !o.max_corner.is_finite() {
                problems.push(format!("obstacle {i}: non-finite corner"));
            } else if o.min_corner.x > o.max_corner.x
                || o.min_corner.y > o.max_corner.y
                || o.min_corner.z > o.max_corner.z
            {
                problems.push(format!(
                    "obstacle {i}: min_corner must be <= max_corner componentwise"
                ));
            }
        }

        if self.source_id == self.destination_id {
            problems.push("source_id and destination_id must differ".to_string());
        }
        if seen.len() == self.nodes.len() {
            if !seen.contains(&self.source_id) {
                problems.push(format!("source_id {} is not a node", self.source_id));
            }
            if !seen.contains(&self.destination_id) {
                problems.push(format!(
                    "destination_id {} is not a node",
                    self.destination_id
                ));
            }
        }
        if !self.willie_position.is_finite() {
            problems.push("willie_position must be finite".to_string());
        }
        if !(self.transmit_power > 0.0 && self.transmit_power.is_finite()) {
            problems.push("transmit_power must be > 0".to_string());
        }
        if !(self.noise_psd > 0.0 && self.noise_psd.is_finite()) {
            problems.push("noise_psd must be > 0".to_string());
        }
        if self.block_length < 1 {
            problems.push("block_length must be >= 1".to_string());
        }
        if !(self.target_throughput >= 0.0 && self.target_throughput.is_finite()) {
            problems.push("target_throughput must be >= 0 and finite".to_string());
        }
        if !(self.neighbor_radius > 0.0 && self.neighbor_radius.is_finite()) {
            problems.push("neighbor_radius must be > 0".to_string());
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Invalid { problems })
        }
    }

    pub fn node(&self, id: NodeId) -> Result<&NodeDef, ScenarioError> {
        self.nodes
            .iter()
            .find(|n| n.id == id)
            .ok_or(ScenarioError::UnknownNode(id))
    }

    pub fn modality(&self, id: ModalityId) -> Option<&Modality> {
        self.modalities.iter().find(|m| m.id == id)
    }

    /// Node ids in ascending order (the canonical iteration order).
    pub fn sorted_node_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.nodes.iter().map(|n| n.id).collect();
        ids.sort();
        ids
    }

    /// Modality ids in ascending order.
    pub fn sorted_modality_ids(&self) -> Vec<ModalityId> {
        let mut ids: Vec<ModalityId> = self.modalities.iter().map(|m| m.id).collect();
        ids.sort();
        ids
    }

    /// Positions indexed by node id.
    pub fn position_index(&self) -> BTreeMap<NodeId, Point3> {
        self.nodes.iter().map(|n| (n.id, n.position)).collect()
    }
}
