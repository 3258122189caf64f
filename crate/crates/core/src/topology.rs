//! Learning-problem structure derived from the scene: neighbor sets, the
//! throughput-feasible action space of each node, and the feasibility
//! multigraph used by the centralized router.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::channel::GainTable;
use crate::metrics::{hop_dep, hop_throughput, Hop, MetricsError};
use crate::scenario::{ModalityId, NodeId, Scenario};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// One candidate decision of a transmitter: which neighbor, which modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub receiver_id: NodeId,
    pub modality_id: ModalityId,
}

/// The throughput-feasible actions of one node, in canonical order
/// (receiver id ascending, then modality id ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    owner: NodeId,
    actions: Vec<Action>,
}

impl ActionSpace {
    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn index_of(&self, action: Action) -> Option<usize> {
        self.actions.binary_search(&action).ok()
    }
}

/// All legitimate nodes within `neighbor_radius` (3D Euclidean) of `node_id`,
/// ascending. Willie is not a node and never appears; neither does the node
/// itself.
pub fn neighbor_set(node_id: NodeId, scenario: &Scenario) -> Result<Vec<NodeId>, TopologyError> {
    let own = scenario
        .node(node_id)
        .map_err(|_| TopologyError::UnknownNode(node_id))?;
    let mut out = Vec::new();
    for other in scenario.sorted_node_ids() {
        if other == node_id {
            continue;
        }
        let pos = scenario.node(other).expect("listed id").position;
        if own.position.distance(&pos) <= scenario.neighbor_radius {
            out.push(other);
        }
    }
    Ok(out)
}

/// The states a node's Q-table ranges over: every other legitimate node.
pub fn state_space(node_id: NodeId, scenario: &Scenario) -> Result<Vec<NodeId>, TopologyError> {
    if scenario.node(node_id).is_err() {
        return Err(TopologyError::UnknownNode(node_id));
    }
    Ok(scenario
        .sorted_node_ids()
        .into_iter()
        .filter(|&id| id != node_id)
        .collect())
}

/// Feasible actions of `node_id`: the (neighbor, modality) pairs whose hop
/// throughput reaches the scenario's target. Empty spaces are legal.
pub fn action_space(
    node_id: NodeId,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<ActionSpace, TopologyError> {
    let mut actions = Vec::new();
    for receiver_id in neighbor_set(node_id, scenario)? {
        for modality_id in scenario.sorted_modality_ids() {
            let hop = Hop {
                tx_id: node_id,
                rx_id: receiver_id,
                modality_id,
            };
            if hop_throughput(&hop, gains, scenario)? >= scenario.target_throughput {
                actions.push(Action {
                    receiver_id,
                    modality_id,
                });
            }
        }
    }
    Ok(ActionSpace {
        owner: node_id,
        actions,
    })
}

/// One directed edge of the feasibility multigraph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityEdge {
    pub tx_id: NodeId,
    pub rx_id: NodeId,
    pub modality_id: ModalityId,
    /// Routing cost `ln(1 / hop_dep)`, nonnegative.
    pub weight: f64,
    pub dep: f64,
    pub throughput: f64,
}

/// Directed multigraph of all feasible hops: one edge per feasible action of
/// every node, weighted by the covertness cost.
#[derive(Debug, Clone)]
pub struct FeasibilityGraph {
    edges: Vec<FeasibilityEdge>,
    outgoing: BTreeMap<NodeId, (usize, usize)>,
}

impl FeasibilityGraph {
    pub fn build(gains: &GainTable, scenario: &Scenario) -> Result<Self, TopologyError> {
        let mut edges = Vec::new();
        let mut outgoing = BTreeMap::new();
        for tx_id in scenario.sorted_node_ids() {
            let start = edges.len();
            for action in action_space(tx_id, gains, scenario)?.actions() {
                let hop = Hop {
                    tx_id,
                    rx_id: action.receiver_id,
                    modality_id: action.modality_id,
                };
                let dep = hop_dep(&hop, gains, scenario)?;
                edges.push(FeasibilityEdge {
                    tx_id,
                    rx_id: action.receiver_id,
                    modality_id: action.modality_id,
                    weight: -dep.ln(),
                    dep,
                    throughput: hop_throughput(&hop, gains, scenario)?,
                });
            }
            outgoing.insert(tx_id, (start, edges.len()));
        }
        Ok(Self { edges, outgoing })
    }

    pub fn edges(&self) -> &[FeasibilityEdge] {
        &self.edges
    }

    pub fn outgoing(&self, tx_id: NodeId) -> &[FeasibilityEdge] {
        match self.outgoing.get(&tx_id) {
            Some(&(start, end)) => &self.edges[start..end],
            None => &[],
        }
    }

    /// Debug dump: `tx,rx,modality,weight,throughput_bps` rows.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("tx,rx,modality,weight,throughput_bps\n");
        for e in &self.edges {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                e.tx_id,
                e.rx_id,
                e.modality_id,
                crate::harness::format_float(e.weight),
                crate::harness::format_float(e.throughput),
            ));
        }
        out
    }
}
