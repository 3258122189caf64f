//! Decentralized Q-learning over (next hop, modality) actions.
//!
//! Each node owns a Q-table estimating the cost-to-go `ln(1/DEP)` toward each
//! destination. An episode walks a packet from source to destination with
//! epsilon-greedy selection; after every hop the transmitter receives the
//! immediate cost of the hop and the receiver's own best cost-to-go, and
//! applies
//!
//! ```text
//! Q(s,a) <- (1 - alpha) Q(s,a) + alpha (c + gamma * c_hat)
//! ```
//!
//! Within an episode, already-visited nodes are excluded from candidate
//! actions (loop prevention), `c_hat = 0` when the receiver is the
//! destination, and a receiver with no unvisited candidates feeds back
//! `dead_end_penalty` and ends the episode. The final route is the greedy
//! argmin-Q descent from the source.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::GainTable;
use crate::metrics::{hop_dep, route_dep, Hop, MetricsError, Route};
use crate::scenario::{NodeId, Scenario};
use crate::topology::{action_space, state_space, Action, ActionSpace, TopologyError};

/// Q-values within this distance of the minimum count as tied; ties go to
/// the canonically first action.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QLearnError {
    #[error("invalid learning configuration: {0}")]
    InvalidConfig(String),
    #[error("node {node} has no feasible action (infeasible under the current target throughput)")]
    Infeasible { node: NodeId },
    #[error("greedy extraction dead-ended after {}", format_path(.partial))]
    ExtractionFailure { partial: Vec<NodeId> },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

fn format_path(path: &[NodeId]) -> String {
    path.iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearningConfig {
    pub episodes: u32,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub max_hops: usize,
    pub dead_end_penalty: f64,
}

impl LearningConfig {
    /// Reference hyperparameters: 300 episodes, alpha 0.3, gamma 0.9,
    /// epsilon 0.1, hop cap |nodes|, penalty 50 (about -ln(1e-22), dwarfing
    /// any realistic route cost).
    pub fn defaults(scenario: &Scenario) -> Self {
        Self {
            episodes: 300,
            learning_rate: 0.3,
            discount: 0.9,
            epsilon: 0.1,
            max_hops: scenario.nodes.len(),
            dead_end_penalty: 50.0,
        }
    }

    pub fn validate(&self) -> Result<(), QLearnError> {
        let check = |name: &str, v: f64| {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                Err(QLearnError::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {v}"
                )))
            } else {
                Ok(())
            }
        };
        check("learning_rate", self.learning_rate)?;
        check("discount", self.discount)?;
        check("epsilon", self.epsilon)?;
        if self.max_hops < 1 {
            return Err(QLearnError::InvalidConfig(
                "max_hops must be at least 1".into(),
            ));
        }
        if !(self.dead_end_penalty.is_finite() && self.dead_end_penalty >= 0.0) {
            return Err(QLearnError::InvalidConfig(format!(
                "dead_end_penalty must be finite and nonnegative, got {}",
                self.dead_end_penalty
            )));
        }
        Ok(())
    }
}

/// The two cost components returned to a transmitter after a hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    /// `c`: the hop's own cost, `ln(1/hop_dep)`.
    pub immediate_cost: f64,
    /// `c_hat`: the receiver's minimum Q over its unvisited candidates, 0 at
    /// the destination, or the dead-end penalty.
    pub future_cost: f64,
}

/// One node's Q-table: states are all other nodes, actions its feasible
/// action space, eagerly zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    owner: NodeId,
    actions: Vec<Action>,
    rows: BTreeMap<NodeId, Vec<f64>>,
}

impl QTable {
    fn zeroed(owner: NodeId, space: &ActionSpace, states: &[NodeId]) -> Self {
        let actions = space.actions().to_vec();
        let rows = states
            .iter()
            .map(|&s| (s, vec![0.0; actions.len()]))
            .collect();
        Self { owner, actions, rows }
    }

    pub fn owner(&self) -> NodeId {
        self.owner
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn row(&self, state: NodeId) -> Option<&[f64]> {
        self.rows.get(&state).map(|r| r.as_slice())
    }

    pub fn value(&self, state: NodeId, action: Action) -> Option<f64> {
        let idx = self.actions.binary_search(&action).ok()?;
        Some(self.rows.get(&state)?[idx])
    }

    /// Minimum Q over actions whose receiver is not excluded; None when no
    /// candidate remains.
    fn min_q_excluding(&self, state: NodeId, excluded: &BTreeSet<NodeId>) -> Option<f64> {
        let row = self.rows.get(&state)?;
        self.actions
            .iter()
            .zip(row)
            .filter(|(a, _)| !excluded.contains(&a.receiver_id))
            .map(|(_, &q)| q)
            .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |m| m.min(q))))
    }
}

/// Precomputed per-node action spaces and action costs for one scenario and
/// channel realization.
#[derive(Debug, Clone)]
pub struct RoutingProblem {
    pub source: NodeId,
    pub destination: NodeId,
    spaces: BTreeMap<NodeId, ActionSpace>,
    costs: BTreeMap<NodeId, Vec<f64>>,
    states: BTreeMap<NodeId, Vec<NodeId>>,
}

impl RoutingProblem {
    pub fn build(scenario: &Scenario, gains: &GainTable) -> Result<Self, QLearnError> {
        let mut spaces = BTreeMap::new();
        let mut costs = BTreeMap::new();
        let mut states = BTreeMap::new();
        for id in scenario.sorted_node_ids() {
            let space = action_space(id, gains, scenario)?;
            let cost = space
                .actions()
                .iter()
                .map(|a| {
                    let hop = Hop {
                        tx_id: id,
                        rx_id: a.receiver_id,
                        modality_id: a.modality_id,
                    };
                    action_cost(&hop, gains, scenario)
                })
                .collect::<Result<Vec<_>, _>>()?;
            spaces.insert(id, space);
            costs.insert(id, cost);
            states.insert(id, state_space(id, scenario)?);
        }
        Ok(Self {
            source: scenario.source_id,
            destination: scenario.destination_id,
            spaces,
            costs,
            states,
        })
    }

    pub fn space(&self, id: NodeId) -> &ActionSpace {
        &self.spaces[&id]
    }

    pub fn cost(&self, id: NodeId, action_index: usize) -> f64 {
        self.costs[&id][action_index]
    }

    /// Fresh all-zero tables for every node.
    pub fn zeroed_tables(&self) -> BTreeMap<NodeId, QTable> {
        self.spaces
            .iter()
            .map(|(&id, space)| (id, QTable::zeroed(id, space, &self.states[&id])))
            .collect()
    }
}

/// Immediate cost of a hop: `ln(1/hop_dep)`, nonnegative, 0 iff DEP = 1.
pub fn action_cost(
    hop: &Hop,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<f64, MetricsError> {
    Ok(-hop_dep(hop, gains, scenario)?.ln())
}

/// Epsilon-greedy selection over the table's actions, excluding visited
/// receivers. Returns the index into the owner's action list, or None when
/// no candidate remains (dead-end signal).
///
/// RNG consumption is fixed for replay: one uniform draw decides
/// explore/exploit (strictly `r < epsilon`, so epsilon = 0 never explores and
/// epsilon = 1 always does), then exploration draws one uniform index.
pub fn select_action(
    table: &QTable,
    state: NodeId,
    excluded: &BTreeSet<NodeId>,
    epsilon: f64,
    rng: &mut impl Rng,
) -> Option<usize> {
    let row = table.row(state)?;
    let available: Vec<usize> = (0..table.actions.len())
        .filter(|&i| !excluded.contains(&table.actions[i].receiver_id))
        .collect();
    if available.is_empty() {
        return None;
    }
    let r: f64 = rng.gen();
    if r < epsilon {
        return Some(available[rng.gen_range(0..available.len())]);
    }
    let min = available
        .iter()
        .map(|&i| row[i])
        .fold(f64::INFINITY, f64::min);
    available.into_iter().find(|&i| row[i] <= min + TIE_TOLERANCE)
}

/// Pure form of the update: the convex combination of the old value and the
/// discounted target.
pub fn update_rule(q_old: f64, feedback: Feedback, alpha: f64, discount: f64) -> f64 {
    (1.0 - alpha) * q_old + alpha * (feedback.immediate_cost + discount * feedback.future_cost)
}

/// Apply the update in place; returns the new value.
pub fn update_q(
    table: &mut QTable,
    state: NodeId,
    action_index: usize,
    feedback: Feedback,
    alpha: f64,
    discount: f64,
) -> f64 {
    let row = table.rows.get_mut(&state).expect("state in table");
    let updated = update_rule(row[action_index], feedback, alpha, discount);
    row[action_index] = updated;
    updated
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpisodeTerminal {
    Destination,
    DeadEnd,
    HopCap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeStep {
    pub node: NodeId,
    pub action: Action,
    pub feedback: Feedback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeTrace {
    pub steps: Vec<EpisodeStep>,
    pub terminal: EpisodeTerminal,
}

/// One packet walk with in-place Q-updates. An empty source candidate set
/// yields a zero-step dead-end trace rather than an error.
pub fn run_episode(
    problem: &RoutingProblem,
    tables: &mut BTreeMap<NodeId, QTable>,
    config: &LearningConfig,
    rng: &mut impl Rng,
) -> EpisodeTrace {
    let destination = problem.destination;
    let mut visited = BTreeSet::from([problem.source]);
    let mut current = problem.source;
    let mut steps = Vec::new();
    let terminal = loop {
        if steps.len() >= config.max_hops {
            break EpisodeTerminal::HopCap;
        }
        let Some(index) =
            select_action(&tables[&current], destination, &visited, config.epsilon, rng)
        else {
            break EpisodeTerminal::DeadEnd;
        };
        let action = tables[&current].actions[index];
        let receiver = action.receiver_id;
        visited.insert(receiver);
        let (future_cost, terminal_after) = if receiver == destination {
            (0.0, Some(EpisodeTerminal::Destination))
        } else {
            match tables[&receiver].min_q_excluding(destination, &visited) {
                Some(min_q) => (min_q, None),
                None => (config.dead_end_penalty, Some(EpisodeTerminal::DeadEnd)),
            }
        };
        let feedback = Feedback {
            immediate_cost: problem.cost(current, index),
            future_cost,
        };
        update_q(
            tables.get_mut(&current).expect("table exists"),
            destination,
            index,
            feedback,
            config.learning_rate,
            config.discount,
        );
        steps.push(EpisodeStep { node: current, action, feedback });
        match terminal_after {
            Some(t) => break t,
            None => current = receiver,
        }
    };
    EpisodeTrace { steps, terminal }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub tables: BTreeMap<NodeId, QTable>,
    /// Greedy-extracted route DEP after each episode; None when extraction
    /// dead-ended. Feeds convergence diagnostics.
    pub episode_route_deps: Vec<Option<f64>>,
}

/// Run the full episode loop from zero-initialized tables.
pub fn train(
    scenario: &Scenario,
    gains: &GainTable,
    config: &LearningConfig,
    seed: u64,
) -> Result<TrainOutcome, QLearnError> {
    config.validate()?;
    let problem = RoutingProblem::build(scenario, gains)?;
    if problem.space(problem.source).is_empty() {
        return Err(QLearnError::Infeasible {
            node: problem.source,
        });
    }
    let mut tables = problem.zeroed_tables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episode_route_deps = Vec::with_capacity(config.episodes as usize);
    for episode in 0..config.episodes {
        let trace = run_episode(&problem, &mut tables, config, &mut rng);
        let dep = extract_route(&tables, &problem)
            .ok()
            .and_then(|route| route_dep(&route, gains, scenario).ok());
        log::debug!(
            "episode {episode}: {} hops, terminal {:?}, greedy dep {dep:?}",
            trace.steps.len(),
            trace.terminal
        );
        episode_route_deps.push(dep);
    }
    Ok(TrainOutcome {
        tables,
        episode_route_deps,
    })
}

/// Greedy argmin-Q descent from the source, excluding visited nodes.
pub fn extract_route(
    tables: &BTreeMap<NodeId, QTable>,
    problem: &RoutingProblem,
) -> Result<Route, QLearnError> {
    let destination = problem.destination;
    let mut visited = BTreeSet::from([problem.source]);
    let mut path = vec![problem.source];
    let mut hops = Vec::new();
    let mut current = problem.source;
    while current != destination {
        let table = &tables[&current];
        let row = table.row(destination).expect("destination is a state");
        let mut chosen = None;
        let mut min = f64::INFINITY;
        for (i, action) in table.actions.iter().enumerate() {
            if !visited.contains(&action.receiver_id) {
                min = min.min(row[i]);
            }
        }
        for (i, action) in table.actions.iter().enumerate() {
            if !visited.contains(&action.receiver_id) && row[i] <= min + TIE_TOLERANCE {
                chosen = Some(*action);
                break;
            }
        }
        let Some(action) = chosen else {
            return Err(QLearnError::ExtractionFailure { partial: path });
        };
        hops.push(Hop {
            tx_id: current,
            rx_id: action.receiver_id,
            modality_id: action.modality_id,
        });
        visited.insert(action.receiver_id);
        path.push(action.receiver_id);
        current = action.receiver_id;
    }
    Ok(Route::new(hops, problem.source, destination).expect("greedy walk is a valid route"))
}

/// Snapshot of all tables as `owner,state,receiver,modality,q_value` rows.
pub fn export_q_snapshot(tables: &BTreeMap<NodeId, QTable>) -> String {
    let mut out = String::from("owner,state,receiver,modality,q_value\n");
    for (owner, table) in tables {
        for (state, row) in &table.rows {
            for (action, q) in table.actions.iter().zip(row) {
                out.push_str(&format!(
                    "{owner},{state},{},{},{}\n",
                    action.receiver_id,
                    action.modality_id,
                    crate::harness::format_float(*q),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_gain_table;
    use crate::geometry::Point3;
    use crate::scenario::test_support::line_scenario;
    use proptest::prelude::*;

    fn single_modality_line(n: u32) -> Scenario {
        let mut s = line_scenario(n);
        s.modalities.truncate(1);
        s
    }

    #[test]
    fn update_rule_examples() {
        let fb = |c, f| Feedback { immediate_cost: c, future_cost: f };
        assert_eq!(update_rule(5.0, fb(1.0, 3.0), 0.0, 0.9), 5.0);
        assert_eq!(update_rule(5.0, fb(1.0, 3.0), 1.0, 0.9), 1.0 + 0.9 * 3.0);
        let v = update_rule(2.0, fb(1.0, 3.0), 0.3, 0.9);
        assert!((v - 2.51).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn update_stays_between_old_value_and_target(
            q in 0.0..100.0f64,
            c in 0.0..10.0f64,
            future in 0.0..100.0f64,
            alpha in 0.0..=1.0f64,
            discount in 0.0..=1.0f64,
        ) {
            let fb = Feedback { immediate_cost: c, future_cost: future };
            let target = c + discount * future;
            let v = update_rule(q, fb, alpha, discount);
            let lo = q.min(target) - 1e-9;
            let hi = q.max(target) + 1e-9;
            prop_assert!(v >= lo && v <= hi);
        }
    }

    #[test]
    fn config_validation() {
        let s = line_scenario(3);
        let mut c = LearningConfig::defaults(&s);
        assert!(c.validate().is_ok());
        c.learning_rate = 1.2;
        assert!(matches!(c.validate(), Err(QLearnError::InvalidConfig(_))));
        c = LearningConfig::defaults(&s);
        c.epsilon = -0.1;
        assert!(c.validate().is_err());
        c = LearningConfig::defaults(&s);
        c.discount = f64::NAN;
        assert!(c.validate().is_err());
        c = LearningConfig::defaults(&s);
        c.max_hops = 0;
        assert!(c.validate().is_err());
        c = LearningConfig::defaults(&s);
        c.dead_end_penalty = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn greedy_selection_is_deterministic() {
        let s = line_scenario(4);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let mut tables = problem.zeroed_tables();
        // Give node 2 a unique minimum on its second action.
        let t = tables.get_mut(&NodeId(2)).unwrap();
        let row = t.rows.get_mut(&NodeId(4)).unwrap();
        for (i, v) in row.iter_mut().enumerate() {
            *v = if i == 1 { 0.5 } else { 2.0 };
        }
        let excluded = BTreeSet::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let idx = select_action(&tables[&NodeId(2)], NodeId(4), &excluded, 0.0, &mut rng);
            assert_eq!(idx, Some(1));
        }
    }

    #[test]
    fn tied_minima_pick_canonical_first() {
        let s = line_scenario(4);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let tables = problem.zeroed_tables();
        // All-zero row: every action tied, canonical first wins.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let idx = select_action(
            &tables[&NodeId(2)],
            NodeId(4),
            &BTreeSet::new(),
            0.0,
            &mut rng,
        );
        assert_eq!(idx, Some(0));
    }

    #[test]
    fn full_exploration_is_uniform() {
        let s = line_scenario(4);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let tables = problem.zeroed_tables();
        let table = &tables[&NodeId(2)];
        let k = table.actions().len();
        assert!(k >= 2);
        let draws = 100_000usize;
        let mut counts = vec![0usize; k];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..draws {
            let idx =
                select_action(table, NodeId(4), &BTreeSet::new(), 1.0, &mut rng).unwrap();
            counts[idx] += 1;
        }
        let p = 1.0 / k as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - draws as f64 * p).abs();
            assert!(dev <= 3.0 * sigma, "action {i}: count {c}, dev {dev}");
        }
    }

    proptest! {
        #[test]
        fn excluded_receivers_never_selected(seed in 0u64..500, epsilon in 0.0..=1.0f64) {
            let s = line_scenario(5);
            let gains = build_gain_table(&s).unwrap();
            let problem = RoutingProblem::build(&s, &gains).unwrap();
            let tables = problem.zeroed_tables();
            let excluded = BTreeSet::from([NodeId(2)]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let table = &tables[&NodeId(3)];
            let idx = select_action(table, NodeId(5), &excluded, epsilon, &mut rng).unwrap();
            prop_assert_ne!(table.actions()[idx].receiver_id, NodeId(2));
        }
    }

    #[test]
    fn exhausted_candidates_signal_dead_end() {
        let s = line_scenario(3);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let tables = problem.zeroed_tables();
        let excluded = BTreeSet::from([NodeId(1), NodeId(3)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(
            select_action(&tables[&NodeId(2)], NodeId(3), &excluded, 0.5, &mut rng),
            None
        );
    }

    #[test]
    fn two_node_episode_reaches_destination() {
        let s = single_modality_line(2);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let mut tables = problem.zeroed_tables();
        let config = LearningConfig { epsilon: 0.0, ..LearningConfig::defaults(&s) };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trace = run_episode(&problem, &mut tables, &config, &mut rng);
        assert_eq!(trace.terminal, EpisodeTerminal::Destination);
        assert_eq!(trace.steps.len(), 1);
        let step = trace.steps[0];
        assert_eq!(step.node, NodeId(1));
        assert_eq!(step.action.receiver_id, NodeId(2));
        assert_eq!(step.feedback.future_cost, 0.0);
        // Single update from zero: Q = alpha * c.
        let q = tables[&NodeId(1)].value(NodeId(2), step.action).unwrap();
        assert!((q - config.learning_rate * step.feedback.immediate_cost).abs() < 1e-15);
    }

    #[test]
    fn empty_source_space_is_zero_step_dead_end() {
        let mut s = single_modality_line(3);
        s.target_throughput = 1e18;
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let mut tables = problem.zeroed_tables();
        let config = LearningConfig::defaults(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trace = run_episode(&problem, &mut tables, &config, &mut rng);
        assert_eq!(trace.terminal, EpisodeTerminal::DeadEnd);
        assert!(trace.steps.is_empty());
        // train surfaces the same situation as an error.
        assert!(matches!(
            train(&s, &gains, &config, 0),
            Err(QLearnError::Infeasible { node: NodeId(1) })
        ));
    }

    /// Nodes 1 and 2 connected, destination 3 out of everyone's radius:
    /// the hop 1 -> 2 strands the packet.
    fn stranded_scenario() -> Scenario {
        let mut s = single_modality_line(3);
        s.nodes[2].position = Point3::new(500.0, 0.0, 1.5);
        s
    }

    #[test]
    fn dead_end_applies_penalty_feedback() {
        let s = stranded_scenario();
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let mut tables = problem.zeroed_tables();
        let config = LearningConfig { epsilon: 0.0, ..LearningConfig::defaults(&s) };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trace = run_episode(&problem, &mut tables, &config, &mut rng);
        assert_eq!(trace.terminal, EpisodeTerminal::DeadEnd);
        assert_eq!(trace.steps.len(), 1);
        let step = trace.steps[0];
        assert_eq!(step.feedback.future_cost, config.dead_end_penalty);
        let q = tables[&NodeId(1)].value(NodeId(3), step.action).unwrap();
        let expected = config.learning_rate
            * (step.feedback.immediate_cost + config.discount * config.dead_end_penalty);
        assert!((q - expected).abs() < 1e-12);
    }

    #[test]
    fn hop_cap_truncates_episode() {
        let mut s = single_modality_line(5);
        // Destination far out of reach so the walk would otherwise continue.
        s.nodes[4].position = Point3::new(900.0, 0.0, 1.5);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let mut tables = problem.zeroed_tables();
        let config = LearningConfig {
            epsilon: 0.0,
            max_hops: 2,
            ..LearningConfig::defaults(&s)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let trace = run_episode(&problem, &mut tables, &config, &mut rng);
        assert_eq!(trace.terminal, EpisodeTerminal::HopCap);
        assert_eq!(trace.steps.len(), 2);
    }

    #[test]
    fn episode_trace_chains_and_replays() {
        let s = line_scenario(6);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let config = LearningConfig::defaults(&s);
        let run = |seed: u64| {
            let mut tables = problem.zeroed_tables();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_episode(&problem, &mut tables, &config, &mut rng)
        };
        let a = run(42);
        let b = run(42);
        assert_eq!(a, b);
        for pair in a.steps.windows(2) {
            assert_eq!(pair[0].action.receiver_id, pair[1].node);
        }
    }

    #[test]
    fn chain_training_converges_to_discounted_costs() {
        // Line 1 -> 2 -> 3 with one modality: Q_1 must approach
        // c(1,2) + gamma * c(2,3), the fixed point of the update.
        let s = single_modality_line(3);
        let gains = build_gain_table(&s).unwrap();
        let m = s.modalities[0].id;
        let c12 = action_cost(
            &Hop { tx_id: NodeId(1), rx_id: NodeId(2), modality_id: m },
            &gains,
            &s,
        )
        .unwrap();
        let c23 = action_cost(
            &Hop { tx_id: NodeId(2), rx_id: NodeId(3), modality_id: m },
            &gains,
            &s,
        )
        .unwrap();
        let config = LearningConfig {
            epsilon: 0.0,
            episodes: 300,
            ..LearningConfig::defaults(&s)
        };
        let outcome = train(&s, &gains, &config, 7).unwrap();
        let q1 = outcome.tables[&NodeId(1)]
            .value(NodeId(3), Action { receiver_id: NodeId(2), modality_id: m })
            .unwrap();
        assert!(
            (q1 - (c12 + config.discount * c23)).abs() < 1e-3,
            "Q_1 = {q1}, expected {}",
            c12 + config.discount * c23
        );
        let route = extract_route(&outcome.tables, &RoutingProblem::build(&s, &gains).unwrap())
            .unwrap();
        assert_eq!(route.to_compact_string(), format!("1-2:{m}|2-3:{m}"));
    }

    #[test]
    fn zero_episodes_leave_tables_zero() {
        let s = line_scenario(3);
        let gains = build_gain_table(&s).unwrap();
        let config = LearningConfig { episodes: 0, ..LearningConfig::defaults(&s) };
        let outcome = train(&s, &gains, &config, 3).unwrap();
        assert!(outcome.episode_route_deps.is_empty());
        for table in outcome.tables.values() {
            for row in table.rows.values() {
                assert!(row.iter().all(|&q| q == 0.0));
            }
        }
    }

    #[test]
    fn training_is_deterministic_in_seed() {
        let s = line_scenario(5);
        let gains = build_gain_table(&s).unwrap();
        let config = LearningConfig { episodes: 50, ..LearningConfig::defaults(&s) };
        let a = train(&s, &gains, &config, 11).unwrap();
        let b = train(&s, &gains, &config, 11).unwrap();
        assert_eq!(a, b);
        // Without exploration the seed is irrelevant.
        let greedy = LearningConfig { epsilon: 0.0, episodes: 50, ..config };
        let c = train(&s, &gains, &greedy, 1).unwrap();
        let d = train(&s, &gains, &greedy, 999).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn q_values_respect_contraction_bound() {
        let s = line_scenario(6);
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let c_max = s
            .sorted_node_ids()
            .into_iter()
            .flat_map(|id| {
                let n = problem.space(id).len();
                (0..n).map(move |i| (id, i))
            })
            .map(|(id, i)| problem.cost(id, i))
            .fold(0.0, f64::max);
        let config = LearningConfig { episodes: 200, ..LearningConfig::defaults(&s) };
        let bound = (c_max + config.dead_end_penalty) / (1.0 - config.discount);
        for seed in 0..5 {
            let outcome = train(&s, &gains, &config, seed).unwrap();
            for table in outcome.tables.values() {
                for row in table.rows.values() {
                    for &q in row {
                        assert!(q.is_finite() && q >= 0.0 && q <= bound, "q = {q}");
                    }
                }
            }
        }
    }

    #[test]
    fn costs_sum_to_route_cost() {
        let s = line_scenario(4);
        let gains = build_gain_table(&s).unwrap();
        let m = s.modalities[1].id;
        let hops = vec![
            Hop { tx_id: NodeId(1), rx_id: NodeId(2), modality_id: m },
            Hop { tx_id: NodeId(2), rx_id: NodeId(3), modality_id: m },
            Hop { tx_id: NodeId(3), rx_id: NodeId(4), modality_id: m },
        ];
        let total: f64 = hops
            .iter()
            .map(|h| action_cost(h, &gains, &s).unwrap())
            .sum();
        let route = Route::new(hops, NodeId(1), NodeId(4)).unwrap();
        let dep = route_dep(&route, &gains, &s).unwrap();
        assert!((total - (1.0 / dep).ln()).abs() < 1e-12);
    }

    /// Diamond where the canonically-first choice (node 2) is a trap: the
    /// penalty must teach node 1 to route through node 3.
    fn trap_scenario() -> Scenario {
        let mut s = single_modality_line(4);
        s.nodes[0].position = Point3::new(0.0, 0.0, 1.5);
        s.nodes[1].position = Point3::new(0.0, 45.0, 1.5);
        s.nodes[2].position = Point3::new(45.0, 0.0, 1.5);
        s.nodes[3].position = Point3::new(90.0, 0.0, 1.5);
        s.destination_id = NodeId(4);
        s
    }

    #[test]
    fn zero_table_extraction_walks_into_the_trap() {
        let s = trap_scenario();
        let gains = build_gain_table(&s).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let tables = problem.zeroed_tables();
        match extract_route(&tables, &problem) {
            Err(QLearnError::ExtractionFailure { partial }) => {
                assert_eq!(partial, vec![NodeId(1), NodeId(2)]);
            }
            other => panic!("expected extraction failure, got {other:?}"),
        }
    }

    #[test]
    fn penalty_teaches_detour_out_of_the_trap() {
        let s = trap_scenario();
        let gains = build_gain_table(&s).unwrap();
        let config = LearningConfig {
            epsilon: 0.0,
            episodes: 30,
            ..LearningConfig::defaults(&s)
        };
        let outcome = train(&s, &gains, &config, 0).unwrap();
        let problem = RoutingProblem::build(&s, &gains).unwrap();
        let route = extract_route(&outcome.tables, &problem).unwrap();
        let m = s.modalities[0].id;
        assert_eq!(route.to_compact_string(), format!("1-3:{m}|3-4:{m}"));
    }

    #[test]
    fn snapshot_export_shape() {
        let s = single_modality_line(3);
        let gains = build_gain_table(&s).unwrap();
        let config = LearningConfig { episodes: 10, ..LearningConfig::defaults(&s) };
        let outcome = train(&s, &gains, &config, 1).unwrap();
        let snapshot = export_q_snapshot(&outcome.tables);
        let mut lines = snapshot.lines();
        assert_eq!(lines.next(), Some("owner,state,receiver,modality,q_value"));
        let expected: usize = outcome
            .tables
            .values()
            .map(|t| t.rows.len() * t.actions.len())
            .sum();
        assert_eq!(lines.count(), expected);
    }
}
