//! Centralized comparators: the Dijkstra-optimal route (covertness upper
//! bound), an exhaustive brute-force verifier, and two greedy geometric
//! baselines.
//!
//! The route product `max prod DEP_h` becomes `min sum ln(1/DEP_h)` in log
//! space, so the optimum is a shortest path. The multigraph collapses to a
//! simple graph by keeping, per directed node pair, the feasible modality
//! with minimum weight (maximum DEP); weights are additive and per-edge
//! independent, so the reduction is lossless.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::channel::GainTable;
use crate::metrics::{route_dep, route_throughput, Hop, MetricsError, Route};
use crate::scenario::{ModalityId, NodeId, Scenario};
use crate::topology::{action_space, FeasibilityEdge, FeasibilityGraph, TopologyError};

/// Path enumeration explodes combinatorially; refuse beyond this.
const MAX_BRUTE_NODES: usize = 12;

/// Baselines ignore any neighbor within this distance of Willie (meters).
pub const WILLIE_STANDOFF_M: f64 = 50.0;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("destination unreachable under the current target throughput")]
    Unreachable,
    #[error("brute force enumeration supports at most {MAX_BRUTE_NODES} nodes, got {nodes}")]
    TooManyNodes { nodes: usize },
    #[error("greedy baseline stuck after {}", format_path(.partial))]
    Stuck { partial: Vec<NodeId> },
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

/// A finished route with its recomputed end-to-end figures.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteResult {
    pub route: Route,
    pub end_to_end_dep: f64,
    pub end_to_end_throughput: f64,
    pub method: &'static str,
}

fn finish(
    hops: Vec<Hop>,
    gains: &GainTable,
    scenario: &Scenario,
    method: &'static str,
) -> Result<RouteResult, OracleError> {
    let route = Route::new(hops, scenario.source_id, scenario.destination_id)?;
    let end_to_end_dep = route_dep(&route, gains, scenario)?;
    let end_to_end_throughput = route_throughput(&route, gains, scenario)?;
    Ok(RouteResult {
        route,
        end_to_end_dep,
        end_to_end_throughput,
        method,
    })
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: NodeId,
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Distances are finite nonnegative (weights are -ln of (0,1] values);
        // node id breaks ties for a deterministic pop order.
        self.dist
            .partial_cmp(&other.dist)
            .expect("distances are never NaN")
            .then(self.node.cmp(&other.node))
    }
}

/// Globally optimal covert route via Dijkstra on the reduced simple graph.
pub fn dijkstra_optimal(
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<RouteResult, OracleError> {
    let graph = FeasibilityGraph::build(gains, scenario)?;
    // Keep the minimum-weight modality per directed pair; edges arrive in
    // canonical order, so strict improvement leaves the lowest modality id
    // on exact ties.
    let mut reduced: BTreeMap<NodeId, Vec<FeasibilityEdge>> = BTreeMap::new();
    for &edge in graph.edges() {
        let out = reduced.entry(edge.tx_id).or_default();
        match out.iter_mut().find(|e| e.rx_id == edge.rx_id) {
            Some(existing) if edge.weight < existing.weight => *existing = edge,
            Some(_) => {}
            None => out.push(edge),
        }
    }

    let source = scenario.source_id;
    let destination = scenario.destination_id;
    let mut dist: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut prev: BTreeMap<NodeId, FeasibilityEdge> = BTreeMap::new();
    let mut settled: BTreeSet<NodeId> = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    dist.insert(source, 0.0);
    heap.push(Reverse(HeapEntry { dist: 0.0, node: source }));
    while let Some(Reverse(entry)) = heap.pop() {
        if !settled.insert(entry.node) {
            continue;
        }
        if entry.node == destination {
            break;
        }
        let Some(out) = reduced.get(&entry.node) else {
            continue;
        };
        for edge in out {
            if settled.contains(&edge.rx_id) {
                continue;
            }
            let candidate = entry.dist + edge.weight;
            let improves = match dist.get(&edge.rx_id) {
                Some(&d) => candidate < d,
                None => true,
            };
            if improves {
                dist.insert(edge.rx_id, candidate);
                prev.insert(edge.rx_id, *edge);
                heap.push(Reverse(HeapEntry { dist: candidate, node: edge.rx_id }));
            }
        }
    }

    if !settled.contains(&destination) {
        return Err(OracleError::Unreachable);
    }
    let mut hops = Vec::new();
    let mut node = destination;
    while node != source {
        let edge = prev[&node];
        hops.push(Hop {
            tx_id: edge.tx_id,
            rx_id: edge.rx_id,
            modality_id: edge.modality_id,
        });
        node = edge.tx_id;
    }
    hops.reverse();
    finish(hops, gains, scenario, "centralized")
}

/// Feasible modalities of one receiver, ascending, with their hop DEPs.
type ModalityDeps = Vec<(ModalityId, f64)>;
/// One transmitter's receivers, ascending, each with its modality choices.
type ReceiverOptions = Vec<(NodeId, ModalityDeps)>;

struct BruteSearch {
    options: BTreeMap<NodeId, ReceiverOptions>,
    destination: NodeId,
    best_dep: f64,
    best_hops: Option<Vec<Hop>>,
}

impl BruteSearch {
    fn dfs(
        &mut self,
        current: NodeId,
        visited: &mut BTreeSet<NodeId>,
        hops: &mut Vec<Hop>,
        dep: f64,
    ) {
        if current == self.destination {
            // Strict improvement: the first route found in canonical
            // enumeration order wins exact ties.
            if dep > self.best_dep {
                self.best_dep = dep;
                self.best_hops = Some(hops.clone());
            }
            return;
        }
        let Some(receivers) = self.options.get(&current) else {
            return;
        };
        // BTreeMap borrows prevent iterating in place while recursing.
        let receivers = receivers.clone();
        for (rx, modalities) in receivers {
            if !visited.insert(rx) {
                continue;
            }
            for (modality_id, hop_dep) in &modalities {
                hops.push(Hop { tx_id: current, rx_id: rx, modality_id: *modality_id });
                self.dfs(rx, visited, hops, dep * hop_dep);
                hops.pop();
            }
            visited.remove(&rx);
        }
    }
}

/// Exhaustive optimum: every simple path and every per-hop modality
/// assignment, guarded to small scenes. Independent of the Dijkstra
/// reduction, which it exists to check.
pub fn brute_force_optimal(
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<RouteResult, OracleError> {
    let n = scenario.nodes.len();
    if n > MAX_BRUTE_NODES {
        return Err(OracleError::TooManyNodes { nodes: n });
    }
    let graph = FeasibilityGraph::build(gains, scenario)?;
    let mut options: BTreeMap<NodeId, ReceiverOptions> = BTreeMap::new();
    for edge in graph.edges() {
        let out = options.entry(edge.tx_id).or_default();
        match out.iter_mut().find(|(rx, _)| *rx == edge.rx_id) {
            Some((_, mods)) => mods.push((edge.modality_id, edge.dep)),
            None => out.push((edge.rx_id, vec![(edge.modality_id, edge.dep)])),
        }
    }
    let mut search = BruteSearch {
        options,
        destination: scenario.destination_id,
        best_dep: 0.0,
        best_hops: None,
    };
    let mut visited = BTreeSet::from([scenario.source_id]);
    search.dfs(scenario.source_id, &mut visited, &mut Vec::new(), 1.0);
    match search.best_hops {
        Some(hops) => finish(hops, gains, scenario, "brute"),
        None => Err(OracleError::Unreachable),
    }
}

/// Receivers a greedy baseline may consider from `current`: feasible-action
/// receivers, unvisited, strictly more than 50 m from Willie.
fn baseline_candidates(
    current: NodeId,
    visited: &BTreeSet<NodeId>,
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<ReceiverOptions, OracleError> {
    let space = action_space(current, gains, scenario)?;
    let mut out: ReceiverOptions = Vec::new();
    for action in space.actions() {
        let rx = action.receiver_id;
        if visited.contains(&rx) {
            continue;
        }
        let pos = scenario.node(rx).expect("receiver exists").position;
        if pos.distance(&scenario.willie_position) <= WILLIE_STANDOFF_M {
            continue;
        }
        let hop = Hop { tx_id: current, rx_id: rx, modality_id: action.modality_id };
        let dep = crate::metrics::hop_dep(&hop, gains, scenario)?;
        match out.iter_mut().find(|(r, _)| *r == rx) {
            Some((_, mods)) => mods.push((action.modality_id, dep)),
            None => out.push((rx, vec![(action.modality_id, dep)])),
        }
    }
    Ok(out)
}

/// Among one receiver's feasible modalities, the highest-DEP one; ascending
/// scan with strict improvement leaves the lowest id on ties.
fn best_modality(modalities: &[(ModalityId, f64)]) -> ModalityId {
    let mut best = modalities[0];
    for &(m, dep) in &modalities[1..] {
        if dep > best.1 {
            best = (m, dep);
        }
    }
    best.0
}

fn greedy_baseline(
    gains: &GainTable,
    scenario: &Scenario,
    method: &'static str,
    score: impl Fn(&Scenario, NodeId, NodeId) -> Option<f64>,
) -> Result<RouteResult, OracleError> {
    let destination = scenario.destination_id;
    let mut current = scenario.source_id;
    let mut visited = BTreeSet::from([current]);
    let mut path = vec![current];
    let mut hops = Vec::new();
    while current != destination {
        let candidates = baseline_candidates(current, &visited, gains, scenario)?;
        // Lower score is better; ascending receiver order with strict
        // improvement leaves the lowest id on ties. A None score marks an
        // unrankable candidate.
        let mut chosen: Option<(f64, &(NodeId, ModalityDeps))> = None;
        for candidate in &candidates {
            let Some(s) = score(scenario, current, candidate.0) else {
                continue;
            };
            match chosen {
                Some((best, _)) if s >= best => {}
                _ => chosen = Some((s, candidate)),
            }
        }
        let Some((_, (rx, modalities))) = chosen else {
            return Err(OracleError::Stuck { partial: path });
        };
        hops.push(Hop {
            tx_id: current,
            rx_id: *rx,
            modality_id: best_modality(modalities),
        });
        visited.insert(*rx);
        path.push(*rx);
        current = *rx;
    }
    finish(hops, gains, scenario, method)
}

/// Greedy baseline: hop to the qualifying neighbor nearest the destination.
pub fn closest_to_destination(
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<RouteResult, OracleError> {
    greedy_baseline(gains, scenario, "closest", |scenario, _, rx| {
        let dest = scenario.node(scenario.destination_id).expect("validated").position;
        Some(scenario.node(rx).expect("candidate exists").position.distance(&dest))
    })
}

/// Greedy baseline: hop to the qualifying neighbor whose horizontal
/// direction deviates least from the direction to the destination.
/// Candidates co-located with the transmitter in the horizontal plane are
/// unrankable and skipped.
pub fn best_direction_to_destination(
    gains: &GainTable,
    scenario: &Scenario,
) -> Result<RouteResult, OracleError> {
    greedy_baseline(gains, scenario, "bestdir", |scenario, tx, rx| {
        let from = scenario.node(tx).expect("current exists").position;
        let to_dest = scenario.node(scenario.destination_id).expect("validated").position;
        let to_rx = scenario.node(rx).expect("candidate exists").position;
        let (dx_d, dy_d) = (to_dest.x - from.x, to_dest.y - from.y);
        let (dx_r, dy_r) = (to_rx.x - from.x, to_rx.y - from.y);
        let norm_d = (dx_d * dx_d + dy_d * dy_d).sqrt();
        let norm_r = (dx_r * dx_r + dy_r * dy_r).sqrt();
        if norm_d < 1e-12 || norm_r < 1e-12 {
            return None;
        }
        let cosine = ((dx_d * dx_r + dy_d * dy_r) / (norm_d * norm_r)).clamp(-1.0, 1.0);
        // Minimizing the angle = minimizing 1 - cos.
        Some(1.0 - cosine)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_gain_table;
    use crate::geometry::Point3;
    use crate::metrics::hop_dep;
    use crate::scenario::test_support::line_scenario;
    use crate::scenario::{Modality, NodeDef};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_node_direct_hop_with_best_modality() {
        let s = line_scenario(2);
        let result = dijkstra_optimal(&build_gain_table(&s).unwrap(), &s).unwrap();
        assert_eq!(result.route.hop_count(), 1);
        let gains = build_gain_table(&s).unwrap();
        let chosen = result.route.hops()[0];
        for m in s.sorted_modality_ids() {
            let alt = Hop { tx_id: NodeId(1), rx_id: NodeId(2), modality_id: m };
            assert!(
                hop_dep(&chosen, &gains, &s).unwrap() >= hop_dep(&alt, &gains, &s).unwrap()
            );
        }
    }

    #[test]
    fn unreachable_destination_errors() {
        let mut s = line_scenario(3);
        s.target_throughput = 1e18;
        let gains = build_gain_table(&s).unwrap();
        assert_eq!(dijkstra_optimal(&gains, &s), Err(OracleError::Unreachable));
        assert_eq!(brute_force_optimal(&gains, &s), Err(OracleError::Unreachable));
    }

    #[test]
    fn brute_force_guard() {
        let s = line_scenario(13);
        let gains = build_gain_table(&s).unwrap();
        assert_eq!(
            brute_force_optimal(&gains, &s),
            Err(OracleError::TooManyNodes { nodes: 13 })
        );
    }

    #[test]
    fn reduction_keeps_maximal_dep_modality() {
        let s = line_scenario(6);
        let gains = build_gain_table(&s).unwrap();
        let result = dijkstra_optimal(&gains, &s).unwrap();
        for hop in result.route.hops() {
            for m in s.sorted_modality_ids() {
                let alt = Hop { tx_id: hop.tx_id, rx_id: hop.rx_id, modality_id: m };
                let Ok(alt_dep) = hop_dep(&alt, &gains, &s) else { continue };
                let alt_feasible = crate::metrics::hop_throughput(&alt, &gains, &s).unwrap()
                    >= s.target_throughput;
                if alt_feasible {
                    assert!(hop_dep(hop, &gains, &s).unwrap() >= alt_dep);
                }
            }
        }
    }

    fn random_scenario(seed: u64) -> Scenario {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(5..=9u32);
        let nodes = (1..=n)
            .map(|id| NodeDef {
                id: NodeId(id),
                position: Point3::new(
                    rng.gen_range(0.0..120.0),
                    rng.gen_range(0.0..120.0),
                    1.5,
                ),
            })
            .collect();
        let modality = |id, exp, ref_db, obst| Modality {
            id: ModalityId(id),
            center_frequency: 4.0e8 * id as f64,
            bandwidth: 4.0e6,
            pathloss_exponent: exp,
            reference_loss_db: ref_db,
            obstruction_loss_db: obst,
            shadowing_sigma_db: 2.0,
        };
        Scenario {
            nodes,
            obstacles: vec![],
            modalities: vec![
                modality(1, 1.2, 6.0, 2.0),
                modality(2, 1.35, 8.0, 4.0),
                modality(3, 1.5, 10.0, 7.0),
            ],
            source_id: NodeId(1),
            destination_id: NodeId(n),
            willie_position: Point3::new(
                rng.gen_range(0.0..120.0),
                rng.gen_range(0.0..120.0),
                1.5,
            ),
            transmit_power: 0.01,
            noise_psd: 1e-11,
            block_length: 100,
            target_throughput: 5e5,
            neighbor_radius: 60.0,
            rng_seed: seed,
        }
    }

    #[test]
    fn dijkstra_matches_brute_force_on_random_scenes() {
        let mut feasible = 0;
        for seed in 0..25 {
            let s = random_scenario(seed);
            let gains = build_gain_table(&s).unwrap();
            match (dijkstra_optimal(&gains, &s), brute_force_optimal(&gains, &s)) {
                (Ok(d), Ok(b)) => {
                    feasible += 1;
                    assert!(
                        (d.end_to_end_dep - b.end_to_end_dep).abs() <= 1e-12,
                        "seed {seed}: {} vs {}",
                        d.end_to_end_dep,
                        b.end_to_end_dep
                    );
                    assert_eq!(d.route, b.route, "seed {seed}");
                }
                (Err(OracleError::Unreachable), Err(OracleError::Unreachable)) => {}
                (d, b) => panic!("seed {seed}: disagreement {d:?} vs {b:?}"),
            }
        }
        assert!(feasible >= 10, "only {feasible} feasible instances");
    }

    #[test]
    fn brute_route_weight_matches_log_dep() {
        for seed in [3, 7, 19] {
            let s = random_scenario(seed);
            let gains = build_gain_table(&s).unwrap();
            let Ok(result) = brute_force_optimal(&gains, &s) else { continue };
            let total: f64 = result
                .route
                .hops()
                .iter()
                .map(|h| -(hop_dep(h, &gains, &s).unwrap().ln()))
                .sum();
            assert!((total - (1.0 / result.end_to_end_dep).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn dijkstra_upper_bounds_baselines() {
        let mut compared = 0;
        for seed in 0..25 {
            let s = random_scenario(seed);
            let gains = build_gain_table(&s).unwrap();
            let Ok(optimal) = dijkstra_optimal(&gains, &s) else { continue };
            assert!(
                (optimal.end_to_end_dep - route_dep(&optimal.route, &gains, &s).unwrap()).abs()
                    < 1e-12
            );
            for result in [
                closest_to_destination(&gains, &s),
                best_direction_to_destination(&gains, &s),
            ]
            .into_iter()
            .flatten()
            {
                compared += 1;
                assert!(
                    optimal.end_to_end_dep >= result.end_to_end_dep - 1e-12,
                    "seed {seed}: {} beat the optimum",
                    result.method
                );
                assert!(result.end_to_end_throughput >= s.target_throughput);
            }
        }
        assert!(compared >= 10, "only {compared} baseline successes");
    }

    /// Square with unit-equal gains everywhere: two tied 2-hop routes.
    fn tied_square() -> (Scenario, GainTable) {
        let mut s = line_scenario(4);
        s.modalities.truncate(1);
        let m = s.modalities[0].id;
        s.nodes[0].position = Point3::new(0.0, 0.0, 1.5);
        s.nodes[1].position = Point3::new(60.0, 0.0, 1.5);
        s.nodes[2].position = Point3::new(0.0, 60.0, 1.5);
        s.nodes[3].position = Point3::new(60.0, 60.0, 1.5);
        s.neighbor_radius = 70.0;
        s.destination_id = NodeId(4);
        let mut links = BTreeMap::new();
        for (a, b) in [(1u32, 2u32), (1, 3), (2, 4), (3, 4)] {
            links.insert((NodeId(a), NodeId(b), m), 1e-3);
            links.insert((NodeId(b), NodeId(a), m), 1e-3);
        }
        let willie = (1..=4).map(|i| ((NodeId(i), m), 1e-6)).collect();
        (s.clone(), GainTable::from_parts(links, willie).unwrap())
    }

    #[test]
    fn exact_ties_break_canonically() {
        let (s, gains) = tied_square();
        let d = dijkstra_optimal(&gains, &s).unwrap();
        let b = brute_force_optimal(&gains, &s).unwrap();
        // Both 2-hop routes have identical DEP; canonical order prefers
        // the route through node 2.
        assert_eq!(d.route.to_compact_string(), "1-2:1|2-4:1");
        assert_eq!(b.route.to_compact_string(), "1-2:1|2-4:1");
        assert!((d.end_to_end_dep - b.end_to_end_dep).abs() == 0.0);
    }

    #[test]
    fn baselines_follow_the_only_chain() {
        let s = line_scenario(5);
        let gains = build_gain_table(&s).unwrap();
        for result in [
            closest_to_destination(&gains, &s).unwrap(),
            best_direction_to_destination(&gains, &s).unwrap(),
        ] {
            let nodes: Vec<u32> = result.route.hops().iter().map(|h| h.rx_id.0).collect();
            assert_eq!(nodes, vec![2, 3, 4, 5], "{}", result.method);
            // Modality per hop maximizes that hop's DEP.
            for hop in result.route.hops() {
                for m in s.sorted_modality_ids() {
                    let alt = Hop { tx_id: hop.tx_id, rx_id: hop.rx_id, modality_id: m };
                    if crate::metrics::hop_throughput(&alt, &gains, &s).unwrap()
                        >= s.target_throughput
                    {
                        assert!(
                            hop_dep(hop, &gains, &s).unwrap()
                                >= hop_dep(&alt, &gains, &s).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn willie_standoff_strands_baselines_but_not_dijkstra() {
        let mut s = line_scenario(5);
        // Willie parks next to the middle of the chain: nodes 3, 4, 5 all
        // fall inside the 50 m standoff of some step.
        s.willie_position = Point3::new(120.0, 10.0, 1.5);
        let gains = build_gain_table(&s).unwrap();
        assert!(dijkstra_optimal(&gains, &s).is_ok());
        match closest_to_destination(&gains, &s) {
            Err(OracleError::Stuck { partial }) => {
                assert_eq!(partial, vec![NodeId(1), NodeId(2)]);
            }
            other => panic!("expected stuck baseline, got {other:?}"),
        }
        assert!(matches!(
            best_direction_to_destination(&gains, &s),
            Err(OracleError::Stuck { .. })
        ));
    }

    /// Node 2 sits exactly on the source->destination ray; node 3 is closer
    /// to the destination but off-axis. The two baselines disagree.
    fn ray_scenario() -> Scenario {
        let mut s = line_scenario(4);
        s.modalities.truncate(1);
        s.nodes[0].position = Point3::new(0.0, 0.0, 1.5);
        s.nodes[1].position = Point3::new(50.0, 0.0, 1.5);
        s.nodes[2].position = Point3::new(60.0, 25.0, 1.5);
        s.nodes[3].position = Point3::new(100.0, 0.0, 1.5);
        s.neighbor_radius = 70.0;
        s.destination_id = NodeId(4);
        s.willie_position = Point3::new(500.0, 500.0, 1.5);
        s
    }

    #[test]
    fn angle_zero_neighbor_wins_bestdir_only() {
        let s = ray_scenario();
        let gains = build_gain_table(&s).unwrap();
        let direct = best_direction_to_destination(&gains, &s).unwrap();
        assert_eq!(direct.route.hops()[0].rx_id, NodeId(2));
        let near = closest_to_destination(&gains, &s).unwrap();
        assert_eq!(near.route.hops()[0].rx_id, NodeId(3));
    }

    #[test]
    fn equal_angles_pick_lower_id() {
        let mut s = ray_scenario();
        // Nodes 2 and 3 mirrored about the ray: identical angles.
        s.nodes[1].position = Point3::new(50.0, 10.0, 1.5);
        s.nodes[2].position = Point3::new(50.0, -10.0, 1.5);
        let gains = build_gain_table(&s).unwrap();
        let result = best_direction_to_destination(&gains, &s).unwrap();
        assert_eq!(result.route.hops()[0].rx_id, NodeId(2));
    }

    #[test]
    fn destination_as_qualifying_neighbor_is_direct_hop() {
        let s = line_scenario(2);
        let gains = build_gain_table(&s).unwrap();
        let result = closest_to_destination(&gains, &s).unwrap();
        assert_eq!(result.route.hop_count(), 1);
        assert_eq!(result.route.hops()[0].rx_id, NodeId(2));
    }
}
