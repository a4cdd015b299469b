//! Brute-force reference implementations for tests.
//!
//! Everything here is deliberately naive: single-edge moves, explicit
//! enumeration of worlds and simple paths. Compiled only for tests or with
//! the `oracle` feature.

use std::collections::HashMap;

use rand::Rng;

use crate::blockage::{EdgeState, Overrides, Realization};
use crate::error::Result;
use crate::network::{costs_tied, Edge, RoadNetwork};
use crate::rng::generator;
use crate::traveler::Policy;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Known {
    Unknown,
    Open,
    Blocked,
}

type Layer = (Vec<Known>, Vec<bool>);

/// Optimal expected travel time by expectimax over single-edge moves.
///
/// A layer is a (knowledge, visited set) pair. Within a layer, moving
/// between visited nodes learns nothing, so the values of the visited nodes
/// form a shortest-path problem whose exits are the moves onto unvisited
/// neighbours (which lead to strictly larger layers).
pub fn naive_expected_time(net: &RoadNetwork, probs: &[f64], s: usize, t: usize, failure_cost: f64) -> f64 {
    let mut solver = Naive {
        net,
        probs,
        t,
        failure_cost,
        memo: HashMap::new(),
    };
    let start: Layer = (vec![Known::Unknown; net.edge_count()], vec![false; net.node_count()]);
    solver.arrive(&start, s)
}

struct Naive<'a> {
    net: &'a RoadNetwork,
    probs: &'a [f64],
    t: usize,
    failure_cost: f64,
    memo: HashMap<Layer, Vec<f64>>,
}

impl Naive<'_> {
    /// Expected value of stepping onto `v` from `layer`.
    fn arrive(&mut self, layer: &Layer, v: usize) -> f64 {
        let unknown: Vec<usize> = self
            .net
            .incident(v)
            .iter()
            .copied()
            .filter(|&e| layer.0[e] == Known::Unknown)
            .collect();
        let mut total = 0.0;
        for mask in 0u32..(1 << unknown.len()) {
            let mut next = layer.clone();
            next.1[v] = true;
            let mut prob = 1.0;
            for (bit, &e) in unknown.iter().enumerate() {
                let blocked = mask >> bit & 1 == 1;
                prob *= if blocked { self.probs[e] } else { 1.0 - self.probs[e] };
                next.0[e] = if blocked { Known::Blocked } else { Known::Open };
            }
            if prob == 0.0 {
                continue;
            }
            total += prob * self.values(&next)[v];
        }
        total
    }

    fn values(&mut self, layer: &Layer) -> Vec<f64> {
        if let Some(v) = self.memo.get(layer) {
            return v.clone();
        }
        let net = self.net;
        let n = net.node_count();
        let possible: Vec<bool> = (0..n).map(|u| self.sink_possible(layer, u)).collect();
        let mut value = vec![f64::INFINITY; n];
        for u in (0..n).filter(|&u| layer.1[u]) {
            if !possible[u] {
                value[u] = self.failure_cost;
                continue;
            }
            if u == self.t {
                value[u] = 0.0;
                continue;
            }
            for &e in net.incident(u) {
                if layer.0[e] != Known::Open {
                    continue;
                }
                let Some(v) = net.traverse(e, u) else { continue };
                if !layer.1[v] {
                    let exit = net.cost(e) + self.arrive(layer, v);
                    value[u] = value[u].min(exit);
                }
            }
        }
        // Bellman-Ford style relaxation among visited, possible nodes
        loop {
            let mut changed = false;
            for u in (0..n).filter(|&u| layer.1[u] && possible[u] && u != self.t) {
                for &e in net.incident(u) {
                    if layer.0[e] != Known::Open {
                        continue;
                    }
                    let Some(v) = net.traverse(e, u) else { continue };
                    if layer.1[v] && possible[v] {
                        let via = net.cost(e) + value[v];
                        if via < value[u] {
                            value[u] = via;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.memo.insert(layer.clone(), value.clone());
        value
    }

    fn sink_possible(&self, layer: &Layer, from: usize) -> bool {
        let mut seen = vec![false; self.net.node_count()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(x) = stack.pop() {
            if x == self.t {
                return true;
            }
            for &e in self.net.incident(x) {
                // a road that blocks with certainty is known closed in advance
                if layer.0[e] == Known::Blocked || (layer.0[e] == Known::Unknown && self.probs[e] >= 1.0) {
                    continue;
                }
                if let Some(y) = self.net.traverse(e, x) {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        false
    }
}

/// Every world with positive probability, with its probability.
///
/// `overrides` pins edges by index regardless of their probability.
pub fn worlds(probs: &[f64], pinned: &[Option<EdgeState>]) -> Vec<(Realization, f64)> {
    let free: Vec<usize> = (0..probs.len())
        .filter(|&e| pinned[e].is_none() && probs[e] > 0.0 && probs[e] < 1.0)
        .collect();
    let mut out = Vec::with_capacity(1 << free.len());
    for mask in 0u64..(1 << free.len()) {
        let mut states: Vec<EdgeState> = (0..probs.len())
            .map(|e| match pinned[e] {
                Some(s) => s,
                None if probs[e] >= 1.0 => EdgeState::Blocked,
                None => EdgeState::Open,
            })
            .collect();
        let mut prob = 1.0;
        for (bit, &e) in free.iter().enumerate() {
            let blocked = mask >> bit & 1 == 1;
            prob *= if blocked { probs[e] } else { 1.0 - probs[e] };
            if blocked {
                states[e] = EdgeState::Blocked;
            }
        }
        out.push((Realization::new(states), prob));
    }
    out
}

fn pins(net: &RoadNetwork, overrides: &Overrides) -> Vec<Option<EdgeState>> {
    let mut pinned = vec![None; net.edge_count()];
    for (id, &state) in overrides {
        pinned[net.edge_index(id).expect("override names an edge")] = Some(state);
    }
    pinned
}

/// Expected cost of the per-world shortest path (failure cost when the
/// sink is cut off): the clairvoyant lower bound.
pub fn clairvoyant_bound(net: &RoadNetwork, probs: &[f64], s: usize, t: usize, failure_cost: f64) -> f64 {
    worlds(probs, &vec![None; probs.len()])
        .into_iter()
        .map(|(world, prob)| {
            let d = net.distances(s, &|e| world.is_open(e), false)[t];
            prob * if d.is_finite() { d } else { failure_cost }
        })
        .sum()
}

/// Probability that no open path joins `s` to `t`.
pub fn unreachable_probability(net: &RoadNetwork, probs: &[f64], s: usize, t: usize) -> f64 {
    worlds(probs, &vec![None; probs.len()])
        .into_iter()
        .filter(|(world, _)| !net.distances(s, &|e| world.is_open(e), false)[t].is_finite())
        .map(|(_, prob)| prob)
        .sum()
}

/// Expected time and failure probability of `policy`, walking it through
/// every world.
pub fn policy_value_by_enumeration(
    net: &RoadNetwork,
    probs: &[f64],
    policy: &Policy<'_>,
    s: usize,
    overrides: &Overrides,
) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut failure = 0.0;
    for (world, prob) in worlds(probs, &pins(net, overrides)) {
        let trip = policy.walk(s, &world, |_| {})?;
        value += prob * trip.travel_time;
        if trip.failed {
            failure += prob;
        }
    }
    Ok((value, failure))
}

/// Edge betweenness by listing every simple path between every pair.
pub fn geodesic_by_enumeration(net: &RoadNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut scores = vec![0.0; net.edge_count()];
    for s in 0..n {
        for t in 0..n {
            if s == t || (!net.is_directed() && t < s) {
                continue;
            }
            let mut paths = Vec::new();
            let mut visited = vec![false; n];
            visited[s] = true;
            simple_paths(net, s, t, &mut visited, &mut Vec::new(), 0.0, &mut paths);
            let Some(best) = paths.iter().map(|p: &(f64, Vec<usize>)| p.0).reduce(f64::min) else {
                continue;
            };
            let shortest: Vec<_> = paths.iter().filter(|p| costs_tied(p.0, best)).collect();
            let share = 1.0 / shortest.len() as f64;
            for (_, edges) in shortest {
                for &e in edges {
                    scores[e] += share;
                }
            }
        }
    }
    scores
}

fn simple_paths(
    net: &RoadNetwork,
    at: usize,
    t: usize,
    visited: &mut Vec<bool>,
    edges: &mut Vec<usize>,
    cost: f64,
    out: &mut Vec<(f64, Vec<usize>)>,
) {
    if at == t {
        out.push((cost, edges.clone()));
        return;
    }
    for &e in net.incident(at) {
        let Some(v) = net.traverse(e, at) else { continue };
        if visited[v] {
            continue;
        }
        visited[v] = true;
        edges.push(e);
        simple_paths(net, v, t, visited, edges, cost + net.cost(e), out);
        edges.pop();
        visited[v] = false;
    }
}

/// Random connected instance with inline probabilities: 3 to 6 nodes
/// `n0..`, a random spanning tree plus a few chords, integer-ish costs in
/// [1, 10], at most eight uncertain edges and some certain ones. The source
/// is `n0` and the sink the last node.
pub fn random_instance(seed: u64) -> RoadNetwork {
    let mut rng = generator(seed);
    let n = rng.random_range(3..=6);
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut links: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    let chords = rng.random_range(0..=4);
    for _ in 0..chords {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            links.push((u, v));
        }
    }
    let mut uncertain = 0;
    let edges = links
        .into_iter()
        .enumerate()
        .map(|(i, (u, v))| {
            let roll: f64 = rng.random();
            let mut p = if roll < 0.15 {
                0.0
            } else if roll < 0.2 {
                1.0
            } else {
                rng.random_range(0.0..1.0)
            };
            if p > 0.0 && p < 1.0 {
                if uncertain == 8 {
                    p = 0.0;
                } else {
                    uncertain += 1;
                }
            }
            // half-unit costs make exact ties between routes common
            let cost = f64::from(rng.random_range(2..=20u32)) / 2.0;
            Edge {
                id: format!("e{i}"),
                u: nodes[u].clone(),
                v: nodes[v].clone(),
                cost,
                p: Some(p),
            }
        })
        .collect();
    RoadNetwork::new(false, nodes, edges).expect("generated instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn naive_matches_fixture_values() {
        let tri = fixtures::tri();
        let probs: Vec<f64> = tri.edges().iter().map(|e| e.p.unwrap()).collect();
        assert!((naive_expected_time(&tri, &probs, 0, 2, 100.0) - 10.6).abs() < 1e-12);
        for (q, want) in [(0.25, 3.0), (0.75, 4.0), (0.5, 4.0)] {
            let tb = fixtures::tb(q);
            let probs: Vec<f64> = tb.edges().iter().map(|e| e.p.unwrap()).collect();
            assert!((naive_expected_time(&tb, &probs, 0, 2, 100.0) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn path_graph_enumeration() {
        let net = RoadNetwork::new(
            false,
            vec!["A".into(), "B".into(), "C".into()],
            vec![
                Edge { id: "ab".into(), u: "A".into(), v: "B".into(), cost: 1.0, p: None },
                Edge { id: "bc".into(), u: "B".into(), v: "C".into(), cost: 1.0, p: None },
            ],
        )
        .unwrap();
        assert_eq!(geodesic_by_enumeration(&net), [2.0, 2.0]);
    }

    #[test]
    fn instances_respect_limits() {
        for seed in 0..200 {
            let net = random_instance(seed);
            assert!(net.node_count() <= 6);
            let uncertain = net
                .edges()
                .iter()
                .filter(|e| e.p.is_some_and(|p| p > 0.0 && p < 1.0))
                .count();
            assert!(uncertain <= 8);
            assert!(net.edges().iter().all(|e| (1.0..=10.0).contains(&e.cost)));
        }
    }
}
