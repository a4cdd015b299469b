//! Road-network data model, JSON ingestion and deterministic shortest paths.
//!
//! Nodes and edges are addressed by opaque string identifiers at the API
//! boundary and by dense indices (document order) internally. Every other
//! module works on indices; [`RoadNetwork::node_index`] and
//! [`RoadNetwork::edge_index`] translate.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding that two path costs are tied.
pub(crate) const TIE_TOL: f64 = 1e-12;

/// `a` and `b` agree to within [`TIE_TOL`] relative to their magnitude.
pub(crate) fn costs_tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub u: String,
    pub v: String,
    /// Traversal time in abstract units.
    pub cost: f64,
    /// Optional inline blockage probability, consumed by the blockage module.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    #[serde(default)]
    directed: bool,
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

/// An immutable, validated road map.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    directed: bool,
    nodes: Vec<String>,
    edges: Vec<Edge>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    ends: Vec<(usize, usize)>,
    incident: Vec<Vec<usize>>,
    /// Position of each node in the lexicographic order of node ids.
    lex_rank: Vec<usize>,
}

impl PartialEq for RoadNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed && self.nodes == other.nodes && self.edges == other.edges
    }
}

/// A concrete route and its total traversal time.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
    pub cost: f64,
}

/// Index-level route produced by [`RoadNetwork::lex_shortest_path`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct IndexPath {
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub cost: f64,
}

/// Parses and validates a graph document.
pub fn load_network(document: &str) -> Result<RoadNetwork> {
    let doc: GraphDocument =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    RoadNetwork::new(doc.directed, doc.nodes, doc.edges)
}

/// Minimum-cost `s`→`t` path over the edges accepted by `passable`.
///
/// Among equal-cost paths the lexicographically smallest node sequence wins.
/// Returns `Ok(None)` when `t` cannot be reached.
pub fn shortest_path(
    net: &RoadNetwork,
    s: &str,
    t: &str,
    passable: impl Fn(&Edge) -> bool,
) -> Result<Option<PathResult>> {
    let s = net.node_index(s)?;
    let t = net.node_index(t)?;
    let path = net.lex_shortest_path(s, t, &|e| passable(&net.edges[e]));
    Ok(path.map(|p| net.to_path_result(&p)))
}

impl RoadNetwork {
    pub fn new(directed: bool, nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, id) in nodes.iter().enumerate() {
            if node_index.insert(id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate node id {id:?}")));
            }
        }
        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut ends = Vec::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate edge id {:?}", e.id)));
            }
            let (Some(&u), Some(&v)) = (node_index.get(&e.u), node_index.get(&e.v)) else {
                let missing = if node_index.contains_key(&e.u) { &e.v } else { &e.u };
                return Err(Error::Validation(format!(
                    "unknown endpoint {missing:?} on edge {:?}",
                    e.id
                )));
            };
            if u == v {
                return Err(Error::Validation(format!("self-loop on edge {:?}", e.id)));
            }
            if !e.cost.is_finite() {
                return Err(Error::Validation(format!("non-finite cost on edge {:?}", e.id)));
            }
            if e.cost <= 0.0 {
                return Err(Error::Validation(format!("nonpositive cost on edge {:?}", e.id)));
            }
            if let Some(p) = e.p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Validation(format!(
                        "probability out of range on edge {:?}",
                        e.id
                    )));
                }
            }
            ends.push((u, v));
            incident[u].push(i);
            incident[v].push(i);
        }
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| nodes[a].cmp(&nodes[b]));
        let mut lex_rank = vec![0; nodes.len()];
        for (rank, &n) in order.iter().enumerate() {
            lex_rank[n] = rank;
        }
        Ok(Self {
            directed,
            nodes,
            edges,
            node_index,
            edge_index,
            ends,
            incident,
            lex_rank,
        })
    }

    /// Serializes back to the graph-document format.
    pub fn to_json(&self) -> String {
        let doc = GraphDocument {
            directed: self.directed,
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("graph document serializes")
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.node_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn edge_index(&self, id: &str) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    pub fn node_id(&self, node: usize) -> &str {
        &self.nodes[node]
    }

    pub fn edge(&self, edge: usize) -> &Edge {
        &self.edges[edge]
    }

    pub fn cost(&self, edge: usize) -> f64 {
        self.edges[edge].cost
    }

    /// Endpoint indices `(u, v)` of an edge.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.ends[edge]
    }

    /// Edges touching `node` at either end, regardless of direction.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    /// Sum of all edge costs.
    pub fn total_cost(&self) -> f64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    /// Default penalty for an unreachable sink: twice the total edge cost.
    pub fn default_failure_cost(&self) -> f64 {
        2.0 * self.total_cost()
    }

    /// Neighbor reached by leaving `from` along `edge`, if the edge may be
    /// traversed in that direction.
    pub fn traverse(&self, edge: usize, from: usize) -> Option<usize> {
        let (u, v) = self.ends[edge];
        if u == from {
            Some(v)
        } else if v == from && !self.directed {
            Some(u)
        } else {
            None
        }
    }

    /// Lexicographic rank of a node id, for tie-breaking.
    pub(crate) fn lex_rank(&self, node: usize) -> usize {
        self.lex_rank[node]
    }

    /// Single-source (or, with `reverse`, single-sink) Dijkstra distances.
    pub(crate) fn distances(
        &self,
        origin: usize,
        passable: &dyn Fn(usize) -> bool,
        reverse: bool,
    ) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[origin] = 0.0;
        heap.push(Frontier { cost: 0.0, node: origin });
        while let Some(Frontier { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &e in &self.incident[node] {
                if !passable(e) {
                    continue;
                }
                let next = if reverse {
                    self.traverse_reverse(e, node)
                } else {
                    self.traverse(e, node)
                };
                let Some(next) = next else { continue };
                let candidate = cost + self.edges[e].cost;
                if candidate < dist[next] {
                    dist[next] = candidate;
                    heap.push(Frontier { cost: candidate, node: next });
                }
            }
        }
        dist
    }

    /// Node `x` such that `x -> to` along `edge` is a legal traversal.
    fn traverse_reverse(&self, edge: usize, to: usize) -> Option<usize> {
        let (u, v) = self.ends[edge];
        if v == to {
            Some(u)
        } else if u == to && !self.directed {
            Some(v)
        } else {
            None
        }
    }

    /// Minimum-cost path with the lexicographically smallest node sequence.
    ///
    /// Works backwards from `t` to get exact cost-to-go, then walks forward
    /// from `s` always taking the tight edge whose head has the smallest id.
    pub(crate) fn lex_shortest_path(
        &self,
        s: usize,
        t: usize,
        passable: &dyn Fn(usize) -> bool,
    ) -> Option<IndexPath> {
        if s == t {
            return Some(IndexPath {
                nodes: vec![s],
                edges: Vec::new(),
                cost: 0.0,
            });
        }
        let to_sink = self.distances(t, passable, true);
        if !to_sink[s].is_finite() {
            return None;
        }
        let mut nodes = vec![s];
        let mut edges = Vec::new();
        let mut cost = 0.0;
        let mut at = s;
        while at != t {
            let mut best: Option<(usize, usize)> = None;
            for &e in &self.incident[at] {
                if !passable(e) {
                    continue;
                }
                let Some(next) = self.traverse(e, at) else { continue };
                let rest = to_sink[next];
                if !rest.is_finite() || rest >= to_sink[at] {
                    continue;
                }
                if !costs_tied(self.edges[e].cost + rest, to_sink[at]) {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((be, bn)) => {
                        let (ra, rb) = (self.lex_rank[next], self.lex_rank[bn]);
                        ra < rb || (ra == rb && self.edges[e].cost < self.edges[be].cost)
                    }
                };
                if better {
                    best = Some((e, next));
                }
            }
            let (e, next) = best.expect("a tight edge leaves every node with finite cost-to-go");
            cost += self.edges[e].cost;
            edges.push(e);
            nodes.push(next);
            at = next;
        }
        Some(IndexPath { nodes, edges, cost })
    }

    pub(crate) fn to_path_result(&self, path: &IndexPath) -> PathResult {
        PathResult {
            nodes: path.nodes.iter().map(|&n| self.nodes[n].clone()).collect(),
            edges: path.edges.iter().map(|&e| self.edges[e].id.clone()).collect(),
            cost: path.cost,
        }
    }

    /// Cheapest edge (first in document order on ties) joining `from` to `to`
    /// among those accepted by `passable`.
    pub(crate) fn cheapest_link(
        &self,
        from: usize,
        to: usize,
        passable: &dyn Fn(usize) -> bool,
    ) -> Option<usize> {
        self.incident[from]
            .iter()
            .copied()
            .filter(|&e| passable(e) && self.traverse(e, from) == Some(to))
            .min_by(|&a, &b| self.edges[a].cost.total_cmp(&self.edges[b].cost))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then node index
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TRI: &str = r#"{"directed": false, "nodes": ["S","M","T"], "edges": [
        {"id":"d","u":"S","v":"T","cost":10.0,"p":0.3},
        {"id":"a","u":"S","v":"M","cost":4.0,"p":0.0},
        {"id":"b","u":"M","v":"T","cost":8.0,"p":0.0}]}"#;

    fn validation_message(doc: &str) -> String {
        match load_network(doc) {
            Err(Error::Validation(msg)) => msg,
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn loads_triangle_in_document_order() {
        let net = load_network(TRI).unwrap();
        assert_eq!(net.nodes(), ["S", "M", "T"]);
        let ids: Vec<_> = net.edges().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["d", "a", "b"]);
        assert_eq!(net.edge(0).p, Some(0.3));
        assert!(!net.is_directed());
    }

    #[test]
    fn rejects_invalid_documents() {
        let unknown = r#"{"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"Z","cost":1.0}]}"#;
        assert!(validation_message(unknown).contains("unknown endpoint"));
        let zero = r#"{"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"T","cost":0.0}]}"#;
        assert!(validation_message(zero).contains("nonpositive cost"));
        let negative = r#"{"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"T","cost":-2}]}"#;
        assert!(validation_message(negative).contains("nonpositive cost"));
        let looped = r#"{"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"S","cost":1.0}]}"#;
        assert!(validation_message(looped).contains("self-loop"));
        let dup_edge = r#"{"nodes":["S","T"],"edges":[
            {"id":"x","u":"S","v":"T","cost":1.0},{"id":"x","u":"T","v":"S","cost":1.0}]}"#;
        assert!(validation_message(dup_edge).contains("duplicate edge id"));
        let dup_node = r#"{"nodes":["S","S"],"edges":[]}"#;
        assert!(validation_message(dup_node).contains("duplicate node id"));
        let bad_p = r#"{"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"T","cost":1.0,"p":1.5}]}"#;
        assert!(validation_message(bad_p).contains("probability"));
    }

    #[test]
    fn rejects_unknown_keys_and_garbage() {
        let extra = r#"{"nodes":["S","T"],"edges":[],"colour":"red"}"#;
        assert!(matches!(load_network(extra), Err(Error::Parse(_))));
        let extra_edge =
            r#"{"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"T","cost":1.0,"lanes":2}]}"#;
        assert!(matches!(load_network(extra_edge), Err(Error::Parse(_))));
        assert!(matches!(load_network("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn parallel_edges_are_allowed() {
        let doc = r#"{"nodes":["S","T"],"edges":[
            {"id":"x","u":"S","v":"T","cost":3.0},{"id":"y","u":"S","v":"T","cost":2.0}]}"#;
        let net = load_network(doc).unwrap();
        let path = shortest_path(&net, "S", "T", |_| true).unwrap().unwrap();
        assert_eq!(path.edges, ["y"]);
        assert_eq!(path.cost, 2.0);
    }

    #[test]
    fn triangle_shortest_paths() {
        let net = load_network(TRI).unwrap();
        let direct = shortest_path(&net, "S", "T", |_| true).unwrap().unwrap();
        assert_eq!(direct.nodes, ["S", "T"]);
        assert_eq!(direct.cost, 10.0);

        let detour = shortest_path(&net, "S", "T", |e| e.id != "d").unwrap().unwrap();
        assert_eq!(detour.nodes, ["S", "M", "T"]);
        assert_eq!(detour.cost, 12.0);

        let none = shortest_path(&net, "S", "T", |e| e.id == "a").unwrap();
        assert!(none.is_none());

        let stay = shortest_path(&net, "M", "M", |_| true).unwrap().unwrap();
        assert_eq!(stay.nodes, ["M"]);
        assert_eq!(stay.cost, 0.0);

        assert!(matches!(
            shortest_path(&net, "S", "Q", |_| true),
            Err(Error::UnknownNode(_))
        ));
    }

    #[test]
    fn ties_pick_lexicographically_smallest_sequence() {
        // two cost-2 routes S-B-T and S-A-T, plus a cost-2 route S-C-T
        let doc = r#"{"nodes":["S","C","B","A","T"],"edges":[
            {"id":"1","u":"S","v":"B","cost":1.0},{"id":"2","u":"B","v":"T","cost":1.0},
            {"id":"3","u":"S","v":"C","cost":1.0},{"id":"4","u":"C","v":"T","cost":1.0},
            {"id":"5","u":"S","v":"A","cost":1.5},{"id":"6","u":"A","v":"T","cost":0.5}]}"#;
        let net = load_network(doc).unwrap();
        let path = shortest_path(&net, "S", "T", |_| true).unwrap().unwrap();
        assert_eq!(path.nodes, ["S", "A", "T"]);
    }

    #[test]
    fn directed_edges_are_one_way() {
        let doc = r#"{"directed":true,"nodes":["S","T"],"edges":[{"id":"x","u":"S","v":"T","cost":1.0}]}"#;
        let net = load_network(doc).unwrap();
        assert!(shortest_path(&net, "S", "T", |_| true).unwrap().is_some());
        assert!(shortest_path(&net, "T", "S", |_| true).unwrap().is_none());
    }

    fn arb_network() -> impl Strategy<Value = RoadNetwork> {
        (2usize..8)
            .prop_flat_map(|n| {
                let edge = (0..n, 0..n, 1u32..20, proptest::option::of(0.0f64..=1.0));
                (Just(n), proptest::collection::vec(edge, 0..16), any::<bool>())
            })
            .prop_map(|(n, raw, directed)| {
                let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
                let edges = raw
                    .into_iter()
                    .filter(|(u, v, _, _)| u != v)
                    .enumerate()
                    .map(|(i, (u, v, c, p))| Edge {
                        id: format!("e{i}"),
                        u: nodes[u].clone(),
                        v: nodes[v].clone(),
                        cost: c as f64 / 4.0,
                        p,
                    })
                    .collect();
                RoadNetwork::new(directed, nodes, edges).unwrap()
            })
    }

    proptest! {
        #[test]
        fn json_round_trip(net in arb_network()) {
            let again = load_network(&net.to_json()).unwrap();
            prop_assert_eq!(&again, &net);
            prop_assert_eq!(again.to_json(), net.to_json());
        }

        #[test]
        fn path_cost_matches_edges_and_shrinks_with_more_edges(net in arb_network()) {
            let last = net.node_count() - 1;
            let mut previous = f64::INFINITY;
            for allowed in 0..=net.edge_count() {
                let found = net.lex_shortest_path(0, last, &|e| e < allowed);
                let cost = match found {
                    Some(path) => {
                        let recomputed: f64 = path.edges.iter().map(|&e| net.cost(e)).sum();
                        prop_assert!((recomputed - path.cost).abs() <= 1e-12);
                        for (w, &e) in path.nodes.windows(2).zip(&path.edges) {
                            prop_assert_eq!(net.traverse(e, w[0]), Some(w[1]));
                        }
                        path.cost
                    }
                    None => f64::INFINITY,
                };
                prop_assert!(cost <= previous + 1e-12);
                previous = cost;
            }
        }
    }
}
