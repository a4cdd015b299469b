//! Weighted edge betweenness with equal splitting over tied shortest paths.

use crate::network::{costs_tied, RoadNetwork};

use super::{CentralityRow, CentralityTable};

/// Raw edge betweenness: for each edge, the sum over node pairs of the
/// fraction of minimum-cost paths between them that use the edge.
///
/// Undirected networks count unordered pairs, directed ones ordered pairs.
/// Disconnected pairs contribute nothing. No normalization is applied.
pub fn geodesic_edge_betweenness(net: &RoadNetwork) -> CentralityTable {
    let scores = edge_scores(net);
    let mut order: Vec<usize> = (0..net.edge_count()).collect();
    order.sort_by(|&a, &b| net.edge(a).id.cmp(&net.edge(b).id));
    CentralityTable {
        source: None,
        sink: None,
        config: None,
        rows: order
            .into_iter()
            .map(|e| CentralityRow {
                edge_id: net.edge(e).id.clone(),
                cbc: None,
                geodesic: Some(scores[e]),
            })
            .collect(),
    }
}

/// Scores indexed by edge position.
pub(crate) fn edge_scores(net: &RoadNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut scores = vec![0.0; net.edge_count()];
    for s in 0..n {
        let dist = net.distances(s, &|_| true, false);
        let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_finite()).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));

        // (predecessor, edge) pairs on some shortest path into each node
        let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &u in &order {
            for &e in net.incident(u) {
                let Some(v) = net.traverse(e, u) else { continue };
                if v == s || !dist[v].is_finite() || dist[v] <= dist[u] {
                    continue;
                }
                if costs_tied(dist[u] + net.cost(e), dist[v]) {
                    preds[v].push((u, e));
                }
            }
        }
        let mut sigma = vec![0.0; n];
        sigma[s] = 1.0;
        for &v in &order {
            for &(u, _) in &preds[v] {
                sigma[v] += sigma[u];
            }
        }
        let mut delta = vec![0.0; n];
        for &v in order.iter().rev() {
            for &(u, e) in &preds[v] {
                let share = sigma[u] / sigma[v] * (1.0 + delta[v]);
                scores[e] += share;
                delta[u] += share;
            }
        }
    }
    if !net.is_directed() {
        for score in &mut scores {
            *score /= 2.0;
        }
    }
    scores
}
