//! Synthetic networks for benchmarking.

use ctp_core::{Edge, RoadNetwork};

/// A `rows` x `cols` grid with unit-ish costs. The first `uncertain` edges in
/// document order block with probability `p`; the rest never do.
pub fn grid(rows: usize, cols: usize, uncertain: usize, p: f64) -> RoadNetwork {
    let id = |r: usize, c: usize| format!("g{r:03}_{c:03}");
    let nodes = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| id(r, c))
        .collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let mut link = |to: String| {
                let i = edges.len();
                edges.push(Edge {
                    id: format!("e{i:04}"),
                    u: id(r, c),
                    v: to,
                    cost: 1.0 + (i % 3) as f64 * 0.5,
                    p: Some(if i < uncertain { p } else { 0.0 }),
                });
            };
            if c + 1 < cols {
                link(id(r, c + 1));
            }
            if r + 1 < rows {
                link(id(r + 1, c));
            }
        }
    }
    RoadNetwork::new(false, nodes, edges).expect("grid is valid")
}

/// Source and sink at opposite corners of [`grid`].
pub fn corners(rows: usize, cols: usize) -> (String, String) {
    (format!("g{:03}_{:03}", 0, 0), format!("g{:03}_{:03}", rows - 1, cols - 1))
}
