//! Small reference networks with hand-checkable answers.
//!
//! * `tri`: a triangle S-M-T. The direct road `d` (cost 10) blocks with
//!   probability 0.3; the detour S-M-T (4 + 8) is always open.
//! * `tb(q)`: S-A (1) and A-T (1, blocks with probability `q`) against a
//!   certain direct road S-T (4). Trying A risks a turn-back.

use crate::network::{Edge, RoadNetwork};

fn edge(id: &str, u: &str, v: &str, cost: f64, p: f64) -> Edge {
    Edge {
        id: id.into(),
        u: u.into(),
        v: v.into(),
        cost,
        p: Some(p),
    }
}

fn build(nodes: &[&str], edges: Vec<Edge>) -> RoadNetwork {
    RoadNetwork::new(false, nodes.iter().map(|n| n.to_string()).collect(), edges)
        .expect("fixture is valid")
}

pub fn tri() -> RoadNetwork {
    build(
        &["S", "M", "T"],
        vec![
            edge("d", "S", "T", 10.0, 0.3),
            edge("a", "S", "M", 4.0, 0.0),
            edge("b", "M", "T", 8.0, 0.0),
        ],
    )
}

pub fn tb(q: f64) -> RoadNetwork {
    build(
        &["S", "A", "T"],
        vec![
            edge("sa", "S", "A", 1.0, 0.0),
            edge("at", "A", "T", 1.0, q),
            edge("st", "S", "T", 4.0, 0.0),
        ],
    )
}
