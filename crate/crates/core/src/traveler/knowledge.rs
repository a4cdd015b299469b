use crate::blockage::{EdgeState, Realization};
use crate::error::{Error, Result};
use crate::network::RoadNetwork;

/// What the traveler knows about one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKnowledge {
    Unknown,
    Open,
    Blocked,
}

impl From<EdgeState> for EdgeKnowledge {
    fn from(state: EdgeState) -> Self {
        match state {
            EdgeState::Open => Self::Open,
            EdgeState::Blocked => Self::Blocked,
        }
    }
}

/// The traveler's position and partial view of the hidden world.
///
/// An edge's state is learned the first time the traveler stands on either
/// of its endpoints, so every edge incident to a visited node is decided.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KnowledgeState {
    current: usize,
    visited: Vec<bool>,
    edges: Vec<EdgeKnowledge>,
}

impl KnowledgeState {
    /// Traveler standing at `start` with that node's edges revealed.
    pub fn new(net: &RoadNetwork, start: usize, world: &Realization) -> Self {
        let mut k = Self::before_arrival(net, start);
        k.reveal_in_place(net, start, world);
        k
    }

    /// Traveler about to arrive at `at`: nothing visited, nothing known.
    pub(crate) fn before_arrival(net: &RoadNetwork, at: usize) -> Self {
        Self {
            current: at,
            visited: vec![false; net.node_count()],
            edges: vec![EdgeKnowledge::Unknown; net.edge_count()],
        }
    }

    /// [`KnowledgeState::new`] addressed by node id.
    pub fn start(net: &RoadNetwork, start: &str, world: &Realization) -> Result<Self> {
        Ok(Self::new(net, net.node_index(start)?, world))
    }

    /// Builds an arbitrary knowledge state, checking its invariants.
    pub fn from_parts(
        net: &RoadNetwork,
        current: &str,
        visited: &[&str],
        known: &[(&str, EdgeState)],
    ) -> Result<Self> {
        let current = net.node_index(current)?;
        let mut k = Self {
            current,
            visited: vec![false; net.node_count()],
            edges: vec![EdgeKnowledge::Unknown; net.edge_count()],
        };
        for id in visited {
            k.visited[net.node_index(id)?] = true;
        }
        for (id, state) in known {
            k.edges[net.edge_index(id)?] = (*state).into();
        }
        if !k.visited[current] {
            return Err(Error::Validation("current node must be visited".into()));
        }
        for node in (0..net.node_count()).filter(|&n| k.visited[n]) {
            if let Some(&e) = net
                .incident(node)
                .iter()
                .find(|&&e| k.edges[e] == EdgeKnowledge::Unknown)
            {
                return Err(Error::Validation(format!(
                    "edge {:?} touches visited node {:?} but is unknown",
                    net.edge(e).id,
                    net.node_id(node)
                )));
            }
        }
        Ok(k)
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn is_visited(&self, node: usize) -> bool {
        self.visited[node]
    }

    pub fn visited_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.visited
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(n, _)| n)
    }

    pub fn edge(&self, edge: usize) -> EdgeKnowledge {
        self.edges[edge]
    }

    pub fn edges(&self) -> &[EdgeKnowledge] {
        &self.edges
    }

    pub fn decided_count(&self) -> usize {
        self.edges
            .iter()
            .filter(|&&k| k != EdgeKnowledge::Unknown)
            .count()
    }

    pub(crate) fn reveal_in_place(&mut self, net: &RoadNetwork, node: usize, world: &Realization) {
        self.visited[node] = true;
        for &e in net.incident(node) {
            if self.edges[e] == EdgeKnowledge::Unknown {
                self.edges[e] = world.state(e).into();
            }
        }
    }

    /// Moves the traveler to `node` and reveals its edges.
    pub(crate) fn arrive(&mut self, net: &RoadNetwork, node: usize, world: &Realization) {
        self.current = node;
        self.reveal_in_place(net, node, world);
    }

    /// Moves the traveler to `node`, taking the given states for its
    /// still-unknown edges.
    pub(crate) fn arrive_with(&mut self, node: usize, revealed: &[(usize, EdgeKnowledge)]) {
        self.current = node;
        self.visited[node] = true;
        for &(e, state) in revealed {
            self.edges[e] = state;
        }
    }
}

/// Marks `node` visited and copies the world's state into each of its
/// unknown incident edges. The traveler's position is unchanged.
pub fn reveal(
    net: &RoadNetwork,
    k: &KnowledgeState,
    node: &str,
    world: &Realization,
) -> Result<KnowledgeState> {
    let node = net.node_index(node)?;
    let mut next = k.clone();
    next.reveal_in_place(net, node, world);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn reveal_follows_the_endpoint_rule() {
        let net = fixtures::tri();
        let world = Realization::new(vec![EdgeState::Blocked, EdgeState::Open, EdgeState::Open]);
        let k = KnowledgeState::start(&net, "S", &world).unwrap();
        let d = net.edge_index("d").unwrap();
        let a = net.edge_index("a").unwrap();
        let b = net.edge_index("b").unwrap();
        assert_eq!(k.edge(d), EdgeKnowledge::Blocked);
        assert_eq!(k.edge(a), EdgeKnowledge::Open);
        assert_eq!(k.edge(b), EdgeKnowledge::Unknown);

        let at_m = reveal(&net, &k, "M", &world).unwrap();
        assert_eq!(at_m.edge(b), EdgeKnowledge::Open);
        assert!(at_m.is_visited(net.node_index("M").unwrap()));
        assert_eq!(at_m.current(), k.current());

        let again = reveal(&net, &at_m, "M", &world).unwrap();
        assert_eq!(again, at_m);
    }

    #[test]
    fn reveal_never_overwrites_known_states() {
        let net = fixtures::tri();
        let closed = Realization::new(vec![EdgeState::Blocked; 3]);
        let open = Realization::all_open(3);
        let k = KnowledgeState::start(&net, "S", &closed).unwrap();
        let k = reveal(&net, &k, "T", &open).unwrap();
        assert_eq!(k.edge(net.edge_index("d").unwrap()), EdgeKnowledge::Blocked);
        assert_eq!(k.edge(net.edge_index("b").unwrap()), EdgeKnowledge::Open);
    }

    #[test]
    fn from_parts_checks_invariants() {
        let net = fixtures::tri();
        let ok = KnowledgeState::from_parts(
            &net,
            "S",
            &["S"],
            &[("d", EdgeState::Open), ("a", EdgeState::Open)],
        );
        assert!(ok.is_ok());
        let missing = KnowledgeState::from_parts(&net, "S", &["S"], &[("d", EdgeState::Open)]);
        assert!(matches!(missing, Err(Error::Validation(_))));
        let not_visited = KnowledgeState::from_parts(&net, "M", &["S"], &[
            ("d", EdgeState::Open),
            ("a", EdgeState::Open),
        ]);
        assert!(matches!(not_visited, Err(Error::Validation(_))));
    }
}
