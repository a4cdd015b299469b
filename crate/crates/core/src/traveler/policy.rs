use crate::blockage::{BlockageModel, Realization};
use crate::error::{Error, Result};
use crate::network::{PathResult, RoadNetwork};

use super::expectimax::{check_failure_cost, Action, Expectimax, DEFAULT_UNCERTAIN_CAP};
use super::knowledge::{EdgeKnowledge, KnowledgeState};

/// Which routing rule a [`Policy`] follows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyKind {
    /// Re-solve the expectimax recursion at every node.
    Optimal,
    /// Follow the shortest path that assumes unknown roads are open;
    /// replan when a road on it turns out blocked.
    ReplanGreedy,
    /// Follow this node sequence; on finding one of its roads blocked,
    /// behave like [`PolicyKind::ReplanGreedy`] from then on.
    FixedRoute(Vec<String>),
}

/// The next single-edge move of a traveler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Arrived,
    Abort,
    Traverse { edge: usize, to: usize },
}

/// Next target chosen by the optimal policy.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannedMove {
    Arrived,
    Abort,
    /// Drive along `path` (known-open roads) to `target`, the sink or a
    /// frontier node.
    Travel { target: String, path: PathResult },
}

enum Rule<'a> {
    Optimal(Expectimax<'a>),
    Greedy,
    Fixed { nodes: Vec<usize>, edges: Vec<usize> },
}

/// A routing rule bound to a network, nominal blockage model, sink and
/// failure cost. Policies always reason with nominal probabilities; any
/// conditioning happens in the simulated world, never in the policy.
pub struct Policy<'a> {
    net: &'a RoadNetwork,
    sink: usize,
    failure_cost: f64,
    kind: PolicyKind,
    rule: Rule<'a>,
}

/// Builds a policy with the default uncertain-edge cap.
pub fn make_policy<'a>(
    kind: PolicyKind,
    net: &'a RoadNetwork,
    model: &BlockageModel,
    sink: &str,
    failure_cost: f64,
) -> Result<Policy<'a>> {
    Policy::with_cap(kind, net, model, sink, failure_cost, DEFAULT_UNCERTAIN_CAP)
}

impl<'a> Policy<'a> {
    pub fn with_cap(
        kind: PolicyKind,
        net: &'a RoadNetwork,
        model: &BlockageModel,
        sink: &str,
        failure_cost: f64,
        cap: usize,
    ) -> Result<Self> {
        check_failure_cost(failure_cost)?;
        let sink = net.node_index(sink)?;
        let probs = model.aligned_probabilities(net)?;
        let rule = match &kind {
            PolicyKind::Optimal => {
                let solver = Expectimax::new(net, probs, sink, failure_cost, cap)?;
                solver.check_nominal_cap()?;
                Rule::Optimal(solver)
            }
            PolicyKind::ReplanGreedy => Rule::Greedy,
            PolicyKind::FixedRoute(route) => {
                let (nodes, edges) = resolve_route(net, route, sink)?;
                Rule::Fixed { nodes, edges }
            }
        };
        Ok(Self {
            net,
            sink,
            failure_cost,
            kind,
            rule,
        })
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn network(&self) -> &'a RoadNetwork {
        self.net
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn failure_cost(&self) -> f64 {
        self.failure_cost
    }

    /// Rejects a start node a fixed route does not begin at.
    pub(crate) fn check_source(&self, source: usize) -> Result<()> {
        match &self.rule {
            Rule::Fixed { nodes, .. } if nodes[0] != source => Err(Error::BadRoute(format!(
                "route starts at {:?}, traveler starts at {:?}",
                self.net.node_id(nodes[0]),
                self.net.node_id(source)
            ))),
            _ => Ok(()),
        }
    }

    /// Upper bound on moves for one trip; exceeding it means a policy bug.
    pub(crate) fn step_budget(&self) -> usize {
        2 * (self.net.edge_count() + 2) * (self.net.node_count() + 1)
    }

    /// Chooses the next edge to drive, given everything observed so far.
    pub fn step(&self, k: &KnowledgeState) -> Result<Step> {
        let here = k.current();
        if here == self.sink {
            return Ok(Step::Arrived);
        }
        match &self.rule {
            Rule::Optimal(solver) => {
                let belief = solver.belief_from(k)?;
                let target = match solver.decide(here, &belief).action {
                    Action::Abort => return Ok(Step::Abort),
                    Action::Sink => self.sink,
                    Action::Explore(u) => u,
                };
                let path = self
                    .net
                    .lex_shortest_path(here, target, &|e| belief.is_open(e))
                    .expect("decision targets are reachable over known-open roads");
                Ok(Step::Traverse {
                    edge: path.edges[0],
                    to: path.nodes[1],
                })
            }
            Rule::Greedy => Ok(self.greedy_step(k)),
            Rule::Fixed { nodes, edges } => {
                let broken = edges.iter().any(|&e| k.edge(e) == EdgeKnowledge::Blocked);
                let position = nodes.iter().position(|&n| n == here);
                match position {
                    Some(i) if !broken && i + 1 < nodes.len() => Ok(Step::Traverse {
                        edge: edges[i],
                        to: nodes[i + 1],
                    }),
                    _ => Ok(self.greedy_step(k)),
                }
            }
        }
    }

    fn greedy_step(&self, k: &KnowledgeState) -> Step {
        let here = k.current();
        let optimistic = |e| k.edge(e) != EdgeKnowledge::Blocked;
        match self.net.lex_shortest_path(here, self.sink, &optimistic) {
            None => Step::Abort,
            Some(path) => Step::Traverse {
                edge: path.edges[0],
                to: path.nodes[1],
            },
        }
    }

    /// Drives one trip through `world` from `source`, calling `observe` with
    /// the knowledge state after the start and after every move.
    pub fn walk(
        &self,
        source: usize,
        world: &Realization,
        mut observe: impl FnMut(&KnowledgeState),
    ) -> Result<Trip> {
        self.check_source(source)?;
        let mut k = KnowledgeState::new(self.net, source, world);
        observe(&k);
        let mut travel = 0.0;
        let budget = self.step_budget();
        for _ in 0..budget {
            match self.step(&k)? {
                Step::Arrived => {
                    return Ok(Trip {
                        travel_time: travel,
                        failed: false,
                    })
                }
                Step::Abort => {
                    return Ok(Trip {
                        travel_time: travel + self.failure_cost,
                        failed: true,
                    })
                }
                Step::Traverse { edge, to } => {
                    debug_assert!(world.is_open(edge), "policy drove onto a blocked road");
                    travel += self.net.cost(edge);
                    k.arrive(self.net, to, world);
                    observe(&k);
                }
            }
        }
        Err(Error::PolicyLoop(budget))
    }
}

/// Outcome of one simulated trip. A failed trip's time is the distance
/// driven before giving up plus the failure cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trip {
    pub travel_time: f64,
    pub failed: bool,
}

/// Optimal next move from an arbitrary knowledge state.
pub fn optimal_action(
    net: &RoadNetwork,
    model: &BlockageModel,
    k: &KnowledgeState,
    sink: &str,
    failure_cost: f64,
) -> Result<PlannedMove> {
    let sink_index = net.node_index(sink)?;
    let here = k.current();
    if here == sink_index {
        return Ok(PlannedMove::Arrived);
    }
    let probs = model.aligned_probabilities(net)?;
    // the cap applies to what is still unknown from here, not to the nominal count
    let solver = Expectimax::new(net, probs, sink_index, failure_cost, DEFAULT_UNCERTAIN_CAP)?;
    let belief = solver.belief_from(k)?;
    let target = match solver.decide(here, &belief).action {
        Action::Abort => return Ok(PlannedMove::Abort),
        Action::Sink => sink_index,
        Action::Explore(u) => u,
    };
    let path = net
        .lex_shortest_path(here, target, &|e| belief.is_open(e))
        .expect("decision targets are reachable over known-open roads");
    Ok(PlannedMove::Travel {
        target: net.node_id(target).to_string(),
        path: net.to_path_result(&path),
    })
}

fn resolve_route(net: &RoadNetwork, route: &[String], sink: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if route.is_empty() {
        return Err(Error::BadRoute("route is empty".into()));
    }
    let nodes = route
        .iter()
        .map(|id| net.node_index(id).map_err(|_| Error::BadRoute(format!("unknown node {id:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if *nodes.last().expect("nonempty") != sink {
        return Err(Error::BadRoute(format!(
            "route ends at {:?}, not at the sink {:?}",
            route.last().expect("nonempty"),
            net.node_id(sink)
        )));
    }
    let mut seen = vec![false; net.node_count()];
    for &n in &nodes {
        if std::mem::replace(&mut seen[n], true) {
            return Err(Error::BadRoute(format!("route revisits {:?}", net.node_id(n))));
        }
    }
    let edges = nodes
        .windows(2)
        .map(|w| {
            net.cheapest_link(w[0], w[1], &|_| true).ok_or_else(|| {
                Error::BadRoute(format!(
                    "no road from {:?} to {:?}",
                    net.node_id(w[0]),
                    net.node_id(w[1])
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((nodes, edges))
}
