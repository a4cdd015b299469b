//! Belief-state expectimax for the optimal adaptive route.
//!
//! A state is the traveler's node plus the set of decided edges. From a
//! state the traveler either drives to the sink along known-open roads
//! (terminal) or drives to a frontier node, an unvisited node with at least
//! one undecided road, and observes those roads. Edges whose probability is
//! 0 or 1 are treated as decided from the start since observing them carries
//! no information. The value of a state where the sink cannot be reached
//! even if every undecided road turns out open is the failure cost.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::network::{costs_tied, RoadNetwork};

use super::knowledge::{EdgeKnowledge, KnowledgeState};

/// Default cap on uncertain edges for exact solving.
pub const DEFAULT_UNCERTAIN_CAP: usize = 20;

/// Decided-edge assignment as a pair of bitsets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Belief {
    known: Vec<u64>,
    open: Vec<u64>,
}

impl Belief {
    fn empty(edges: usize) -> Self {
        let words = edges.div_ceil(64);
        Self {
            known: vec![0; words],
            open: vec![0; words],
        }
    }

    pub(crate) fn is_known(&self, e: usize) -> bool {
        self.known[e / 64] >> (e % 64) & 1 == 1
    }

    /// Decided and open.
    pub(crate) fn is_open(&self, e: usize) -> bool {
        (self.known[e / 64] & self.open[e / 64]) >> (e % 64) & 1 == 1
    }

    pub(crate) fn is_blocked(&self, e: usize) -> bool {
        self.is_known(e) && !self.is_open(e)
    }

    fn decide(&mut self, e: usize, open: bool) {
        self.known[e / 64] |= 1 << (e % 64);
        if open {
            self.open[e / 64] |= 1 << (e % 64);
        } else {
            self.open[e / 64] &= !(1 << (e % 64));
        }
    }
}

/// What the optimal traveler does next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Action {
    /// Drive to the sink over known-open roads.
    Sink,
    /// Drive to this frontier node and look around.
    Explore(usize),
    /// The sink is unreachable whatever the undecided roads turn out to be.
    Abort,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Decision {
    pub value: f64,
    pub failure: f64,
    pub action: Action,
}

/// Memoized solver for one (network, probabilities, sink, failure cost).
///
/// The memo is shared behind a lock so a single solver can serve many
/// Monte Carlo workers; decisions are a pure function of the state, so
/// sharing never changes a result.
pub(crate) struct Expectimax<'a> {
    net: &'a RoadNetwork,
    probs: Vec<f64>,
    sink: usize,
    failure_cost: f64,
    cap: usize,
    memo: RwLock<HashMap<(usize, Belief), Decision>>,
}

impl<'a> Expectimax<'a> {
    pub(crate) fn new(
        net: &'a RoadNetwork,
        probs: Vec<f64>,
        sink: usize,
        failure_cost: f64,
        cap: usize,
    ) -> Result<Self> {
        check_failure_cost(failure_cost)?;
        Ok(Self {
            net,
            probs,
            sink,
            failure_cost,
            cap,
            memo: RwLock::new(HashMap::new()),
        })
    }

    /// Fails when the nominal model has more uncertain edges than the cap.
    pub(crate) fn check_nominal_cap(&self) -> Result<()> {
        let count = self.probs.iter().filter(|&&p| p > 0.0 && p < 1.0).count();
        if count > self.cap {
            return Err(Error::TooManyUncertainEdges { count, cap: self.cap });
        }
        Ok(())
    }

    /// Nominal belief: observed states where known, certain edges decided.
    pub(crate) fn belief_from(&self, k: &KnowledgeState) -> Result<Belief> {
        let mut belief = Belief::empty(self.probs.len());
        let mut uncertain = 0;
        for (e, &p) in self.probs.iter().enumerate() {
            match k.edge(e) {
                EdgeKnowledge::Open => belief.decide(e, true),
                EdgeKnowledge::Blocked => belief.decide(e, false),
                EdgeKnowledge::Unknown if p <= 0.0 => belief.decide(e, true),
                EdgeKnowledge::Unknown if p >= 1.0 => belief.decide(e, false),
                EdgeKnowledge::Unknown => uncertain += 1,
            }
        }
        if uncertain > self.cap {
            return Err(Error::TooManyUncertainEdges {
                count: uncertain,
                cap: self.cap,
            });
        }
        Ok(belief)
    }

    /// Expected time and failure probability before anything is observed,
    /// starting at `source`.
    pub(crate) fn initial_value(&self, source: usize) -> (f64, f64) {
        let mut belief = Belief::empty(self.probs.len());
        for (e, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                belief.decide(e, true);
            } else if p >= 1.0 {
                belief.decide(e, false);
            }
        }
        if source == self.sink {
            return (0.0, 0.0);
        }
        let unknown = self.undecided_at(source, &belief);
        self.observe(source, &belief, &unknown)
    }

    /// Optimal decision at `node` under `belief`.
    pub(crate) fn decide(&self, node: usize, belief: &Belief) -> Decision {
        if node == self.sink {
            return Decision {
                value: 0.0,
                failure: 0.0,
                action: Action::Sink,
            };
        }
        let key = (node, belief.clone());
        if let Some(&hit) = self.memo.read().expect("memo lock").get(&key) {
            return hit;
        }
        let decision = self.solve(node, belief);
        self.memo
            .write()
            .expect("memo lock")
            .insert(key, decision);
        decision
    }

    fn solve(&self, node: usize, belief: &Belief) -> Decision {
        let abort = Decision {
            value: self.failure_cost,
            failure: 1.0,
            action: Action::Abort,
        };
        if !self.sink_possible(node, belief) {
            return abort;
        }
        let dist = self.net.distances(node, &|e| belief.is_open(e), false);

        let mut best: Option<(Decision, usize)> = None;

        if dist[self.sink].is_finite() {
            consider(
                &mut best,
                Decision {
                    value: dist[self.sink],
                    failure: 0.0,
                    action: Action::Sink,
                },
                self.net.lex_rank(self.sink),
            );
        }

        let mut frontier: Vec<usize> = (0..self.net.node_count())
            .filter(|&u| u != node && u != self.sink && dist[u].is_finite())
            .collect();
        frontier.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        for u in frontier {
            // exploring costs the drive plus a strictly positive remainder
            if let Some((incumbent, _)) = &best {
                if dist[u] > incumbent.value && !costs_tied(dist[u], incumbent.value) {
                    break;
                }
            }
            let unknown = self.undecided_at(u, belief);
            if unknown.is_empty() {
                continue;
            }
            let (value, failure) = self.observe(u, belief, &unknown);
            consider(
                &mut best,
                Decision {
                    value: dist[u] + value,
                    failure,
                    action: Action::Explore(u),
                },
                self.net.lex_rank(u),
            );
        }
        best.map_or(abort, |(d, _)| d)
    }

    /// Expectation over the joint reveal of `unknown` (all incident to `node`).
    fn observe(&self, node: usize, belief: &Belief, unknown: &[usize]) -> (f64, f64) {
        let mut value = 0.0;
        let mut failure = 0.0;
        for mask in 0u64..(1u64 << unknown.len()) {
            let mut child = belief.clone();
            let mut prob = 1.0;
            for (bit, &e) in unknown.iter().enumerate() {
                let blocked = mask >> bit & 1 == 1;
                let p = self.probs[e];
                prob *= if blocked { p } else { 1.0 - p };
                child.decide(e, !blocked);
            }
            let d = self.decide(node, &child);
            value += prob * d.value;
            failure += prob * d.failure;
        }
        (value, failure)
    }

    fn undecided_at(&self, node: usize, belief: &Belief) -> Vec<usize> {
        self.net
            .incident(node)
            .iter()
            .copied()
            .filter(|&e| !belief.is_known(e))
            .collect()
    }

    /// Whether the sink is reachable when every undecided edge is open.
    fn sink_possible(&self, node: usize, belief: &Belief) -> bool {
        let mut seen = vec![false; self.net.node_count()];
        let mut stack = vec![node];
        seen[node] = true;
        while let Some(x) = stack.pop() {
            if x == self.sink {
                return true;
            }
            for &e in self.net.incident(x) {
                if belief.is_blocked(e) {
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

/// Keeps the cheaper decision; ties go to the smaller node rank.
fn consider(best: &mut Option<(Decision, usize)>, candidate: Decision, rank: usize) {
    let replace = match best {
        None => true,
        Some((incumbent, incumbent_rank)) => {
            if costs_tied(candidate.value, incumbent.value) {
                rank < *incumbent_rank
            } else {
                candidate.value < incumbent.value
            }
        }
    };
    if replace {
        *best = Some((candidate, rank));
    }
}

pub(crate) fn check_failure_cost(failure_cost: f64) -> Result<()> {
    if failure_cost.is_finite() && failure_cost > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!(
            "failure cost must be positive and finite, got {failure_cost}"
        )))
    }
}
