//! Exact expected travel time of an arbitrary policy.
//!
//! The policy is walked deterministically until it arrives at a node with
//! undecided roads whose state is genuinely random; there the walk branches
//! over every joint outcome. The dynamics probabilities may differ from the
//! ones the policy was built with (e.g. an edge forced by an override).

use std::collections::HashMap;

use crate::blockage::{BlockageModel, EdgeState, Overrides};
use crate::error::{Error, Result};
use crate::network::RoadNetwork;

use super::expectimax::{Expectimax, DEFAULT_UNCERTAIN_CAP};
use super::knowledge::{EdgeKnowledge, KnowledgeState};
use super::policy::{Policy, Step};
use super::ExpectedTime;

/// Optimal expected travel time from `source` to `sink`, by belief-state
/// expectimax over the nominal model.
pub fn exact_expected_time(
    net: &RoadNetwork,
    model: &BlockageModel,
    source: &str,
    sink: &str,
    failure_cost: f64,
) -> Result<ExpectedTime> {
    exact_expected_time_with_cap(net, model, source, sink, failure_cost, DEFAULT_UNCERTAIN_CAP)
}

pub fn exact_expected_time_with_cap(
    net: &RoadNetwork,
    model: &BlockageModel,
    source: &str,
    sink: &str,
    failure_cost: f64,
    cap: usize,
) -> Result<ExpectedTime> {
    let s = net.node_index(source)?;
    let t = net.node_index(sink)?;
    let probs = model.aligned_probabilities(net)?;
    let solver = Expectimax::new(net, probs, t, failure_cost, cap)?;
    solver.check_nominal_cap()?;
    let (value, failure_probability) = solver.initial_value(s);
    Ok(ExpectedTime {
        value,
        failure_probability,
    })
}

/// Exact expected travel time of `policy` when the world is drawn from
/// `model` with `overrides` forced.
pub fn evaluate_policy(
    net: &RoadNetwork,
    model: &BlockageModel,
    policy: &Policy<'_>,
    source: &str,
    overrides: &Overrides,
) -> Result<ExpectedTime> {
    evaluate_policy_with_cap(net, model, policy, source, overrides, DEFAULT_UNCERTAIN_CAP)
}

pub fn evaluate_policy_with_cap(
    net: &RoadNetwork,
    model: &BlockageModel,
    policy: &Policy<'_>,
    source: &str,
    overrides: &Overrides,
    cap: usize,
) -> Result<ExpectedTime> {
    let s = net.node_index(source)?;
    policy.check_source(s)?;
    let aligned = model.for_network(net)?;
    let forced = aligned.forced_states(overrides)?;
    let probs: Vec<f64> = aligned
        .probabilities()
        .iter()
        .zip(&forced)
        .map(|(&p, f)| match f {
            Some(EdgeState::Open) => 0.0,
            Some(EdgeState::Blocked) => 1.0,
            None => p,
        })
        .collect();
    let count = probs.iter().filter(|&&p| p > 0.0 && p < 1.0).count();
    if count > cap {
        return Err(Error::TooManyUncertainEdges { count, cap });
    }
    let start = KnowledgeState::before_arrival(net, s);
    let mut walker = Walker {
        net,
        policy,
        probs,
        memo: HashMap::new(),
    };
    let (value, failure_probability) = walker.branch(start, s)?;
    Ok(ExpectedTime {
        value,
        failure_probability,
    })
}

struct Walker<'n, 'p> {
    net: &'n RoadNetwork,
    policy: &'p Policy<'n>,
    probs: Vec<f64>,
    memo: HashMap<(usize, Vec<EdgeKnowledge>), (f64, f64)>,
}

impl Walker<'_, '_> {
    /// Arrive at `node` from state `k`, revealing its roads, and continue.
    fn branch(&mut self, k: KnowledgeState, node: usize) -> Result<(f64, f64)> {
        let mut fixed = Vec::new();
        let mut random = Vec::new();
        for &e in self.net.incident(node) {
            if k.edge(e) != EdgeKnowledge::Unknown {
                continue;
            }
            let p = self.probs[e];
            if p <= 0.0 {
                fixed.push((e, EdgeKnowledge::Open));
            } else if p >= 1.0 {
                fixed.push((e, EdgeKnowledge::Blocked));
            } else {
                random.push(e);
            }
        }
        let mut value = 0.0;
        let mut failure = 0.0;
        for mask in 0u64..(1u64 << random.len()) {
            let mut revealed = fixed.clone();
            let mut prob = 1.0;
            for (bit, &e) in random.iter().enumerate() {
                let blocked = mask >> bit & 1 == 1;
                let p = self.probs[e];
                prob *= if blocked { p } else { 1.0 - p };
                revealed.push((e, if blocked { EdgeKnowledge::Blocked } else { EdgeKnowledge::Open }));
            }
            let mut child = k.clone();
            child.arrive_with(node, &revealed);
            let (v, f) = self.continue_from(child)?;
            value += prob * v;
            failure += prob * f;
        }
        Ok((value, failure))
    }

    /// Follows the policy from `k` until it stops or reaches a node whose
    /// reveal is random.
    fn continue_from(&mut self, mut k: KnowledgeState) -> Result<(f64, f64)> {
        let key = (k.current(), k.edges().to_vec());
        if let Some(&hit) = self.memo.get(&key) {
            return Ok(hit);
        }
        let mut travel = 0.0;
        let budget = self.policy.step_budget();
        let mut result = None;
        for _ in 0..budget {
            match self.policy.step(&k)? {
                Step::Arrived => {
                    result = Some((travel, 0.0));
                    break;
                }
                Step::Abort => {
                    result = Some((travel + self.policy.failure_cost(), 1.0));
                    break;
                }
                Step::Traverse { edge, to } => {
                    travel += self.net.cost(edge);
                    let random = self.net.incident(to).iter().any(|&e| {
                        k.edge(e) == EdgeKnowledge::Unknown && self.probs[e] > 0.0 && self.probs[e] < 1.0
                    });
                    if random {
                        let (v, f) = self.branch(k, to)?;
                        result = Some((travel + v, f));
                        break;
                    }
                    let revealed: Vec<_> = self
                        .net
                        .incident(to)
                        .iter()
                        .filter(|&&e| k.edge(e) == EdgeKnowledge::Unknown)
                        .map(|&e| {
                            let state = if self.probs[e] <= 0.0 {
                                EdgeKnowledge::Open
                            } else {
                                EdgeKnowledge::Blocked
                            };
                            (e, state)
                        })
                        .collect();
                    k.arrive_with(to, &revealed);
                }
            }
        }
        let result = result.ok_or(Error::PolicyLoop(budget))?;
        self.memo.insert(key, result);
        Ok(result)
    }
}
