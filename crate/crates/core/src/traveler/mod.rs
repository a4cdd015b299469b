//! The traveler: knowledge dynamics, the optimal adaptive policy, baseline
//! policies, and exact and Monte Carlo evaluation of any of them.

mod evaluate;
mod expectimax;
mod knowledge;
mod policy;
mod simulate;

pub use evaluate::{
    evaluate_policy, evaluate_policy_with_cap, exact_expected_time, exact_expected_time_with_cap,
};
pub use expectimax::DEFAULT_UNCERTAIN_CAP;
pub use knowledge::{reveal, EdgeKnowledge, KnowledgeState};
pub use policy::{make_policy, optimal_action, PlannedMove, Policy, PolicyKind, Step, Trip};
pub use simulate::{simulate_policy, TravelTimeDistribution};

/// Expected travel time, failure penalties included, and the probability
/// that the sink is unreachable in the realized world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedTime {
    pub value: f64,
    pub failure_probability: f64,
}

#[cfg(test)]
mod tests;
