//! Seeded Monte Carlo evaluation of a policy.

use rayon::prelude::*;

use crate::blockage::{sample_with_forced, BlockageModel, Overrides};
use crate::error::{Error, Result};
use crate::network::RoadNetwork;
use crate::rng::derive_seed;
use crate::stats::Summary;

use super::policy::Policy;

/// Per-replicate travel times plus their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelTimeDistribution {
    times: Vec<f64>,
    failed: Vec<bool>,
    summary: Summary,
    failure_frequency: f64,
}

impl TravelTimeDistribution {
    /// Summarizes raw replicates; a failed replicate's time includes the
    /// failure cost.
    pub fn from_replicates(times: Vec<f64>, failed: Vec<bool>) -> Result<Self> {
        if times.is_empty() || times.len() != failed.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times and {} failure flags",
                times.len(),
                failed.len()
            )));
        }
        let summary = Summary::of(&times).expect("nonempty");
        let failures = failed.iter().filter(|&&f| f).count();
        let failure_frequency = failures as f64 / times.len() as f64;
        Ok(Self {
            times,
            failed,
            summary,
            failure_frequency,
        })
    }

    pub fn replications(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn failed(&self) -> &[bool] {
        &self.failed
    }

    /// Summary over every replicate, failures included.
    pub fn summary(&self) -> &Summary {
        &self.summary
    }

    pub fn failure_frequency(&self) -> f64 {
        self.failure_frequency
    }

    /// Summary over the replicates that reached the sink, if any did.
    pub fn successful_summary(&self) -> Option<Summary> {
        let ok: Vec<f64> = self
            .times
            .iter()
            .zip(&self.failed)
            .filter(|(_, &f)| !f)
            .map(|(&t, _)| t)
            .collect();
        Summary::of(&ok)
    }
}

/// Runs `replications` independent trips. Replicate `r` draws its world
/// from seed `derive_seed(seed, r)`, so the result does not depend on how
/// many workers execute it.
pub fn simulate_policy(
    net: &RoadNetwork,
    model: &BlockageModel,
    policy: &Policy<'_>,
    source: &str,
    replications: usize,
    seed: u64,
    overrides: &Overrides,
) -> Result<TravelTimeDistribution> {
    if replications == 0 {
        return Err(Error::Validation("replications must be at least 1".into()));
    }
    let s = net.node_index(source)?;
    policy.check_source(s)?;
    let aligned = model.for_network(net)?;
    let forced = aligned.forced_states(overrides)?;
    let probs = aligned.probabilities();
    let trips = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let world = sample_with_forced(probs, &forced, derive_seed(seed, r));
            policy.walk(s, &world, |_| {})
        })
        .collect::<Result<Vec<_>>>()?;
    let times = trips.iter().map(|t| t.travel_time).collect();
    let failed = trips.iter().map(|t| t.failed).collect();
    TravelTimeDistribution::from_replicates(times, failed)
}
