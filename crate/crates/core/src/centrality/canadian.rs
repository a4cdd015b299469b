//! Canadian Betweenness Centrality: how much longer an optimal, non-clairvoyant
//! traveler takes on average when a road is closed rather than open.
//!
//! The traveler's policy is always built from nominal probabilities, so it
//! never knows the conditioned road's state in advance; the conditioning is
//! imposed on the simulated world through realization overrides.

use rayon::prelude::*;

use crate::blockage::{BlockageModel, EdgeState, Overrides};
use crate::error::{Error, Result};
use crate::network::RoadNetwork;
use crate::rng::derive_seed;
use crate::traveler::{
    evaluate_policy_with_cap, simulate_policy, Policy, PolicyKind, DEFAULT_UNCERTAIN_CAP,
};

use super::{CentralityRow, CentralityTable};

/// How roads other than the conditioned one behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbcMode {
    /// Other roads keep their nominal blockage probabilities.
    OthersStochastic,
    /// Other roads are certainly open, for policy and world alike.
    OthersOpen,
}

impl CbcMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::OthersStochastic => "others_stochastic",
            Self::OthersOpen => "others_open",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbcMethod {
    Exact,
    MonteCarlo { replications: usize, seed: u64 },
}

impl CbcMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::MonteCarlo { .. } => "monte_carlo",
        }
    }
}

/// What an unreachable sink contributes to the averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureHandling {
    /// Failed trips count with the failure cost added.
    Penalty,
    /// Failed trips are dropped from the means (Monte Carlo only).
    Conditional,
}

impl FailureHandling {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Penalty => "penalty",
            Self::Conditional => "conditional",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbcConfig {
    pub mode: CbcMode,
    pub method: CbcMethod,
    pub failure_cost: f64,
    pub failure_handling: FailureHandling,
    /// Uncertain-edge cap for the exact method.
    pub cap: usize,
}

impl CbcConfig {
    pub fn new(mode: CbcMode, method: CbcMethod, failure_cost: f64) -> Self {
        Self {
            mode,
            method,
            failure_cost,
            failure_handling: FailureHandling::Penalty,
            cap: DEFAULT_UNCERTAIN_CAP,
        }
    }

    pub fn with_failure_handling(mut self, handling: FailureHandling) -> Self {
        self.failure_handling = handling;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.failure_handling == FailureHandling::Conditional && self.method == CbcMethod::Exact {
            return Err(Error::IncompatibleOptions(
                "conditional failure handling requires the Monte Carlo method".into(),
            ));
        }
        if let CbcMethod::MonteCarlo { replications: 0, .. } = self.method {
            return Err(Error::Validation("replications must be at least 1".into()));
        }
        Ok(())
    }
}

/// One road's score and the two conditional expectations behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct CbcResult {
    pub edge_id: String,
    pub mode: CbcMode,
    pub method: CbcMethod,
    pub failure_handling: FailureHandling,
    pub e_t_blocked: f64,
    pub e_t_open: f64,
    /// `e_t_blocked - e_t_open`.
    pub cbc: f64,
    pub p_fail_blocked: f64,
    pub p_fail_open: f64,
    /// Standard errors of the two means; Monte Carlo only.
    pub se_blocked: Option<f64>,
    pub se_open: Option<f64>,
}

/// Canadian betweenness of a single road for one source-sink pair.
pub fn canadian_betweenness(
    net: &RoadNetwork,
    model: &BlockageModel,
    source: &str,
    sink: &str,
    edge: &str,
    config: &CbcConfig,
) -> Result<CbcResult> {
    config.validate()?;
    let e = net.edge_index(edge)?;
    net.node_index(source)?;
    let model = model.for_network(net)?;
    match config.mode {
        CbcMode::OthersStochastic => {
            let policy = optimal_policy(net, &model, sink, config)?;
            score(net, &model, &policy, source, e, config)
        }
        CbcMode::OthersOpen => {
            let model = model.only_uncertain(edge)?;
            let policy = optimal_policy(net, &model, sink, config)?;
            score(net, &model, &policy, source, e, config)
        }
    }
}

/// Canadian betweenness of every road, rows sorted by edge id.
pub fn canadian_betweenness_all(
    net: &RoadNetwork,
    model: &BlockageModel,
    source: &str,
    sink: &str,
    config: &CbcConfig,
) -> Result<CentralityTable> {
    config.validate()?;
    net.node_index(source)?;
    let model = model.for_network(net)?;
    let mut order: Vec<usize> = (0..net.edge_count()).collect();
    order.sort_by(|&a, &b| net.edge(a).id.cmp(&net.edge(b).id));

    let results = match config.mode {
        CbcMode::OthersStochastic => {
            // one policy (and one shared memo) serves every road
            let policy = optimal_policy(net, &model, sink, config)?;
            order
                .par_iter()
                .map(|&e| score(net, &model, &policy, source, e, config))
                .collect::<Result<Vec<_>>>()?
        }
        CbcMode::OthersOpen => order
            .par_iter()
            .map(|&e| {
                let model = model.only_uncertain(&net.edge(e).id)?;
                let policy = optimal_policy(net, &model, sink, config)?;
                score(net, &model, &policy, source, e, config)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(CentralityTable {
        source: Some(source.to_string()),
        sink: Some(sink.to_string()),
        config: Some(*config),
        rows: results
            .into_iter()
            .map(|r| CentralityRow {
                edge_id: r.edge_id.clone(),
                cbc: Some(r),
                geodesic: None,
            })
            .collect(),
    })
}

fn optimal_policy<'a>(
    net: &'a RoadNetwork,
    model: &BlockageModel,
    sink: &str,
    config: &CbcConfig,
) -> Result<Policy<'a>> {
    // the exact method needs the whole reveal tree; Monte Carlo only the
    // states it actually visits, but the policy's decisions still come from
    // the same recursion, so the same cap applies
    Policy::with_cap(
        PolicyKind::Optimal,
        net,
        model,
        sink,
        config.failure_cost,
        config.cap,
    )
}

fn score(
    net: &RoadNetwork,
    model: &BlockageModel,
    policy: &Policy<'_>,
    source: &str,
    edge: usize,
    config: &CbcConfig,
) -> Result<CbcResult> {
    let id = net.edge(edge).id.clone();
    let force = |state| Overrides::from([(id.clone(), state)]);
    let blocked_world = force(EdgeState::Blocked);
    let open_world = force(EdgeState::Open);

    let (blocked, open, se) = match config.method {
        CbcMethod::Exact => {
            let blocked = evaluate_policy_with_cap(net, model, policy, source, &blocked_world, config.cap)?;
            let open = evaluate_policy_with_cap(net, model, policy, source, &open_world, config.cap)?;
            (
                (blocked.value, blocked.failure_probability),
                (open.value, open.failure_probability),
                None,
            )
        }
        CbcMethod::MonteCarlo { replications, seed } => {
            let edge_seed = derive_seed(seed, edge as u64);
            let run = |world: &Overrides, stream| {
                simulate_policy(
                    net,
                    model,
                    policy,
                    source,
                    replications,
                    derive_seed(edge_seed, stream),
                    world,
                )
            };
            let blocked = run(&blocked_world, 0)?;
            let open = run(&open_world, 1)?;
            let summarize = |d: &crate::traveler::TravelTimeDistribution| match config.failure_handling {
                FailureHandling::Penalty => (d.summary().mean, d.summary().std_error),
                FailureHandling::Conditional => d
                    .successful_summary()
                    .map_or((f64::NAN, f64::NAN), |s| (s.mean, s.std_error)),
            };
            let (mb, sb) = summarize(&blocked);
            let (mo, so) = summarize(&open);
            (
                (mb, blocked.failure_frequency()),
                (mo, open.failure_frequency()),
                Some((sb, so)),
            )
        }
    };
    Ok(CbcResult {
        edge_id: id,
        mode: config.mode,
        method: config.method,
        failure_handling: config.failure_handling,
        e_t_blocked: blocked.0,
        e_t_open: open.0,
        cbc: blocked.0 - open.0,
        p_fail_blocked: blocked.1,
        p_fail_open: open.1,
        se_blocked: se.map(|s| s.0),
        se_open: se.map(|s| s.1),
    })
}
