//! Routing and road-importance analysis for networks whose roads may be
//! blocked, where a road's state is only learned on reaching one of its ends.
//!
//! * [`network`]: graph model, JSON ingestion, deterministic shortest paths.
//! * [`blockage`]: per-road blockage probabilities and seeded world sampling.
//! * [`traveler`]: optimal and heuristic routing policies, exact and
//!   Monte Carlo evaluation.
//! * [`centrality`]: Canadian betweenness and the geodesic baseline.
//! * [`elicit`]: a normal prior on covariate coefficients from expert input.

pub mod blockage;
pub mod centrality;
pub mod elicit;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod formats;
pub mod network;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod traveler;

pub use blockage::{
    blockage_probabilities, sample_realization, BetaVector, BlockageModel, CovariateMatrix, EdgeState, Overrides,
    Realization,
};
pub use centrality::{
    canadian_betweenness, canadian_betweenness_all, geodesic_edge_betweenness, CbcConfig, CbcMethod, CbcMode,
    CbcResult, CentralityRow, CentralityTable, FailureHandling,
};
pub use elicit::{
    fit_prior, inverse_logit, logit, mix_experts, pushforward_probabilities, sample_beta, BetaPrior, BetaSample,
    LogitVector, ProbabilitySummary, Provenance,
};
pub use error::{Error, Result};
pub use network::{load_network, shortest_path, Edge, PathResult, RoadNetwork};
pub use traveler::{
    evaluate_policy, exact_expected_time, make_policy, optimal_action, simulate_policy, ExpectedTime,
    KnowledgeState, PlannedMove, Policy, PolicyKind, TravelTimeDistribution,
};
