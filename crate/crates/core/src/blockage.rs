//! Per-edge blockage probabilities and seeded sampling of hidden worlds.
//!
//! Probabilities come either directly (inline `p`, a probabilities CSV) or
//! from covariates through the logistic link. Edge states are sampled
//! independently given their probabilities.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::network::RoadNetwork;
use crate::rng;

/// State of an edge in a realized world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeState {
    Open,
    Blocked,
}

/// Forced edge states, keyed by edge id.
pub type Overrides = BTreeMap<String, EdgeState>;

/// Covariates, one row per edge and one column per covariate.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateMatrix {
    row_ids: Vec<String>,
    column_names: Vec<String>,
    values: DMatrix<f64>,
}

impl CovariateMatrix {
    pub fn new(row_ids: Vec<String>, column_names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = row_ids.len();
        let k = column_names.len();
        if n == 0 || k == 0 {
            return Err(Error::Validation(
                "covariate matrix needs at least one row and one column".into(),
            ));
        }
        if rows.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} row ids but {} rows",
                n,
                rows.len()
            )));
        }
        let mut seen = HashMap::with_capacity(n);
        for (i, id) in row_ids.iter().enumerate() {
            if seen.insert(id.as_str(), i).is_some() {
                return Err(Error::Validation(format!("duplicate covariate row {id:?}")));
            }
        }
        for (id, row) in row_ids.iter().zip(&rows) {
            if row.len() != k {
                return Err(Error::DimensionMismatch(format!(
                    "row {id:?} has {} entries, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("non-finite covariate in row {id:?}")));
            }
        }
        let values = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
        Ok(Self {
            row_ids,
            column_names,
            values,
        })
    }

    /// Unnamed matrix with rows `r0, r1, ...` and columns `z0, z1, ...`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        let ids = (0..rows.len()).map(|i| format!("r{i}")).collect();
        let names = (0..k).map(|j| format!("z{j}")).collect();
        Self::new(ids, names, rows)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.values[(row, column)]
    }

    pub fn row_position(&self, id: &str) -> Option<usize> {
        self.row_ids.iter().position(|r| r == id)
    }

    /// Same matrix with its rows reordered: row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let rows = order
            .iter()
            .map(|&i| self.values.row(i).iter().copied().collect())
            .collect();
        let ids = order.iter().map(|&i| self.row_ids[i].clone()).collect();
        Self::new(ids, self.column_names.clone(), rows)
    }

    /// Linear predictor `Z beta` for every row.
    pub fn linear_predictor(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.columns() {
            return Err(Error::DimensionMismatch(format!(
                "{} covariate columns but {} coefficients",
                self.columns(),
                beta.len()
            )));
        }
        Ok((0..self.rows())
            .map(|i| (0..self.columns()).map(|j| self.values[(i, j)] * beta[j]).sum())
            .collect())
    }
}

/// Logistic-regression coefficients, one per covariate column.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaVector(Vec<f64>);

impl BetaVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|b| !b.is_finite()) {
            return Err(Error::Validation("non-finite coefficient".into()));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Blockage probability for every edge, keyed by edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockageModel {
    edge_ids: Vec<String>,
    probs: Vec<f64>,
    generator: Option<(CovariateMatrix, BetaVector)>,
}

impl BlockageModel {
    pub fn new(edge_ids: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if edge_ids.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} edge ids but {} probabilities",
                edge_ids.len(),
                probs.len()
            )));
        }
        let mut seen = HashMap::with_capacity(edge_ids.len());
        for (id, &p) in edge_ids.iter().zip(&probs) {
            if seen.insert(id.as_str(), ()).is_some() {
                return Err(Error::Validation(format!("duplicate probability for edge {id:?}")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Validation(format!(
                    "probability {p} for edge {id:?} is outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            edge_ids,
            probs,
            generator: None,
        })
    }

    /// Uses the graph document's inline `p` values; edges without one never block.
    pub fn from_network(net: &RoadNetwork) -> Self {
        Self {
            edge_ids: net.edges().iter().map(|e| e.id.clone()).collect(),
            probs: net.edges().iter().map(|e| e.p.unwrap_or(0.0)).collect(),
            generator: None,
        }
    }

    /// Every edge of `net` gets the same probability.
    pub fn uniform(net: &RoadNetwork, p: f64) -> Result<Self> {
        Self::new(
            net.edges().iter().map(|e| e.id.clone()).collect(),
            vec![p; net.edge_count()],
        )
    }

    pub fn edge_ids(&self) -> &[String] {
        &self.edge_ids
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, edge_id: &str) -> Option<f64> {
        self.edge_ids
            .iter()
            .position(|id| id == edge_id)
            .map(|i| self.probs[i])
    }

    /// The covariates and coefficients this model was derived from, if any.
    pub fn generator(&self) -> Option<&(CovariateMatrix, BetaVector)> {
        self.generator.as_ref()
    }

    /// Reorders the model to `net`'s edge order, checking coverage.
    pub fn for_network(&self, net: &RoadNetwork) -> Result<Self> {
        let probs = self.aligned_probabilities(net)?;
        Ok(Self {
            edge_ids: net.edges().iter().map(|e| e.id.clone()).collect(),
            probs,
            generator: self.generator.clone(),
        })
    }

    /// Probabilities indexed by `net`'s edge indices.
    pub fn aligned_probabilities(&self, net: &RoadNetwork) -> Result<Vec<f64>> {
        let in_order = self.edge_ids.len() == net.edge_count()
            && self.edge_ids.iter().zip(net.edges()).all(|(id, e)| *id == e.id);
        if in_order {
            return Ok(self.probs.clone());
        }
        let mut probs = vec![f64::NAN; net.edge_count()];
        for (id, &p) in self.edge_ids.iter().zip(&self.probs) {
            probs[net.edge_index(id)?] = p;
        }
        if let Some(missing) = probs.iter().position(|p| p.is_nan()) {
            return Err(Error::Validation(format!(
                "no blockage probability for edge {:?}",
                net.edge(missing).id
            )));
        }
        Ok(probs)
    }

    /// Copy with one edge's probability replaced.
    pub fn with_probability(&self, edge_id: &str, p: f64) -> Result<Self> {
        let i = self
            .edge_ids
            .iter()
            .position(|id| id == edge_id)
            .ok_or_else(|| Error::UnknownEdge(edge_id.to_string()))?;
        let mut probs = self.probs.clone();
        probs[i] = p;
        let mut model = Self::new(self.edge_ids.clone(), probs)?;
        model.generator = None;
        Ok(model)
    }

    /// Copy in which every edge except `keep` is certainly open.
    pub fn only_uncertain(&self, keep: &str) -> Result<Self> {
        if !self.edge_ids.iter().any(|id| id == keep) {
            return Err(Error::UnknownEdge(keep.to_string()));
        }
        let probs = self
            .edge_ids
            .iter()
            .zip(&self.probs)
            .map(|(id, &p)| if id == keep { p } else { 0.0 })
            .collect();
        Self::new(self.edge_ids.clone(), probs)
    }

    /// Resolves overrides to a per-edge vector in this model's order.
    pub(crate) fn forced_states(&self, overrides: &Overrides) -> Result<Vec<Option<EdgeState>>> {
        let mut forced = vec![None; self.edge_ids.len()];
        for (id, &state) in overrides {
            let i = self
                .edge_ids
                .iter()
                .position(|e| e == id)
                .ok_or_else(|| Error::UnknownEdge(id.clone()))?;
            forced[i] = Some(state);
        }
        Ok(forced)
    }
}

/// Logistic link: `p_l = 1 / (1 + exp(-sum_i Z_li beta_i))` for every row.
pub fn blockage_probabilities(z: &CovariateMatrix, beta: &BetaVector) -> Result<BlockageModel> {
    let eta = z.linear_predictor(beta.as_slice())?;
    let probs = eta.into_iter().map(logistic).collect();
    let mut model = BlockageModel::new(z.row_ids().to_vec(), probs)?;
    model.generator = Some((z.clone(), beta.clone()));
    Ok(model)
}

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// One complete hidden world: a state for every edge, in model edge order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Realization {
    states: Vec<EdgeState>,
}

impl Realization {
    pub fn new(states: Vec<EdgeState>) -> Self {
        Self { states }
    }

    pub fn all_open(edges: usize) -> Self {
        Self::new(vec![EdgeState::Open; edges])
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn state(&self, edge: usize) -> EdgeState {
        self.states[edge]
    }

    pub fn is_open(&self, edge: usize) -> bool {
        self.states[edge] == EdgeState::Open
    }

    /// State of the edge called `id` in `net`.
    pub fn state_of(&self, net: &RoadNetwork, id: &str) -> Result<EdgeState> {
        Ok(self.states[net.edge_index(id)?])
    }
}

/// Draws a world; each non-overridden edge blocks independently with its
/// probability. Deterministic in `(model, seed, overrides)`.
pub fn sample_realization(model: &BlockageModel, seed: u64, overrides: &Overrides) -> Result<Realization> {
    let forced = model.forced_states(overrides)?;
    Ok(sample_with_forced(&model.probs, &forced, seed))
}

/// One uniform draw per edge in order, whether or not the edge is forced,
/// so a forced edge never shifts the stream of the others.
pub(crate) fn sample_with_forced(probs: &[f64], forced: &[Option<EdgeState>], seed: u64) -> Realization {
    let mut rng = rng::generator(seed);
    let states = probs
        .iter()
        .zip(forced)
        .map(|(&p, &f)| {
            let u: f64 = rng.random();
            f.unwrap_or(if u < p { EdgeState::Blocked } else { EdgeState::Open })
        })
        .collect();
    Realization::new(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(probs: &[f64]) -> BlockageModel {
        let ids = (0..probs.len()).map(|i| format!("e{i}")).collect();
        BlockageModel::new(ids, probs.to_vec()).unwrap()
    }

    #[test]
    fn logistic_link_examples() {
        let z = CovariateMatrix::from_rows(vec![vec![0.3, -2.0], vec![5.0, 1.0]]).unwrap();
        let zero = blockage_probabilities(&z, &BetaVector::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(zero.probabilities(), [0.5, 0.5]);

        let z = CovariateMatrix::from_rows(vec![vec![3f64.ln()]]).unwrap();
        let m = blockage_probabilities(&z, &BetaVector::new(vec![1.0]).unwrap()).unwrap();
        assert!((m.probabilities()[0] - 0.75).abs() < 1e-15);

        let z = CovariateMatrix::from_rows(vec![vec![1.0, -1.0]]).unwrap();
        let m = blockage_probabilities(&z, &BetaVector::new(vec![2.0, 2.0]).unwrap()).unwrap();
        assert_eq!(m.probabilities(), [0.5]);
        assert!(m.generator().is_some());
    }

    #[test]
    fn logistic_link_dimension_mismatch() {
        let z = CovariateMatrix::from_rows(vec![vec![1.0, 2.0]]).unwrap();
        let beta = BetaVector::new(vec![1.0]).unwrap();
        assert!(matches!(
            blockage_probabilities(&z, &beta),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn logistic_is_stable_in_the_tails() {
        assert_eq!(logistic(-800.0), 0.0);
        assert_eq!(logistic(800.0), 1.0);
        assert!((logistic(-30.0) - (-30f64).exp() / (1.0 + (-30f64).exp())).abs() < 1e-25);
    }

    #[test]
    fn certain_probabilities_and_determinism() {
        let m = model(&[0.0, 1.0, 0.5]);
        let none = Overrides::new();
        for seed in 0..500 {
            let w = sample_realization(&m, seed, &none).unwrap();
            assert_eq!(w.state(0), EdgeState::Open);
            assert_eq!(w.state(1), EdgeState::Blocked);
        }
        let a = sample_realization(&m, 99, &none).unwrap();
        let b = sample_realization(&m, 99, &none).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn overrides_force_state_without_shifting_others() {
        let m = model(&[0.0, 1.0, 0.5, 0.5]);
        let mut forced = Overrides::new();
        forced.insert("e0".into(), EdgeState::Blocked);
        forced.insert("e1".into(), EdgeState::Open);
        for seed in 0..200 {
            let free = sample_realization(&m, seed, &Overrides::new()).unwrap();
            let w = sample_realization(&m, seed, &forced).unwrap();
            assert_eq!(w.state(0), EdgeState::Blocked);
            assert_eq!(w.state(1), EdgeState::Open);
            assert_eq!(&w.states()[2..], &free.states()[2..]);
        }
        let mut bad = Overrides::new();
        bad.insert("nope".into(), EdgeState::Open);
        assert!(matches!(sample_realization(&m, 0, &bad), Err(Error::UnknownEdge(_))));
    }

    #[test]
    fn empirical_frequencies_within_four_standard_errors() {
        let probs = [0.1, 0.5, 0.9];
        let m = model(&probs);
        let n = 100_000u64;
        let mut blocked = [0u64; 3];
        let mut joint = 0u64;
        for seed in 0..n {
            let w = sample_realization(&m, rng::derive_seed(2024, seed), &Overrides::new()).unwrap();
            for (i, count) in blocked.iter_mut().enumerate() {
                *count += (w.state(i) == EdgeState::Blocked) as u64;
            }
            joint += (w.state(0) == EdgeState::Blocked && w.state(1) == EdgeState::Blocked) as u64;
        }
        let nf = n as f64;
        for (i, &p) in probs.iter().enumerate() {
            let freq = blocked[i] as f64 / nf;
            let se = (p * (1.0 - p) / nf).sqrt();
            assert!((freq - p).abs() <= 4.0 * se, "edge {i}: {freq} vs {p}");
        }
        // correlation of indicator variables; its standard error under
        // independence is 1/sqrt(n)
        let (f0, f1) = (blocked[0] as f64 / nf, blocked[1] as f64 / nf);
        let cov = joint as f64 / nf - f0 * f1;
        let corr = cov / (f0 * (1.0 - f0) * f1 * (1.0 - f1)).sqrt();
        assert!(corr.abs() <= 4.0 / nf.sqrt(), "correlation {corr}");
    }

    #[test]
    fn model_alignment() {
        let net = crate::network::load_network(
            r#"{"nodes":["A","B","C"],"edges":[
                {"id":"x","u":"A","v":"B","cost":1},{"id":"y","u":"B","v":"C","cost":1}]}"#,
        )
        .unwrap();
        let m = BlockageModel::new(vec!["y".into(), "x".into()], vec![0.2, 0.7]).unwrap();
        assert_eq!(m.aligned_probabilities(&net).unwrap(), [0.7, 0.2]);
        let partial = BlockageModel::new(vec!["y".into()], vec![0.2]).unwrap();
        assert!(matches!(partial.aligned_probabilities(&net), Err(Error::Validation(_))));
        let extra = BlockageModel::new(vec!["x".into(), "y".into(), "z".into()], vec![0.0; 3]).unwrap();
        assert!(matches!(extra.aligned_probabilities(&net), Err(Error::UnknownEdge(_))));
        assert!(BlockageModel::new(vec!["x".into()], vec![1.2]).is_err());
        assert_eq!(BlockageModel::from_network(&net).probabilities(), [0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn row_permutation_permutes_probabilities(
            rows in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 2), 1..8),
            beta in proptest::collection::vec(-2.0f64..2.0, 2),
            rotate in 0usize..8,
        ) {
            let z = CovariateMatrix::from_rows(rows).unwrap();
            let beta = BetaVector::new(beta).unwrap();
            let n = z.rows();
            let order: Vec<usize> = (0..n).map(|i| (i + rotate) % n).collect();
            let base = blockage_probabilities(&z, &beta).unwrap();
            let permuted = blockage_probabilities(&z.permute_rows(&order).unwrap(), &beta).unwrap();
            for (i, &src) in order.iter().enumerate() {
                prop_assert_eq!(permuted.probabilities()[i], base.probabilities()[src]);
                prop_assert_eq!(&permuted.edge_ids()[i], &base.edge_ids()[src]);
            }
        }
    }
}
