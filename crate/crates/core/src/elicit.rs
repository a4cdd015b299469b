//! Expert elicitation of a normal prior on logistic-regression coefficients.
//!
//! Experts give a blockage probability per road. On the log-odds scale these
//! are regressed on the road covariates by least squares; the fitted normal
//! `N((Z'Z)^-1 Z'P, (Z'Z)^-1 s^2)` is the prior. When the experts supply a
//! distribution rather than point values, each draw is fitted and sampled in
//! turn and the samples are pooled with equal weight.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::blockage::{logistic, CovariateMatrix};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, generator};
use crate::stats::quantile_sorted;

/// Default clamp for probabilities of exactly 0 or 1.
pub const DEFAULT_CLAMP: f64 = 1e-6;

/// Relative size below which an R diagonal entry marks a dependent column.
const RANK_TOL: f64 = 1e-10;
/// Relative tolerance for negative eigenvalues of a covariance.
const PSD_TOL: f64 = 1e-10;

/// Log-odds of `p`, after clamping it into `[eps, 1 - eps]`.
pub fn logit(p: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Domain(format!("clamp bound must lie in (0, 0.5), got {eps}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    let p = p.clamp(eps, 1.0 - eps);
    Ok((p / (1.0 - p)).ln())
}

pub fn inverse_logit(x: f64) -> f64 {
    logistic(x)
}

/// Expert log-odds, one per road, remembering which inputs were clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitVector {
    values: Vec<f64>,
    clamped: Vec<usize>,
}

impl LogitVector {
    pub fn from_probabilities(probs: &[f64], eps: f64) -> Result<Self> {
        let values = probs.iter().map(|&p| logit(p, eps)).collect::<Result<Vec<_>>>()?;
        let clamped = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p < eps || p > 1.0 - eps)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { values, clamped })
    }

    pub fn from_logits(values: Vec<f64>) -> Result<Self> {
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("log-odds must be finite, got {x}")));
        }
        Ok(Self {
            values,
            clamped: Vec::new(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Positions whose probability was moved onto the clamp bound.
    pub fn clamped(&self) -> &[usize] {
        &self.clamped
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Normal prior on the coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaPrior {
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
    sigma2: f64,
    df: usize,
    degenerate: bool,
}

impl BetaPrior {
    /// Assembles a prior, checking shape and symmetry.
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>, sigma2: f64, df: usize) -> Result<Self> {
        let k = mean.len();
        if covariance.nrows() != k || covariance.ncols() != k {
            return Err(Error::DimensionMismatch(format!(
                "mean has {k} entries but covariance is {}x{}",
                covariance.nrows(),
                covariance.ncols()
            )));
        }
        if !(sigma2 >= 0.0) || mean.iter().chain(covariance.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Validation("prior parameters must be finite with sigma2 >= 0".into()));
        }
        let scale = covariance.amax().max(1.0);
        for i in 0..k {
            if covariance[(i, i)] < 0.0 {
                return Err(Error::Validation("covariance has a negative variance".into()));
            }
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Validation("covariance is not symmetric".into()));
                }
            }
        }
        Ok(Self {
            mean,
            covariance,
            sigma2,
            df,
            degenerate: df == 0,
        })
    }

    /// Normal prior with the same first two moments as an equal-weight
    /// mixture of `components`.
    pub fn moment_mixture(components: &[BetaPrior]) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Validation("mixture needs at least one component".into()))?;
        if components.len() == 1 {
            return Ok(first.clone());
        }
        let k = first.mean.len();
        let m = components.len() as f64;
        let mut mean = DVector::zeros(k);
        let mut second = DMatrix::zeros(k, k);
        let mut sigma2 = 0.0;
        for c in components {
            if c.mean.len() != k {
                return Err(Error::DimensionMismatch("mixture components differ in size".into()));
            }
            let mu = DVector::from_column_slice(&c.mean);
            second += &c.covariance + &mu * mu.transpose();
            mean += mu;
            sigma2 += c.sigma2;
        }
        mean /= m;
        second /= m;
        let mut covariance = second - &mean * mean.transpose();
        symmetrize(&mut covariance);
        let mut prior = Self::new(mean.iter().copied().collect(), covariance, sigma2 / m, first.df)?;
        prior.degenerate = components.iter().any(|c| c.degenerate);
        Ok(prior)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Residual variance estimate.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Residual degrees of freedom, `n - k`.
    pub fn df(&self) -> usize {
        self.df
    }

    /// Set when the fit had no residual degrees of freedom (`n = k`); the
    /// covariance is then zero.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn standard_deviations(&self) -> Vec<f64> {
        (0..self.dimension())
            .map(|i| self.covariance[(i, i)].max(0.0).sqrt())
            .collect()
    }
}

/// Least-squares fit of expert log-odds on covariates, via Householder QR.
pub fn fit_prior(z: &CovariateMatrix, p: &LogitVector) -> Result<BetaPrior> {
    let (n, k) = (z.rows(), z.columns());
    if p.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n} covariate rows but {} expert values",
            p.len()
        )));
    }
    if n < k {
        return Err(Error::DimensionMismatch(format!(
            "{n} rows cannot identify {k} coefficients"
        )));
    }
    let qr = z.matrix().clone().qr();
    let r = qr.r();
    let largest = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let dependent: Vec<String> = (0..k)
        .filter(|&i| !(r[(i, i)].abs() > RANK_TOL * largest))
        .map(|i| z.column_names()[i].clone())
        .collect();
    if !dependent.is_empty() {
        return Err(Error::RankDeficient { columns: dependent });
    }

    let target = DVector::from_column_slice(p.values());
    let qtp = qr.q().transpose() * &target;
    let mean = r
        .solve_upper_triangular(&qtp)
        .expect("triangular factor has a nonzero diagonal");
    let residual = &target - z.matrix() * &mean;
    let df = n - k;
    let sigma2 = if df == 0 {
        0.0
    } else {
        residual.norm_squared() / df as f64
    };
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .expect("triangular factor has a nonzero diagonal");
    let mut covariance = &r_inv * r_inv.transpose() * sigma2;
    symmetrize(&mut covariance);
    BetaPrior::new(mean.iter().copied().collect(), covariance, sigma2, df)
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m = (&*m + t) * 0.5;
}

/// Where a coefficient sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    SinglePrior,
    MixedOverExpertDraws,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SinglePrior => "single_prior",
            Self::MixedOverExpertDraws => "mixed_over_expert_draws",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaSample {
    draws: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl BetaSample {
    pub fn new(draws: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self> {
        let k = draws
            .first()
            .ok_or_else(|| Error::Validation("a coefficient sample needs at least one draw".into()))?
            .len();
        if draws.iter().any(|d| d.len() != k) {
            return Err(Error::DimensionMismatch("draws differ in length".into()));
        }
        if draws.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Validation("non-finite coefficient draw".into()));
        }
        Ok(Self { draws, provenance })
    }

    pub fn draws(&self) -> &[Vec<f64>] {
        &self.draws
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.draws[0].len()
    }
}

/// `m` independent draws from the prior, via a symmetric eigendecomposition
/// of the covariance (which tolerates singular covariances).
pub fn sample_beta(prior: &BetaPrior, m: usize, seed: u64) -> Result<BetaSample> {
    let draws = gaussian_draws(prior, m, seed)?;
    BetaSample::new(draws, Provenance::SinglePrior)
}

fn gaussian_draws(prior: &BetaPrior, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m == 0 {
        return Err(Error::Validation("sample size must be at least 1".into()));
    }
    let cov = prior.covariance();
    if cov.iter().all(|&x| x == 0.0) {
        return Ok(vec![prior.mean.clone(); m]);
    }
    let eigen = SymmetricEigen::new(cov.clone());
    let largest = eigen.eigenvalues.amax();
    let smallest = eigen.eigenvalues.min();
    if smallest < -PSD_TOL * largest.max(1.0) {
        return Err(Error::NotPsd {
            min_eigenvalue: smallest,
        });
    }
    let roots = eigen.eigenvalues.map(|l| l.max(0.0).sqrt());
    let factor = &eigen.eigenvectors * DMatrix::from_diagonal(&roots);
    let mean = DVector::from_column_slice(&prior.mean);
    let k = prior.dimension();
    let mut rng = generator(seed);
    Ok((0..m)
        .map(|_| {
            let normal = DVector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
            (&mean + &factor * normal).iter().copied().collect()
        })
        .collect())
}

/// Fits one prior per expert draw, samples `per_draw` coefficient vectors
/// from each, and pools them with equal weight in draw order.
pub fn mix_experts(
    z: &CovariateMatrix,
    expert_draws: &[LogitVector],
    per_draw: usize,
    seed: u64,
) -> Result<BetaSample> {
    if expert_draws.is_empty() {
        return Err(Error::Validation("at least one expert draw is required".into()));
    }
    let priors = expert_draws
        .iter()
        .map(|p| fit_prior(z, p))
        .collect::<Result<Vec<_>>>()?;
    let pooled = priors
        .par_iter()
        .enumerate()
        .map(|(j, prior)| gaussian_draws(prior, per_draw, derive_seed(seed, j as u64)))
        .collect::<Result<Vec<_>>>()?;
    BetaSample::new(pooled.concat(), Provenance::MixedOverExpertDraws)
}

/// Distribution of one road's blockage probability across coefficient draws.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilitySummary {
    pub edge_id: String,
    pub mean: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// Pushes each coefficient draw through the logistic link for every road.
pub fn pushforward_probabilities(z: &CovariateMatrix, sample: &BetaSample) -> Result<Vec<ProbabilitySummary>> {
    if sample.dimension() != z.columns() {
        return Err(Error::DimensionMismatch(format!(
            "{} covariate columns but draws of length {}",
            z.columns(),
            sample.dimension()
        )));
    }
    let mut per_road = vec![Vec::with_capacity(sample.len()); z.rows()];
    for beta in sample.draws() {
        for (road, eta) in z.linear_predictor(beta)?.into_iter().enumerate() {
            per_road[road].push(inverse_logit(eta));
        }
    }
    Ok(per_road
        .into_iter()
        .zip(z.row_ids())
        .map(|(mut probs, id)| {
            let mean = probs.iter().sum::<f64>() / probs.len() as f64;
            probs.sort_by(f64::total_cmp);
            ProbabilitySummary {
                edge_id: id.clone(),
                mean,
                q05: quantile_sorted(&probs, 0.05),
                q50: quantile_sorted(&probs, 0.5),
                q95: quantile_sorted(&probs, 0.95),
            }
        })
        .collect())
}
