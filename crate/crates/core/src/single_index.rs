//! Single-index Fréchet regression for multivariate predictors.
//!
//! A unit direction with positive first coordinate is estimated by
//! minimizing, over a binned subsample, the squared distance between each
//! bin representative and the locally weighted Fréchet mean at its projected
//! covariate. Covariates are then replaced by their projections and the
//! scalar conformal pipeline applies unchanged.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{split_fit_projected, ConformalModel, FitConfig, ScoreKind, SplitPlan};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, KernelFamily, KernelSpec};
use crate::simulate::child_seed;
use crate::smooth::widened_weights;
use crate::spaces::{distance, frechet_mean, ObjectPoint};

/// Margin keeping the first spherical angle strictly inside (-pi/2, pi/2).
const ANGLE_MARGIN: f64 = 1e-9;

/// Unit direction in R^d with positive first coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexParameter {
    theta: Vec<f64>,
}

impl IndexParameter {
    /// Validate an already-normalized direction.
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidConfig("empty index direction".into()));
        }
        let norm = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidConfig(format!("direction norm {norm} is not 1")));
        }
        if theta[0] <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "first coordinate {} must be positive",
                theta[0]
            )));
        }
        Ok(Self { theta })
    }

    /// Normalize and flip the sign so the constraints hold exactly.
    pub fn from_unnormalized(v: Vec<f64>) -> Result<Self> {
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidConfig("zero-length index direction".into()));
        }
        let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
        let theta: Vec<f64> = v.iter().map(|t| sign * t / norm).collect();
        if theta[0] <= 0.0 {
            return Err(Error::InvalidConfig(
                "direction is orthogonal to the first axis; sign convention undefined".into(),
            ));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn project(&self, cov: &[f64]) -> Result<f64> {
        if cov.len() != self.theta.len() {
            return Err(Error::InvalidConfig(format!(
                "covariate has {} coordinates, direction has {}",
                cov.len(),
                self.theta.len()
            )));
        }
        Ok(cov.iter().zip(&self.theta).map(|(a, b)| a * b).sum())
    }

    /// Squared distance to another unit vector.
    pub fn mse(&self, other: &[f64]) -> f64 {
        self.theta
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Equal-width bins over the projected range with one representative per
/// nonempty bin (the sample whose projection is closest to the bin
/// midpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinPlan {
    pub edges: Vec<f64>,
    pub representatives: Vec<Option<usize>>,
}

impl BinPlan {
    pub fn build(projections: &[f64], m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 bins, got {m}")));
        }
        let lo = projections.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = projections.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidConfig("non-finite projections".into()));
        }
        let width = if hi > lo { (hi - lo) / m as f64 } else { 1.0 };
        let edges: Vec<f64> = (0..=m).map(|b| lo + b as f64 * width).collect();
        let mut representatives: Vec<Option<usize>> = vec![None; m];
        let mut best: Vec<f64> = vec![f64::INFINITY; m];
        for (i, &p) in projections.iter().enumerate() {
            let b = (((p - lo) / width).floor() as isize).clamp(0, m as isize - 1) as usize;
            let mid = lo + (b as f64 + 0.5) * width;
            let gap = (p - mid).abs();
            if gap < best[b] {
                best[b] = gap;
                representatives[b] = Some(i);
            }
        }
        Ok(Self {
            edges,
            representatives,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.representatives.len()
    }
}

/// Options for the index-direction search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleIndexConfig {
    pub kernel: KernelFamily,
    pub bandwidth: Bandwidth,
    /// Bin count; `None` resolves to `floor(1.5 * n^(1/4))` (at least 2).
    /// Fewer bins leave the direction search too noisy, many more start to
    /// track the anchors' own noise.
    pub bins: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for SingleIndexConfig {
    fn default() -> Self {
        Self {
            kernel: KernelFamily::Epanechnikov,
            bandwidth: Bandwidth::default(),
            bins: None,
            restarts: 8,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

impl SingleIndexConfig {
    fn resolve_bins(&self, n: usize) -> usize {
        self.bins
            .unwrap_or(((1.5 * (n as f64).powf(0.25)).floor() as usize).max(2))
    }
}

/// Fitted direction with optimizer diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaFit {
    pub theta: IndexParameter,
    pub objective: f64,
    /// Final objective of each restart, in start order.
    pub start_objectives: Vec<f64>,
    /// Best-so-far objective per iteration of the winning restart.
    pub best_trace: Vec<f64>,
    /// Bin plan under the winning direction.
    pub bin_plan: BinPlan,
}

/// Locally weighted Fréchet mean of the responses at projected covariate
/// `t`, using the same local linear weights as the profile estimators.
pub fn local_frechet_fit(
    dataset: &Dataset,
    theta: &IndexParameter,
    t: f64,
    kernel: &KernelSpec,
) -> Result<ObjectPoint> {
    if !dataset.space.has_mean() {
        return Err(Error::Unsupported {
            space: dataset.space.name(),
            op: "local_frechet_fit",
        });
    }
    let projections: Vec<f64> = dataset
        .covariates
        .iter()
        .map(|row| theta.project(row))
        .collect::<Result<_>>()?;
    let w = widened_weights(t, &projections, kernel)?;
    let points: Vec<ObjectPoint> = w
        .support
        .iter()
        .map(|&(j, _)| dataset.objects[j].clone())
        .collect();
    let weights: Vec<f64> = w.support.iter().map(|&(_, wj)| wj).collect();
    frechet_mean(&dataset.space, &points, &weights)
}

/// Binned objective: mean squared distance between bin representatives and
/// the local Fréchet fit at their projections. Infinite when the direction
/// leaves the parameter space or a mean fails.
fn objective(dataset: &Dataset, angles: &[f64], cfg: &SingleIndexConfig, m: usize) -> f64 {
    if angles[0].abs() >= std::f64::consts::FRAC_PI_2 - ANGLE_MARGIN {
        return f64::INFINITY;
    }
    let theta = theta_from_angles(angles);
    let projections: Vec<f64> = dataset
        .covariates
        .iter()
        .map(|row| row.iter().zip(&theta).map(|(a, b)| a * b).sum())
        .collect();
    let Ok(h) = cfg.bandwidth.resolve(&projections) else {
        return f64::INFINITY;
    };
    let Ok(kernel) = KernelSpec::new(cfg.kernel, h) else {
        return f64::INFINITY;
    };
    let Ok(plan) = BinPlan::build(&projections, m) else {
        return f64::INFINITY;
    };

    let mut loss = 0.0;
    let mut used = 0usize;
    for rep in plan.representatives.iter().flatten() {
        let t = projections[*rep];
        let Ok(w) = widened_weights(t, &projections, &kernel) else {
            return f64::INFINITY;
        };
        let points: Vec<ObjectPoint> = w
            .support
            .iter()
            .map(|&(j, _)| dataset.objects[j].clone())
            .collect();
        let weights: Vec<f64> = w.support.iter().map(|&(_, wj)| wj).collect();
        let Ok(mean) = frechet_mean(&dataset.space, &points, &weights) else {
            return f64::INFINITY;
        };
        let Ok(d) = distance(&dataset.space, &dataset.objects[*rep], &mean) else {
            return f64::INFINITY;
        };
        loss += d * d;
        used += 1;
    }
    if used == 0 {
        return f64::INFINITY;
    }
    loss / used as f64
}

/// Spherical-angle parametrization of the unit hemisphere: the first angle
/// sets the positive first coordinate, the remaining angles are free.
fn theta_from_angles(angles: &[f64]) -> Vec<f64> {
    let d = angles.len() + 1;
    let mut theta = vec![0.0; d];
    let mut sin_prod = 1.0;
    for (i, &phi) in angles.iter().enumerate() {
        theta[i] = sin_prod * phi.cos();
        sin_prod *= phi.sin();
    }
    theta[d - 1] = sin_prod;
    theta
}

/// Estimate the index direction by seeded Nelder-Mead restarts over the
/// angle parametrization; the winner is the best (objective, start index)
/// pair, projected back onto the constraint set exactly.
pub fn estimate_theta(dataset: &Dataset, cfg: &SingleIndexConfig, seed: u64) -> Result<ThetaFit> {
    let d = dataset.dim();
    if d < 2 {
        return Err(Error::InvalidConfig(format!("single index needs d >= 2, got d = {d}")));
    }
    if !dataset.space.has_mean() {
        return Err(Error::Unsupported {
            space: dataset.space.name(),
            op: "estimate_theta",
        });
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidConfig("need at least one restart".into()));
    }
    let m = cfg.resolve_bins(dataset.len());
    let f = |angles: &[f64]| objective(dataset, angles, cfg, m);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..cfg.restarts)
        .map(|_| {
            let mut angles = vec![0.0; d - 1];
            angles[0] = rng.random_range(-1.2..1.2);
            for a in angles.iter_mut().skip(1) {
                *a = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            }
            angles
        })
        .collect();

    let results: Vec<NmResult> = starts
        .par_iter()
        .map(|x0| nelder_mead(&f, x0, 0.3, cfg.max_iters, cfg.tol))
        .collect();

    let (winner_idx, winner) = results
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.fx.total_cmp(&b.fx).then(ia.cmp(ib)))
        .expect("at least one restart");
    if !winner.fx.is_finite() {
        return Err(Error::NotConverged {
            what: "index direction search",
            cap: cfg.max_iters,
        });
    }

    let theta = IndexParameter::from_unnormalized(theta_from_angles(&winner.x))?;
    let projections: Vec<f64> = dataset
        .covariates
        .iter()
        .map(|row| theta.project(row))
        .collect::<Result<_>>()?;
    let bin_plan = BinPlan::build(&projections, m)?;

    Ok(ThetaFit {
        theta,
        objective: winner.fx,
        start_objectives: results.iter().map(|r| r.fx).collect(),
        best_trace: results[winner_idx].trace.clone(),
        bin_plan,
    })
}

/// Replace each covariate by its projection and run the scalar split
/// conformal fit; the direction is recorded on the model so covariates are
/// projected consistently at prediction time.
pub fn project_and_fit(
    dataset: &Dataset,
    theta: &IndexParameter,
    config: &FitConfig,
    alpha: f64,
    seed: u64,
) -> Result<ConformalModel> {
    let xs: Vec<f64> = dataset
        .covariates
        .iter()
        .map(|row| theta.project(row))
        .collect::<Result<_>>()?;
    split_fit_projected(
        dataset.space.clone(),
        &xs,
        &dataset.objects,
        Some(theta.theta().to_vec()),
        config,
        alpha,
        seed,
        ScoreKind::Cps,
    )
}

/// Full single-index pipeline: split once, estimate the direction on the
/// training half only, project everything, and calibrate. Estimating on the
/// training half keeps the calibration scores exchangeable with future test
/// scores.
pub fn single_index_fit(
    dataset: &Dataset,
    config: &FitConfig,
    si_config: &SingleIndexConfig,
    alpha: f64,
    seed: u64,
) -> Result<(ConformalModel, ThetaFit)> {
    let plan = SplitPlan::new(dataset.len(), config.train_frac, seed)?;
    let train = dataset.subset(&plan.train)?;
    let fit = estimate_theta(&train, si_config, child_seed(seed, 0x7e7a))?;
    let model = project_and_fit(dataset, &fit.theta, config, alpha, seed)?;
    Ok((model, fit))
}

struct NmResult {
    x: Vec<f64>,
    fx: f64,
    trace: Vec<f64>,
}

/// Nelder-Mead over R^dim (dim >= 1) with the standard reflection,
/// expansion, contraction and shrink coefficients. Infinite objective values
/// are legal and simply rank worst.
fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> NmResult {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    let mut trace = Vec::with_capacity(max_iters);
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        trace.push(best);
        if best.is_finite() && worst.is_finite() && (worst - best).abs() <= tol * (1.0 + best.abs())
        {
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for (x, _) in simplex.iter().take(dim) {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let combine = |a: f64, b: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| a * c + b * w)
                .collect()
        };

        let reflected = combine(2.0, -1.0);
        let f_r = f(&reflected);
        if f_r < simplex[0].1 {
            let expanded = combine(3.0, -2.0);
            let f_e = f(&expanded);
            simplex[dim] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
            continue;
        }
        if f_r < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_r);
            continue;
        }
        let contracted = if f_r < simplex[dim].1 {
            combine(1.5, -0.5) // outside
        } else {
            combine(0.5, 0.5) // inside
        };
        let f_c = f(&contracted);
        if f_c < simplex[dim].1.min(f_r) {
            simplex[dim] = (contracted, f_c);
            continue;
        }
        // shrink toward the best vertex
        let best_x = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            for (xi, bi) in v.0.iter_mut().zip(&best_x) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            v.1 = f(&v.0);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    NmResult { x, fx, trace }
}
