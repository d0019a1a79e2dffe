//! Seeded data generators and the Monte Carlo experiment harness.
//!
//! Generators cover nonlinear scalar regression with homoscedastic,
//! heteroscedastic and bimodal errors, sphere-valued and distribution-valued
//! responses, their multivariate-predictor analogues, and the illustration
//! clouds (3-spider, bimodal sphere, Gaussian quantile curves, a planar
//! Gaussian mixture). Identical specs produce identical datasets; Monte
//! Carlo runs derive per-run seeds from one root seed so serial and parallel
//! execution agree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conformal::{evaluate_coverage, split_fit, FitConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::Bandwidth;
use crate::single_index::{estimate_theta, single_index_fit, SingleIndexConfig};
use crate::spaces::{
    candidate_grid, exp_map_sphere, normal_quantiles, quantile_levels, transport_from_fn,
    truncated_normal_quantiles, GridBounds, MetricSpaceDescriptor, ObjectPoint,
};
use crate::transport::{transport_add, transport_scale, TransportMap};

/// Grid resolution for the internal transport-map representation used by the
/// distributional generator.
const TRANSPORT_GRID: usize = 201;
/// Quantile-grid size of generated distributional responses.
const WASSERSTEIN_M: usize = 100;

/// Derive a child seed from a root seed and an index (SplitMix64 finalizer),
/// so parallel and serial Monte Carlo execution draw identical streams.
pub fn child_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Data-generating scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingId {
    /// Nonlinear regression, constant noise scale.
    ScalarHomoscedastic,
    /// Same regression function, noise scale 0.5 left of zero and 0.1 right.
    ScalarHeteroscedastic,
    /// Two branches with probability 1/2 each for positive covariates.
    ScalarBimodal,
    /// Sphere responses along a covariate-indexed great circle.
    SphereCurve,
    /// Distributional responses: truncated normal composed with transport noise.
    DistributionTransport,
    /// Planar predictor, response through the first coordinate, constant noise.
    MultiHomoscedastic,
    /// Planar predictor, change-point noise scale.
    MultiHeteroscedastic,
    /// Planar predictor, two branches.
    MultiBimodal,
    /// Four-dimensional predictor, sphere responses.
    MultiSphere,
    /// 3-spider cloud for illustration.
    SpiderCloud,
    /// Two-mode sphere cloud for illustration.
    SphereBimodal,
    /// Gaussian quantile curves with random location and scale.
    WassersteinCloud,
    /// Two-component planar Gaussian mixture.
    PlaneMixture,
}

impl SettingId {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "1" => SettingId::ScalarHomoscedastic,
            "2" => SettingId::ScalarHeteroscedastic,
            "3" => SettingId::ScalarBimodal,
            "4" => SettingId::SphereCurve,
            "5" => SettingId::DistributionTransport,
            "6" => SettingId::MultiHomoscedastic,
            "7" => SettingId::MultiHeteroscedastic,
            "8" => SettingId::MultiBimodal,
            "9" => SettingId::MultiSphere,
            "fig-spider" => SettingId::SpiderCloud,
            "fig-sphere-bimodal" => SettingId::SphereBimodal,
            "fig-wass" => SettingId::WassersteinCloud,
            "fig-2d-mixture" => SettingId::PlaneMixture,
            other => return Err(Error::InvalidConfig(format!("unknown setting id: {other}"))),
        })
    }

    pub fn id(&self) -> &'static str {
        match self {
            SettingId::ScalarHomoscedastic => "1",
            SettingId::ScalarHeteroscedastic => "2",
            SettingId::ScalarBimodal => "3",
            SettingId::SphereCurve => "4",
            SettingId::DistributionTransport => "5",
            SettingId::MultiHomoscedastic => "6",
            SettingId::MultiHeteroscedastic => "7",
            SettingId::MultiBimodal => "8",
            SettingId::MultiSphere => "9",
            SettingId::SpiderCloud => "fig-spider",
            SettingId::SphereBimodal => "fig-sphere-bimodal",
            SettingId::WassersteinCloud => "fig-wass",
            SettingId::PlaneMixture => "fig-2d-mixture",
        }
    }

    /// Covariate dimension d.
    pub fn covariate_dim(&self) -> usize {
        match self {
            SettingId::MultiHomoscedastic | SettingId::MultiHeteroscedastic | SettingId::MultiBimodal => 2,
            SettingId::MultiSphere => 4,
            _ => 1,
        }
    }

    /// The true index direction, for settings defined through one.
    pub fn true_theta(&self) -> Option<Vec<f64>> {
        match self {
            SettingId::MultiHomoscedastic | SettingId::MultiHeteroscedastic | SettingId::MultiBimodal => {
                Some(vec![1.0, 0.0])
            }
            SettingId::MultiSphere => Some(vec![1.0, 0.0, 0.0, 0.0]),
            _ => None,
        }
    }

    pub fn space(&self) -> MetricSpaceDescriptor {
        match self {
            SettingId::ScalarHomoscedastic
            | SettingId::ScalarHeteroscedastic
            | SettingId::ScalarBimodal
            | SettingId::MultiHomoscedastic
            | SettingId::MultiHeteroscedastic
            | SettingId::MultiBimodal => MetricSpaceDescriptor::euclidean(1),
            SettingId::SphereCurve | SettingId::MultiSphere | SettingId::SphereBimodal => {
                MetricSpaceDescriptor::Sphere2
            }
            SettingId::DistributionTransport => {
                MetricSpaceDescriptor::wasserstein(WASSERSTEIN_M, [0.0, 1.0])
            }
            SettingId::WassersteinCloud => {
                MetricSpaceDescriptor::wasserstein(WASSERSTEIN_M, [-3.8, 3.8])
            }
            SettingId::PlaneMixture => MetricSpaceDescriptor::euclidean(2),
            SettingId::SpiderCloud => MetricSpaceDescriptor::Spider3,
        }
    }

    /// A sensible default candidate-grid extent for prediction sets.
    pub fn default_grid_bounds(&self) -> Option<GridBounds> {
        match self.space() {
            MetricSpaceDescriptor::Euclidean { k: 1 } => Some(GridBounds::Interval(-1.5, 3.5)),
            MetricSpaceDescriptor::Euclidean { k: 2 } => {
                Some(GridBounds::Box(vec![(-4.5, 4.5), (-4.5, 4.5)]))
            }
            MetricSpaceDescriptor::Sphere2 => Some(GridBounds::None),
            MetricSpaceDescriptor::Wasserstein1d { support, .. } => {
                let pad = 0.1 * (support[1] - support[0]);
                Some(GridBounds::GaussianFamily {
                    mu: (support[0] + pad, support[1] - pad),
                    sigma: (0.05 * (support[1] - support[0]), 0.4 * (support[1] - support[0])),
                })
            }
            _ => None,
        }
    }
}

impl std::fmt::Display for SettingId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// A fully determined synthetic dataset: setting, size and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub setting: SettingId,
    pub n: usize,
    pub seed: u64,
}

fn regression_fn(x: f64) -> f64 {
    (x - 1.0) * (x - 1.0) * (x + 1.0)
}

fn branch_offset(x: f64) -> f64 {
    if x >= 0.0 {
        2.0 * x.sqrt()
    } else {
        0.0
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Scalar response laws shared by the univariate and projected settings.
fn scalar_response(setting: SettingId, t: f64, rng: &mut ChaCha8Rng) -> f64 {
    let f = regression_fn(t);
    match setting {
        SettingId::ScalarHomoscedastic | SettingId::MultiHomoscedastic => {
            f + 0.1 * standard_normal(rng)
        }
        SettingId::ScalarHeteroscedastic | SettingId::MultiHeteroscedastic => {
            let sd = if t <= 0.0 { 0.5 } else { 0.1 };
            f + sd * standard_normal(rng)
        }
        SettingId::ScalarBimodal | SettingId::MultiBimodal => {
            let g = branch_offset(t);
            let mean = if rng.random_bool(0.5) { f + g } else { f - 0.2 * g };
            mean + 0.1 * standard_normal(rng)
        }
        _ => unreachable!("not a scalar setting"),
    }
}

fn sphere_response(t: f64, rng: &mut ChaCha8Rng) -> Result<ObjectPoint> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mu = [(half_pi * t).sin(), (half_pi * t).cos(), 0.0];
    let eps = 0.5 * standard_normal(rng);
    let v = [0.0, 0.0, eps];
    Ok(ObjectPoint::Sphere2(exp_map_sphere(&mu, &v)?))
}

/// CDF of Beta(2, 2) on [0, 1].
fn beta22_cdf(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

fn distribution_response(t: f64, rng: &mut ChaCha8Rng) -> Result<ObjectPoint> {
    let mu = 0.8 * regression_fn(t);
    let grid: Vec<f64> = (0..TRANSPORT_GRID)
        .map(|i| i as f64 / (TRANSPORT_GRID - 1) as f64)
        .collect();
    let base = TransportMap::new(truncated_normal_quantiles(mu, 0.5, [0.0, 1.0], &grid)?)?;
    let alpha = rng.random_range(-0.5..0.5);
    let noise = transport_scale(alpha, &transport_from_fn(TRANSPORT_GRID, beta22_cdf)?)?;
    let composed = transport_add(&base, &noise)?;
    let q: Vec<f64> = quantile_levels(WASSERSTEIN_M)
        .iter()
        .map(|&u| composed.eval(u))
        .collect();
    Ok(ObjectPoint::Wasserstein1d(q))
}

fn cholesky2(s: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let l11 = s[0][0].sqrt();
    let l21 = s[1][0] / l11;
    let l22 = (s[1][1] - l21 * l21).sqrt();
    [[l11, 0.0], [l21, l22]]
}

/// Generate the dataset determined by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.setting.covariate_dim();
    let mut covariates = Vec::with_capacity(spec.n);
    let mut objects = Vec::with_capacity(spec.n);

    for _ in 0..spec.n {
        let cov: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let t = cov[0]; // every multivariate setting projects onto e1
        let y = match spec.setting {
            SettingId::ScalarHomoscedastic
            | SettingId::ScalarHeteroscedastic
            | SettingId::ScalarBimodal
            | SettingId::MultiHomoscedastic
            | SettingId::MultiHeteroscedastic
            | SettingId::MultiBimodal => ObjectPoint::scalar(scalar_response(spec.setting, t, &mut rng)),
            SettingId::SphereCurve | SettingId::MultiSphere => sphere_response(t, &mut rng)?,
            SettingId::DistributionTransport => distribution_response(t, &mut rng)?,
            SettingId::SpiderCloud => {
                let ray = rng.random_range(1..=3u8);
                let len = (0.6 + 0.3 * t + 0.25 * standard_normal(&mut rng)).abs();
                ObjectPoint::Spider3 { ray, len }
            }
            SettingId::SphereBimodal => {
                let sd = 0.2f64.sqrt();
                if rng.random_bool(0.5) {
                    let (e1, e2) = (sd * standard_normal(&mut rng), sd * standard_normal(&mut rng));
                    ObjectPoint::Sphere2(exp_map_sphere(&[1.0, 0.0, 0.0], &[0.0, e1, e2])?)
                } else {
                    let (e3, e4) = (sd * standard_normal(&mut rng), sd * standard_normal(&mut rng));
                    ObjectPoint::Sphere2(exp_map_sphere(&[0.0, 1.0, 0.0], &[e3, 0.0, e4])?)
                }
            }
            SettingId::WassersteinCloud => {
                let mu = rng.random_range(-0.8..0.8);
                let sd = rng.random_range(0.25..0.75);
                ObjectPoint::Wasserstein1d(normal_quantiles(mu, sd, &quantile_levels(WASSERSTEIN_M)))
            }
            SettingId::PlaneMixture => {
                let (mean, sigma) = if rng.random_bool(0.5) {
                    ([2.0, 2.0], [[0.5, -0.3], [-0.3, 0.3]])
                } else {
                    ([-2.0, -2.0], [[0.5, 0.0], [0.0, 0.3]])
                };
                let l = cholesky2(sigma);
                let (z1, z2) = (standard_normal(&mut rng), standard_normal(&mut rng));
                ObjectPoint::Euclidean(vec![
                    mean[0] + l[0][0] * z1,
                    mean[1] + l[1][0] * z1 + l[1][1] * z2,
                ])
            }
        };
        covariates.push(cov);
        objects.push(y);
    }
    Dataset::new(spec.setting.space(), covariates, objects)
}

/// Candidate grid request for set-size evaluation.
#[derive(Debug, Clone)]
pub struct CandidateSpec {
    pub resolution: usize,
    pub bounds: GridBounds,
}

/// What each Monte Carlo run computes.
#[derive(Debug, Clone)]
pub struct MonteCarloConfig {
    pub fit: FitConfig,
    pub alpha: f64,
    pub n_test: usize,
    pub n_bins: usize,
    /// Binning range for conditional coverage; defaults to the generator's
    /// covariate range (-1, 1).
    pub bin_range: Option<(f64, f64)>,
    /// Candidate grid for set sizes; `None` skips size evaluation.
    pub candidates: Option<CandidateSpec>,
    pub eval_coverage: bool,
    /// Estimate the index direction on each full dataset and record its
    /// squared error against the setting's true direction.
    pub eval_theta_mse: bool,
    pub single_index: SingleIndexConfig,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            alpha: 0.1,
            n_test: 2000,
            n_bins: 20,
            bin_range: None,
            candidates: None,
            eval_coverage: true,
            eval_theta_mse: false,
            single_index: SingleIndexConfig::default(),
        }
    }
}

/// One Monte Carlo run; failed runs carry the error text instead of results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub coverage: Option<f64>,
    pub mean_size: Option<f64>,
    pub theta_mse: Option<f64>,
    pub bin_coverage: Vec<Option<f64>>,
    pub bin_size: Vec<Option<f64>>,
    pub error: Option<String>,
}

/// Aggregated Monte Carlo results; all aggregates are recomputable from the
/// per-run rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub setting: String,
    pub n: usize,
    pub seed: u64,
    pub n_runs: usize,
    pub alpha: f64,
    pub bin_centers: Vec<f64>,
    pub rows: Vec<RunRow>,
    pub coverage_mean: Option<f64>,
    pub coverage_sd: Option<f64>,
    pub size_mean: Option<f64>,
    pub size_sd: Option<f64>,
    pub theta_mse_mean: Option<f64>,
    pub theta_mse_sd: Option<f64>,
    pub bin_coverage_mean: Vec<Option<f64>>,
    pub bin_size_mean: Vec<Option<f64>>,
    pub n_failed: usize,
}

fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() > 1 {
        Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
    } else {
        None
    };
    (Some(mean), sd)
}

impl MonteCarloReport {
    /// CSV with one row per run.
    pub fn runs_csv(&self) -> String {
        let mut out = String::from("run,seed,coverage,mean_size,theta_mse,error\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.run,
                r.seed,
                r.coverage.map_or(String::new(), |v| v.to_string()),
                r.mean_size.map_or(String::new(), |v| v.to_string()),
                r.theta_mse.map_or(String::new(), |v| v.to_string()),
                r.error.clone().unwrap_or_default()
            ));
        }
        out
    }

    /// CSV of the aggregated conditional coverage curve.
    pub fn bins_csv(&self) -> String {
        let mut out = String::from("bin_center,coverage,mean_size\n");
        for (i, &c) in self.bin_centers.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                c,
                self.bin_coverage_mean[i].map_or(String::new(), |v| v.to_string()),
                self.bin_size_mean[i].map_or(String::new(), |v| v.to_string()),
            ));
        }
        out
    }
}

fn run_once(setting: SettingId, n: usize, run: usize, run_seed: u64, cfg: &MonteCarloConfig) -> RunRow {
    let mut row = RunRow {
        run,
        seed: run_seed,
        coverage: None,
        mean_size: None,
        theta_mse: None,
        bin_coverage: vec![None; cfg.n_bins],
        bin_size: vec![None; cfg.n_bins],
        error: None,
    };
    let result = (|| -> Result<()> {
        let train = generate(&GeneratorSpec {
            setting,
            n,
            seed: child_seed(run_seed, 1),
        })?;

        if cfg.eval_coverage {
            let model = if train.dim() > 1 {
                single_index_fit(&train, &cfg.fit, &cfg.single_index, cfg.alpha, child_seed(run_seed, 3))?.0
            } else {
                split_fit(&train, &cfg.fit, cfg.alpha, child_seed(run_seed, 3))?
            };
            let test = generate(&GeneratorSpec {
                setting,
                n: cfg.n_test,
                seed: child_seed(run_seed, 2),
            })?;
            let candidates = match &cfg.candidates {
                Some(spec) => Some(candidate_grid(&train.space, spec.resolution, &spec.bounds)?),
                None => None,
            };
            let range = cfg.bin_range.unwrap_or((-1.0, 1.0));
            let report = evaluate_coverage(
                &model,
                &test,
                candidates.as_deref(),
                cfg.n_bins,
                Some(range),
            )?;
            row.coverage = Some(report.marginal);
            row.mean_size = report.mean_size;
            for (i, b) in report.bins.iter().enumerate() {
                row.bin_coverage[i] = b.coverage;
                row.bin_size[i] = b.mean_size;
            }
        }

        if cfg.eval_theta_mse {
            if let Some(theta0) = setting.true_theta() {
                let fit = estimate_theta(&train, &cfg.single_index, child_seed(run_seed, 4))?;
                row.theta_mse = Some(fit.theta.mse(&theta0));
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// Independent seeded runs of the full pipeline, aggregated. Failures are
/// recorded per run, not fatal.
pub fn run_monte_carlo(spec: &GeneratorSpec, cfg: &MonteCarloConfig, n_runs: usize) -> MonteCarloReport {
    let rows: Vec<RunRow> = (0..n_runs)
        .into_par_iter()
        .map(|r| run_once(spec.setting, spec.n, r, child_seed(spec.seed, r as u64), cfg))
        .collect();

    let range = cfg.bin_range.unwrap_or((-1.0, 1.0));
    let width = (range.1 - range.0) / cfg.n_bins as f64;
    let bin_centers: Vec<f64> = (0..cfg.n_bins)
        .map(|b| range.0 + (b as f64 + 0.5) * width)
        .collect();

    let collect = |f: &dyn Fn(&RunRow) -> Option<f64>| -> Vec<f64> {
        rows.iter().filter_map(f).collect()
    };
    let (coverage_mean, coverage_sd) = mean_sd(&collect(&|r| r.coverage));
    let (size_mean, size_sd) = mean_sd(&collect(&|r| r.mean_size));
    let (theta_mse_mean, theta_mse_sd) = mean_sd(&collect(&|r| r.theta_mse));

    let per_bin = |field: &dyn Fn(&RunRow) -> &Vec<Option<f64>>| -> Vec<Option<f64>> {
        (0..cfg.n_bins)
            .map(|b| {
                let vals: Vec<f64> = rows.iter().filter_map(|r| field(r).get(b).copied().flatten()).collect();
                mean_sd(&vals).0
            })
            .collect()
    };

    MonteCarloReport {
        setting: spec.setting.id().to_string(),
        n: spec.n,
        seed: spec.seed,
        n_runs,
        alpha: cfg.alpha,
        bin_centers,
        n_failed: rows.iter().filter(|r| r.error.is_some()).count(),
        bin_coverage_mean: per_bin(&|r| &r.bin_coverage),
        bin_size_mean: per_bin(&|r| &r.bin_size),
        rows,
        coverage_mean,
        coverage_sd,
        size_mean,
        size_sd,
        theta_mse_mean,
        theta_mse_sd,
    }
}

/// One row of a bandwidth sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub bandwidth: f64,
    pub coverage_mean: Option<f64>,
    pub coverage_sd: Option<f64>,
    pub size_mean: Option<f64>,
    pub size_sd: Option<f64>,
    pub n_failed: usize,
}

/// Per-bandwidth coverage and mean set size table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub setting: String,
    pub n: usize,
    pub seed: u64,
    pub n_runs: usize,
    pub alpha: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bandwidth,coverage,coverage_sd,mean_size,size_sd,n_failed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.bandwidth,
                r.coverage_mean.map_or(String::new(), |v| v.to_string()),
                r.coverage_sd.map_or(String::new(), |v| v.to_string()),
                r.size_mean.map_or(String::new(), |v| v.to_string()),
                r.size_sd.map_or(String::new(), |v| v.to_string()),
                r.n_failed
            ));
        }
        out
    }
}

/// Rerun the pipeline across bandwidths; the same run seeds are reused for
/// every bandwidth so the comparison is paired.
pub fn bandwidth_sweep(
    spec: &GeneratorSpec,
    bandwidths: &[f64],
    cfg: &MonteCarloConfig,
    n_runs: usize,
) -> Result<SweepReport> {
    if bandwidths.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
        return Err(Error::InvalidConfig("bandwidths must be positive".into()));
    }
    let rows = bandwidths
        .iter()
        .map(|&h| {
            let mut run_cfg = cfg.clone();
            run_cfg.fit.profile.bandwidth = Bandwidth::Fixed(h);
            let report = run_monte_carlo(spec, &run_cfg, n_runs);
            SweepRow {
                bandwidth: h,
                coverage_mean: report.coverage_mean,
                coverage_sd: report.coverage_sd,
                size_mean: report.size_mean,
                size_sd: report.size_sd,
                n_failed: report.n_failed,
            }
        })
        .collect();
    Ok(SweepReport {
        setting: spec.setting.id().to_string(),
        n: spec.n,
        seed: spec.seed,
        n_runs,
        alpha: cfg.alpha,
        rows,
    })
}

/// Log-spaced bandwidth grid.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || count < 1 {
        return Err(Error::InvalidConfig(format!("bad sweep range [{lo}, {hi}] x {count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| lo * (ratio * i as f64).exp()).collect())
}
