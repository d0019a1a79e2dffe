//! Conditional distance profiles, profile average transport costs and
//! profile scores.
//!
//! For a fitted table over training pairs `(X_j, Y_j)`:
//! - the profile of `(omega, x)` is the local linear fit at `x` of the
//!   indicators `1{d(omega, Y_j) <= t}`, one value per grid node `t`;
//! - the cost of `(omega, x)` averages the L1 distance between the profile
//!   of `(omega, x)` and each stored training profile, again by a local
//!   linear fit at `x`;
//! - the score of `(z, x)` is the local linear fit of `1{cost_j <= z}`, a
//!   conditional CDF of costs used as the conformity score.
//!
//! Fitting precomputes all n training profiles and costs, so it is
//! O(n^2 * n_t); every estimator afterwards is read-only and cheap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, KernelFamily, KernelSpec};
use crate::smooth::{widened_weights, LocalLinearWeights};
use crate::spaces::{distance, MetricSpaceDescriptor, ObjectPoint};

/// Default number of t-grid nodes.
pub const DEFAULT_T_NODES: usize = 101;
/// Default headroom factor on the largest pairwise training distance.
pub const DEFAULT_T_MAX_FACTOR: f64 = 1.05;
/// Number of quantile levels used when inverting profile curves.
const N_U_LEVELS: usize = 101;

/// Uniform integration grid 0 = t_0 < ... < t_{n-1} = t_max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    t_max: f64,
    n_t: usize,
}

impl TGrid {
    pub fn new(t_max: f64, n_t: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidConfig(format!("t_max must be positive, got {t_max}")));
        }
        if n_t < 2 {
            return Err(Error::InvalidConfig("t-grid needs at least 2 nodes".into()));
        }
        Ok(Self { t_max, n_t })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_nodes(&self) -> usize {
        self.n_t
    }

    pub fn cell_width(&self) -> f64 {
        self.t_max / (self.n_t - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t_max * i as f64 / (self.n_t - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_t).map(|i| self.node(i)).collect()
    }
}

/// Trapezoid-rule approximation of the L1 distance between two profile
/// curves on a shared grid; by the quantile/CDF identity this is the
/// 1-Wasserstein distance between the underlying distributions.
pub fn w1_profile_distance(f: &[f64], g: &[f64], grid: &TGrid) -> Result<f64> {
    if f.len() != grid.n_t || g.len() != grid.n_t {
        return Err(Error::GridMismatch(format!(
            "curves of lengths {} and {} on a {}-node grid",
            f.len(),
            g.len(),
            grid.n_t
        )));
    }
    let mut sum = 0.0;
    for (a, b) in f.iter().zip(g) {
        sum += (a - b).abs();
    }
    sum -= 0.5 * ((f[0] - g[0]).abs() + (f[f.len() - 1] - g[g.len() - 1]).abs());
    Ok(sum * grid.cell_width())
}

/// Configuration of the profile estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub kernel: KernelFamily,
    pub bandwidth: Bandwidth,
    pub n_t: usize,
    pub t_max_factor: f64,
    /// Re-monotonize fitted profile curves by running maximum. Off by
    /// default; the L1 profile distance does not require monotone curves.
    pub isotonize: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            kernel: KernelFamily::Epanechnikov,
            bandwidth: Bandwidth::default(),
            n_t: DEFAULT_T_NODES,
            t_max_factor: DEFAULT_T_MAX_FACTOR,
            isotonize: false,
        }
    }
}

/// Counters accumulated while fitting; nonzero widenings indicate sparse
/// covariate regions where the bandwidth had to grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub widenings: u64,
    pub nw_fallbacks: u64,
}

/// Fitted profile table: per-training-point profile curves on a shared
/// t-grid, their costs, and the kernel used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileTable {
    space: MetricSpaceDescriptor,
    kernel: KernelSpec,
    grid: TGrid,
    isotonize: bool,
    xs: Vec<f64>,
    objects: Vec<ObjectPoint>,
    curves: Vec<Vec<f64>>,
    costs: Vec<f64>,
    diagnostics: FitDiagnostics,
}

impl ProfileTable {
    /// Fit profiles and costs for all training pairs.
    pub fn fit(
        space: MetricSpaceDescriptor,
        xs: Vec<f64>,
        objects: Vec<ObjectPoint>,
        config: &ProfileConfig,
    ) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 training pairs, got {n}")));
        }
        if objects.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{n} covariates vs {} objects",
                objects.len()
            )));
        }
        for p in &objects {
            space.validate(p)?;
        }
        let h = config.bandwidth.resolve(&xs)?;
        let kernel = KernelSpec::new(config.kernel, h)?;

        let dists: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<Vec<f64>> {
                (0..n).map(|j| distance(&space, &objects[i], &objects[j])).collect()
            })
            .collect::<Result<_>>()?;
        let max_d = dists
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0f64, f64::max);
        let t_max = if max_d > 0.0 { config.t_max_factor * max_d } else { 1.0 };
        let grid = TGrid::new(t_max, config.n_t)?;

        let weights: Vec<LocalLinearWeights> = xs
            .par_iter()
            .map(|&x| widened_weights(x, &xs, &kernel))
            .collect::<Result<_>>()?;

        let curves: Vec<Vec<f64>> = weights
            .par_iter()
            .enumerate()
            .map(|(j, w)| {
                let pairs: Vec<(f64, f64)> =
                    w.support.iter().map(|&(l, wl)| (dists[j][l], wl)).collect();
                curve_from_pairs(pairs, &grid, config.isotonize)
            })
            .collect();

        let costs: Vec<f64> = weights
            .par_iter()
            .enumerate()
            .map(|(j, w)| -> Result<f64> {
                let mut c = 0.0;
                for &(l, wl) in &w.support {
                    c += wl * w1_profile_distance(&curves[j], &curves[l], &grid)?;
                }
                Ok(c.max(0.0))
            })
            .collect::<Result<_>>()?;

        let mut diagnostics = FitDiagnostics::default();
        for w in &weights {
            diagnostics.widenings += w.widenings as u64;
            diagnostics.nw_fallbacks += w.nw_fallback as u64;
        }

        Ok(Self {
            space,
            kernel,
            grid,
            isotonize: config.isotonize,
            xs,
            objects,
            curves,
            costs,
            diagnostics,
        })
    }

    pub fn space(&self) -> &MetricSpaceDescriptor {
        &self.space
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn covariates(&self) -> &[f64] {
        &self.xs
    }

    pub fn objects(&self) -> &[ObjectPoint] {
        &self.objects
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    /// Fitted costs of the training pairs themselves.
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn diagnostics(&self) -> FitDiagnostics {
        self.diagnostics
    }

    fn weights_at(&self, x: f64) -> Result<LocalLinearWeights> {
        widened_weights(x, &self.xs, &self.kernel)
    }

    fn curve_with(&self, omega: &ObjectPoint, w: &LocalLinearWeights) -> Result<Vec<f64>> {
        let pairs: Vec<(f64, f64)> = w
            .support
            .iter()
            .map(|&(l, wl)| Ok((distance(&self.space, omega, &self.objects[l])?, wl)))
            .collect::<Result<_>>()?;
        Ok(curve_from_pairs(pairs, &self.grid, self.isotonize))
    }

    /// Estimated conditional distance profile of `omega` at covariate `x`,
    /// sampled on the table's grid; values lie in [0, 1].
    pub fn estimate_profile(&self, omega: &ObjectPoint, x: f64) -> Result<Vec<f64>> {
        let w = self.weights_at(x)?;
        self.curve_with(omega, &w)
    }

    fn cpc_with(&self, curve: &[f64], w: &LocalLinearWeights) -> Result<f64> {
        let mut c = 0.0;
        for &(l, wl) in &w.support {
            c += wl * w1_profile_distance(curve, &self.curves[l], &self.grid)?;
        }
        Ok(c.max(0.0))
    }

    /// Estimated conditional profile average transport cost of `omega` at
    /// `x`; never negative.
    pub fn estimate_cpc(&self, omega: &ObjectPoint, x: f64) -> Result<f64> {
        let w = self.weights_at(x)?;
        let curve = self.curve_with(omega, &w)?;
        self.cpc_with(&curve, &w)
    }

    fn cps_with(&self, z: f64, w: &LocalLinearWeights) -> f64 {
        let raw = w.fit_with(|l| f64::from(self.costs[l] <= z));
        raw.clamp(0.0, 1.0)
    }

    /// Estimated conditional profile score: the conditional CDF of training
    /// costs evaluated at `z`, clipped to [0, 1].
    pub fn estimate_cps(&self, z: f64, x: f64) -> Result<f64> {
        let w = self.weights_at(x)?;
        Ok(self.cps_with(z, &w))
    }

    /// Conformity score of a response: `S(C(omega | x) | x)`, sharing one
    /// weight vector across both stages.
    pub fn conformity_score(&self, omega: &ObjectPoint, x: f64) -> Result<f64> {
        let w = self.weights_at(x)?;
        let curve = self.curve_with(omega, &w)?;
        let cost = self.cpc_with(&curve, &w)?;
        Ok(self.cps_with(cost, &w))
    }

    /// Conditional transport rank of `omega` at `x`: the expit of the
    /// smoothed signed quantile-difference integral. Larger means more
    /// central; output is strictly inside (0, 1).
    pub fn transport_rank(&self, omega: &ObjectPoint, x: f64) -> Result<f64> {
        let w = self.weights_at(x)?;
        let levels = u_levels();
        let curve = self.curve_with(omega, &w)?;
        let q_omega = invert_cdf_curve(&curve, &self.grid, &levels);
        let mut h = 0.0;
        for &(l, wl) in &w.support {
            let q_l = invert_cdf_curve(&self.curves[l], &self.grid, &levels);
            let mut signed = 0.0;
            for (a, b) in q_l.iter().zip(&q_omega) {
                signed += a - b;
            }
            h += wl * signed / levels.len() as f64;
        }
        Ok(expit(h))
    }
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn u_levels() -> Vec<f64> {
    (0..N_U_LEVELS)
        .map(|k| (k as f64 + 0.5) / N_U_LEVELS as f64)
        .collect()
}

/// Build a profile curve from `(distance, weight)` pairs: cumulative weight
/// of pairs with distance below each grid node, clipped to [0, 1].
fn curve_from_pairs(mut pairs: Vec<(f64, f64)>, grid: &TGrid, isotonize: bool) -> Vec<f64> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_t = grid.n_nodes();
    let mut out = Vec::with_capacity(n_t);
    let mut acc = 0.0;
    let mut k = 0;
    for i in 0..n_t {
        let t = grid.node(i);
        while k < pairs.len() && pairs[k].0 <= t {
            acc += pairs[k].1;
            k += 1;
        }
        out.push(acc.clamp(0.0, 1.0));
    }
    if isotonize {
        let mut run = 0.0f64;
        for v in &mut out {
            run = run.max(*v);
            *v = run;
        }
    }
    out
}

/// Left-continuous interpolated inverse of a profile curve at the given
/// levels; flat regions resolve to their left endpoint. The curve is first
/// replaced by its running maximum so the inverse is well defined.
fn invert_cdf_curve(values: &[f64], grid: &TGrid, levels: &[f64]) -> Vec<f64> {
    let mut mono = values.to_vec();
    let mut run = 0.0f64;
    for v in &mut mono {
        run = run.max(*v);
        *v = run;
    }
    let n = mono.len();
    levels
        .iter()
        .map(|&u| {
            if u <= mono[0] {
                0.0
            } else if u > mono[n - 1] {
                grid.t_max()
            } else {
                let k = mono.partition_point(|&f| f < u);
                let (f0, f1) = (mono[k - 1], mono[k]);
                grid.node(k - 1) + (u - f0) / (f1 - f0) * grid.cell_width()
            }
        })
        .collect()
}
