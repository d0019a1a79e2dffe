//! Split conformal calibration over conditional profile scores, prediction
//! sets on candidate grids, and coverage evaluation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::profiles::{ProfileConfig, ProfileTable};
use crate::spaces::{MetricSpaceDescriptor, ObjectPoint};

/// Deterministic random split into training and calibration halves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub calibration: Vec<usize>,
    pub seed: u64,
    pub train_frac: f64,
}

impl SplitPlan {
    /// Shuffle `0..n` with a seeded generator and cut at `train_frac`.
    /// Both halves are reported sorted; they are disjoint and exhaustive.
    pub fn new(n: usize, train_frac: f64, seed: u64) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!("need at least 4 observations, got {n}")));
        }
        if !(train_frac > 0.0 && train_frac < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train fraction must be in (0, 1), got {train_frac}"
            )));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        let n_train = ((n as f64 * train_frac).round() as usize).clamp(2, n - 2);
        let mut train = idx[..n_train].to_vec();
        let mut calibration = idx[n_train..].to_vec();
        train.sort_unstable();
        calibration.sort_unstable();
        Ok(Self {
            train,
            calibration,
            seed,
            train_frac,
        })
    }
}

/// Calibration threshold: the k-th smallest score with
/// `k = ceil((1 - alpha) (n_cal + 1))`, or +infinity when k exceeds the
/// calibration size.
pub fn calibration_quantile(scores: &[f64], alpha: f64) -> f64 {
    let n = scores.len();
    let k = ((1.0 - alpha) * (n as f64 + 1.0)).ceil() as usize;
    if k > n {
        return f64::INFINITY;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[k.max(1) - 1]
}

/// Which conformity score the model calibrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// Conditional profile score (the default).
    Cps,
    /// One minus the conditional transport rank, for comparison runs.
    TransportRank,
}

/// Fit options for the split conformal pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub profile: ProfileConfig,
    /// Fraction of the sample used for training (the rest calibrates).
    pub train_frac: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            profile: ProfileConfig::default(),
            train_frac: 0.5,
        }
    }
}

mod serde_qhat {
    //! +infinity round-trips as JSON null.
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            Some(*v).serialize(s)
        } else {
            None::<f64>.serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Training-half estimators plus the calibrated score threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConformalModel {
    pub table: ProfileTable,
    pub plan: SplitPlan,
    pub alpha: f64,
    pub score_kind: ScoreKind,
    /// Scores of the calibration pairs, in calibration-index order.
    pub cal_scores: Vec<f64>,
    #[serde(with = "serde_qhat")]
    pub qhat: f64,
    /// Single-index direction when the covariates were projected.
    pub theta: Option<Vec<f64>>,
}

impl ConformalModel {
    /// Map a covariate row to the scalar the estimators condition on.
    pub fn project(&self, cov: &[f64]) -> Result<f64> {
        match &self.theta {
            Some(theta) => {
                if cov.len() != theta.len() {
                    return Err(Error::InvalidConfig(format!(
                        "covariate has {} coordinates, index direction has {}",
                        cov.len(),
                        theta.len()
                    )));
                }
                Ok(cov.iter().zip(theta).map(|(a, b)| a * b).sum())
            }
            None => {
                if cov.len() != 1 {
                    return Err(Error::InvalidConfig(format!(
                        "scalar model got a covariate with {} coordinates",
                        cov.len()
                    )));
                }
                Ok(cov[0])
            }
        }
    }

    /// Conformity score of `(y, x)` where `x` is already projected.
    pub fn score_at(&self, y: &ObjectPoint, x: f64) -> Result<f64> {
        match self.score_kind {
            ScoreKind::Cps => self.table.conformity_score(y, x),
            ScoreKind::TransportRank => Ok(1.0 - self.table.transport_rank(y, x)?),
        }
    }

    /// Conformity score of `(y, cov)` for a raw covariate row.
    pub fn score(&self, y: &ObjectPoint, cov: &[f64]) -> Result<f64> {
        let x = self.project(cov)?;
        self.score_at(y, x)
    }

    /// Same model recalibrated at a different level.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        let mut out = self.clone();
        out.alpha = alpha;
        out.qhat = calibration_quantile(&out.cal_scores, alpha);
        Ok(out)
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Algorithm steps: split, fit the profile table on the training half, score
/// each calibration pair with training-half estimators, take the calibration
/// quantile.
pub fn split_fit(dataset: &Dataset, config: &FitConfig, alpha: f64, seed: u64) -> Result<ConformalModel> {
    split_fit_with_score(dataset, config, alpha, seed, ScoreKind::Cps)
}

/// As [`split_fit`] with an explicit conformity score.
pub fn split_fit_with_score(
    dataset: &Dataset,
    config: &FitConfig,
    alpha: f64,
    seed: u64,
    score_kind: ScoreKind,
) -> Result<ConformalModel> {
    let xs = dataset.scalar_covariates()?;
    split_fit_projected(
        dataset.space.clone(),
        &xs,
        &dataset.objects,
        None,
        config,
        alpha,
        seed,
        score_kind,
    )
}

/// Shared implementation over already-projected scalar covariates; the
/// single-index pipeline attaches its direction via `theta`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn split_fit_projected(
    space: MetricSpaceDescriptor,
    xs: &[f64],
    objects: &[ObjectPoint],
    theta: Option<Vec<f64>>,
    config: &FitConfig,
    alpha: f64,
    seed: u64,
    score_kind: ScoreKind,
) -> Result<ConformalModel> {
    validate_alpha(alpha)?;
    let n = xs.len();
    let plan = SplitPlan::new(n, config.train_frac, seed)?;

    let train_xs: Vec<f64> = plan.train.iter().map(|&i| xs[i]).collect();
    let train_ys: Vec<ObjectPoint> = plan.train.iter().map(|&i| objects[i].clone()).collect();
    let table = ProfileTable::fit(space, train_xs, train_ys, &config.profile)?;

    let scorer = |y: &ObjectPoint, x: f64| -> Result<f64> {
        match score_kind {
            ScoreKind::Cps => table.conformity_score(y, x),
            ScoreKind::TransportRank => Ok(1.0 - table.transport_rank(y, x)?),
        }
    };
    let cal_scores: Vec<f64> = plan
        .calibration
        .par_iter()
        .map(|&i| {
            scorer(&objects[i], xs[i]).map_err(|e| Error::ScoreFailed {
                index: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let qhat = calibration_quantile(&cal_scores, alpha);

    Ok(ConformalModel {
        table,
        plan,
        alpha,
        score_kind,
        cal_scores,
        qhat,
        theta,
    })
}

/// One scored candidate of a prediction set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetEntry {
    pub point: ObjectPoint,
    pub score: f64,
    pub member: bool,
}

/// Candidate grid with per-candidate scores and membership at level alpha.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionSet {
    /// Projected covariate the set conditions on.
    pub x: f64,
    pub alpha: f64,
    #[serde(with = "serde_qhat")]
    pub qhat: f64,
    pub entries: Vec<SetEntry>,
}

/// Set size summaries; the Lebesgue length applies to scalar candidate grids
/// (cell width times member count) and the solid-angle-weighted count to
/// sphere grids (cells weighted by sin of the polar angle).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetSize {
    pub count: usize,
    pub lebesgue: Option<f64>,
    pub weighted_count: Option<f64>,
}

impl PredictionSet {
    pub fn member_count(&self) -> usize {
        self.entries.iter().filter(|e| e.member).count()
    }

    /// Number of maximal contiguous runs of members in candidate order; 2 or
    /// more means the set is disconnected along the grid.
    pub fn membership_runs(&self) -> usize {
        let mut runs = 0;
        let mut inside = false;
        for e in &self.entries {
            if e.member && !inside {
                runs += 1;
            }
            inside = e.member;
        }
        runs
    }

    pub fn size(&self, space: &MetricSpaceDescriptor) -> SetSize {
        let count = self.member_count();
        let mut lebesgue = None;
        let mut weighted_count = None;
        match space {
            MetricSpaceDescriptor::Euclidean { k: 1 } if self.entries.len() >= 2 => {
                let vals: Vec<f64> = self.entries.iter().map(|e| e.point.coords()[0]).collect();
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &v in &vals {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                let cell = (hi - lo) / (vals.len() - 1) as f64;
                lebesgue = Some(cell * count as f64);
            }
            MetricSpaceDescriptor::Sphere2 => {
                let mut acc = 0.0;
                for e in self.entries.iter().filter(|e| e.member) {
                    if let ObjectPoint::Sphere2(v) = &e.point {
                        acc += (1.0 - v[2] * v[2]).max(0.0).sqrt(); // sin(theta)
                    }
                }
                weighted_count = Some(acc);
            }
            _ => {}
        }
        SetSize {
            count,
            lebesgue,
            weighted_count,
        }
    }

    /// Hull length along a scalar candidate grid: from the first to the last
    /// member, in the same units as the Lebesgue length.
    pub fn hull_length(&self) -> Option<f64> {
        let first = self.entries.iter().position(|e| e.member)?;
        let last = self.entries.iter().rposition(|e| e.member)?;
        if self.entries.len() < 2 {
            return None;
        }
        let vals: Vec<f64> = self.entries.iter().map(|e| e.point.coords()[0]).collect();
        let cell = (vals[vals.len() - 1] - vals[0]).abs() / (vals.len() - 1) as f64;
        Some((last - first + 1) as f64 * cell)
    }

    /// One row per candidate: coordinates, score, membership flag.
    pub fn to_csv(&self) -> String {
        let width = self
            .entries
            .first()
            .map_or(0, |e| e.point.coords().len());
        let mut out = String::new();
        for i in 1..=width {
            out.push_str(&format!("y{i},"));
        }
        out.push_str("score,member\n");
        for e in &self.entries {
            for v in e.point.coords() {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{},{}\n", e.score, u8::from(e.member)));
        }
        out
    }
}

/// Score every candidate at covariate `x`; members are those at or below the
/// calibrated threshold.
pub fn predict_set(model: &ConformalModel, x: f64, candidates: &[ObjectPoint]) -> Result<PredictionSet> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("empty candidate list".into()));
    }
    let entries: Vec<SetEntry> = candidates
        .par_iter()
        .map(|y| -> Result<SetEntry> {
            let score = model.score_at(y, x)?;
            Ok(SetEntry {
                point: y.clone(),
                score,
                member: score <= model.qhat,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PredictionSet {
        x,
        alpha: model.alpha,
        qhat: model.qhat,
        entries,
    })
}

/// Prediction set under the transport-rank score, for side-by-side
/// comparison with profile scores; the model must have been calibrated with
/// [`ScoreKind::TransportRank`].
pub fn rank_based_set(
    model: &ConformalModel,
    x: f64,
    candidates: &[ObjectPoint],
) -> Result<PredictionSet> {
    if model.score_kind != ScoreKind::TransportRank {
        return Err(Error::InvalidConfig(
            "rank_based_set needs a model calibrated with the transport-rank score".into(),
        ));
    }
    predict_set(model, x, candidates)
}

/// Per-bin coverage row; `coverage` is `None` for empty bins (missing, not
/// zero) and `mean_size` is `None` when no candidate grid was supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageBin {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub coverage: Option<f64>,
    pub mean_size: Option<f64>,
}

/// Marginal and per-bin coverage of a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub n_test: usize,
    pub marginal: f64,
    /// Count-weighted mean of the per-bin set sizes.
    pub mean_size: Option<f64>,
    pub bins: Vec<CoverageBin>,
}

impl CoverageReport {
    /// CSV rows `bin_center,coverage,mean_size,n_in_bin`; missing values are
    /// left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_center,coverage,mean_size,n_in_bin\n");
        for b in &self.bins {
            let cov = b.coverage.map_or(String::new(), |c| c.to_string());
            let size = b.mean_size.map_or(String::new(), |s| s.to_string());
            out.push_str(&format!("{},{},{},{}\n", b.center, cov, size, b.n));
        }
        out
    }
}

/// Membership of each test pair is decided by scoring the test object itself
/// (not a snapped grid candidate); the candidate grid, when given, is used
/// only for per-bin set sizes, evaluated at bin centers.
pub fn evaluate_coverage(
    model: &ConformalModel,
    test: &Dataset,
    candidates: Option<&[ObjectPoint]>,
    n_bins: usize,
    range: Option<(f64, f64)>,
) -> Result<CoverageReport> {
    if test.is_empty() {
        return Err(Error::InvalidConfig("empty test set".into()));
    }
    if n_bins == 0 {
        return Err(Error::InvalidConfig("need at least one bin".into()));
    }
    if test.space != *model.table.space() {
        return Err(Error::SpaceMismatch {
            expected: model.table.space().name(),
            found: test.space.name(),
        });
    }

    let scored: Vec<(f64, bool)> = (0..test.len())
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let x = model.project(&test.covariates[i])?;
            let s = model.score_at(&test.objects[i], x).map_err(|e| Error::ScoreFailed {
                index: i,
                source: Box::new(e),
            })?;
            Ok((x, s <= model.qhat))
        })
        .collect::<Result<_>>()?;

    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let lo = scored.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let hi = scored.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let width = if hi > lo { (hi - lo) / n_bins as f64 } else { 1.0 };

    let mut counts = vec![0usize; n_bins];
    let mut hits = vec![0usize; n_bins];
    let mut covered = 0usize;
    for &(x, member) in &scored {
        let b = (((x - lo) / width).floor() as isize).clamp(0, n_bins as isize - 1) as usize;
        counts[b] += 1;
        hits[b] += usize::from(member);
        covered += usize::from(member);
    }

    let bin_sizes: Vec<Option<f64>> = match candidates {
        Some(cands) => (0..n_bins)
            .into_par_iter()
            .map(|b| -> Result<Option<f64>> {
                let center = lo + (b as f64 + 0.5) * width;
                let set = predict_set(model, center, cands)?;
                let size = set.size(model.table.space());
                Ok(Some(size.lebesgue.unwrap_or(size.count as f64)))
            })
            .collect::<Result<_>>()?,
        None => vec![None; n_bins],
    };

    let bins: Vec<CoverageBin> = (0..n_bins)
        .map(|b| CoverageBin {
            center: lo + (b as f64 + 0.5) * width,
            lo: lo + b as f64 * width,
            hi: lo + (b as f64 + 1.0) * width,
            n: counts[b],
            coverage: if counts[b] > 0 {
                Some(hits[b] as f64 / counts[b] as f64)
            } else {
                None
            },
            mean_size: bin_sizes[b],
        })
        .collect();

    let mean_size = if candidates.is_some() {
        let (mut acc, mut tot) = (0.0, 0usize);
        for b in &bins {
            if let (Some(s), true) = (b.mean_size, b.n > 0) {
                acc += s * b.n as f64;
                tot += b.n;
            }
        }
        (tot > 0).then(|| acc / tot as f64)
    } else {
        None
    };

    Ok(CoverageReport {
        n_test: test.len(),
        marginal: covered as f64 / test.len() as f64,
        mean_size,
        bins,
    })
}
