//! Local linear smoothing weights.
//!
//! Every conditional estimator in this crate is the intercept of a kernel
//! weighted least-squares line. The intercept is linear in the responses, so
//! a single weight vector per target point serves all of them: the fitted
//! value is `sum_j w_j * R_j` for any response vector `R`.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

/// Relative threshold below which the local design is treated as degenerate
/// and the fit falls back to Nadaraya-Watson weights.
const DEGENERATE_DESIGN_TOL: f64 = 1e-10;

/// Weight vector of a local linear fit at a target point.
///
/// Weights may be negative near the design boundary; they always sum to one.
/// Only samples with nonzero kernel weight are stored.
#[derive(Debug, Clone)]
pub struct LocalLinearWeights {
    /// Target covariate value.
    pub x: f64,
    /// Bandwidth actually used (after any widening).
    pub bandwidth_used: f64,
    /// Number of geometric widening steps applied before the window held
    /// enough points.
    pub widenings: u32,
    /// Whether the degenerate-design Nadaraya-Watson fallback was taken.
    pub nw_fallback: bool,
    /// `(sample index, weight)` pairs over the kernel support.
    pub support: Vec<(usize, f64)>,
}

impl LocalLinearWeights {
    /// Fitted value `sum_j w_j * R_j` for responses looked up by index.
    pub fn fit_with(&self, response: impl Fn(usize) -> f64) -> f64 {
        self.support.iter().map(|&(j, w)| w * response(j)).sum()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }
}

/// Local linear weights at `x` for covariates `xs`.
///
/// Errors with [`Error::NoLocalData`] when no covariate has positive kernel
/// weight; callers that can tolerate a wider window should use
/// [`widened_weights`].
pub fn local_linear_weights(x: f64, xs: &[f64], kernel: &KernelSpec) -> Result<LocalLinearWeights> {
    weights_inner(x, xs, kernel, 0)
}

/// Local linear weights with the geometric bandwidth widening rule: the
/// bandwidth grows by factor 1.5 until at least two covariates (or all of
/// them, for tiny samples) fall in the window. The widening count is recorded
/// for diagnostics.
pub fn widened_weights(x: f64, xs: &[f64], kernel: &KernelSpec) -> Result<LocalLinearWeights> {
    if xs.is_empty() {
        return Err(Error::NoLocalData { x });
    }
    let mut spec = *kernel;
    let mut widenings = 0u32;
    loop {
        let covered = xs.iter().filter(|&&xj| spec.weight(x, xj) > 0.0).count();
        if covered >= 2 || covered == xs.len() {
            return weights_inner(x, xs, &spec, widenings);
        }
        spec.bandwidth *= 1.5;
        widenings += 1;
    }
}

fn weights_inner(
    x: f64,
    xs: &[f64],
    kernel: &KernelSpec,
    widenings: u32,
) -> Result<LocalLinearWeights> {
    let n = xs.len() as f64;
    let h = kernel.bandwidth;
    let mut support: Vec<(usize, f64)> = Vec::new();
    let (mut mu0, mut mu1, mut mu2) = (0.0, 0.0, 0.0);
    for (j, &xj) in xs.iter().enumerate() {
        let k = kernel.weight(x, xj);
        if k > 0.0 {
            let d = xj - x;
            mu0 += k;
            mu1 += k * d;
            mu2 += k * d * d;
            support.push((j, k));
        }
    }
    if support.is_empty() {
        return Err(Error::NoLocalData { x });
    }
    mu0 /= n * h;
    mu1 /= n * h;
    mu2 /= n * h;
    let sigma0 = mu2 * mu0 - mu1 * mu1;

    let nw_fallback = sigma0 < DEGENERATE_DESIGN_TOL * (mu0 * h).powi(2);
    if nw_fallback {
        let total: f64 = support.iter().map(|&(_, k)| k).sum();
        for entry in &mut support {
            entry.1 /= total;
        }
    } else {
        for entry in &mut support {
            let (j, k) = *entry;
            let d = xs[j] - x;
            entry.1 = k * (mu2 - mu1 * d) / (n * h * sigma0);
        }
        // exact sum is 1 by construction; renormalize away rounding noise
        let total: f64 = support.iter().map(|&(_, w)| w).sum();
        for entry in &mut support {
            entry.1 /= total;
        }
    }

    Ok(LocalLinearWeights {
        x,
        bandwidth_used: h,
        widenings,
        nw_fallback,
        support,
    })
}
