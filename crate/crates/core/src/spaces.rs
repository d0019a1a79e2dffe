//! Object spaces: descriptors, points, distances, Fréchet means and
//! candidate grids.
//!
//! Five concrete spaces are supported: Euclidean vectors, the unit sphere S²,
//! one-dimensional distributions represented by quantile grids (2-Wasserstein
//! metric), networks as adjacency matrices under the Frobenius metric, and
//! the 3-spider tree space. The 3-spider is distance-only: it has no Fréchet
//! mean and no candidate generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transport::TransportMap;

/// Tolerance for the unit-norm invariant of sphere points.
pub const SPHERE_UNIT_TOL: f64 = 1e-9;
/// Convergence tolerance for the intrinsic sphere mean iteration.
const SPHERE_MEAN_TOL: f64 = 1e-9;
/// Iteration cap for the intrinsic sphere mean.
const SPHERE_MEAN_CAP: usize = 100;

/// Quantile levels `(j - 1/2) / m` used to represent one-dimensional
/// distributions; midpoints avoid the 0/1 endpoint singularities.
pub fn quantile_levels(m: usize) -> Vec<f64> {
    (0..m).map(|j| (j as f64 + 0.5) / m as f64).collect()
}

/// Descriptor of an object space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpaceDescriptor {
    /// Vectors in R^k.
    Euclidean { k: usize },
    /// Unit sphere in R^3 with the geodesic metric.
    Sphere2,
    /// Distributions on `support` represented by `m` nondecreasing quantile
    /// values at levels `(j - 1/2)/m`, under the 2-Wasserstein metric.
    Wasserstein1d { m: usize, support: [f64; 2] },
    /// k-node networks as k x k adjacency matrices with entries in [0, 1],
    /// under the Frobenius metric.
    Network { k: usize },
    /// Three rays glued at the origin; BHV metric on trees with three leaves.
    Spider3,
}

impl MetricSpaceDescriptor {
    pub fn euclidean(k: usize) -> Self {
        MetricSpaceDescriptor::Euclidean { k }
    }

    pub fn wasserstein(m: usize, support: [f64; 2]) -> Self {
        MetricSpaceDescriptor::Wasserstein1d { m, support }
    }

    /// Whether a Fréchet mean is available.
    pub fn has_mean(&self) -> bool {
        !matches!(self, MetricSpaceDescriptor::Spider3)
    }

    /// Whether a candidate grid can be generated (for the network space this
    /// requires a user-supplied list).
    pub fn has_grid(&self) -> bool {
        !matches!(self, MetricSpaceDescriptor::Spider3)
    }

    pub fn name(&self) -> String {
        match self {
            MetricSpaceDescriptor::Euclidean { k } => format!("euclidean({k})"),
            MetricSpaceDescriptor::Sphere2 => "sphere2".into(),
            MetricSpaceDescriptor::Wasserstein1d { m, .. } => format!("wasserstein1d({m})"),
            MetricSpaceDescriptor::Network { k } => format!("network({k})"),
            MetricSpaceDescriptor::Spider3 => "spider3".into(),
        }
    }

    /// Number of columns a point of this space occupies in a dataset row.
    pub fn point_width(&self) -> usize {
        match self {
            MetricSpaceDescriptor::Euclidean { k } => *k,
            MetricSpaceDescriptor::Sphere2 => 3,
            MetricSpaceDescriptor::Wasserstein1d { m, .. } => *m,
            MetricSpaceDescriptor::Network { k } => k * k,
            MetricSpaceDescriptor::Spider3 => 2,
        }
    }

    /// Validate a point against this space's invariants.
    pub fn validate(&self, p: &ObjectPoint) -> Result<()> {
        match (self, p) {
            (MetricSpaceDescriptor::Euclidean { k }, ObjectPoint::Euclidean(v)) => {
                if v.len() != *k {
                    return Err(Error::InvalidPoint(format!(
                        "euclidean point has {} coordinates, space expects {k}",
                        v.len()
                    )));
                }
            }
            (MetricSpaceDescriptor::Sphere2, ObjectPoint::Sphere2(v)) => {
                let norm = dot3(v, v).sqrt();
                if (norm - 1.0).abs() > SPHERE_UNIT_TOL {
                    return Err(Error::InvalidPoint(format!(
                        "sphere point has norm {norm}, expected 1 within {SPHERE_UNIT_TOL}"
                    )));
                }
            }
            (MetricSpaceDescriptor::Wasserstein1d { m, support }, ObjectPoint::Wasserstein1d(q)) => {
                if q.len() != *m {
                    return Err(Error::InvalidPoint(format!(
                        "quantile grid has {} values, space expects {m}",
                        q.len()
                    )));
                }
                for j in 1..q.len() {
                    if q[j] < q[j - 1] {
                        return Err(Error::InvalidPoint(format!(
                            "quantile values decrease between indices {} and {j}",
                            j - 1
                        )));
                    }
                }
                let eps = 1e-9 * (support[1] - support[0]).abs().max(1.0);
                if q[0] < support[0] - eps || q[q.len() - 1] > support[1] + eps {
                    return Err(Error::InvalidPoint(format!(
                        "quantile values leave the declared support [{}, {}]",
                        support[0], support[1]
                    )));
                }
            }
            (MetricSpaceDescriptor::Network { k }, ObjectPoint::Network(w)) => {
                if w.len() != k * k {
                    return Err(Error::InvalidPoint(format!(
                        "network has {} entries, space expects {}",
                        w.len(),
                        k * k
                    )));
                }
                if let Some(idx) = w.iter().position(|&e| !(0.0..=1.0).contains(&e)) {
                    return Err(Error::InvalidPoint(format!(
                        "network entry {idx} = {} outside [0, 1]",
                        w[idx]
                    )));
                }
            }
            (MetricSpaceDescriptor::Spider3, ObjectPoint::Spider3 { ray, len }) => {
                if !(1..=3).contains(ray) {
                    return Err(Error::InvalidPoint(format!("spider ray {ray} not in 1..=3")));
                }
                if !(len.is_finite() && *len >= 0.0) {
                    return Err(Error::InvalidPoint(format!("spider length {len} negative")));
                }
            }
            _ => {
                return Err(Error::SpaceMismatch {
                    expected: self.name(),
                    found: p.kind_name().into(),
                })
            }
        }
        Ok(())
    }
}

/// A point of one of the supported spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ObjectPoint {
    Euclidean(Vec<f64>),
    Sphere2([f64; 3]),
    Wasserstein1d(Vec<f64>),
    /// Row-major k x k adjacency matrix.
    Network(Vec<f64>),
    Spider3 {
        ray: u8,
        len: f64,
    },
}

impl ObjectPoint {
    pub fn scalar(v: f64) -> Self {
        ObjectPoint::Euclidean(vec![v])
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ObjectPoint::Euclidean(_) => "euclidean",
            ObjectPoint::Sphere2(_) => "sphere2",
            ObjectPoint::Wasserstein1d(_) => "wasserstein1d",
            ObjectPoint::Network(_) => "network",
            ObjectPoint::Spider3 { .. } => "spider3",
        }
    }

    /// Flat numeric encoding used by dataset and prediction-set rows.
    pub fn coords(&self) -> Vec<f64> {
        match self {
            ObjectPoint::Euclidean(v) | ObjectPoint::Wasserstein1d(v) | ObjectPoint::Network(v) => {
                v.clone()
            }
            ObjectPoint::Sphere2(v) => v.to_vec(),
            ObjectPoint::Spider3 { ray, len } => vec![*ray as f64, *len],
        }
    }

    /// Decode a point from `width` consecutive row values.
    pub fn from_coords(space: &MetricSpaceDescriptor, vals: &[f64]) -> Result<Self> {
        if vals.len() != space.point_width() {
            return Err(Error::InvalidPoint(format!(
                "{} values for a {} point (expected {})",
                vals.len(),
                space.name(),
                space.point_width()
            )));
        }
        let p = match space {
            MetricSpaceDescriptor::Euclidean { .. } => ObjectPoint::Euclidean(vals.to_vec()),
            MetricSpaceDescriptor::Sphere2 => ObjectPoint::Sphere2([vals[0], vals[1], vals[2]]),
            MetricSpaceDescriptor::Wasserstein1d { .. } => ObjectPoint::Wasserstein1d(vals.to_vec()),
            MetricSpaceDescriptor::Network { .. } => ObjectPoint::Network(vals.to_vec()),
            MetricSpaceDescriptor::Spider3 => {
                let ray = vals[0];
                if ray.fract() != 0.0 || !(1.0..=3.0).contains(&ray) {
                    return Err(Error::InvalidPoint(format!("spider ray {ray} not in 1..=3")));
                }
                ObjectPoint::Spider3 {
                    ray: ray as u8,
                    len: vals[1],
                }
            }
        };
        space.validate(&p)?;
        Ok(p)
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Distance between two points of `space`.
///
/// Sphere distances use `atan2(|p x q|, p.q)`, which agrees with
/// `arccos(p.q)` but stays accurate for nearly identical points.
pub fn distance(space: &MetricSpaceDescriptor, a: &ObjectPoint, b: &ObjectPoint) -> Result<f64> {
    match (space, a, b) {
        (MetricSpaceDescriptor::Euclidean { .. }, ObjectPoint::Euclidean(u), ObjectPoint::Euclidean(v)) => {
            if u.len() != v.len() {
                return Err(Error::InvalidPoint("euclidean dimension mismatch".into()));
            }
            Ok(u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        }
        (MetricSpaceDescriptor::Sphere2, ObjectPoint::Sphere2(p), ObjectPoint::Sphere2(q)) => {
            Ok(norm3(&cross3(p, q)).atan2(dot3(p, q)))
        }
        (
            MetricSpaceDescriptor::Wasserstein1d { .. },
            ObjectPoint::Wasserstein1d(p),
            ObjectPoint::Wasserstein1d(q),
        ) => {
            if p.len() != q.len() {
                return Err(Error::GridMismatch(format!(
                    "quantile grids of sizes {} and {}",
                    p.len(),
                    q.len()
                )));
            }
            let ss: f64 = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
            Ok((ss / p.len() as f64).sqrt())
        }
        (MetricSpaceDescriptor::Network { .. }, ObjectPoint::Network(u), ObjectPoint::Network(v)) => {
            if u.len() != v.len() {
                return Err(Error::InvalidPoint("network size mismatch".into()));
            }
            Ok(u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        }
        (
            MetricSpaceDescriptor::Spider3,
            ObjectPoint::Spider3 { ray: r1, len: l1 },
            ObjectPoint::Spider3 { ray: r2, len: l2 },
        ) => Ok(if r1 == r2 { (l1 - l2).abs() } else { l1 + l2 }),
        _ => Err(Error::SpaceMismatch {
            expected: space.name(),
            found: format!("{} / {}", a.kind_name(), b.kind_name()),
        }),
    }
}

/// Riemannian exponential map on S²: `cos(|v|) p + sin(|v|) v / |v|`.
pub fn exp_map_sphere(p: &[f64; 3], v: &[f64; 3]) -> Result<[f64; 3]> {
    if (norm3(p) - 1.0).abs() > SPHERE_UNIT_TOL {
        return Err(Error::InvalidPoint(format!("exp base point has norm {}", norm3(p))));
    }
    if dot3(p, v).abs() >= 1e-9 {
        return Err(Error::InvalidPoint(format!(
            "tangent vector has normal component {}",
            dot3(p, v)
        )));
    }
    let nv = norm3(v);
    if nv == 0.0 {
        return Ok(*p);
    }
    let (s, c) = nv.sin_cos();
    Ok([
        c * p[0] + s * v[0] / nv,
        c * p[1] + s * v[1] / nv,
        c * p[2] + s * v[2] / nv,
    ])
}

/// Inverse of the exponential map: tangent vector at `p` pointing to `q` with
/// length equal to the geodesic distance.
pub fn log_map_sphere(p: &[f64; 3], q: &[f64; 3]) -> Result<[f64; 3]> {
    for (v, what) in [(p, "base"), (q, "target")] {
        if (norm3(v) - 1.0).abs() > SPHERE_UNIT_TOL {
            return Err(Error::InvalidPoint(format!("log {what} point has norm {}", norm3(v))));
        }
    }
    let theta = norm3(&cross3(p, q)).atan2(dot3(p, q));
    if theta >= std::f64::consts::PI - 1e-6 {
        return Err(Error::InvalidPoint("log map of nearly antipodal points".into()));
    }
    if theta < 1e-14 {
        return Ok([0.0; 3]);
    }
    let d = dot3(p, q);
    let u = [q[0] - d * p[0], q[1] - d * p[1], q[2] - d * p[2]];
    let nu = norm3(&u);
    Ok([theta * u[0] / nu, theta * u[1] / nu, theta * u[2] / nu])
}

/// Weighted Fréchet mean.
///
/// Weights must sum to one and contain at least one strictly positive entry;
/// negative entries are allowed (local linear weights). Linear spaces take
/// the weighted arithmetic mean; quantile grids additionally re-monotonize by
/// running maximum; the sphere runs a tangent-space fixed-point iteration
/// started at the normalized chordal mean.
pub fn frechet_mean(
    space: &MetricSpaceDescriptor,
    points: &[ObjectPoint],
    weights: &[f64],
) -> Result<ObjectPoint> {
    if !space.has_mean() {
        return Err(Error::Unsupported {
            space: space.name(),
            op: "frechet_mean",
        });
    }
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} points vs {} weights",
            points.len(),
            weights.len()
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, expected 1")));
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::InvalidWeights("no strictly positive weight".into()));
    }
    // all mass on a single point: return it exactly
    if let Some(j) = single_support(weights) {
        return Ok(points[j].clone());
    }

    match space {
        MetricSpaceDescriptor::Euclidean { k } => {
            let mut acc = vec![0.0; *k];
            for (p, &w) in points.iter().zip(weights) {
                let ObjectPoint::Euclidean(v) = p else {
                    return Err(space_mismatch(space, p));
                };
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += w * x;
                }
            }
            Ok(ObjectPoint::Euclidean(acc))
        }
        MetricSpaceDescriptor::Network { k } => {
            let mut acc = vec![0.0; k * k];
            for (p, &w) in points.iter().zip(weights) {
                let ObjectPoint::Network(v) = p else {
                    return Err(space_mismatch(space, p));
                };
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += w * x;
                }
            }
            Ok(ObjectPoint::Network(acc))
        }
        MetricSpaceDescriptor::Wasserstein1d { m, .. } => {
            let mut acc = vec![0.0; *m];
            for (p, &w) in points.iter().zip(weights) {
                let ObjectPoint::Wasserstein1d(q) = p else {
                    return Err(space_mismatch(space, p));
                };
                for (a, x) in acc.iter_mut().zip(q) {
                    *a += w * x;
                }
            }
            running_max(&mut acc);
            Ok(ObjectPoint::Wasserstein1d(acc))
        }
        MetricSpaceDescriptor::Sphere2 => sphere_mean(points, weights),
        MetricSpaceDescriptor::Spider3 => unreachable!("guarded by has_mean"),
    }
}

fn single_support(weights: &[f64]) -> Option<usize> {
    let mut found = None;
    for (j, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            if found.is_some() {
                return None;
            }
            found = Some(j);
        }
    }
    found
}

fn space_mismatch(space: &MetricSpaceDescriptor, p: &ObjectPoint) -> Error {
    Error::SpaceMismatch {
        expected: space.name(),
        found: p.kind_name().into(),
    }
}

fn sphere_mean(points: &[ObjectPoint], weights: &[f64]) -> Result<ObjectPoint> {
    let mut pts = Vec::with_capacity(points.len());
    for p in points {
        let ObjectPoint::Sphere2(v) = p else {
            return Err(space_mismatch(&MetricSpaceDescriptor::Sphere2, p));
        };
        pts.push(*v);
    }
    // chordal (extrinsic) weighted mean as the starting point
    let mut init = [0.0; 3];
    for (v, &w) in pts.iter().zip(weights) {
        for i in 0..3 {
            init[i] += w * v[i];
        }
    }
    let mut p = if norm3(&init) > 1e-12 {
        normalize3(init)
    } else {
        // cancelling weights: start at the point carrying the largest weight
        let j = weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(j, _)| j)
            .unwrap();
        pts[j]
    };

    for _ in 0..SPHERE_MEAN_CAP {
        let mut v = [0.0; 3];
        for (q, &w) in pts.iter().zip(weights) {
            let l = log_map_sphere(&p, q)?;
            for i in 0..3 {
                v[i] += w * l[i];
            }
        }
        // re-project the update onto the tangent space before exponentiating
        let np = dot3(&v, &p);
        for i in 0..3 {
            v[i] -= np * p[i];
        }
        let step = norm3(&v);
        p = normalize3(exp_map_sphere(&p, &v)?);
        if step <= SPHERE_MEAN_TOL {
            return Ok(ObjectPoint::Sphere2(p));
        }
    }
    Err(Error::NotConverged {
        what: "sphere Fréchet mean",
        cap: SPHERE_MEAN_CAP,
    })
}

fn normalize3(v: [f64; 3]) -> [f64; 3] {
    let n = norm3(&v);
    [v[0] / n, v[1] / n, v[2] / n]
}

fn running_max(v: &mut [f64]) {
    for i in 1..v.len() {
        if v[i] < v[i - 1] {
            v[i] = v[i - 1];
        }
    }
}

/// Space-specific extent for candidate grids.
#[derive(Debug, Clone)]
pub enum GridBounds {
    /// Interval for Euclidean(1), replicated box otherwise.
    Interval(f64, f64),
    /// Per-coordinate box for Euclidean(k).
    Box(Vec<(f64, f64)>),
    /// No extent needed (sphere).
    None,
    /// Truncated-normal family ranges for quantile-grid candidates.
    GaussianFamily { mu: (f64, f64), sigma: (f64, f64) },
    /// Explicit candidate list (networks).
    Explicit(Vec<ObjectPoint>),
}

/// Deterministic candidate grid over `space`.
///
/// The sphere uses the product construction over polar angles `k*pi/L` and
/// azimuths `2*k*pi/L`, k = 1..L, yielding L² points. Euclidean spaces take a
/// uniform product grid over the box. Wasserstein candidates are quantile
/// grids of truncated normals over a (mu, sigma) rectangle, resolution² of
/// them. Networks require an explicit list.
pub fn candidate_grid(
    space: &MetricSpaceDescriptor,
    resolution: usize,
    bounds: &GridBounds,
) -> Result<Vec<ObjectPoint>> {
    if !space.has_grid() {
        return Err(Error::Unsupported {
            space: space.name(),
            op: "candidate_grid",
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidConfig("grid resolution must be positive".into()));
    }
    match space {
        MetricSpaceDescriptor::Euclidean { k } => {
            let box_: Vec<(f64, f64)> = match bounds {
                GridBounds::Interval(lo, hi) => vec![(*lo, *hi); *k],
                GridBounds::Box(b) if b.len() == *k => b.clone(),
                GridBounds::Box(b) => {
                    return Err(Error::InvalidConfig(format!(
                        "box has {} ranges for euclidean({k})",
                        b.len()
                    )))
                }
                _ => return Err(Error::InvalidConfig("euclidean grid needs interval or box bounds".into())),
            };
            let axes: Vec<Vec<f64>> = box_.iter().map(|&(lo, hi)| linspace(lo, hi, resolution)).collect();
            let mut out = Vec::with_capacity(resolution.pow(*k as u32));
            let mut idx = vec![0usize; *k];
            loop {
                out.push(ObjectPoint::Euclidean(
                    idx.iter().enumerate().map(|(d, &i)| axes[d][i]).collect(),
                ));
                // odometer increment over the product grid
                let mut d = *k;
                loop {
                    if d == 0 {
                        return Ok(out);
                    }
                    d -= 1;
                    idx[d] += 1;
                    if idx[d] < resolution {
                        break;
                    }
                    idx[d] = 0;
                }
            }
        }
        MetricSpaceDescriptor::Sphere2 => {
            let l = resolution;
            let mut out = Vec::with_capacity(l * l);
            for k1 in 1..=l {
                let theta = k1 as f64 * std::f64::consts::PI / l as f64;
                for k2 in 1..=l {
                    let phi = 2.0 * k2 as f64 * std::f64::consts::PI / l as f64;
                    out.push(ObjectPoint::Sphere2([
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    ]));
                }
            }
            Ok(out)
        }
        MetricSpaceDescriptor::Wasserstein1d { m, support } => {
            let GridBounds::GaussianFamily { mu, sigma } = bounds else {
                return Err(Error::InvalidConfig(
                    "wasserstein grid needs a gaussian family bound".into(),
                ));
            };
            let mus = linspace(mu.0, mu.1, resolution);
            let sigmas = linspace(sigma.0, sigma.1, resolution);
            let levels = quantile_levels(*m);
            let mut out = Vec::with_capacity(resolution * resolution);
            for &mu in &mus {
                for &sd in &sigmas {
                    let q = truncated_normal_quantiles(mu, sd, *support, &levels)?;
                    out.push(ObjectPoint::Wasserstein1d(q));
                }
            }
            Ok(out)
        }
        MetricSpaceDescriptor::Network { .. } => match bounds {
            GridBounds::Explicit(list) => {
                for p in list {
                    space.validate(p)?;
                }
                Ok(list.clone())
            }
            _ => Err(Error::InvalidConfig("network grid needs an explicit candidate list".into())),
        },
        MetricSpaceDescriptor::Spider3 => unreachable!("guarded by has_grid"),
    }
}

/// Quantile values of a normal with mean `mu` and sd `sd` truncated to
/// `support`, evaluated at the given levels.
pub fn truncated_normal_quantiles(
    mu: f64,
    sd: f64,
    support: [f64; 2],
    levels: &[f64],
) -> Result<Vec<f64>> {
    use statrs::distribution::{ContinuousCDF, Normal};
    if !(sd.is_finite() && sd > 0.0) {
        return Err(Error::InvalidConfig(format!("truncated normal sd {sd} not positive")));
    }
    let std = Normal::standard();
    let a = std.cdf((support[0] - mu) / sd);
    let b = std.cdf((support[1] - mu) / sd);
    let mut out = Vec::with_capacity(levels.len());
    for &u in levels {
        let z = std.inverse_cdf(a + u * (b - a));
        out.push((mu + sd * z).clamp(support[0], support[1]));
    }
    // guard against rounding in the tails
    let mut prev = f64::NEG_INFINITY;
    for v in &mut out {
        if *v < prev {
            *v = prev;
        }
        prev = *v;
    }
    Ok(out)
}

/// Midpoint quantile grid of a (non-truncated) normal distribution.
pub fn normal_quantiles(mu: f64, sd: f64, levels: &[f64]) -> Vec<f64> {
    use statrs::distribution::{ContinuousCDF, Normal};
    let std = Normal::standard();
    levels.iter().map(|&u| mu + sd * std.inverse_cdf(u)).collect()
}

/// Largest pairwise distance in a point set.
pub fn diameter(space: &MetricSpaceDescriptor, points: &[ObjectPoint]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.max(distance(space, &points[i], &points[j])?);
        }
    }
    Ok(best)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![(lo + hi) / 2.0];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Build a transport map from the quantile function of `Beta(2, 2)`'s CDF or
/// any other closure on [0, 1]; used by the simulation generators.
pub fn transport_from_fn(g: usize, f: impl Fn(f64) -> f64) -> Result<TransportMap> {
    let xs = linspace(0.0, 1.0, g);
    TransportMap::new(xs.iter().map(|&x| f(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    fn sphere(v: [f64; 3]) -> ObjectPoint {
        ObjectPoint::Sphere2(v)
    }

    #[test]
    fn orthogonal_sphere_points_are_quarter_circle_apart() {
        let d = distance(
            &MetricSpaceDescriptor::Sphere2,
            &sphere([1.0, 0.0, 0.0]),
            &sphere([0.0, 1.0, 0.0]),
        )
        .unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn spider_distance_adds_lengths_across_rays() {
        let s = MetricSpaceDescriptor::Spider3;
        let a = ObjectPoint::Spider3 { ray: 1, len: 0.4 };
        let b = ObjectPoint::Spider3 { ray: 2, len: 0.3 };
        let c = ObjectPoint::Spider3 { ray: 1, len: 0.1 };
        assert!((distance(&s, &a, &b).unwrap() - 0.7).abs() < 1e-15);
        assert!((distance(&s, &a, &c).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_distance_of_point_masses_is_their_gap() {
        let m = 100;
        let s = MetricSpaceDescriptor::wasserstein(m, [0.0, 1.0]);
        let a = ObjectPoint::Wasserstein1d(vec![0.2; m]);
        let b = ObjectPoint::Wasserstein1d(vec![0.5; m]);
        let d = distance(&s, &a, &b).unwrap();
        // direct loop oracle for the root-mean-square of the grid differences
        let mut ss = 0.0;
        for _ in 0..m {
            ss += (0.2f64 - 0.5).powi(2);
        }
        let oracle = (ss / m as f64).sqrt();
        assert!((d - oracle).abs() < 1e-14);
        assert!((d - 0.3).abs() < 1e-12);
    }

    #[test]
    fn exp_map_quarter_circle_and_zero_vector() {
        let p = [1.0, 0.0, 0.0];
        let q = exp_map_sphere(&p, &[0.0, PI / 2.0, 0.0]).unwrap();
        assert!((q[0]).abs() < 1e-12 && (q[1] - 1.0).abs() < 1e-12);

        let same = exp_map_sphere(&p, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(same, p);

        let r = exp_map_sphere(&p, &[0.0, 0.0, 0.3]).unwrap();
        assert!((r[0] - 0.3f64.cos()).abs() < 1e-15);
        assert!(r[1].abs() < 1e-15);
        assert!((r[2] - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn exp_map_rejects_bad_inputs() {
        let err = exp_map_sphere(&[0.9, 0.0, 0.0], &[0.0, 0.1, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoint(_)));
        // tangent vector with a normal component
        let err = exp_map_sphere(&[1.0, 0.0, 0.0], &[0.1, 0.2, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoint(_)));
    }

    #[test]
    fn distance_rejects_mismatched_kinds() {
        let err = distance(
            &MetricSpaceDescriptor::Sphere2,
            &sphere([1.0, 0.0, 0.0]),
            &ObjectPoint::scalar(1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SpaceMismatch { .. }));
    }

    #[test]
    fn log_map_inverts_exp_map() {
        let p = [1.0, 0.0, 0.0];
        assert_eq!(log_map_sphere(&p, &p).unwrap(), [0.0; 3]);
        let v = log_map_sphere(&p, &[0.0, 1.0, 0.0]).unwrap();
        assert!((v[1] - PI / 2.0).abs() < 1e-12 && v[0].abs() < 1e-12 && v[2].abs() < 1e-12);

        let err = log_map_sphere(&p, &[-1.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::InvalidPoint(_)));
    }

    #[test]
    fn euclidean_mean_and_degenerate_weight() {
        let s = MetricSpaceDescriptor::euclidean(1);
        let pts = vec![ObjectPoint::scalar(1.0), ObjectPoint::scalar(3.0)];
        let m = frechet_mean(&s, &pts, &[0.5, 0.5]).unwrap();
        assert_eq!(m, ObjectPoint::scalar(2.0));

        let sp = MetricSpaceDescriptor::Sphere2;
        let pts = vec![sphere([0.6, 0.8, 0.0]), sphere([0.0, 0.0, 1.0])];
        let m = frechet_mean(&sp, &pts, &[1.0, 0.0]).unwrap();
        assert_eq!(m, pts[0]);
    }

    #[test]
    fn sphere_mean_matches_great_circle_search() {
        let sp = MetricSpaceDescriptor::Sphere2;
        let pts = vec![sphere([1.0, 0.0, 0.0]), sphere([0.0, 1.0, 0.0])];
        let m = frechet_mean(&sp, &pts, &[0.5, 0.5]).unwrap();
        let ObjectPoint::Sphere2(v) = m else { panic!() };

        // oracle: minimize the weighted squared geodesic distance along the
        // connecting great circle (cos s, sin s, 0)
        let objective = |s: f64| {
            let p = [s.cos(), s.sin(), 0.0];
            let d1 = norm3(&cross3(&p, &[1.0, 0.0, 0.0])).atan2(p[0]);
            let d2 = norm3(&cross3(&p, &[0.0, 1.0, 0.0])).atan2(p[1]);
            0.5 * d1 * d1 + 0.5 * d2 * d2
        };
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=100_000 {
            let s = PI / 2.0 * i as f64 / 100_000.0;
            let f = objective(s);
            if f < best.0 {
                best = (f, s);
            }
        }
        let oracle = [best.1.cos(), best.1.sin(), 0.0];
        for i in 0..3 {
            assert!((v[i] - oracle[i]).abs() < 1e-4, "{v:?} vs {oracle:?}");
        }
        let inv = 1.0 / 2f64.sqrt();
        assert!((v[0] - inv).abs() < 1e-9 && (v[1] - inv).abs() < 1e-9);
    }

    #[test]
    fn spider_rejects_mean_and_grid() {
        let s = MetricSpaceDescriptor::Spider3;
        let pts = vec![ObjectPoint::Spider3 { ray: 1, len: 0.5 }];
        assert!(matches!(
            frechet_mean(&s, &pts, &[1.0]).unwrap_err(),
            Error::Unsupported { .. }
        ));
        assert!(matches!(
            candidate_grid(&s, 3, &GridBounds::None).unwrap_err(),
            Error::Unsupported { .. }
        ));
    }

    #[test]
    fn euclidean_grid_resolution_three() {
        let s = MetricSpaceDescriptor::euclidean(1);
        let g = candidate_grid(&s, 3, &GridBounds::Interval(0.0, 1.0)).unwrap();
        let vals: Vec<f64> = g.iter().map(|p| p.coords()[0]).collect();
        assert_eq!(vals, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn sphere_grid_uses_product_construction() {
        let g = candidate_grid(&MetricSpaceDescriptor::Sphere2, 2, &GridBounds::None).unwrap();
        assert_eq!(g.len(), 4);
        // L = 2: theta in {pi/2, pi}, phi in {pi, 2 pi}
        let ObjectPoint::Sphere2(first) = &g[0] else { panic!() };
        assert!((first[0] + 1.0).abs() < 1e-12); // (sin pi/2 cos pi, ..) = (-1, 0, 0)
        for p in &g {
            let ObjectPoint::Sphere2(v) = p else { panic!() };
            assert!((dot3(v, v).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wasserstein_family_grid_has_squared_count() {
        let s = MetricSpaceDescriptor::wasserstein(50, [0.0, 1.0]);
        let g = candidate_grid(
            &s,
            4,
            &GridBounds::GaussianFamily {
                mu: (0.2, 0.8),
                sigma: (0.1, 0.4),
            },
        )
        .unwrap();
        assert_eq!(g.len(), 16);
        for p in &g {
            s.validate(p).unwrap();
        }
    }

    #[test]
    fn diameter_is_the_largest_pairwise_distance() {
        let s = MetricSpaceDescriptor::euclidean(1);
        let pts = vec![
            ObjectPoint::scalar(0.0),
            ObjectPoint::scalar(-2.0),
            ObjectPoint::scalar(3.5),
        ];
        assert_eq!(diameter(&s, &pts).unwrap(), 5.5);
        assert_eq!(diameter(&s, &pts[..1]).unwrap(), 0.0);
    }

    #[test]
    fn validation_rejects_bad_rows() {
        let sp = MetricSpaceDescriptor::Sphere2;
        let bad = ObjectPoint::Sphere2([0.9, 0.0, 0.0]);
        assert!(sp.validate(&bad).is_err());

        let ws = MetricSpaceDescriptor::wasserstein(3, [0.0, 1.0]);
        let bad = ObjectPoint::Wasserstein1d(vec![0.2, 0.1, 0.3]);
        assert!(ws.validate(&bad).is_err());

        let net = MetricSpaceDescriptor::Network { k: 2 };
        let bad = ObjectPoint::Network(vec![0.0, 0.5, 1.2, 0.3]);
        assert!(net.validate(&bad).is_err());
    }
}
