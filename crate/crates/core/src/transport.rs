//! The transport space of increasing maps of [0, 1] that fix the endpoints,
//! with composition as addition and a three-case scalar multiplication.
//!
//! A map is stored by its values on the uniform grid `x_i = i / (g - 1)`;
//! evaluation between nodes is piecewise linear. Pointwise operations are
//! followed by a running-maximum projection back onto the monotone cone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An increasing map `T: [0,1] -> [0,1]` with `T(0) = 0`, `T(1) = 1`, sampled on a
/// uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportMap {
    values: Vec<f64>,
}

impl TransportMap {
    /// Wrap grid values; rejects non-monotone input or values outside [0, 1].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidConfig("transport grid needs at least 2 nodes".into()));
        }
        for (i, w) in values.windows(2).enumerate() {
            if w[1] < w[0] {
                return Err(Error::InvalidPoint(format!(
                    "transport map decreases between nodes {i} and {}",
                    i + 1
                )));
            }
        }
        if values[0] < -1e-9 || values[values.len() - 1] > 1.0 + 1e-9 {
            return Err(Error::InvalidPoint("transport map leaves [0, 1]".into()));
        }
        let mut values = values;
        let n = values.len();
        values[0] = values[0].max(0.0);
        values[n - 1] = values[n - 1].min(1.0);
        Ok(Self { values })
    }

    /// The identity map on a grid of `g` nodes.
    pub fn identity(g: usize) -> Self {
        let values = (0..g).map(|i| i as f64 / (g - 1) as f64).collect();
        Self { values }
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation at `u` in [0, 1].
    pub fn eval(&self, u: f64) -> f64 {
        let g = self.values.len();
        let pos = u.clamp(0.0, 1.0) * (g - 1) as f64;
        let i = (pos.floor() as usize).min(g - 2);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Piecewise-linear inverse at `v`, resolving flat regions to their left
    /// endpoint.
    pub fn eval_inverse(&self, v: f64) -> f64 {
        let g = self.values.len();
        let v = v.clamp(self.values[0], self.values[g - 1]);
        // first node with value >= v
        let k = self.values.partition_point(|&y| y < v);
        if k == 0 {
            return 0.0;
        }
        let (y0, y1) = (self.values[k - 1], self.values[k]);
        let x0 = (k - 1) as f64 / (g - 1) as f64;
        let x1 = k as f64 / (g - 1) as f64;
        if y1 == y0 {
            x0
        } else {
            x0 + (v - y0) / (y1 - y0) * (x1 - x0)
        }
    }

    fn remonotonize(mut self) -> Self {
        for i in 1..self.values.len() {
            if self.values[i] < self.values[i - 1] {
                self.values[i] = self.values[i - 1];
            }
        }
        self
    }

    /// Sup-norm difference on the shared grid.
    pub fn sup_distance(&self, other: &TransportMap) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::GridMismatch("transport grids differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Addition in the transport space: `T1 (+) T2 = T2 o T1`, evaluated by
/// interpolation of `T2` at the values of `T1`.
pub fn transport_add(t1: &TransportMap, t2: &TransportMap) -> Result<TransportMap> {
    let values = t1.values.iter().map(|&v| t2.eval(v)).collect();
    Ok(TransportMap::new(values)?.remonotonize())
}

/// Scalar multiplication on the transport space for |alpha| <= 1:
/// positive alphas interpolate toward T, zero is the identity, and negative
/// alphas move toward the inverse map.
pub fn transport_scale(alpha: f64, t: &TransportMap) -> Result<TransportMap> {
    if !(alpha.is_finite() && alpha.abs() <= 1.0) {
        return Err(Error::InvalidConfig(format!("|alpha| must be <= 1, got {alpha}")));
    }
    let g = t.values.len();
    let mut values = Vec::with_capacity(g);
    for i in 0..g {
        let x = i as f64 / (g - 1) as f64;
        let v = if alpha > 0.0 {
            x + alpha * (t.values[i] - x)
        } else if alpha == 0.0 {
            x
        } else {
            x + alpha * (x - t.eval_inverse(x))
        };
        values.push(v.clamp(0.0, 1.0));
    }
    Ok(TransportMap::new(values)?.remonotonize())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(g: usize, f: impl Fn(f64) -> f64) -> TransportMap {
        let values = (0..g).map(|i| f(i as f64 / (g - 1) as f64)).collect();
        TransportMap::new(values).unwrap()
    }

    #[test]
    fn composition_with_identity_is_identity_elementwise() {
        let t = map_from(100, |x| x * x);
        let id = TransportMap::identity(100);
        let left = transport_add(&t, &id).unwrap();
        let right = transport_add(&id, &t).unwrap();
        assert!(left.sup_distance(&t).unwrap() <= 1e-12);
        assert!(right.sup_distance(&t).unwrap() <= 1e-12);
    }

    #[test]
    fn square_and_sqrt_compose_to_identity() {
        let square = map_from(100, |x| x * x);
        let sqrt = map_from(100, |x| x.sqrt());
        let id = TransportMap::identity(100);

        // sqrt first, square second: both factors are well represented on
        // the grid and the analytic composition is the identity
        let composed = transport_add(&sqrt, &square).unwrap();
        assert!(composed.sup_distance(&id).unwrap() <= 1e-3);

        // square first, sqrt second: the sqrt factor has unbounded slope at
        // zero, so its piecewise-linear sampling caps the accuracy near the
        // first cell; away from it the 1e-3 bound holds
        let composed = transport_add(&square, &sqrt).unwrap();
        assert!(composed.sup_distance(&id).unwrap() <= 0.03);
        let first_cell = 1.0 / 99.0;
        for (i, &v) in composed.values().iter().enumerate() {
            let x = i as f64 / 99.0;
            if x * x >= 4.0 * first_cell {
                assert!((v - x).abs() <= 1e-3, "node {i}: {v} vs {x}");
            }
        }
    }

    #[test]
    fn scale_by_zero_and_one() {
        let t = map_from(100, |x| x * x);
        let zero = transport_scale(0.0, &t).unwrap();
        assert!(zero.sup_distance(&TransportMap::identity(100)).unwrap() <= 1e-12);
        let one = transport_scale(1.0, &t).unwrap();
        assert!(one.sup_distance(&t).unwrap() <= 1e-12);
    }

    #[test]
    fn negative_scale_uses_the_inverse_map() {
        // T(x) = x^2, T^{-1}(x) = sqrt(x), so (-1) * T = x - (x - sqrt(x)) = sqrt(x)
        let t = map_from(400, |x| x * x);
        let scaled = transport_scale(-1.0, &t).unwrap();
        let sqrt = map_from(400, |x| x.sqrt());
        assert!(scaled.sup_distance(&sqrt).unwrap() <= 1e-3);
    }

    #[test]
    fn rejects_out_of_range_alpha_and_decreasing_grids() {
        let t = TransportMap::identity(10);
        assert!(transport_scale(1.5, &t).is_err());
        assert!(TransportMap::new(vec![0.0, 0.5, 0.4, 1.0]).is_err());
    }

    #[test]
    fn inverse_resolves_flat_regions_to_the_left() {
        let t = TransportMap::new(vec![0.0, 0.5, 0.5, 0.5, 1.0]).unwrap();
        // value 0.5 is attained on nodes 1..=3; the inverse picks node 1
        assert!((t.eval_inverse(0.5) - 0.25).abs() < 1e-12);
    }
}
