//! Smoothing kernels on [-1, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel family; every member is a symmetric continuous density on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    #[default]
    Epanechnikov,
    Triangular,
    Quartic,
}

impl KernelFamily {
    /// Kernel density at `u`; zero outside [-1, 1].
    pub fn eval(self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self {
            KernelFamily::Epanechnikov => 0.75 * (1.0 - u * u),
            KernelFamily::Triangular => 1.0 - a,
            KernelFamily::Quartic => {
                let s = 1.0 - u * u;
                15.0 / 16.0 * s * s
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "epanechnikov" => Ok(KernelFamily::Epanechnikov),
            "triangular" => Ok(KernelFamily::Triangular),
            "quartic" => Ok(KernelFamily::Quartic),
            other => Err(Error::InvalidConfig(format!("unknown kernel: {other}"))),
        }
    }
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KernelFamily::Epanechnikov => "epanechnikov",
            KernelFamily::Triangular => "triangular",
            KernelFamily::Quartic => "quartic",
        };
        f.write_str(s)
    }
}

/// Kernel family plus a bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }
        Ok(Self { family, bandwidth })
    }

    /// Scaled kernel weight K((xj - x) / h).
    pub fn weight(&self, x: f64, xj: f64) -> f64 {
        self.family.eval((xj - x) / self.bandwidth)
    }
}

/// Bandwidth choice: a fixed value or the rule of thumb `c * sd(X) * n^(-1/5)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    Auto { c: f64 },
    Fixed(f64),
}

impl Default for Bandwidth {
    fn default() -> Self {
        Bandwidth::Auto { c: 1.0 }
    }
}

impl Bandwidth {
    /// Resolve to a concrete bandwidth for the covariates `xs`.
    ///
    /// A degenerate design (zero variance) falls back to h = 1; every point
    /// then sits at the window center regardless of the value.
    pub fn resolve(&self, xs: &[f64]) -> Result<f64> {
        match *self {
            Bandwidth::Fixed(h) => {
                if !(h.is_finite() && h > 0.0) {
                    return Err(Error::InvalidConfig(format!("bandwidth {h} not positive")));
                }
                Ok(h)
            }
            Bandwidth::Auto { c } => {
                if xs.is_empty() {
                    return Err(Error::InvalidConfig("empty covariate list".into()));
                }
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let var = if xs.len() < 2 {
                    0.0
                } else {
                    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                };
                let sd = var.sqrt();
                if sd <= 1e-12 * mean.abs().max(1.0) {
                    return Ok(1.0);
                }
                Ok(c * sd * n.powf(-0.2))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_are_densities_on_unit_interval() {
        for family in [
            KernelFamily::Epanechnikov,
            KernelFamily::Triangular,
            KernelFamily::Quartic,
        ] {
            // symmetric, zero outside, integrates to 1 (trapezoid check)
            assert_eq!(family.eval(1.5), 0.0);
            assert_eq!(family.eval(-1.5), 0.0);
            let m = 20_001;
            let mut integral = 0.0;
            for i in 0..m {
                let u = -1.0 + 2.0 * i as f64 / (m - 1) as f64;
                let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                integral += w * family.eval(u);
                assert!((family.eval(u) - family.eval(-u)).abs() < 1e-12);
            }
            integral *= 2.0 / (m - 1) as f64;
            assert!((integral - 1.0).abs() < 1e-6, "{family}: {integral}");
        }
    }

    #[test]
    fn rule_of_thumb_scales_with_sd_and_n() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let h = Bandwidth::Auto { c: 1.0 }.resolve(&xs).unwrap();
        let mean = 0.5;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 99.0).sqrt();
        assert!((h - sd * 100f64.powf(-0.2)).abs() < 1e-12);

        let degenerate = vec![0.3; 50];
        assert_eq!(Bandwidth::default().resolve(&degenerate).unwrap(), 1.0);
    }
}
