use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    #[default]
    Gaussian,
    Epanechnikov,
    Uniform,
}

impl KernelFamily {
    /// Standardised kernel `K(u)`: unit mass, zero mean.
    pub fn density(self, u: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            KernelFamily::Epanechnikov => {
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u)
                } else {
                    0.0
                }
            }
            KernelFamily::Uniform => {
                if u.abs() <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }

    /// Half-width of the support in standardised units, `None` if unbounded.
    pub fn support(self) -> Option<f64> {
        match self {
            KernelFamily::Gaussian => None,
            _ => Some(1.0),
        }
    }
}

/// Product kernel with one bandwidth per axis and a local polynomial degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: Vec<f64>,
    pub degree: usize,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, bandwidth: Vec<f64>, degree: usize) -> Result<Self> {
        if bandwidth.is_empty() || bandwidth.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidSpec(format!(
                "bandwidths must be positive, got {bandwidth:?}"
            )));
        }
        Ok(Self {
            family,
            bandwidth,
            degree,
        })
    }

    pub fn dim(&self) -> usize {
        self.bandwidth.len()
    }

    /// `K_h(u) = K(u / h) / h` on the first axis.
    pub fn eval(&self, u: f64) -> f64 {
        let h = self.bandwidth[0];
        self.family.density(u / h) / h
    }

    /// Product kernel weight for the displacement `diff`.
    pub fn weight(&self, diff: &[f64]) -> f64 {
        diff.iter()
            .zip(&self.bandwidth)
            .map(|(&d, &h)| self.family.density(d / h) / h)
            .product()
    }
}

/// Normal-reference bandwidth `1.06 * sd * n^(-1/5)` for every axis.
pub fn normal_reference_bandwidth(data: &Dataset) -> Vec<f64> {
    let n = data.len() as f64;
    (0..data.dim())
        .map(|k| {
            let mean = data.column(k).sum::<f64>() / n;
            let var = data.column(k).map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            1.06 * var.sqrt() * n.powf(-0.2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(family: KernelFamily, h: f64) -> KernelSpec {
        KernelSpec::new(family, vec![h], 0).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_abs_diff_eq!(
            spec(KernelFamily::Gaussian, 1.0).eval(0.0),
            0.398942,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            spec(KernelFamily::Gaussian, 2.0).eval(0.0),
            0.199471,
            epsilon = 1e-6
        );
        let ep = spec(KernelFamily::Epanechnikov, 1.0);
        assert_eq!(ep.eval(1.0), 0.0);
        assert_eq!(ep.eval(-3.0), 0.0);
        assert_eq!(ep.eval(0.0), 0.75);
        assert_eq!(spec(KernelFamily::Uniform, 2.0).eval(1.9), 0.25);
    }

    #[test]
    fn kernels_have_unit_mass_and_zero_mean() {
        for fam in [
            KernelFamily::Gaussian,
            KernelFamily::Epanechnikov,
            KernelFamily::Uniform,
        ] {
            let n = 200_000;
            let (a, b) = (-10.0, 10.0);
            let du = (b - a) / n as f64;
            let (mut mass, mut first, mut second) = (0.0, 0.0, 0.0);
            for i in 0..n {
                let u = a + (i as f64 + 0.5) * du;
                let k = fam.density(u);
                mass += k * du;
                first += u * k * du;
                second += u * u * k * du;
            }
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(first, 0.0, epsilon = 1e-9);
            assert!(second.is_finite() && second > 0.0);
        }
    }

    #[test]
    fn rejects_non_positive_bandwidth() {
        assert!(KernelSpec::new(KernelFamily::Gaussian, vec![0.0], 1).is_err());
        assert!(KernelSpec::new(KernelFamily::Gaussian, vec![1.0, -2.0], 1).is_err());
        assert!(KernelSpec::new(KernelFamily::Gaussian, vec![], 1).is_err());
    }

    #[test]
    fn product_kernel() {
        let s = KernelSpec::new(KernelFamily::Gaussian, vec![1.0, 2.0], 1).unwrap();
        let expect =
            KernelFamily::Gaussian.density(0.5) * KernelFamily::Gaussian.density(0.25) / 2.0;
        assert_abs_diff_eq!(s.weight(&[0.5, 0.5]), expect, epsilon = 1e-15);
    }
}
