//! Unconstrained initial estimators evaluated on a grid.

mod bspline;
mod kernel;
mod local_poly;
mod spline;

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use bspline::SplineSpec;
pub use kernel::{normal_reference_bandwidth, KernelFamily, KernelSpec};
pub use local_poly::{local_poly_at, local_poly_fit};
pub use spline::{
    fit_spline_1d, fit_tensor_spline_2d, lambda_grid, smooth_spline_fit_1d, tensor_spline_fit_2d,
    PenalizedSystem, SplineModel,
};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Something a smoother had to work around while fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// Local design was singular; the local constant fit was used.
    DegreeFallback { at: Vec<f64> },
    /// No design point had positive kernel weight; bandwidth was scaled.
    BandwidthInflated { at: Vec<f64>, factor: f64 },
    /// Spline normal equations needed a ridge term.
    RidgeJitter { lambda: f64 },
}

#[derive(Debug, Clone)]
pub struct SmoothFit {
    pub fit: GridFunction,
    pub warnings: Vec<FitWarning>,
}

fn default_degree() -> usize {
    1
}

fn default_knots() -> usize {
    20
}

/// Serializable choice of initial estimator. Unset tuning parameters are
/// chosen from the data: the normal-reference bandwidth for kernels and
/// GCV for the spline smoothing weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SmootherSpec {
    Kernel {
        #[serde(default)]
        family: KernelFamily,
        /// One value per axis, or a single value used for every axis.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bandwidth: Option<Vec<f64>>,
        #[serde(default = "default_degree")]
        degree: usize,
    },
    Spline {
        #[serde(default = "default_knots")]
        interior_knots: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

impl Default for SmootherSpec {
    fn default() -> Self {
        SmootherSpec::Kernel {
            family: KernelFamily::Gaussian,
            bandwidth: None,
            degree: 1,
        }
    }
}

impl SmootherSpec {
    pub fn default_spline() -> Self {
        SmootherSpec::Spline {
            interior_knots: default_knots(),
            lambda: None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SmootherSpec::Kernel { .. } => "kernel",
            SmootherSpec::Spline { .. } => "spline",
        }
    }

    /// Concrete kernel for `data`, filling in the default bandwidth.
    pub fn kernel_for(&self, data: &Dataset) -> Result<KernelSpec> {
        let SmootherSpec::Kernel {
            family,
            bandwidth,
            degree,
        } = self
        else {
            return Err(Error::InvalidSpec("not a kernel smoother".into()));
        };
        let h = match bandwidth {
            None => normal_reference_bandwidth(data),
            Some(h) if h.len() == 1 => vec![h[0]; data.dim()],
            Some(h) if h.len() == data.dim() => h.clone(),
            Some(h) => {
                return Err(Error::InvalidSpec(format!(
                    "{} bandwidths given for {}-D data",
                    h.len(),
                    data.dim()
                )))
            }
        };
        KernelSpec::new(*family, h, *degree)
    }

    pub fn fit(&self, data: &Dataset, grid: &Arc<Grid>) -> Result<SmoothFit> {
        if grid.dim() != data.dim() {
            return Err(Error::GridMismatch(format!(
                "grid is {}-D, data is {}-D",
                grid.dim(),
                data.dim()
            )));
        }
        match self {
            SmootherSpec::Kernel { .. } => local_poly_fit(data, &self.kernel_for(data)?, grid),
            SmootherSpec::Spline {
                interior_knots,
                lambda,
            } => {
                let specs: Vec<SplineSpec> = data
                    .domain()
                    .iter()
                    .map(|d| SplineSpec::clamped_cubic(*d, *interior_knots, lambda.unwrap_or(0.5)))
                    .collect::<Result<_>>()?;
                let ys = DVector::from_column_slice(data.ys());
                match specs.as_slice() {
                    [s] => {
                        let s = match lambda {
                            Some(_) => s.clone(),
                            None => {
                                let xs: Vec<f64> = data.column(0).collect();
                                s.with_lambda(PenalizedSystem::one_dim(s, &xs).select_lambda(&ys))?
                            }
                        };
                        smooth_spline_fit_1d(data, &s, grid)
                    }
                    [s, t] => {
                        let (s, t) = match lambda {
                            Some(_) => (s.clone(), t.clone()),
                            None => {
                                let pts: Vec<(f64, f64)> =
                                    data.xs().iter().map(|x| (x[0], x[1])).collect();
                                let l = PenalizedSystem::tensor(s, t, &pts).select_lambda(&ys);
                                (s.with_lambda(l)?, t.with_lambda(l)?)
                            }
                        };
                        tensor_spline_fit_2d(data, &s, &t, grid)
                    }
                    _ => Err(Error::InvalidSpec(
                        "spline smoothers support one or two predictors; use a kernel for three"
                            .into(),
                    )),
                }
            }
        }
    }
}
