//! Residual bootstrap percentile bands around the projected fit.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::par;
use crate::projection::{project_monotone_nd, ProjectionOptions, ProjectionResult};
use crate::smoothers::SmootherSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    /// Nominal pointwise coverage in `(0, 1)`.
    pub level: f64,
    pub seed: u64,
    #[serde(default)]
    pub projection: ProjectionOptions,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 2000,
            level: 0.95,
            seed: 0,
            projection: ProjectionOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BandEstimate {
    /// Unconstrained fit of the original data.
    pub raw: GridFunction,
    /// Projected fit of the original data, the band's centre.
    pub estimate: GridFunction,
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Replicates whose refit failed; they are excluded from the bands.
    pub failed: usize,
    /// Successful replicates whose projection hit the sweep limit.
    pub unconverged: usize,
    /// Diagnostics of the projection of the original fit.
    pub projection: ProjectionSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub sweeps: usize,
    pub final_violation: f64,
    pub converged: bool,
}

impl From<&ProjectionResult> for ProjectionSummary {
    fn from(r: &ProjectionResult) -> Self {
        Self {
            sweeps: r.sweeps,
            final_violation: r.final_violation,
            converged: r.converged,
        }
    }
}

/// Generator for replicate `r`: its own stream of the seeded ChaCha8
/// family, so draws do not depend on scheduling.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Type-1 empirical quantile: the order statistic with index `⌈q·m⌉`
/// (1-based) of the sorted sample.
pub fn order_statistic_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let k = ((q * m as f64).ceil() as usize).clamp(1, m);
    sorted[k - 1]
}

/// Fits `smoother` and projects the fit.
fn fit_and_project(
    data: &Dataset,
    smoother: &SmootherSpec,
    grid: &Arc<Grid>,
    opts: ProjectionOptions,
) -> Result<(GridFunction, ProjectionResult)> {
    let raw = smoother.fit(data, grid)?.fit;
    let proj = project_monotone_nd(&raw, opts)?;
    Ok((raw, proj))
}

/// Pointwise percentile bands from resampling the residuals of the
/// projected fit.
pub fn bootstrap_bands(
    data: &Dataset,
    smoother: &SmootherSpec,
    grid: &Arc<Grid>,
    config: &BootstrapConfig,
) -> Result<BandEstimate> {
    if config.replicates < 2 {
        return Err(Error::InvalidReplicates(config.replicates));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "level must lie in (0, 1), got {}",
            config.level
        )));
    }
    let (raw, proj) = fit_and_project(data, smoother, grid, config.projection)?;
    let estimate = proj.projected.clone();
    let fitted: Vec<f64> = data.xs().iter().map(|x| estimate.interpolate(x)).collect();
    let resid: Vec<f64> = data.ys().iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let n = resid.len();

    let runs = par::map_indices(config.replicates, |r| {
        let mut rng = replicate_rng(config.seed, r as u64);
        let ys: Vec<f64> = fitted
            .iter()
            .map(|f| f + resid[rng.random_range(0..n)])
            .collect();
        let sample = data.with_responses(ys).ok()?;
        fit_and_project(&sample, smoother, grid, config.projection)
            .ok()
            .map(|(_, p)| (p.converged, p.projected.into_values()))
    });
    let ok: Vec<_> = runs.iter().flatten().collect();
    let failed = config.replicates - ok.len();
    if ok.len() < 2 {
        return Err(Error::Numerical(format!(
            "only {} of {} bootstrap replicates succeeded",
            ok.len(),
            config.replicates
        )));
    }
    let unconverged = ok.iter().filter(|(c, _)| !c).count();

    let alpha = (1.0 - config.level) / 2.0;
    let columns: Vec<Vec<f64>> = ok
        .iter()
        .map(|(_, v)| v.iter().copied().collect())
        .collect();
    let bounds = par::map_indices(grid.len(), |i| {
        let mut column: Vec<f64> = columns.iter().map(|c| c[i]).collect();
        column.sort_by(f64::total_cmp);
        (
            order_statistic_quantile(&column, alpha),
            order_statistic_quantile(&column, 1.0 - alpha),
        )
    });
    let (lo, hi): (Vec<f64>, Vec<f64>) = bounds.into_iter().unzip();
    Ok(BandEstimate {
        raw,
        lower: GridFunction::from_vec(grid.clone(), lo)?,
        upper: GridFunction::from_vec(grid.clone(), hi)?,
        projection: (&proj).into(),
        estimate,
        level: config.level,
        replicates: config.replicates,
        seed: config.seed,
        failed,
        unconverged,
    })
}
