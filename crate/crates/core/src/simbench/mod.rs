//! The Monte Carlo study: catalog functions, data generation, RMSE and
//! bootstrap coverage experiments.

mod catalog;

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use catalog::{mean_function, MeanFunctionId};

use crate::bootstrap::{bootstrap_bands, replicate_rng, BootstrapConfig};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{default_nodes_per_axis, norm_lp, Grid, GridFunction};
use crate::par;
use crate::projection::{project_monotone_nd, ProjectionOptions};
use crate::smoothers::SmootherSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mean: MeanFunctionId,
    pub sigma: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub smoother: SmootherSpec,
    #[serde(default)]
    pub seed: u64,
    /// Nodes per grid axis; `None` uses the dimension default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nodes: Option<usize>,
    #[serde(default)]
    pub projection: ProjectionOptions,
}

fn default_n() -> usize {
    100
}

fn default_replicates() -> usize {
    50
}

impl ExperimentConfig {
    pub fn new(mean: MeanFunctionId, sigma: f64) -> Self {
        Self {
            mean,
            sigma,
            n: default_n(),
            replicates: default_replicates(),
            smoother: SmootherSpec::default(),
            seed: 0,
            grid_nodes: None,
            projection: ProjectionOptions::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidInput("need at least one replicate".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput("need at least two observations".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        let nodes = self
            .grid_nodes
            .unwrap_or_else(|| default_nodes_per_axis(self.mean.dim()));
        Ok(Arc::new(Grid::uniform(&self.mean.domain(), nodes)?))
    }
}

/// The noise levels 0, 0.1, …, 1.3.
pub fn sigma_grid() -> Vec<f64> {
    (0..=13).map(|i| f64::from(i) / 10.0).collect()
}

/// Evaluation points of the one-predictor coverage table.
pub fn coverage_points_1d() -> Vec<Vec<f64>> {
    [0.5, 1.5, 2.5, 3.5, 5.5, 6.5, 7.5, 8.5, 9.5]
        .iter()
        .map(|&x| vec![x])
        .collect()
}

/// Evaluation points of the two-predictor coverage table, `x₂` outer.
pub fn coverage_points_2d() -> Vec<Vec<f64>> {
    let ticks = [0.0, 0.25, 0.5, 0.75, 1.0];
    ticks
        .iter()
        .flat_map(|&b| ticks.iter().map(move |&a| vec![a, b]))
        .collect()
}

/// Design points: equally spaced `10 i / n`, `i = 1..n`, in one dimension;
/// i.i.d. uniform on the domain otherwise.
fn design(id: MeanFunctionId, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let dom = id.domain();
    if id.dim() == 1 {
        let d = dom[0];
        return (1..=n)
            .map(|i| vec![d.lo + d.len() * i as f64 / n as f64])
            .collect();
    }
    (0..n)
        .map(|_| {
            dom.iter()
                .map(|d| d.lo + d.len() * rng.random::<f64>())
                .collect()
        })
        .collect()
}

/// Data set for one replicate; replicate `r` uses its own random stream.
pub fn generate_dataset(config: &ExperimentConfig, replicate: u64) -> Result<Dataset> {
    config.validate()?;
    let mut rng = replicate_rng(config.seed, replicate);
    generate_with(config, &mut rng)
}

fn generate_with(config: &ExperimentConfig, rng: &mut impl Rng) -> Result<Dataset> {
    let xs = design(config.mean, config.n, rng);
    let ys = xs
        .iter()
        .map(|x| {
            let z: f64 = rng.sample(StandardNormal);
            Ok(config.mean.eval(x)? + config.sigma * z)
        })
        .collect::<Result<_>>()?;
    Dataset::new(xs, ys, config.mean.domain())
}

/// `√(mean (fitted - truth)²)` over the design points.
pub fn rmse(fitted: &[f64], truth: MeanFunctionId, design: &[Vec<f64>]) -> Result<f64> {
    if fitted.len() != design.len() || design.is_empty() {
        return Err(Error::InvalidInput(
            "need one fitted value per design point".into(),
        ));
    }
    let mut sum = 0.0;
    for (f, x) in fitted.iter().zip(design) {
        sum += (f - truth.eval(x)?).powi(2);
    }
    Ok((sum / design.len() as f64).sqrt())
}

/// Outcome of one RMSE replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRmse {
    /// Projected fit at the design points.
    pub rmse: f64,
    /// Unconstrained fit at the design points.
    pub raw_rmse: f64,
    /// Grid-weighted `L²` errors of the projected and raw fits.
    pub l2_error: f64,
    pub raw_l2_error: f64,
    pub sweeps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseSummary {
    pub mean: MeanFunctionId,
    pub smoother: String,
    pub sigma: f64,
    pub n: usize,
    pub replicates: usize,
    pub failed: usize,
    pub unconverged: usize,
    pub mean_rmse: f64,
    /// Standard deviation of the replicate RMSEs.
    pub sd_rmse: f64,
    /// `sd_rmse / √replicates`.
    pub se_rmse: f64,
    pub mean_raw_rmse: f64,
    pub runs: Vec<ReplicateRmse>,
}

fn run_replicate(
    config: &ExperimentConfig,
    grid: &Arc<Grid>,
    replicate: u64,
) -> Result<ReplicateRmse> {
    let data = generate_dataset(config, replicate)?;
    let raw = config.smoother.fit(&data, grid)?.fit;
    let proj = project_monotone_nd(&raw, config.projection)?;
    let at =
        |f: &GridFunction| -> Vec<f64> { data.xs().iter().map(|x| f.interpolate(x)).collect() };
    let truth = GridFunction::from_fn(grid.clone(), |x| config.mean.eval_unchecked(x))?;
    Ok(ReplicateRmse {
        rmse: rmse(&at(&proj.projected), config.mean, data.xs())?,
        raw_rmse: rmse(&at(&raw), config.mean, data.xs())?,
        l2_error: norm_lp(&proj.projected, &truth, 2.0)?,
        raw_l2_error: norm_lp(&raw, &truth, 2.0)?,
        sweeps: proj.sweeps,
        converged: proj.converged,
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Mean RMSE of the projected estimator over independent replicates.
pub fn run_rmse_experiment(config: &ExperimentConfig) -> Result<RmseSummary> {
    config.validate()?;
    let grid = config.grid()?;
    let results = par::map_indices(config.replicates, |r| {
        run_replicate(config, &grid, r as u64)
    });
    let runs: Vec<ReplicateRmse> = results
        .iter()
        .filter_map(|r| r.as_ref().ok().copied())
        .collect();
    if runs.is_empty() {
        // every replicate failed: surface the first error
        return Err(results
            .into_iter()
            .find_map(Result::err)
            .expect("no successes means an error"));
    }
    let rmses: Vec<f64> = runs.iter().map(|r| r.rmse).collect();
    let raw: Vec<f64> = runs.iter().map(|r| r.raw_rmse).collect();
    let (mean_rmse, sd_rmse) = mean_sd(&rmses);
    Ok(RmseSummary {
        mean: config.mean,
        smoother: config.smoother.label().into(),
        sigma: config.sigma,
        n: config.n,
        replicates: runs.len(),
        failed: config.replicates - runs.len(),
        unconverged: runs.iter().filter(|r| !r.converged).count(),
        mean_rmse,
        sd_rmse,
        se_rmse: sd_rmse / (runs.len() as f64).sqrt(),
        mean_raw_rmse: mean_sd(&raw).0,
        runs,
    })
}

/// One experiment per (function, σ) cell, all sharing `base`'s other settings.
pub fn run_sigma_sweep(
    base: &ExperimentConfig,
    functions: &[MeanFunctionId],
    sigmas: &[f64],
) -> Result<Vec<RmseSummary>> {
    let mut out = Vec::with_capacity(functions.len() * sigmas.len());
    for &mean in functions {
        for &sigma in sigmas {
            out.push(run_rmse_experiment(&ExperimentConfig {
                mean,
                sigma,
                ..base.clone()
            })?);
        }
    }
    Ok(out)
}

pub fn write_rmse_csv(rows: &[RmseSummary], mut out: impl Write) -> Result<()> {
    writeln!(
        out,
        "function,smoother,sigma,n,replicates,failed,mean_rmse,sd_rmse,se_rmse,mean_raw_rmse"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.mean,
            r.smoother,
            r.sigma,
            r.n,
            r.replicates,
            r.failed,
            r.mean_rmse,
            r.sd_rmse,
            r.se_rmse,
            r.mean_raw_rmse
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub mean: MeanFunctionId,
    pub sigma: f64,
    pub points: Vec<Vec<f64>>,
    /// Fraction of successful outer replicates whose band covers the truth.
    pub coverage: Vec<f64>,
    pub replicates: usize,
    pub failed: usize,
    pub bootstrap_replicates: usize,
    pub level: f64,
}

/// Pointwise coverage of the bootstrap bands over the configured outer
/// replicates.
pub fn run_coverage_experiment(
    config: &ExperimentConfig,
    points: &[Vec<f64>],
    bootstrap_replicates: usize,
    level: f64,
) -> Result<CoverageSummary> {
    config.validate()?;
    let truth: Vec<f64> = points
        .iter()
        .map(|x| config.mean.eval(x))
        .collect::<Result<_>>()?;
    let grid = config.grid()?;
    let hits = par::map_indices(config.replicates, |r| -> Result<Vec<bool>> {
        let mut rng = replicate_rng(config.seed, r as u64);
        let data = generate_with(config, &mut rng)?;
        let boot = BootstrapConfig {
            replicates: bootstrap_replicates,
            level,
            seed: rng.random(),
            projection: config.projection,
        };
        let bands = bootstrap_bands(&data, &config.smoother, &grid, &boot)?;
        Ok(points
            .iter()
            .zip(&truth)
            .map(|(x, t)| {
                // rounding slack so degenerate bands still cover an exact fit
                let slack = 1e-9 * t.abs().max(1.0);
                bands.lower.interpolate(x) - slack <= *t && *t <= bands.upper.interpolate(x) + slack
            })
            .collect())
    });
    let ok: Vec<&Vec<bool>> = hits.iter().filter_map(|h| h.as_ref().ok()).collect();
    if ok.is_empty() {
        return Err(hits
            .into_iter()
            .find_map(Result::err)
            .expect("no successes means an error"));
    }
    let coverage = (0..points.len())
        .map(|j| ok.iter().filter(|h| h[j]).count() as f64 / ok.len() as f64)
        .collect();
    Ok(CoverageSummary {
        mean: config.mean,
        sigma: config.sigma,
        points: points.to_vec(),
        coverage,
        replicates: ok.len(),
        failed: config.replicates - ok.len(),
        bootstrap_replicates,
        level,
    })
}

pub fn write_coverage_csv(rows: &[CoverageSummary], mut out: impl Write) -> Result<()> {
    let dim = rows.first().map_or(1, |r| r.mean.dim());
    write!(out, "function,sigma,")?;
    for k in 1..=dim {
        write!(out, "x{k},")?;
    }
    writeln!(out, "coverage_pct,replicates,bootstrap_replicates,level")?;
    for r in rows {
        for (p, c) in r.points.iter().zip(&r.coverage) {
            write!(out, "{},{},", r.mean, r.sigma)?;
            for v in p {
                write!(out, "{v},")?;
            }
            writeln!(
                out,
                "{},{},{},{}",
                100.0 * c,
                r.replicates,
                r.bootstrap_replicates,
                r.level
            )?;
        }
    }
    Ok(())
}
