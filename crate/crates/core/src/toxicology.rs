//! The bundled DDT × nano-TiO₂ micronucleus data and its monotone analysis.
//!
//! Responses are proportions of 3000 scored cells on a 4×4 design with
//! `x₁ = log₁₀(DDT) + 4` and `x₂ = log₁₀(TiO₂) + 3`. The fit and bands are
//! computed on the raw proportions and clamped to `[0, 1]` only on output.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_bands, BandEstimate, BootstrapConfig};
use crate::dataset::Dataset;
use crate::error::Result;
use crate::grid::{default_nodes_per_axis, Grid, GridFunction, Interval};
use crate::io::read_dataset;
use crate::smoothers::{KernelFamily, SmootherSpec};

pub const TOXICOLOGY_CSV: &str = include_str!("../../../data/tox_ddt_tio2.csv");

pub fn toxicology_domain() -> Vec<Interval> {
    vec![Interval { lo: 0.0, hi: 3.0 }; 2]
}

/// Local-linear Gaussian smoother with `h = 0.4`, under half the unit
/// spacing of the dose lattice, so adjacent dose levels are not averaged
/// together and the step-like DDT effect survives.
pub fn toxicology_smoother() -> SmootherSpec {
    SmootherSpec::Kernel {
        family: KernelFamily::Gaussian,
        bandwidth: Some(vec![0.4]),
        degree: 1,
    }
}

pub fn toxicology_dataset() -> Result<Dataset> {
    read_dataset(TOXICOLOGY_CSV.as_bytes(), Some(toxicology_domain()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub y: f64,
    pub fitted: f64,
    pub lower: f64,
    pub upper: f64,
    pub inside: bool,
}

#[derive(Debug, Clone)]
pub struct ToxicologyAnalysis {
    /// Bands on the unclamped scale.
    pub bands: BandEstimate,
    pub estimate: GridFunction,
    pub lower: GridFunction,
    pub upper: GridFunction,
    pub observations: Vec<Observation>,
}

impl ToxicologyAnalysis {
    pub fn inside_count(&self) -> usize {
        self.observations.iter().filter(|o| o.inside).count()
    }
}

fn clamp_unit(f: &GridFunction) -> Result<GridFunction> {
    f.map(|v| v.clamp(0.0, 1.0))
}

/// Projected fit with percentile bands on a `nodes`×`nodes` grid (the
/// two-predictor default when `None`).
pub fn analyze_toxicology(
    smoother: &SmootherSpec,
    nodes: Option<usize>,
    config: &BootstrapConfig,
) -> Result<ToxicologyAnalysis> {
    let data = toxicology_dataset()?;
    let grid = Arc::new(Grid::uniform(
        &toxicology_domain(),
        nodes.unwrap_or_else(|| default_nodes_per_axis(2)),
    )?);
    let bands = bootstrap_bands(&data, smoother, &grid, config)?;
    let estimate = clamp_unit(&bands.estimate)?;
    let lower = clamp_unit(&bands.lower)?;
    let upper = clamp_unit(&bands.upper)?;
    let observations = data
        .xs()
        .iter()
        .zip(data.ys())
        .map(|(x, &y)| {
            let (lo, hi) = (lower.interpolate(x), upper.interpolate(x));
            Observation {
                x: x.clone(),
                y,
                fitted: estimate.interpolate(x),
                lower: lo,
                upper: hi,
                inside: lo <= y && y <= hi,
            }
        })
        .collect();
    Ok(ToxicologyAnalysis {
        bands,
        estimate,
        lower,
        upper,
        observations,
    })
}
