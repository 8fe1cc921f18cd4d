use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::par;

use super::kernel::KernelSpec;
use super::{FitWarning, SmoothFit};

/// Pivot ratio below which a local normal matrix is treated as singular.
const SINGULAR_RATIO: f64 = 1e-12;

fn design_row(spec: &KernelSpec, x: &[f64], xi: &[f64], degree: usize, row: &mut Vec<f64>) {
    row.clear();
    row.push(1.0);
    if x.len() == 1 {
        let u = (xi[0] - x[0]) / spec.bandwidth[0];
        let mut pow = 1.0;
        for _ in 0..degree {
            pow *= u;
            row.push(pow);
        }
    } else if degree >= 1 {
        for k in 0..x.len() {
            row.push((xi[k] - x[k]) / spec.bandwidth[k]);
        }
    }
}

/// Weighted least squares intercept; `None` when the local design is singular.
fn solve_intercept(
    data: &Dataset,
    spec: &KernelSpec,
    x: &[f64],
    weights: &[f64],
    degree: usize,
) -> Option<f64> {
    let m = if x.len() == 1 {
        degree + 1
    } else {
        1 + usize::from(degree >= 1) * x.len()
    };
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    let mut row = Vec::with_capacity(m);
    for ((xi, &yi), &w) in data.xs().iter().zip(data.ys()).zip(weights) {
        if w == 0.0 {
            continue;
        }
        design_row(spec, x, xi, degree, &mut row);
        for r in 0..m {
            let wr = w * row[r];
            b[r] += wr * yi;
            for c in 0..=r {
                a[(r, c)] += wr * row[c];
            }
        }
    }
    for r in 0..m {
        for c in r + 1..m {
            a[(r, c)] = a[(c, r)];
        }
    }
    let chol = a.cholesky()?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| {
        (lo.min(d.abs()), hi.max(d.abs()))
    });
    // NaN pivots count as singular
    if (lo * lo).partial_cmp(&(SINGULAR_RATIO * hi * hi)) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let sol = chol.solve(&b);
    sol[0].is_finite().then_some(sol[0])
}

/// Bandwidth multiplier that brings the `needed` nearest design points
/// inside the kernel's effective support.
fn inflation_factor(data: &Dataset, spec: &KernelSpec, x: &[f64], needed: usize) -> f64 {
    let mut dist: Vec<f64> = data
        .xs()
        .iter()
        .map(|xi| {
            xi.iter()
                .zip(x)
                .zip(&spec.bandwidth)
                .map(|((a, b), h)| (a - b).abs() / h)
                .fold(0.0, f64::max)
        })
        .collect();
    dist.sort_by(f64::total_cmp);
    let r = dist[needed.min(dist.len()) - 1];
    let reach = spec.family.support().unwrap_or(1.0);
    (1.05 * r / reach).max(1.0)
}

/// Local polynomial estimate `γ̂₀` at a single point.
pub fn local_poly_at(
    data: &Dataset,
    spec: &KernelSpec,
    x: &[f64],
) -> Result<(f64, Vec<FitWarning>)> {
    if spec.dim() != data.dim() || x.len() != data.dim() {
        return Err(Error::InvalidSpec(format!(
            "kernel has {} bandwidths, data has {} predictors",
            spec.dim(),
            data.dim()
        )));
    }
    if data.dim() > 1 && spec.degree > 1 {
        return Err(Error::InvalidSpec(
            "multivariate local polynomial fits support degree 0 or 1".into(),
        ));
    }
    let mut warnings = Vec::new();
    let mut local = spec.clone();
    let diffs = |s: &KernelSpec| -> Vec<f64> {
        let mut d = vec![0.0; x.len()];
        data.xs()
            .iter()
            .map(|xi| {
                for k in 0..x.len() {
                    d[k] = x[k] - xi[k];
                }
                s.weight(&d)
            })
            .collect()
    };
    let mut weights = diffs(&local);
    if !weights.iter().any(|&w| w > 0.0) {
        let factor = inflation_factor(data, &local, x, spec.degree + 1);
        for h in &mut local.bandwidth {
            *h *= factor;
        }
        weights = diffs(&local);
        warnings.push(FitWarning::BandwidthInflated {
            at: x.to_vec(),
            factor,
        });
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(Error::Numerical(format!("empty kernel window at {x:?}")));
        }
    }
    if let Some(v) = solve_intercept(data, &local, x, &weights, local.degree) {
        return Ok((v, warnings));
    }
    if local.degree > 0 {
        warnings.push(FitWarning::DegreeFallback { at: x.to_vec() });
        let total: f64 = weights.iter().sum();
        let v = weights
            .iter()
            .zip(data.ys())
            .map(|(w, y)| w * y)
            .sum::<f64>()
            / total;
        if v.is_finite() {
            return Ok((v, warnings));
        }
    }
    Err(Error::Numerical(format!("local fit failed at {x:?}")))
}

/// Local polynomial regression evaluated at every grid node.
pub fn local_poly_fit(data: &Dataset, spec: &KernelSpec, grid: &Arc<Grid>) -> Result<SmoothFit> {
    if grid.dim() != data.dim() {
        return Err(Error::GridMismatch(format!(
            "grid is {}-D, data is {}-D",
            grid.dim(),
            data.dim()
        )));
    }
    let nodes = grid.nodes();
    let results = par::map_indices(nodes.len(), |i| local_poly_at(data, spec, &nodes[i]));
    let mut values = Vec::with_capacity(nodes.len());
    let mut warnings = Vec::new();
    for r in results {
        let (v, w) = r?;
        values.push(v);
        warnings.extend(w);
    }
    Ok(SmoothFit {
        fit: GridFunction::from_vec(grid.clone(), values)?,
        warnings,
    })
}
