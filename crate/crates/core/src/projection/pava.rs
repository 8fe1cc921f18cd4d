use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridFunction;

use super::gcm::gcm;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    mean: f64,
    weight: f64,
    len: usize,
}

pub(crate) fn check_weights(weights: &[f64]) -> Result<()> {
    match weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        Some(index) => Err(Error::InvalidWeight {
            index,
            value: weights[index],
        }),
        None => Ok(()),
    }
}

/// Weighted pool-adjacent-violators in place. Blocks merge only on a strict
/// decrease, so ties are left untouched.
pub(crate) fn pava_in_place(values: &mut [f64], weights: &[f64], blocks: &mut Vec<Block>) {
    debug_assert_eq!(values.len(), weights.len());
    blocks.clear();
    for (&v, &w) in values.iter().zip(weights) {
        let mut cur = Block {
            mean: v,
            weight: w,
            len: 1,
        };
        while let Some(prev) = blocks.last() {
            if prev.mean > cur.mean {
                let total = prev.weight + cur.weight;
                cur = Block {
                    mean: (prev.mean * prev.weight + cur.mean * cur.weight) / total,
                    weight: total,
                    len: prev.len + cur.len,
                };
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut i = 0;
    for b in blocks.iter() {
        values[i..i + b.len].fill(b.mean);
        i += b.len;
    }
}

/// Weighted isotonic regression: `argmin Σ w_i (v_i - g_i)^2` over
/// non-decreasing `g`.
pub fn isotonic(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != weights.len() {
        return Err(Error::InvalidInput(
            "values and weights differ in length".into(),
        ));
    }
    check_weights(weights)?;
    let mut out = values.to_vec();
    pava_in_place(&mut out, weights, &mut Vec::new());
    Ok(out)
}

/// The same projection computed as the slope of the greatest convex
/// minorant of the cumulative sum diagram `(Σ w, Σ w v)`.
pub fn isotonic_via_gcm(values: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if values.len() != weights.len() {
        return Err(Error::InvalidInput(
            "values and weights differ in length".into(),
        ));
    }
    check_weights(weights)?;
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let mut cw = Vec::with_capacity(values.len() + 1);
    let mut cs = Vec::with_capacity(values.len() + 1);
    cw.push(0.0);
    cs.push(0.0);
    let (mut sw, mut ss) = (0.0, 0.0);
    for (&v, &w) in values.iter().zip(weights) {
        sw += w;
        ss += w * v;
        cw.push(sw);
        cs.push(ss);
    }
    Ok(gcm(&cw, &cs)?.slopes)
}

/// Projection of a 1-D grid function onto the non-decreasing functions.
/// Without explicit weights the grid's trapezoidal weights are used, which
/// makes this the discretised `L^2` projection.
pub fn project_monotone_1d(f: &GridFunction, weights: Option<&[f64]>) -> Result<GridFunction> {
    if f.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "project_monotone_1d needs a 1-D grid, got {} dimensions",
            f.dim()
        )));
    }
    let grid: &Arc<_> = f.grid();
    let w = weights.unwrap_or_else(|| grid.axis_weights(0));
    if w.len() != grid.len() {
        return Err(Error::InvalidInput(
            "weight count does not match grid".into(),
        ));
    }
    let values: Vec<f64> = f.values().iter().copied().collect();
    let projected = isotonic(&values, w)?;
    GridFunction::from_vec(grid.clone(), projected)
}
