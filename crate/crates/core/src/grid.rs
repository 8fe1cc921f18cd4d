//! Tensor-product grids, functions sampled on them, and the quadrature
//! norms used to measure distances between such functions.

use std::sync::Arc;

use ndarray::{ArrayD, Axis, Dimension, IxDyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "empty or non-finite interval [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Affine map onto `[0, 1]`.
    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.lo) / self.len()
    }
}

/// Default number of grid nodes per axis for a `p`-dimensional problem.
pub fn default_nodes_per_axis(dim: usize) -> usize {
    match dim {
        1 => 101,
        2 => 51,
        _ => 21,
    }
}

/// Tensor-product grid with trapezoidal product quadrature weights.
#[derive(Debug, Clone)]
pub struct Grid {
    axes: Vec<Vec<f64>>,
    axis_weights: Vec<Vec<f64>>,
    weights: ArrayD<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.axes == other.axes
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let left = if i == 0 { 0.0 } else { axis[i] - axis[i - 1] };
            let right = if i + 1 == n {
                0.0
            } else {
                axis[i + 1] - axis[i]
            };
            0.5 * (left + right)
        })
        .collect()
}

impl Grid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension {} not in 1..=3",
                axes.len()
            )));
        }
        for (k, axis) in axes.iter().enumerate() {
            if axis.len() < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis {} needs at least 2 nodes",
                    k + 1
                )));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {} has non-finite coordinates",
                    k + 1
                )));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidGrid(format!(
                    "axis {} coordinates are not strictly increasing",
                    k + 1
                )));
            }
        }
        let axis_weights: Vec<Vec<f64>> = axes.iter().map(|a| trapezoid_weights(a)).collect();
        let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
        let weights = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
            (0..idx.ndim()).map(|k| axis_weights[k][idx[k]]).product()
        });
        Ok(Self {
            axes,
            axis_weights,
            weights,
        })
    }

    /// Uniform grid with `nodes` points per axis spanning each interval.
    pub fn uniform(domain: &[Interval], nodes: usize) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidGrid("need at least 2 nodes per axis".into()));
        }
        let axes = domain
            .iter()
            .map(|iv| {
                (0..nodes)
                    .map(|i| {
                        if i + 1 == nodes {
                            iv.hi
                        } else {
                            iv.lo + iv.len() * i as f64 / (nodes - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    /// One-dimensional trapezoidal weights of axis `k`.
    pub fn axis_weights(&self, k: usize) -> &[f64] {
        &self.axis_weights[k]
    }

    /// Product quadrature weight of every node.
    pub fn weights(&self) -> &ArrayD<f64> {
        &self.weights
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn domain(&self) -> Vec<Interval> {
        self.axes
            .iter()
            .map(|a| Interval {
                lo: a[0],
                hi: a[a.len() - 1],
            })
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.domain().iter().map(Interval::len).product()
    }

    /// Coordinates of the node with multi-index `idx`.
    pub fn node(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.axes[k][i])
            .collect()
    }

    /// Coordinates of every node in row-major order (first axis slowest).
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        self.weights
            .indexed_iter()
            .map(|(idx, _)| self.node(idx.slice()))
            .collect()
    }
}

/// Values of a function on the nodes of a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: ArrayD<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: ArrayD<f64>) -> Result<Self> {
        if values.shape() != grid.shape().as_slice() {
            return Err(Error::GridMismatch(format!(
                "values have shape {:?}, grid has shape {:?}",
                values.shape(),
                grid.shape()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "grid function values must be finite".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Builds the function from values listed in row-major node order.
    pub fn from_vec(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let shape = grid.shape();
        let arr = ArrayD::from_shape_vec(IxDyn(&shape), values)
            .map_err(|e| Error::GridMismatch(e.to_string()))?;
        Self::new(grid, arr)
    }

    pub fn from_fn(grid: Arc<Grid>, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let shape = grid.shape();
        let values = ArrayD::from_shape_fn(IxDyn(&shape), |idx| f(&grid.node(idx.slice())));
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Result<Self> {
        let shape = grid.shape();
        Self::new(grid, ArrayD::from_elem(IxDyn(&shape), c))
    }

    /// Construction without the finiteness check, for values produced by
    /// operations that cannot introduce non-finite numbers.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: ArrayD<f64>) -> Self {
        debug_assert_eq!(values.shape(), grid.shape().as_slice());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    pub fn into_values(self) -> ArrayD<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "functions live on different grids".into(),
            ))
        }
    }

    /// Pointwise `self - other`.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_grid(other)?;
        Ok(Self::from_parts(
            self.grid.clone(),
            &self.values - &other.values,
        ))
    }

    /// Pointwise map, keeping the grid.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Result<GridFunction> {
        Self::new(self.grid.clone(), self.values.mapv(f))
    }

    /// Multilinear interpolation at `x`; coordinates outside the grid are
    /// clamped to its boundary.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let p = self.dim();
        assert_eq!(x.len(), p, "point dimension does not match grid");
        let mut lower = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for k in 0..p {
            let axis = self.grid.axis(k);
            let last = axis.len() - 1;
            let xk = x[k].clamp(axis[0], axis[last]);
            let i = axis
                .partition_point(|&a| a <= xk)
                .saturating_sub(1)
                .min(last - 1);
            lower[k] = i;
            frac[k] = (xk - axis[i]) / (axis[i + 1] - axis[i]);
        }
        let mut total = 0.0;
        let mut idx = [0usize; 3];
        for corner in 0..(1usize << p) {
            let mut weight = 1.0;
            for k in 0..p {
                if corner >> k & 1 == 1 {
                    idx[k] = lower[k] + 1;
                    weight *= frac[k];
                } else {
                    idx[k] = lower[k];
                    weight *= 1.0 - frac[k];
                }
            }
            if weight != 0.0 {
                total += weight * self.values[IxDyn(&idx[..p])];
            }
        }
        total
    }
}

/// Quadrature approximation of `∫ f g` over the grid's domain.
pub fn weighted_inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.check_grid(g)?;
    Ok(ndarray::Zip::from(f.grid.weights())
        .and(&f.values)
        .and(&g.values)
        .fold(0.0, |acc, &w, &a, &b| acc + w * a * b))
}

/// Quadrature `L^q` distance between `f` and `g`; `q = f64::INFINITY` gives
/// the maximum absolute difference over the nodes.
pub fn norm_lp(f: &GridFunction, g: &GridFunction, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidExponent(q));
    }
    f.check_grid(g)?;
    let zip = ndarray::Zip::from(f.grid.weights())
        .and(&f.values)
        .and(&g.values);
    if q.is_infinite() {
        return Ok(zip.fold(0.0, |acc: f64, _, &a, &b| acc.max((a - b).abs())));
    }
    let sum = zip.fold(0.0, |acc, &w, &a, &b| acc + w * (a - b).abs().powf(q));
    Ok(sum.powf(1.0 / q))
}

/// Weighted `L^2` norm of a single function.
pub fn norm_l2(f: &GridFunction) -> f64 {
    ndarray::Zip::from(f.grid.weights())
        .and(&f.values)
        .fold(0.0, |acc, &w, &a| acc + w * a * a)
        .sqrt()
}

/// Largest decrease between axis-adjacent nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneViolation {
    pub max_violation: f64,
    pub axis_violations: Vec<f64>,
}

impl MonotoneViolation {
    pub fn is_monotone(&self) -> bool {
        self.max_violation == 0.0
    }
}

pub(crate) fn axis_violation(values: &ArrayD<f64>, k: usize) -> f64 {
    let mut worst = 0.0f64;
    for lane in values.lanes(Axis(k)) {
        for w in lane.windows(2) {
            worst = worst.max(w[0] - w[1]);
        }
    }
    worst
}

pub fn monotone_violation(f: &GridFunction) -> MonotoneViolation {
    let axis_violations: Vec<f64> = (0..f.dim()).map(|k| axis_violation(&f.values, k)).collect();
    let max_violation = axis_violations.iter().copied().fold(0.0, f64::max);
    MonotoneViolation {
        max_violation,
        axis_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_grid(nodes: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(&[Interval::unit()], nodes).unwrap())
    }

    #[test]
    fn rejects_non_increasing_axis() {
        assert!(Grid::new(vec![vec![0.0, 1.0, 1.0]]).is_err());
        assert!(Grid::new(vec![vec![0.0]]).is_err());
        assert!(Grid::new(vec![]).is_err());
    }

    #[test]
    fn weights_sum_to_volume() {
        let dom = [
            Interval::new(-1.0, 2.0).unwrap(),
            Interval::new(0.0, 0.5).unwrap(),
        ];
        let g = Grid::uniform(&dom, 17).unwrap();
        let total: f64 = g.weights().sum();
        assert!((total - 1.5).abs() <= 1e-12 * 1.5);
        assert!(g.weights().iter().all(|&w| w > 0.0));

        let irregular = Grid::new(vec![vec![0.0, 0.1, 0.5, 2.0], vec![1.0, 3.0, 3.5]]).unwrap();
        assert!((irregular.weights().sum() - 5.0).abs() <= 5e-12);
    }

    #[test]
    fn inner_product_of_ones_is_volume() {
        let g = unit_grid(101);
        let one = GridFunction::constant(g.clone(), 1.0).unwrap();
        assert_abs_diff_eq!(
            weighted_inner_product(&one, &one).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let zero = GridFunction::constant(g.clone(), 0.0).unwrap();
        let other = GridFunction::from_fn(g, |x| x[0].sin()).unwrap();
        assert_eq!(weighted_inner_product(&zero, &other).unwrap(), 0.0);
    }

    #[test]
    fn inner_product_of_identity_matches_integral() {
        let g = unit_grid(1001);
        let f = GridFunction::from_fn(g, |x| x[0]).unwrap();
        assert_abs_diff_eq!(
            weighted_inner_product(&f, &f).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-5
        );
    }

    #[test]
    fn linear_integrand_is_exact() {
        let dom = [
            Interval::new(0.0, 2.0).unwrap(),
            Interval::new(1.0, 4.0).unwrap(),
        ];
        let g = Arc::new(Grid::uniform(&dom, 9).unwrap());
        let f = GridFunction::from_fn(g.clone(), |x| 1.0 + 2.0 * x[0] - 0.5 * x[1]).unwrap();
        let one = GridFunction::constant(g, 1.0).unwrap();
        // ∫∫ 1 + 2s - t/2 over [0,2]x[1,4] = 6 + 12 - 7.5
        assert_abs_diff_eq!(
            weighted_inner_product(&f, &one).unwrap(),
            10.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = GridFunction::constant(unit_grid(5), 1.0).unwrap();
        let b = GridFunction::constant(unit_grid(6), 1.0).unwrap();
        assert!(matches!(
            weighted_inner_product(&a, &b),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(norm_lp(&a, &b, 2.0), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn norm_examples() {
        let g = unit_grid(11);
        let f = GridFunction::from_fn(g.clone(), |x| x[0]).unwrap();
        let zero = GridFunction::constant(g.clone(), 0.0).unwrap();
        assert_eq!(norm_lp(&f, &f, 2.0).unwrap(), 0.0);
        assert_eq!(norm_lp(&f, &zero, f64::INFINITY).unwrap(), 1.0);
        let shifted = f.map(|v| v - 0.7).unwrap();
        assert_abs_diff_eq!(norm_lp(&f, &shifted, 2.0).unwrap(), 0.7, epsilon = 1e-12);
        assert!(matches!(
            norm_lp(&f, &zero, 0.5),
            Err(Error::InvalidExponent(_))
        ));
        assert!(norm_lp(&f, &zero, f64::NAN).is_err());
    }

    #[test]
    fn violation_examples() {
        let g = Arc::new(Grid::new(vec![vec![0.0, 1.0, 2.0]]).unwrap());
        let f = GridFunction::from_vec(g, vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(monotone_violation(&f).max_violation, 2.0);

        let g2 = Arc::new(Grid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap());
        let f2 = GridFunction::from_vec(g2.clone(), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let v = monotone_violation(&f2);
        assert_eq!(v.max_violation, 1.0);
        assert_eq!(v.axis_violations, vec![1.0, 1.0]);

        let mono = GridFunction::from_fn(g2, |x| x[0] + 2.0 * x[1]).unwrap();
        assert!(monotone_violation(&mono).is_monotone());
    }

    #[test]
    fn interpolation_reproduces_multilinear_functions() {
        let dom = [
            Interval::new(0.0, 2.0).unwrap(),
            Interval::new(-1.0, 1.0).unwrap(),
        ];
        let g = Arc::new(Grid::uniform(&dom, 7).unwrap());
        let f = GridFunction::from_fn(g, |x| 1.0 + x[0] - 3.0 * x[1] + 0.5 * x[0] * x[1]).unwrap();
        for &(s, t) in &[(0.0, -1.0), (0.37, 0.21), (2.0, 1.0), (1.99, -0.73)] {
            let exact = 1.0 + s - 3.0 * t + 0.5 * s * t;
            assert_abs_diff_eq!(f.interpolate(&[s, t]), exact, epsilon = 1e-12);
        }
        // clamped outside the grid
        assert_abs_diff_eq!(
            f.interpolate(&[5.0, 1.0]),
            f.interpolate(&[2.0, 1.0]),
            epsilon = 0.0
        );
    }
}
