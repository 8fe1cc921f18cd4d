use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Interval;

/// Knot vector, order and smoothing weight of a B-spline smoother on one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineSpec {
    pub knots: Vec<f64>,
    pub order: usize,
    pub lambda: f64,
}

impl SplineSpec {
    pub fn new(knots: Vec<f64>, order: usize, lambda: f64) -> Result<Self> {
        if order == 0 || order > 4 {
            return Err(Error::InvalidSpec(format!("order {order} not in 1..=4")));
        }
        if knots.len() < order + 1 {
            return Err(Error::InvalidSpec(format!(
                "{} knots is too few for order {order}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpec(
                "knots must be finite and non-decreasing".into(),
            ));
        }
        if knots[0] >= knots[knots.len() - 1] {
            return Err(Error::InvalidSpec("knot range is empty".into()));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidSpec(format!("lambda {lambda} not in (0, 1]")));
        }
        Ok(Self {
            knots,
            order,
            lambda,
        })
    }

    /// Clamped cubic knots: `interior` equally spaced knots with the end
    /// knots repeated four times.
    pub fn clamped_cubic(range: Interval, interior: usize, lambda: f64) -> Result<Self> {
        let mut knots = vec![range.lo; 4];
        for i in 1..=interior {
            knots.push(range.lo + range.len() * i as f64 / (interior + 1) as f64);
        }
        knots.extend([range.hi; 4]);
        Self::new(knots, 4, lambda)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.knots.clone(), self.order, lambda)
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.order
    }

    pub fn range(&self) -> Interval {
        Interval {
            lo: self.knots[0],
            hi: self.knots[self.knots.len() - 1],
        }
    }

    /// `B_{j,l}(x)` by the Cox-de Boor recursion, `0/0 = 0`.
    pub fn basis(&self, j: usize, order: usize, x: f64) -> f64 {
        basis(&self.knots, j, order, x)
    }

    /// `d`-th derivative of `B_{j,order}` at `x`.
    pub fn basis_derivative(&self, j: usize, order: usize, d: usize, x: f64) -> f64 {
        basis_derivative(&self.knots, j, order, d, x)
    }

    /// Rows: points, columns: `d`-th derivative of each order-`self.order` basis function.
    pub fn design(&self, xs: &[f64], d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(xs.len(), self.n_basis(), |r, c| {
            basis_derivative(&self.knots, c, self.order, d, xs[r])
        })
    }

    /// `∫ D^a B_i · D^b B_j` over the knot range, exact for polynomial pieces.
    pub fn gram(&self, a: usize, b: usize) -> DMatrix<f64> {
        let n = self.n_basis();
        let mut g = DMatrix::zeros(n, n);
        for span in self.knots.windows(2) {
            let (lo, hi) = (span[0], span[1]);
            if hi <= lo {
                continue;
            }
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (node, weight) in GAUSS4 {
                let x = mid + half * node;
                let w = weight * half;
                let da: Vec<f64> = (0..n)
                    .map(|i| self.basis_derivative(i, self.order, a, x))
                    .collect();
                let db: Vec<f64> = (0..n)
                    .map(|i| self.basis_derivative(i, self.order, b, x))
                    .collect();
                for i in 0..n {
                    if da[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        g[(i, j)] += w * da[i] * db[j];
                    }
                }
            }
        }
        g
    }
}

/// Four-point Gauss-Legendre rule on `[-1, 1]`, exact to degree 7.
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn indicator(knots: &[f64], j: usize, x: f64) -> f64 {
    let (lo, hi) = (knots[j], knots[j + 1]);
    let last = knots[knots.len() - 1];
    // Half-open spans keep the basis a partition of unity at interior knots;
    // the final non-empty span also takes its right end.
    if (lo <= x && x < hi) || (x == last && hi == last && lo < hi) {
        1.0
    } else {
        0.0
    }
}

pub(crate) fn basis(knots: &[f64], j: usize, order: usize, x: f64) -> f64 {
    if j + order >= knots.len() {
        return 0.0;
    }
    if order == 1 {
        return indicator(knots, j, x);
    }
    let left = ratio(x - knots[j], knots[j + order - 1] - knots[j]);
    let right = ratio(knots[j + order] - x, knots[j + order] - knots[j + 1]);
    let mut v = 0.0;
    if left != 0.0 {
        v += left * basis(knots, j, order - 1, x);
    }
    if right != 0.0 {
        v += right * basis(knots, j + 1, order - 1, x);
    }
    v
}

pub(crate) fn basis_derivative(knots: &[f64], j: usize, order: usize, d: usize, x: f64) -> f64 {
    if d == 0 {
        return basis(knots, j, order, x);
    }
    if order == 1 || j + order >= knots.len() {
        return 0.0;
    }
    let k = (order - 1) as f64;
    let a = ratio(k, knots[j + order - 1] - knots[j]);
    let b = ratio(k, knots[j + order] - knots[j + 1]);
    let mut v = 0.0;
    if a != 0.0 {
        v += a * basis_derivative(knots, j, order - 1, d - 1, x);
    }
    if b != 0.0 {
        v -= b * basis_derivative(knots, j + 1, order - 1, d - 1, x);
    }
    v
}
