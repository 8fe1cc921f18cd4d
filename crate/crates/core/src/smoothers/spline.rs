//! Penalised regression splines: cubic B-splines in one dimension and
//! tensor-product B-splines in two, each minimising
//! `λ·SSE + (1-λ)·(integrated squared second derivatives)`.
//!
//! The roughness penalty is measured after mapping the knot range onto the
//! unit interval, so `λ` has the same meaning on any domain.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

use super::bspline::SplineSpec;
use super::{FitWarning, SmoothFit};

const RIDGE_JITTER: f64 = 1e-10;

/// Fitted spline surface in one or two dimensions.
#[derive(Debug, Clone)]
pub struct SplineModel {
    pub specs: Vec<SplineSpec>,
    /// Coefficients; for two axes stored with the second axis fastest.
    pub coef: DVector<f64>,
}

impl SplineModel {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.specs.as_slice() {
            [s] => (0..s.n_basis())
                .map(|j| self.coef[j] * s.basis(j, s.order, x[0]))
                .sum(),
            [s, t] => {
                let bs: Vec<f64> = (0..s.n_basis())
                    .map(|i| s.basis(i, s.order, x[0]))
                    .collect();
                let bt: Vec<f64> = (0..t.n_basis())
                    .map(|j| t.basis(j, t.order, x[1]))
                    .collect();
                let nt = t.n_basis();
                let mut v = 0.0;
                for (i, a) in bs.iter().enumerate().filter(|(_, a)| **a != 0.0) {
                    for (j, b) in bt.iter().enumerate() {
                        v += a * b * self.coef[i * nt + j];
                    }
                }
                v
            }
            _ => unreachable!("spline models are 1-D or 2-D"),
        }
    }

    /// Evaluates on every grid node using the separable structure.
    pub fn eval_grid(&self, grid: &Arc<Grid>) -> Result<GridFunction> {
        match self.specs.as_slice() {
            [s] => {
                let b = s.design(grid.axis(0), 0);
                GridFunction::from_vec(grid.clone(), (b * &self.coef).iter().copied().collect())
            }
            [s, t] => {
                let bs = s.design(grid.axis(0), 0);
                let bt = t.design(grid.axis(1), 0);
                // coefficient matrix with rows indexed by the first axis
                let c = DMatrix::from_row_slice(s.n_basis(), t.n_basis(), self.coef.as_slice());
                let v = bs * c * bt.transpose();
                let mut values = Vec::with_capacity(v.len());
                for r in 0..v.nrows() {
                    values.extend(v.row(r).iter().copied());
                }
                GridFunction::from_vec(grid.clone(), values)
            }
            _ => unreachable!("spline models are 1-D or 2-D"),
        }
    }
}

/// The quadratic pieces of a penalised least-squares problem.
#[derive(Debug, Clone)]
pub struct PenalizedSystem {
    /// Basis functions evaluated at the design points.
    pub design: DMatrix<f64>,
    /// Roughness penalty `Ω` with `β'Ωβ` the integrated squared curvature.
    pub penalty: DMatrix<f64>,
}

impl PenalizedSystem {
    pub fn one_dim(spec: &SplineSpec, xs: &[f64]) -> Self {
        let len = spec.range().len();
        Self {
            design: spec.design(xs, 0),
            penalty: spec.gram(2, 2) * len.powi(3),
        }
    }

    pub fn tensor(s: &SplineSpec, t: &SplineSpec, xs: &[(f64, f64)]) -> Self {
        let (ns, nt) = (s.n_basis(), t.n_basis());
        let s_vals: Vec<f64> = xs.iter().map(|p| p.0).collect();
        let t_vals: Vec<f64> = xs.iter().map(|p| p.1).collect();
        let bs = s.design(&s_vals, 0);
        let bt = t.design(&t_vals, 0);
        let design = DMatrix::from_fn(xs.len(), ns * nt, |r, c| bs[(r, c / nt)] * bt[(r, c % nt)]);

        let (ls, lt) = (s.range().len(), t.range().len());
        let (s0, s1, s2) = (s.gram(0, 0), s.gram(1, 1), s.gram(2, 2));
        let (t0, t1, t2) = (t.gram(0, 0), t.gram(1, 1), t.gram(2, 2));
        let penalty = s2.kronecker(&t0) * (ls.powi(3) / lt)
            + s1.kronecker(&t1) * (2.0 * ls * lt)
            + s0.kronecker(&t2) * (lt.powi(3) / ls);
        Self { design, penalty }
    }

    pub fn objective(&self, coef: &DVector<f64>, ys: &DVector<f64>, lambda: f64) -> f64 {
        let r = &self.design * coef - ys;
        lambda * r.norm_squared() + (1.0 - lambda) * coef.dot(&(&self.penalty * coef))
    }

    /// Square root `R` of the penalty, `R'R = Ω`. Eigenvalues at round-off
    /// level are zeroed so that polynomials the penalty annihilates stay
    /// exactly unpenalised; otherwise tiny `λ` amplifies that noise.
    fn penalty_root(&self) -> DMatrix<f64> {
        let eig = self.penalty.clone().symmetric_eigen();
        let cut = 1e-11 * eig.eigenvalues.amax();
        let d = eig
            .eigenvalues
            .map(|v| if v > cut { v.sqrt() } else { 0.0 });
        DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
    }

    /// Triangular factor of the stacked least-squares problem
    /// `[√λ B; √(1-λ) R] β ≈ [√λ y; 0]`, which avoids squaring the
    /// condition number of the normal equations.
    fn factor(&self, lambda: f64, warnings: &mut Vec<FitWarning>) -> Result<Factor> {
        let (n, m) = self.design.shape();
        let root = self.penalty_root();
        let build = |jitter: f64| {
            let extra = if jitter > 0.0 { m } else { 0 };
            let mut a = DMatrix::zeros(n + m + extra, m);
            a.view_mut((0, 0), (n, m))
                .copy_from(&(&self.design * lambda.sqrt()));
            a.view_mut((n, 0), (m, m))
                .copy_from(&(&root * (1.0 - lambda).sqrt()));
            for i in 0..extra {
                a[(n + m + i, i)] = jitter.sqrt();
            }
            a
        };
        let tri = |a: DMatrix<f64>| -> Option<DMatrix<f64>> {
            let r = a.qr().r();
            let diag = r.diagonal().map(f64::abs);
            let (lo, hi) = (diag.min(), diag.max());
            (lo > 1e-12 * hi && lo.is_finite()).then_some(r)
        };
        if let Some(r) = tri(build(0.0)) {
            return Ok(Factor { r, lambda });
        }
        let scale = self
            .design
            .column_iter()
            .map(|c| c.norm_squared())
            .fold(1.0, f64::max);
        warnings.push(FitWarning::RidgeJitter { lambda });
        tri(build(RIDGE_JITTER * scale))
            .map(|r| Factor { r, lambda })
            .ok_or_else(|| Error::Numerical(format!("spline system singular at lambda {lambda}")))
    }

    /// Minimiser of `λ·|y - Bβ|² + (1-λ)·β'Ωβ`.
    pub fn solve(
        &self,
        ys: &DVector<f64>,
        lambda: f64,
        warnings: &mut Vec<FitWarning>,
    ) -> Result<DVector<f64>> {
        let f = self.factor(lambda, warnings)?;
        f.solve(&(self.design.tr_mul(ys) * lambda))
    }

    /// Generalised cross-validation score `n·RSS / (n - tr H)²`.
    pub fn gcv(&self, ys: &DVector<f64>, lambda: f64) -> Option<f64> {
        let f = self.factor(lambda, &mut Vec::new()).ok()?;
        let coef = f.solve(&(self.design.tr_mul(ys) * lambda)).ok()?;
        let rss = (&self.design * coef - ys).norm_squared();
        let n = ys.len() as f64;
        // tr H = λ·tr(B (R'R)^{-1} B') = λ·|R^{-T} B'|²
        let half =
            f.r.transpose()
                .solve_lower_triangular(&self.design.transpose())?;
        let trace = f.lambda * half.norm_squared();
        (trace < n - 1e-8).then(|| n * rss / (n - trace).powi(2))
    }

    /// Picks `λ` from [`lambda_grid`] by GCV.
    pub fn select_lambda(&self, ys: &DVector<f64>) -> f64 {
        lambda_grid()
            .into_iter()
            .filter_map(|l| self.gcv(ys, l).map(|g| (l, g)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, _)| l)
            .unwrap_or(0.5)
    }
}

struct Factor {
    r: DMatrix<f64>,
    lambda: f64,
}

impl Factor {
    /// Solves `R'R x = rhs`.
    fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let fail = || Error::Numerical("triangular solve failed".into());
        let z = self
            .r
            .transpose()
            .solve_lower_triangular(rhs)
            .ok_or_else(fail)?;
        self.r.solve_upper_triangular(&z).ok_or_else(fail)
    }
}

/// 25 candidate weights from about `1e-6` to `1 - 1e-6`, log-spaced in the
/// odds `(1-λ)/λ` so that both the rough and the smooth ends are resolved.
pub fn lambda_grid() -> Vec<f64> {
    (0..25)
        .map(|i| 1.0 / (1.0 + 10f64.powf(6.0 - 12.0 * i as f64 / 24.0)))
        .collect()
}

fn check_basis(spec: &SplineSpec) -> Result<()> {
    if spec.order != 4 {
        return Err(Error::InvalidSpec(
            "spline smoothers use cubic (order 4) bases".into(),
        ));
    }
    if spec.n_basis() < 4 {
        return Err(Error::InvalidSpec("need at least 4 basis functions".into()));
    }
    Ok(())
}

pub fn fit_spline_1d(data: &Dataset, spec: &SplineSpec) -> Result<(SplineModel, Vec<FitWarning>)> {
    if data.dim() != 1 {
        return Err(Error::InvalidSpec("1-D spline fit needs 1-D data".into()));
    }
    check_basis(spec)?;
    let xs: Vec<f64> = data.column(0).collect();
    let sys = PenalizedSystem::one_dim(spec, &xs);
    let ys = DVector::from_column_slice(data.ys());
    let mut warnings = Vec::new();
    let coef = sys.solve(&ys, spec.lambda, &mut warnings)?;
    Ok((
        SplineModel {
            specs: vec![spec.clone()],
            coef,
        },
        warnings,
    ))
}

pub fn fit_tensor_spline_2d(
    data: &Dataset,
    spec_s: &SplineSpec,
    spec_t: &SplineSpec,
) -> Result<(SplineModel, Vec<FitWarning>)> {
    if data.dim() != 2 {
        return Err(Error::InvalidSpec(
            "tensor spline fit needs 2-D data".into(),
        ));
    }
    check_basis(spec_s)?;
    check_basis(spec_t)?;
    if spec_s.lambda != spec_t.lambda {
        return Err(Error::InvalidSpec("both axes must share one lambda".into()));
    }
    let pts: Vec<(f64, f64)> = data.xs().iter().map(|x| (x[0], x[1])).collect();
    let sys = PenalizedSystem::tensor(spec_s, spec_t, &pts);
    let ys = DVector::from_column_slice(data.ys());
    let mut warnings = Vec::new();
    let coef = sys.solve(&ys, spec_s.lambda, &mut warnings)?;
    Ok((
        SplineModel {
            specs: vec![spec_s.clone(), spec_t.clone()],
            coef,
        },
        warnings,
    ))
}

/// Cubic smoothing-spline fit evaluated on `grid`.
pub fn smooth_spline_fit_1d(
    data: &Dataset,
    spec: &SplineSpec,
    grid: &Arc<Grid>,
) -> Result<SmoothFit> {
    let (model, warnings) = fit_spline_1d(data, spec)?;
    Ok(SmoothFit {
        fit: model.eval_grid(grid)?,
        warnings,
    })
}

/// Tensor-product penalised spline fit evaluated on a 2-D `grid`.
pub fn tensor_spline_fit_2d(
    data: &Dataset,
    spec_s: &SplineSpec,
    spec_t: &SplineSpec,
    grid: &Arc<Grid>,
) -> Result<SmoothFit> {
    if grid.dim() != 2 {
        return Err(Error::GridMismatch("tensor spline needs a 2-D grid".into()));
    }
    let (model, warnings) = fit_tensor_spline_2d(data, spec_s, spec_t)?;
    Ok(SmoothFit {
        fit: model.eval_grid(grid)?,
        warnings,
    })
}
