use ndarray::{ArrayD, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{axis_violation, monotone_violation, norm_l2, GridFunction};
use crate::par;

use super::pava::{pava_in_place, project_monotone_1d};

/// Stopping rule for [`project_monotone_nd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    /// Absolute tolerance; `None` means `1e-8 * (max f - min f)`, but never
    /// below the rounding level `16 ε max|f|`.
    pub tol: Option<f64>,
    pub max_sweeps: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_sweeps: 500,
        }
    }
}

impl ProjectionOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol: Some(tol),
            ..Self::default()
        }
    }

    pub fn resolve_tol(&self, f: &GridFunction) -> f64 {
        self.tol
            .unwrap_or_else(|| {
                let scale = f.max().abs().max(f.min().abs());
                (1e-8 * (f.max() - f.min())).max(16.0 * f64::EPSILON * scale)
            })
            .max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionResult {
    pub projected: GridFunction,
    /// Number of full passes over the axes.
    pub sweeps: usize,
    pub final_violation: f64,
    /// Weighted `L^2` norm of the iterate after every per-axis step, in order.
    pub norm_history: Vec<f64>,
    pub converged: bool,
    pub tolerance: f64,
}

/// Projects each lane of `values` along `axis` in place.
pub(crate) fn project_lanes(values: &mut ArrayD<f64>, axis: usize, weights: &[f64]) {
    par::for_each_lane_mut(values, axis, |mut lane| {
        let mut buf: Vec<f64> = lane.iter().copied().collect();
        let mut blocks = Vec::new();
        pava_in_place(&mut buf, weights, &mut blocks);
        for (dst, src) in lane.iter_mut().zip(buf) {
            *dst = src;
        }
    });
}

/// Projection of `f` onto the functions that are non-decreasing along `axis`
/// (every other coordinate held fixed).
pub fn project_along_axis(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= f.dim() {
        return Err(Error::InvalidInput(format!(
            "axis {axis} out of range for {}-D grid",
            f.dim()
        )));
    }
    let mut values = f.values().clone();
    project_lanes(&mut values, axis, f.grid().axis_weights(axis));
    Ok(GridFunction::from_parts(f.grid().clone(), values))
}

/// `f` minus its projection along `axis`: the projection of `f` onto the
/// dual of the axis-monotone cone.
pub fn dual_cone_residual(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    f.sub(&project_along_axis(f, axis)?)
}

fn weighted_norm(weights: &ArrayD<f64>, values: &ArrayD<f64>) -> f64 {
    Zip::from(weights)
        .and(values)
        .fold(0.0, |acc, &w, &v| acc + w * v * v)
        .sqrt()
}

fn sup_diff(a: &ArrayD<f64>, b: &ArrayD<f64>) -> f64 {
    Zip::from(a)
        .and(b)
        .fold(0.0, |acc: f64, &x, &y| acc.max((x - y).abs()))
}

/// Projection onto the coordinatewise non-decreasing functions.
///
/// One residual field is kept per axis. Each step projects `f` plus the
/// residuals of all other axes along one axis, then replaces that axis'
/// residual by the change the projection made. The iterate norm never
/// increases. A sweep is accepted as converged once the iterate's monotonicity
/// violation is at most `tol` and no node moved by more than `tol` over the
/// sweep.
pub fn project_monotone_nd(f: &GridFunction, opts: ProjectionOptions) -> Result<ProjectionResult> {
    let tol = opts.resolve_tol(f);
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let p = f.dim();
    if p == 1 {
        let projected = project_monotone_1d(f, None)?;
        let norm = norm_l2(&projected);
        return Ok(ProjectionResult {
            final_violation: monotone_violation(&projected).max_violation,
            projected,
            sweeps: 1,
            norm_history: vec![norm],
            converged: true,
            tolerance: tol,
        });
    }

    let grid = f.grid().clone();
    let weights = grid.weights();
    let base = f.values();
    let zeros = ArrayD::<f64>::zeros(base.raw_dim());
    let mut residuals = vec![zeros; p];
    let mut iterate = base.clone();
    let mut history = Vec::new();
    let mut sweeps = 0;
    let mut violation = f64::INFINITY;
    let mut converged = false;

    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let start = iterate.clone();
        for k in 0..p {
            let mut work = base.clone();
            for (j, r) in residuals.iter().enumerate() {
                if j != k {
                    work += r;
                }
            }
            let input = work.clone();
            project_lanes(&mut work, k, grid.axis_weights(k));
            Zip::from(&mut residuals[k])
                .and(&work)
                .and(&input)
                .for_each(|r, &out, &inp| *r = out - inp);
            history.push(weighted_norm(weights, &work));
            iterate = work;
        }
        violation = (0..p)
            .map(|k| axis_violation(&iterate, k))
            .fold(0.0, f64::max);
        if violation <= tol && sup_diff(&iterate, &start) <= tol {
            converged = true;
            break;
        }
    }

    Ok(ProjectionResult {
        projected: GridFunction::from_parts(grid, iterate),
        sweeps,
        final_violation: violation,
        norm_history: history,
        converged,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{weighted_inner_product, Grid, Interval};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn unit_grid(dims: usize, nodes: usize) -> Arc<Grid> {
        Arc::new(Grid::uniform(&vec![Interval::unit(); dims], nodes).unwrap())
    }

    #[test]
    fn monotone_input_is_fixed_in_one_sweep() {
        let g = unit_grid(2, 9);
        let f = GridFunction::from_fn(g, |x| x[0] * x[0] + (3.0 * x[1]).exp()).unwrap();
        let r = project_monotone_nd(&f, ProjectionOptions::with_tol(1e-8)).unwrap();
        assert!(r.converged);
        assert_eq!(r.sweeps, 1);
        assert_eq!(r.projected.values(), f.values());
    }

    #[test]
    fn constant_input_converges_immediately() {
        let f = GridFunction::constant(unit_grid(3, 5), 2.5).unwrap();
        let r = project_monotone_nd(&f, ProjectionOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.sweeps, 1);
        assert!(r.projected.values().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn two_by_two_saddle() {
        // Dense solution by symmetry: g01 = g10 = g11 = 2/3, g00 = 0.
        let g = Arc::new(Grid::new(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap());
        let f = GridFunction::from_vec(g, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let r = project_monotone_nd(&f, ProjectionOptions::with_tol(1e-10)).unwrap();
        assert!(r.converged);
        let v: Vec<f64> = r.projected.values().iter().copied().collect();
        for (a, b) in v.iter().zip([0.0, 2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn orthogonality_and_norm_descent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // pure noise is the slow case for cyclic projections, so allow many sweeps
        let opts = ProjectionOptions {
            tol: Some(1e-10),
            max_sweeps: 5000,
        };
        for (dims, nodes) in [(2, 7), (3, 5)] {
            let g = unit_grid(dims, nodes);
            for _ in 0..10 {
                let f = GridFunction::from_fn(g.clone(), |_| rng.random_range(-1.0..1.0)).unwrap();
                let r = project_monotone_nd(&f, opts).unwrap();
                assert!(r.converged);
                let resid = f.sub(&r.projected).unwrap();
                let ip = weighted_inner_product(&resid, &r.projected).unwrap();
                let scale = weighted_inner_product(&f, &f).unwrap();
                assert!(ip.abs() <= 1e-6 * scale, "inner product {ip}");
                for w in r.norm_history.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn dual_cone_examples() {
        let g = Arc::new(Grid::new(vec![vec![0.0, 1.0, 2.0, 3.0]]).unwrap());
        let mono = GridFunction::from_vec(g, vec![0.0, 1.0, 1.0, 4.0]).unwrap();
        assert!(dual_cone_residual(&mono, 0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));

        let vals = [3.0, 1.0, 2.0];
        let proj = super::super::pava::isotonic(&vals, &[1.0; 3]).unwrap();
        let resid: Vec<f64> = vals.iter().zip(&proj).map(|(a, b)| a - b).collect();
        assert_eq!(resid, vec![1.0, -1.0, 0.0]);

        // trapezoid weights 1/2, 1, 1/2: the first two pool to 5/3
        let g3 = Arc::new(Grid::new(vec![vec![0.0, 1.0, 2.0]]).unwrap());
        let f = GridFunction::from_vec(g3, vals.to_vec()).unwrap();
        let d = dual_cone_residual(&f, 0).unwrap();
        let got: Vec<f64> = d.values().iter().copied().collect();
        for (a, b) in got.iter().zip([4.0 / 3.0, -2.0 / 3.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(dual_cone_residual(&f, 1).is_err());
    }

    #[test]
    fn dual_cone_inequality_against_axis_monotone_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = unit_grid(2, 6);
        let f = GridFunction::from_fn(g.clone(), |_| rng.random_range(-2.0..2.0)).unwrap();
        for axis in 0..2 {
            let d = dual_cone_residual(&f, axis).unwrap();
            for _ in 0..100 {
                // random function non-decreasing along `axis` only
                let raw =
                    GridFunction::from_fn(g.clone(), |_| rng.random_range(-1.0..1.0)).unwrap();
                let h = project_along_axis(&raw, axis).unwrap();
                assert!(weighted_inner_product(&d, &h).unwrap() <= 1e-9);
            }
        }
    }
}
