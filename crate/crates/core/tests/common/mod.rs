#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use monoproj::{Grid, GridFunction, Interval};
use ndarray::{ArrayD, Axis, IxDyn};
use rand::Rng;

pub fn unit_grid(dim: usize, nodes: usize) -> Arc<Grid> {
    Arc::new(Grid::uniform(&vec![Interval::unit(); dim], nodes).unwrap())
}

/// Random coordinatewise non-decreasing function: repeated cumulative sums
/// of sparse non-negative increments, so plateaus and jumps both occur.
pub fn random_monotone(grid: &Arc<Grid>, rng: &mut impl Rng) -> GridFunction {
    let shape = grid.shape();
    let density: f64 = rng.random_range(0.2..1.0);
    let mut a = ArrayD::from_shape_fn(IxDyn(&shape), |_| {
        if rng.random::<f64>() < density {
            rng.random::<f64>()
        } else {
            0.0
        }
    });
    for k in 0..shape.len() {
        a.accumulate_axis_inplace(Axis(k), |&prev, cur| *cur += prev);
    }
    let scale = rng.random_range(0.1..3.0) / a.iter().fold(1e-12f64, |m, v| m.max(*v));
    let shift = rng.random_range(-2.0..2.0);
    GridFunction::new(grid.clone(), a.mapv(|v| v * scale + shift)).unwrap()
}

/// Random values: either pure noise or a monotone function plus noise.
pub fn random_function(grid: &Arc<Grid>, rng: &mut impl Rng) -> GridFunction {
    let sd = rng.random_range(0.05..2.0);
    let base = if rng.random::<bool>() {
        random_monotone(grid, rng)
    } else {
        GridFunction::constant(grid.clone(), 0.0).unwrap()
    };
    base.map(|v| v + sd * (rng.random::<f64>() * 2.0 - 1.0))
        .unwrap()
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn values(f: &GridFunction) -> Vec<f64> {
    f.values().iter().copied().collect()
}
