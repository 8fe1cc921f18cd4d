use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Interval;

/// Regression sample `(x_i, y_i)` with `x_i` inside a rectangular domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    domain: Vec<Interval>,
}

impl Dataset {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<f64>, domain: Vec<Interval>) -> Result<Self> {
        let p = domain.len();
        if !(1..=3).contains(&p) {
            return Err(Error::InvalidDataset(format!("dimension {p} not in 1..=3")));
        }
        if xs.len() != ys.len() {
            return Err(Error::InvalidDataset(format!(
                "{} predictor rows but {} responses",
                xs.len(),
                ys.len()
            )));
        }
        for (i, (x, y)) in xs.iter().zip(&ys).enumerate() {
            if x.len() != p {
                return Err(Error::InvalidDataset(format!(
                    "row {} has {} predictors, expected {p}",
                    i + 1,
                    x.len()
                )));
            }
            if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "row {} has a non-finite value",
                    i + 1
                )));
            }
            if let Some(k) = (0..p).find(|&k| !domain[k].contains(x[k])) {
                return Err(Error::InvalidDataset(format!(
                    "row {}: x{} = {} outside [{}, {}]",
                    i + 1,
                    k + 1,
                    x[k],
                    domain[k].lo,
                    domain[k].hi
                )));
            }
        }
        for k in 0..p {
            let first = xs.first().map(|x| x[k]);
            if !xs.iter().any(|x| Some(x[k]) != first) {
                return Err(Error::InvalidDataset(format!(
                    "axis {} needs at least 2 distinct predictor values",
                    k + 1
                )));
            }
        }
        Ok(Self { xs, ys, domain })
    }

    /// Dataset whose domain is the bounding box of its predictors.
    pub fn with_bounding_domain(xs: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        let p = xs
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDataset("empty dataset".into()))?;
        let mut domain = Vec::with_capacity(p);
        for k in 0..p {
            let (lo, hi) = xs
                .iter()
                .filter_map(|x| x.get(k))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                });
            domain.push(Interval::new(lo, hi).map_err(|_| {
                Error::InvalidDataset(format!(
                    "axis {} needs at least 2 distinct predictor values",
                    k + 1
                ))
            })?);
        }
        Self::new(xs, ys, domain)
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn domain(&self) -> &[Interval] {
        &self.domain
    }

    /// Same design and domain with new responses.
    pub fn with_responses(&self, ys: Vec<f64>) -> Result<Self> {
        if ys.len() != self.ys.len() {
            return Err(Error::InvalidDataset("response count changed".into()));
        }
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidDataset("non-finite response".into()));
        }
        Ok(Self {
            xs: self.xs.clone(),
            ys,
            domain: self.domain.clone(),
        })
    }

    /// Predictor values along axis `k`.
    pub fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.xs.iter().map(move |x| x[k])
    }
}
