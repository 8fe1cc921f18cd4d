use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::grid::Interval;

/// The mean functions of the simulation study: eight on `[0, 10]`, six on
/// the unit square and five on `[0, 10]³`. All are non-decreasing except
/// F35, whose `sin(x₃/5)` term turns down past `x₃ = 5π/2`; it is kept as
/// published.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MeanFunctionId {
    /// Flat: 3.
    F11,
    /// Sinusoidal: `0.32 (x + sin x)`.
    F12,
    /// Step from 3 to 6 just after `x = 8`.
    F13,
    /// Linear: `0.3 x`.
    F14,
    /// Exponential: `0.15 exp(0.6x - 3)`.
    F15,
    /// Logistic: `3 / (1 + exp(-2x + 10))`.
    F16,
    /// Half-normal: `3 exp(-½ 0.02² (0.1x - 1)²)`, within 6e-4 of flat.
    F17,
    /// Mixture: `6 Φ_mix(0.1x)` for the equal mixture of N(0.25, 0.004²)
    /// and N(0.75, 0.04²).
    F18,
    /// `√x₁`.
    F21,
    /// `0.5 x₁ + 0.5 x₂`.
    F22,
    /// `min(x₁, x₂)`.
    F23,
    /// `0.25 (x₁ + x₂) + 0.5·1{x₁ + x₂ > 1}`.
    F24,
    /// `0.25 (x₁ + x₂) + 0.5·1{min(x₁, x₂) > 0.5}`.
    F25,
    /// Quarter dome centred at `(1, 1)`.
    F26,
    /// `0.15 (x₁ + x₂ + x₃)`.
    F31,
    /// `0.5 x₁ x₂ x₃`.
    F32,
    /// `min(x₁, x₂, x₃)`.
    F33,
    /// Logistic in `x₁ + x₂ + x₃`.
    F34,
    /// `exp(0.01 x₁ + 0.1 √x₂) + sin(x₃ / 5)`.
    F35,
}

use MeanFunctionId::*;

const ALL: [MeanFunctionId; 19] = [
    F11, F12, F13, F14, F15, F16, F17, F18, F21, F22, F23, F24, F25, F26, F31, F32, F33, F34, F35,
];

impl MeanFunctionId {
    pub fn all() -> &'static [MeanFunctionId] {
        &ALL
    }

    /// The catalog for `dim` predictors.
    pub fn catalog(dim: usize) -> Vec<MeanFunctionId> {
        ALL.iter().copied().filter(|f| f.dim() == dim).collect()
    }

    pub fn dim(self) -> usize {
        match self {
            F11 | F12 | F13 | F14 | F15 | F16 | F17 | F18 => 1,
            F21 | F22 | F23 | F24 | F25 | F26 => 2,
            F31 | F32 | F33 | F34 | F35 => 3,
        }
    }

    pub fn domain(self) -> Vec<Interval> {
        let side = match self.dim() {
            2 => Interval::unit(),
            _ => Interval { lo: 0.0, hi: 10.0 },
        };
        vec![side; self.dim()]
    }

    pub fn name(self) -> &'static str {
        match self {
            F11 => "F11",
            F12 => "F12",
            F13 => "F13",
            F14 => "F14",
            F15 => "F15",
            F16 => "F16",
            F17 => "F17",
            F18 => "F18",
            F21 => "F21",
            F22 => "F22",
            F23 => "F23",
            F24 => "F24",
            F25 => "F25",
            F26 => "F26",
            F31 => "F31",
            F32 => "F32",
            F33 => "F33",
            F34 => "F34",
            F35 => "F35",
        }
    }

    /// Evaluates the mean function; `x` must lie in [`Self::domain`].
    pub fn eval(self, x: &[f64]) -> Result<f64> {
        let dom = self.domain();
        if x.len() != dom.len() || !x.iter().zip(&dom).all(|(v, d)| d.contains(*v)) {
            return Err(Error::OutsideDomain {
                function: self.name().into(),
                point: x.to_vec(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// Evaluates without the domain check; grid nodes lie in the domain.
    pub(crate) fn eval_unchecked(self, x: &[f64]) -> f64 {
        match self {
            F11 => 3.0,
            F12 => 0.32 * (x[0] + x[0].sin()),
            F13 => {
                if x[0] <= 8.0 {
                    3.0
                } else {
                    6.0
                }
            }
            F14 => 0.3 * x[0],
            F15 => 0.15 * (0.6 * x[0] - 3.0).exp(),
            F16 => 3.0 / (1.0 + (-2.0 * x[0] + 10.0).exp()),
            F17 => 3.0 * (-0.5 * 0.02f64.powi(2) * (0.1 * x[0] - 1.0).powi(2)).exp(),
            F18 => {
                let u = 0.1 * x[0];
                6.0 * (0.5 * normal_cdf(u, 0.25, 0.004) + 0.5 * normal_cdf(u, 0.75, 0.04))
            }
            F21 => x[0].sqrt(),
            F22 => 0.5 * x[0] + 0.5 * x[1],
            F23 => x[0].min(x[1]),
            F24 => 0.25 * (x[0] + x[1]) + if x[0] + x[1] > 1.0 { 0.5 } else { 0.0 },
            F25 => 0.25 * (x[0] + x[1]) + if x[0].min(x[1]) > 0.5 { 0.5 } else { 0.0 },
            F26 => {
                let r2 = (x[0] - 1.0).powi(2) + (x[1] - 1.0).powi(2);
                if r2 < 1.0 {
                    (1.0 - r2).sqrt()
                } else {
                    0.0
                }
            }
            F31 => 0.15 * (x[0] + x[1] + x[2]),
            F32 => 0.5 * x[0] * x[1] * x[2],
            F33 => x[0].min(x[1]).min(x[2]),
            F34 => 1.0 / (1.0 + (-(x[0] + x[1] + x[2])).exp()),
            F35 => (0.01 * x[0] + 0.1 * x[1].sqrt()).exp() + (x[2] / 5.0).sin(),
        }
    }
}

fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    Normal::new(mean, sd)
        .expect("valid normal parameters")
        .cdf(x)
}

/// Evaluates catalog function `id` at `x`.
pub fn mean_function(id: MeanFunctionId, x: &[f64]) -> Result<f64> {
    id.eval(x)
}

impl fmt::Display for MeanFunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeanFunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        ALL.iter()
            .copied()
            .find(|f| f.name() == up)
            .ok_or_else(|| Error::InvalidInput(format!("unknown mean function '{s}'")))
    }
}

impl TryFrom<String> for MeanFunctionId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<MeanFunctionId> for String {
    fn from(f: MeanFunctionId) -> Self {
        f.name().into()
    }
}
