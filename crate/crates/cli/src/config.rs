//! Run configuration: defaults, overridden by a JSON file, overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use monoproj::grid::Interval;
use monoproj::smoothers::KernelFamily;
use monoproj::{ProjectionOptions, SmootherSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Everything a run can be configured with. Every field is optional; a
/// field set on the command line wins over the same field in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub grid_nodes: Option<usize>,
    pub tol: Option<f64>,
    pub max_sweeps: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub smoother: Option<SmootherSpec>,
    /// Bootstrap replicates for `bootstrap`/`toxicology`, Monte Carlo
    /// replicates for `simulate`/`coverage`.
    pub replicates: Option<usize>,
    /// Inner bootstrap replicates for `coverage`.
    pub bootstrap_replicates: Option<usize>,
    pub level: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }

    /// `self` with every field that `over` sets replaced.
    pub fn overridden_by(self, over: RunConfig) -> RunConfig {
        RunConfig {
            seed: over.seed.or(self.seed),
            grid_nodes: over.grid_nodes.or(self.grid_nodes),
            tol: over.tol.or(self.tol),
            max_sweeps: over.max_sweeps.or(self.max_sweeps),
            out_dir: over.out_dir.or(self.out_dir),
            smoother: over.smoother.or(self.smoother),
            replicates: over.replicates.or(self.replicates),
            bootstrap_replicates: over.bootstrap_replicates.or(self.bootstrap_replicates),
            level: over.level.or(self.level),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn projection(&self) -> Result<ProjectionOptions, CliError> {
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Input(format!("--tol must be positive, got {t}")));
            }
        }
        if self.max_sweeps == Some(0) {
            return Err(CliError::Input("--max-sweeps must be at least 1".into()));
        }
        let defaults = ProjectionOptions::default();
        Ok(ProjectionOptions {
            tol: self.tol,
            max_sweeps: self.max_sweeps.unwrap_or(defaults.max_sweeps),
        })
    }
}

/// Parses a smoother given either as JSON or as a shorthand such as
/// `kernel`, `kernel,family=epanechnikov,h=0.5,degree=0`, `kernel,h=0.1:0.2`
/// or `spline,knots=15,lambda=0.99`.
pub fn parse_smoother(s: &str) -> Result<SmootherSpec, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("invalid smoother JSON: {e}"));
    }
    let mut parts = s.split(',').map(str::trim);
    let kind = parts.next().unwrap_or_default().to_ascii_lowercase();
    let mut spec = match kind.as_str() {
        "kernel" => SmootherSpec::default(),
        "spline" => SmootherSpec::default_spline(),
        other => {
            return Err(format!(
                "unknown smoother '{other}' (expected kernel or spline)"
            ))
        }
    };
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| format!("'{v}' is not a number"))
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| format!("'{v}' is not a count"))
        };
        match (&mut spec, key) {
            (SmootherSpec::Kernel { family, .. }, "family") => {
                *family = match value.to_ascii_lowercase().as_str() {
                    "gaussian" => KernelFamily::Gaussian,
                    "epanechnikov" => KernelFamily::Epanechnikov,
                    "uniform" => KernelFamily::Uniform,
                    f => return Err(format!("unknown kernel family '{f}'")),
                }
            }
            (SmootherSpec::Kernel { bandwidth, .. }, "h" | "bandwidth") => {
                *bandwidth = Some(value.split(':').map(num).collect::<Result<_, _>>()?)
            }
            (SmootherSpec::Kernel { degree, .. }, "degree") => *degree = count(value)?,
            (SmootherSpec::Spline { interior_knots, .. }, "knots") => {
                *interior_knots = count(value)?
            }
            (SmootherSpec::Spline { lambda, .. }, "lambda") => *lambda = Some(num(value)?),
            _ => {
                return Err(format!(
                    "option '{key}' does not apply to a {kind} smoother"
                ))
            }
        }
    }
    Ok(spec)
}

/// Parses `lo:hi[,lo:hi…]`, one interval per predictor.
pub fn parse_domain(s: &str) -> Result<Vec<Interval>, String> {
    s.split(',')
        .map(|iv| {
            let (lo, hi) = iv
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("expected lo:hi, got '{iv}'"))?;
            let lo: f64 = lo
                .trim()
                .parse()
                .map_err(|_| format!("'{lo}' is not a number"))?;
            let hi: f64 = hi
                .trim()
                .parse()
                .map_err(|_| format!("'{hi}' is not a number"))?;
            Interval::new(lo, hi).map_err(|e| e.to_string())
        })
        .collect()
}
