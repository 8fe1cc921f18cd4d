//! Monotone regression with one to three predictors.
//!
//! An unconstrained smoother (local polynomial or penalised B-spline) is
//! evaluated on a tensor grid and then projected, in the quadrature `L^2`
//! norm, onto the cone of coordinatewise non-decreasing functions. Residual
//! bootstrap bands and a Monte Carlo harness are built on top.

pub mod bootstrap;
pub mod dataset;
pub mod error;
pub mod grid;
pub mod io;
pub mod par;
pub mod projection;
pub mod simbench;
pub mod smoothers;
pub mod toxicology;

pub use bootstrap::{bootstrap_bands, BandEstimate, BootstrapConfig};
pub use dataset::Dataset;
pub use error::{Error, Result};
pub use grid::{
    monotone_violation, norm_l2, norm_lp, weighted_inner_product, Grid, GridFunction, Interval,
    MonotoneViolation,
};
pub use projection::{
    project_monotone_1d, project_monotone_nd, ProjectionOptions, ProjectionResult,
};
pub use smoothers::SmootherSpec;
