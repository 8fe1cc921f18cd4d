//! Projection onto the cone of coordinatewise non-decreasing functions.

mod gcm;
mod nd;
mod pava;

pub use gcm::{gcm, ConvexMinorant};
pub use nd::{
    dual_cone_residual, project_along_axis, project_monotone_nd, ProjectionOptions,
    ProjectionResult,
};
pub use pava::{isotonic, isotonic_via_gcm, project_monotone_1d};
