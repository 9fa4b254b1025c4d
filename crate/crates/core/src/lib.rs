//! Archimedean copulas in log space: generator derivatives of arbitrary order,
//! densities, scores, samplers, maximum-likelihood fitting and confidence intervals.

// Constants are kept at their published digits, and `!(x >= a)` forms are deliberate:
// they also reject NaN.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod experiments;
pub mod families;
pub mod inference;
pub mod io;
pub mod matrix;
pub mod model;
pub mod multiparam;
pub mod optim;
pub mod quad;
pub mod sampling;
pub mod specfun;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use model::{Copula, Density, ModelKind, ParamVector};
