//! Calibration of expensive simulators against experimental data with a
//! functional-ANOVA Gaussian-process emulator, correlated multivariate
//! outputs, categorical calibration parameters, and missing observations.
//!
//! The crate is organized as:
//! - [`basis`]: smoothing-spline ANOVA kernels, their Karhunen-Loeve
//!   expansion, and the component catalog / design matrices built from it.
//! - [`model`]: datasets, output transforms, priors, and sampler state.
//! - [`mcmc`]: the Gibbs / Metropolis-within-Gibbs sampler.
//! - [`analysis`]: prediction, discrepancy curves, sensitivity indices,
//!   cross-validation, and posterior summaries.
//! - [`studylab`]: synthetic-data simulation studies.

pub mod analysis;
pub mod basis;
pub mod error;
pub mod linalg;
pub mod mcmc;
pub mod model;
pub mod studylab;

pub use error::{CoreError, Result, ValidationIssue};
