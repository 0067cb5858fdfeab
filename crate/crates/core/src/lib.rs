//! Distributed Poisson multi-Bernoulli filtering with generalised covariance
//! intersection fusion.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: Gaussian and Gaussian-mixture algebra.
//! - [`family`], [`grid`]: the single-object density families the set-level
//!   algebra is generic over.
//! - [`rfs`]: Bernoulli, PMB and PMBM densities.
//! - [`assignment`]: optimal and k-best assignment.
//! - [`filter`]: PMBM prediction, update, reduction and PMB projections.
//! - [`fusion`]: GCI and AA fusion of PMB densities.
//! - [`gospa`]: the GOSPA metric.
//! - [`sim`]: scenario configuration, simulation and Monte Carlo aggregation.
//! - [`format`]: JSON serialisation of PMB/PMBM densities.
//! - [`commands`]: the operations behind the `pmbfuse` binary.

pub mod assignment;
pub mod commands;
pub mod error;
pub mod family;
pub mod filter;
pub mod format;
pub mod fusion;
pub mod gaussian;
pub mod gospa;
pub mod grid;
mod numeric;
pub mod rfs;
pub mod sim;

pub use error::{Error, Result};
pub use family::{DensityFamily, GaussianFamily};
pub use gaussian::{Gaussian, GaussianMixture};
pub use rfs::{Bernoulli, Pmb, PmbDensity, Pmbm, PmbmDensity};
