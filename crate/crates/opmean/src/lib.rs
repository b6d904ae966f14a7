//! Symmetric Kubo-Ando operator means, the divergences they induce, and
//! weighted multivariate barycenters on the positive definite cone.
//!
//! The crate is organized around a small pipeline:
//! [`matcore`] supplies Hermitian/PD matrix algebra, [`means`] the mean
//! registry with representing functions, [`divergence`] the divergence
//! `phi_sigma` and the weighted loss, [`barycenter`] the convex solver
//! with geometric-case closed forms, and [`geodesics`] arc lengths and
//! center checks for the inverse-Riemannian metric. [`fileio`] and the
//! `opmean` binary expose everything over a JSON file format.

pub mod barycenter;
pub mod checks;
pub mod divergence;
pub mod error;
pub mod fileio;
pub mod geodesics;
pub mod matcore;
pub mod means;
pub mod sampling;

pub use error::{OpMeanError, Result};
