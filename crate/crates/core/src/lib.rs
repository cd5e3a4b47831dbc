//! Numerical verification of cross-curvature for optimal-transport costs on
//! model Riemannian manifolds.
//!
//! ```
//! use cclab::cost::Cost;
//! use cclab::crosscurv::cross_fd;
//! use cclab::manifold::{Manifold, ManifoldPoint, TangentVector};
//!
//! let s2: Manifold = "S2".parse()?;
//! let c = Cost::half_square(&s2);
//! let x = ManifoldPoint::from_slice(&s2, &[1.0, 0.0, 0.0])?;
//! let xbar = ManifoldPoint::from_slice(&s2, &[0.0, 1.0, 0.0])?;
//! let p = TangentVector::from_slice(&x, &[0.0, 0.0, 1.0])?;
//! let pbar = TangentVector::from_slice(&xbar, &[0.0, 0.0, 1.0])?;
//! let sample = cross_fd(&c, &x, &xbar, &p, &pbar)?;
//! assert!(sample.cross_value > 0.0);
//! # Ok::<(), cclab::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constructions;
pub mod cost;
pub mod crosscurv;
pub mod error;
pub mod fd;
pub mod manifold;
pub mod report;
pub mod sampling;
pub mod sliding;
pub mod sphere;
pub mod suites;

pub use error::{Error, Result};
