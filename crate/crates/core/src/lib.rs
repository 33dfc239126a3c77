//! Kernel ridge regression point estimates with probabilistic uniform error
//! bounds for non-Gaussian noise classes, plus the Monte-Carlo harnesses that
//! validate them.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`kernels`] and [`regressor`] provide the estimator: kernel evaluation,
//!   Gram factorization, posterior mean/variance, and the sharpened
//!   exploration width.
//! - [`noise`] describes the noise distribution classes (sub-Gaussian,
//!   bounded, sub-exponential, variance-bounded, correlated) with matched
//!   samplers.
//! - [`bounds`] is the bound engine: covering numbers, grid-constant solvers,
//!   scaling/discretization parameters, and the uniform, nonuniform,
//!   correlated, and heavy-tailed error bounds.
//! - [`baselines`] implements comparison bounds from the literature.
//! - [`params`] covers parameter-estimation error bounds for
//!   finite-dimensional feature models.
//! - [`experiments`] reproduces the uncertainty-region, regression-band,
//!   safe-control, coverage, and parameter-decay studies with seeded,
//!   CSV-emitting Monte-Carlo harnesses.

// Validation guards are written as `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bounds;
pub mod config;
pub mod domain;
pub mod error;
pub mod evaluate;
pub mod experiments;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod noise;
pub mod params;
pub mod regressor;
pub mod selftest;

pub use bounds::{BoundConfig, BoundEvaluation, BoundKind, DeltaKind, GridRule, TableParams, TimeMode};
pub use domain::DomainBox;
pub use error::{Error, Result};
pub use kernels::{Hoelder, Kernel, KernelFamily};
pub use noise::{ClassParams, NoiseClass, NoiseModel, Sampler};
pub use regressor::{QueryDecomposition, Regressor};
