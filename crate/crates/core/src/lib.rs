//! Sequential change-point detection on low-dimensional linear sketches of
//! high-dimensional Gaussian streams.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: normal distribution functions, the boundary-crossing
//!   function `nu`, adaptive quadrature, Cholesky factors and seeded random
//!   streams.
//! - [`projections`]: sketching operators (Gaussian, expander, subsampling
//!   masks, network-incidence) and the signal-power ratio Gamma.
//! - [`detector`]: streaming windowed GLR detectors, small-instance oracles
//!   and a multivariate CUSUM baseline.
//! - [`theory`]: closed-form ARL / EDD approximations and threshold
//!   calibration.
//! - [`montecarlo`]: replicate-parallel ARL / EDD estimation and
//!   simulation-based calibration with common random numbers.
//! - [`experiments`]: scripted table and curve reproduction emitting CSV.

pub mod config;
pub mod detector;
pub mod error;
pub mod experiments;
pub mod montecarlo;
pub mod numerics;
pub mod projections;
pub mod theory;

pub use error::{Error, Result};
