//! Spectral solvers and a verification harness for coupled Hartree-type
//! systems with prescribed L² masses on a periodic box.
//!
//! The crate provides:
//! - a periodic-box discretization with the fractional Laplacian, its
//!   resolvent and free-space Riesz convolution (`grid`, `ops`),
//! - the variational functionals, sharp constants and identity residuals of
//!   the constrained problem (`functionals`, `params`),
//! - ground-state and constrained solvers: stabilized fixed-point iteration
//!   for the scalar profile, normalized gradient flow for minimization, and
//!   a dilation-projected descent for the saddle regime (`scalar`, `system`),
//! - post-solve diagnostics and scorecards (`diagnostics`),
//! - a config-driven scenario runner used by the `solver` binary (`config`,
//!   `report`, `runner`).

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod functionals;
pub mod grid;
pub mod ops;
pub mod params;
pub mod report;
pub mod runner;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use grid::{gaussian, make_grid, Field, Grid};
pub use ops::{
    dilate, fractional_laplacian, hartree_convolve, inner, kinetic, mass, resolvent_apply,
    riesz_convolve, SpectralOperator,
};
pub use params::{gn_exponent, GNExponents, ModelParams, PotentialSpec, Regime};
