//! Numerical laboratory for tensor-product sample covariance ensembles
//!
//! ```text
//! M = Σ_α τ_α Y_α Y_αᵀ,   Y_α = y_α⁽¹⁾ ⊗ … ⊗ y_α⁽ᵏ⁾
//! ```
//!
//! The crate simulates these matrices, solves the limiting-law fixed-point
//! equation for the Stieltjes transform, evaluates the limiting variance of
//! linear eigenvalue statistics for `k = 2`, and runs replicated Monte Carlo
//! experiments that compare the two.
//!
//! Module map:
//!
//! - [`spectral_measures`]: τ sequences and their counting measures.
//! - [`isotropic_vectors`]: normalized isotropic vector models and their
//!   fourth/sixth moment constants.
//! - [`ensemble`]: matrix assembly, spectra, linear statistics, resolvent traces.
//! - [`mp_law`]: the fixed-point solver, closed form for `τ ≡ 1`, densities.
//! - [`fluctuation_theory`]: test functions, variance formulas, covariance of
//!   resolvent traces, bilinear form variances.
//! - [`montecarlo`]: replicated experiments, statistics and persistence.

pub mod ensemble;
pub mod error;
pub mod fluctuation_theory;
pub mod isotropic_vectors;
pub mod linalg;
pub mod montecarlo;
pub mod mp_law;
pub mod quadrature;
pub mod rng;
pub mod spectral_measures;

pub use error::{Error, Result};
pub use num_complex::Complex64;
