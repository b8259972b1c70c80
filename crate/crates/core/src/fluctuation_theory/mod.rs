//! Fluctuation formulas for `k = 2`: the limiting variance of linear
//! eigenvalue statistics, the covariance of resolvent traces, the variance
//! of bilinear forms, Poisson smoothing and Sobolev norms.
//!
//! The moment constants `a`, `b` are inputs here; see
//! [`crate::isotropic_vectors`] for their values per vector model.

mod bilinear;
mod test_functions;
mod variance;

pub use bilinear::{bilinear_variance_rhs, bilinear_variance_terms, partial_traces, tensor_side, BilinearTerms};
pub use test_functions::{poisson_smooth, sobolev_norm, sobolev_norm_discrete, TestFunction, TAPER_WIDTH};
pub use variance::{
    clt_variance, clt_variance_at, clt_variance_closed_form, clt_variance_default, neville_at_zero, trace_covariance,
    VariancePrediction,
};
