//! Variance of bilinear forms `(HY, Y)` in tensor vectors `Y = y⊗y′` for
//! `k = 2`, via the partial traces
//!
//! ```text
//! Γ_{s,p} = Σ_j H_{(j,s),(j,p)},   Γ̃_{i,j} = Σ_s H_{(i,s),(j,s)}
//! ```
//!
//! where the multi-index `(j₁, j₂)` is stored at `j₁ n + j₂`.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const SYMMETRY_TOL: f64 = 1e-10;

/// `(Γ, Γ̃)` of an `n² × n²` matrix.
pub fn partial_traces(h: &ComplexMatrix, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if h.nrows() != n * n || h.ncols() != n * n {
        return Err(Error::InvalidInput(format!(
            "expected a {0}x{0} matrix, got {1}x{2}",
            n * n,
            h.nrows(),
            h.ncols()
        )));
    }
    let mut gamma = ComplexMatrix::zeros(n);
    let mut tilde = ComplexMatrix::zeros(n);
    for p in 0..n {
        for s in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..n {
                re += h.re[(j * n + s, j * n + p)];
                im += h.im[(j * n + s, j * n + p)];
            }
            gamma.re[(s, p)] = re;
            gamma.im[(s, p)] = im;
        }
    }
    for j in 0..n {
        for i in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for s in 0..n {
                re += h.re[(i * n + s, j * n + s)];
                im += h.im[(i * n + s, j * n + s)];
            }
            tilde.re[(i, j)] = re;
            tilde.im[(i, j)] = im;
        }
    }
    Ok((gamma, tilde))
}

/// The four normalized trace terms and the resulting prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearTerms {
    pub n: usize,
    /// `|n⁻² Tr H|²`.
    pub trace_term: f64,
    /// `n⁻³ Σ_{s,p} Γ_{sp} conj(Γ_{ps})`.
    pub g1: f64,
    pub g1_tilde: f64,
    /// `n⁻³ Σ_s |Γ_{ss}|²`.
    pub g2: f64,
    pub g2_tilde: f64,
    /// `2a·trace_term + 2(g1 + g̃1) + b(g2 + g̃2)`.
    pub value: f64,
}

fn g_terms(gamma: &ComplexMatrix, n: usize) -> (f64, f64) {
    let scale = (n as f64).powi(3);
    let mut g1 = 0.0;
    for s in 0..n {
        for p in 0..n {
            g1 += (gamma.get(s, p) * gamma.get(p, s).conj()).re;
        }
    }
    let g2: f64 = (0..n).map(|s| gamma.get(s, s).norm_sqr()).sum();
    (g1 / scale, g2 / scale)
}

/// Infers `n` from an `n² × n²` matrix.
pub fn tensor_side(h: &ComplexMatrix) -> Result<usize> {
    let dim = h.nrows();
    let n = (dim as f64).sqrt().round() as usize;
    if h.ncols() != dim || n * n != dim {
        return Err(Error::InvalidInput(format!(
            "bilinear variance needs an n²×n² matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(n)
}

pub fn bilinear_variance_terms(h: &ComplexMatrix, a: f64, b: f64) -> Result<BilinearTerms> {
    let n = tensor_side(h)?;
    if h.asymmetry() > SYMMETRY_TOL {
        return Err(Error::InvalidInput("bilinear variance needs a symmetric H".into()));
    }
    let (gamma, tilde) = partial_traces(h, n)?;
    let nf = n as f64;
    let tr: Complex64 = h.trace() / (nf * nf);
    let (g1, g2) = g_terms(&gamma, n);
    let (g1t, g2t) = g_terms(&tilde, n);
    let trace_term = tr.norm_sqr();
    Ok(BilinearTerms {
        n,
        trace_term,
        g1,
        g1_tilde: g1t,
        g2,
        g2_tilde: g2t,
        value: 2.0 * a * trace_term + 2.0 * (g1 + g1t) + b * (g2 + g2t),
    })
}

/// Leading-order prediction of `n Var{(HY, Y)}`, with `Var ξ = E|ξ − Eξ|²`.
pub fn bilinear_variance_rhs(h: &ComplexMatrix, a: f64, b: f64) -> Result<f64> {
    Ok(bilinear_variance_terms(h, a, b)?.value)
}
