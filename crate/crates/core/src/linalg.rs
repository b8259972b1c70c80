//! Thin helpers over `faer` for the dense work the crate needs.

use crate::error::{Error, Result};
use faer::{Mat, Side};
use num_complex::Complex64;

/// Dense complex matrix stored as separate real and imaginary parts, so that
/// all products reduce to real GEMMs.
#[derive(Debug, Clone)]
pub struct ComplexMatrix {
    pub re: Mat<f64>,
    pub im: Mat<f64>,
}

impl ComplexMatrix {
    pub fn from_real(re: Mat<f64>) -> Self {
        let im = Mat::zeros(re.nrows(), re.ncols());
        Self { re, im }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real(Mat::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_real(Mat::zeros(n, n))
    }

    pub fn nrows(&self) -> usize {
        self.re.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.re.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[(i, j)], self.im[(i, j)])
    }

    pub fn is_real(&self) -> bool {
        (0..self.im.ncols()).all(|j| (0..self.im.nrows()).all(|i| self.im[(i, j)] == 0.0))
    }

    /// Max |H_ij - H_ji| relative to max |H_ij|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.nrows();
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let d = self.get(i, j) - self.get(j, i);
                diff = diff.max(d.norm());
                scale = scale.max(self.get(i, j).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.nrows().min(self.ncols())).map(|i| self.get(i, i)).sum()
    }
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Mat<f64>) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("eigenvalues of a non-square matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NonConvergence {
            what: "symmetric eigensolver",
            iterations: 0,
            residual: f64::NAN,
        })?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigen-decomposition `A = U diag(λ) Uᵀ` of a dense symmetric matrix.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("eigen-decomposition of a non-square matrix".into()));
    }
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NonConvergence {
        what: "symmetric eigensolver",
        iterations: 0,
        residual: f64::NAN,
    })?;
    let s = evd.S();
    let values: Vec<f64> = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((values, evd.U().to_owned()))
}

/// Largest |λ| of a symmetric matrix.
pub fn spectral_norm_symmetric(a: &Mat<f64>) -> Result<f64> {
    Ok(symmetric_eigenvalues(a)?.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub fn all_finite(a: &Mat<f64>) -> bool {
    (0..a.ncols()).all(|j| a.col(j).iter().all(|v| v.is_finite()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_reconstructs() {
        let a = Mat::<f64>::from_fn(5, 5, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (vals, u) = symmetric_eigen(&a).unwrap();
        let d = Mat::<f64>::from_fn(5, 5, |i, j| if i == j { vals[i] } else { 0.0 });
        let back = &u * &d * u.transpose();
        for i in 0..5 {
            for j in 0..5 {
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-13);
            }
        }
        let sorted = symmetric_eigenvalues(&a).unwrap();
        assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_norm_of_diag() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { [1.0, -4.0, 2.0][i] } else { 0.0 });
        assert!((spectral_norm_symmetric(&a).unwrap() - 4.0).abs() < 1e-14);
    }
}
