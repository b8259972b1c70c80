//! Realizations of `M = Σ_α τ_α Y_α Y_αᵀ = B T Bᵀ`, their spectra, linear
//! eigenvalue statistics and resolvent traces.

use crate::error::{Error, Result};
use crate::fluctuation_theory::TestFunction;
use crate::isotropic_vectors::{kron_into, VectorModel, VectorSampler};
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues, ComplexMatrix};
use crate::rng::{derive_stream, Stream};
use crate::spectral_measures::{realize_taus, TauSpec};
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Largest `N = n^k` for which a dense `N × N` form is built.
pub const DENSE_DIMENSION_CAP: usize = 4096;
/// Largest number of entries `N · m` in the factor `B`.
pub const FACTOR_BUDGET: usize = 1 << 26;
/// Path A eigenvalues below this magnitude are exact zeros.
pub const ZERO_SNAP: f64 = 1e-10;

/// Parameters of one random ensemble. Exactly one of `m`, `c` is given;
/// with `c`, `m = round(c · n^k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub model: VectorModel,
    pub taus: TauSpec,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_k() -> usize {
    2
}

impl EnsembleConfig {
    pub fn with_ratio(n: usize, k: usize, c: f64, model: VectorModel, taus: TauSpec, master_seed: u64) -> Self {
        Self {
            n,
            k,
            m: None,
            c: Some(c),
            model,
            taus,
            master_seed,
        }
    }

    pub fn with_count(n: usize, k: usize, m: usize, model: VectorModel, taus: TauSpec, master_seed: u64) -> Self {
        Self {
            n,
            k,
            m: Some(m),
            c: None,
            model,
            taus,
            master_seed,
        }
    }

    /// `N = n^k`.
    pub fn dimension(&self) -> Result<usize> {
        if self.k == 0 {
            return Err(Error::InvalidInput("tensor order k must be at least 1".into()));
        }
        (self.n as u128)
            .checked_pow(self.k as u32)
            .filter(|&d| d <= usize::MAX as u128)
            .map(|d| d as usize)
            .ok_or_else(|| Error::InvalidInput(format!("n^k overflows for n={}, k={}", self.n, self.k)))
    }

    pub fn sample_count(&self) -> Result<usize> {
        let dim = self.dimension()?;
        let m = match (self.m, self.c) {
            (Some(m), None) => m,
            (None, Some(c)) => {
                if !(c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidInput(format!("ratio c must be positive and finite, got {c}")));
                }
                (c * dim as f64).round() as usize
            }
            (Some(_), Some(_)) => return Err(Error::InvalidInput("give either m or c, not both".into())),
            (None, None) => return Err(Error::InvalidInput("missing field: one of m or c is required".into())),
        };
        if m == 0 {
            return Err(Error::InvalidInput("sample count m must be at least 1".into()));
        }
        Ok(m)
    }

    /// `m / n^k`.
    pub fn ratio(&self) -> Result<f64> {
        Ok(self.sample_count()? as f64 / self.dimension()? as f64)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.taus.validate()?;
        if self.n < 2 {
            return Err(Error::InvalidInput("dimension n must be at least 2".into()));
        }
        let m = self.sample_count()?;
        if let TauSpec::ExplicitList { values } = &self.taus {
            if values.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    actual: values.len(),
                });
            }
        }
        let entries = (self.dimension()? as u128) * m as u128;
        if entries > FACTOR_BUDGET as u128 {
            return Err(Error::BudgetExceeded {
                requested: entries.min(usize::MAX as u128) as usize,
                budget: FACTOR_BUDGET,
                hint: "reduce n, k or m",
            });
        }
        Ok(())
    }
}

/// A realized matrix in factored form `B diag(τ) Bᵀ`.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    n: usize,
    k: usize,
    factor: Mat<f64>,
    tau: Vec<f64>,
    dense: Option<Mat<f64>>,
}

impl SampleMatrix {
    /// Builds a matrix from explicit columns `Y_α` of length `n^k`.
    pub fn from_columns(n: usize, k: usize, columns: &[Vec<f64>], tau: Vec<f64>) -> Result<Self> {
        let dim = (n as u128).pow(k as u32) as usize;
        if columns.len() != tau.len() {
            return Err(Error::LengthMismatch {
                expected: columns.len(),
                actual: tau.len(),
            });
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        let factor = Mat::from_fn(dim, columns.len(), |i, j| columns[j][i]);
        Ok(Self {
            n,
            k,
            factor,
            tau,
            dense: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample_count(&self) -> usize {
        self.factor.ncols()
    }

    pub fn factor(&self) -> &Mat<f64> {
        &self.factor
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn column(&self, alpha: usize) -> &[f64] {
        self.factor.col_as_slice(alpha)
    }

    /// `Σ_α τ_α ‖Y_α‖²`, the trace of `M`.
    pub fn trace(&self) -> f64 {
        (0..self.sample_count())
            .map(|a| self.tau[a] * self.column(a).iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// `B diag(τ) Bᵀ`, symmetrized exactly.
    pub fn dense_form(&self) -> Result<Mat<f64>> {
        if let Some(d) = &self.dense {
            return Ok(d.clone());
        }
        let dim = self.dimension();
        if dim > DENSE_DIMENSION_CAP {
            return Err(Error::BudgetExceeded {
                requested: dim,
                budget: DENSE_DIMENSION_CAP,
                hint: "use apply or the Gram path instead of a dense form",
            });
        }
        let scaled = Mat::from_fn(dim, self.sample_count(), |i, j| self.factor[(i, j)] * self.tau[j]);
        let mut out = Mat::<f64>::zeros(dim, dim);
        matmul(&mut out, Accum::Replace, &scaled, self.factor.transpose(), 1.0, Par::Seq);
        for j in 0..dim {
            for i in 0..j {
                let s = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        Ok(out)
    }

    /// Caches the dense form for repeated use.
    pub fn materialize_dense(&mut self) -> Result<()> {
        if self.dense.is_none() {
            self.dense = Some(self.dense_form()?);
        }
        Ok(())
    }

    /// `Mv = Σ_α τ_α (Y_α, v) Y_α` without forming `M`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dimension();
        if v.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        let mut out = vec![0.0; dim];
        for a in 0..self.sample_count() {
            let col = self.column(a);
            let proj = self.tau[a] * col.iter().zip(v).map(|(x, y)| x * y).sum::<f64>();
            if proj != 0.0 {
                out.iter_mut().zip(col).for_each(|(o, c)| *o += proj * c);
            }
        }
        Ok(out)
    }

    fn check_finite(&self) -> Result<()> {
        if self.tau.iter().any(|t| !t.is_finite())
            || (0..self.sample_count()).any(|a| self.column(a).iter().any(|v| !v.is_finite()))
        {
            return Err(Error::NonFinite("sample matrix entries"));
        }
        Ok(())
    }

    fn gram_path_applies(&self) -> bool {
        self.sample_count() < self.dimension() && self.tau.iter().all(|&t| t >= 0.0)
    }

    /// `diag(√τ) Bᵀ B diag(√τ)`.
    fn gram_form(&self) -> Mat<f64> {
        let m = self.sample_count();
        let roots: Vec<f64> = self.tau.iter().map(|t| t.sqrt()).collect();
        let scaled = Mat::from_fn(self.dimension(), m, |i, j| self.factor[(i, j)] * roots[j]);
        let mut gram = Mat::<f64>::zeros(m, m);
        matmul(&mut gram, Accum::Replace, scaled.transpose(), &scaled, 1.0, Par::Seq);
        gram
    }
}

/// Draws a realization: `m` independent tensor columns and the realized τ sequence.
pub fn assemble(config: &EnsembleConfig, stream: &mut Stream) -> Result<SampleMatrix> {
    config.validate()?;
    let dim = config.dimension()?;
    let m = config.sample_count()?;
    let tau = realize_taus(&config.taus, m)?;
    let sampler = VectorSampler::new(config.model, config.n)?;
    let mut factors = vec![vec![0.0; config.n]; config.k];
    let mut factor = Mat::<f64>::zeros(dim, m);
    for a in 0..m {
        for f in factors.iter_mut() {
            sampler.sample_into(stream, f);
        }
        let refs: Vec<&[f64]> = factors.iter().map(|f| f.as_slice()).collect();
        kron_into(&refs, factor.col_as_slice_mut(a));
    }
    Ok(SampleMatrix {
        n: config.n,
        k: config.k,
        factor,
        tau,
        dense: None,
    })
}

/// [`assemble`] on the stream derived from `(config.master_seed, replicate)`.
pub fn assemble_replicate(config: &EnsembleConfig, replicate: u64) -> Result<SampleMatrix> {
    assemble(config, &mut derive_stream(config.master_seed, replicate))
}

/// Which eigen-solve produced a [`Spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumPath {
    Gram,
    Dense,
}

/// Full real spectrum of `M`: the computed eigenvalues plus the structural
/// zeros implied by the rank bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Sorted eigenvalues returned by the solver.
    pub computed: Vec<f64>,
    /// Zero eigenvalues not passed through the solver (`N - m` on the Gram path).
    pub structural_zeros: usize,
    pub path: SpectrumPath,
}

impl Spectrum {
    pub fn dimension(&self) -> usize {
        self.computed.len() + self.structural_zeros
    }

    /// All `N` eigenvalues, sorted, with multiplicity.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all = Vec::with_capacity(self.dimension());
        let split = self.computed.partition_point(|&v| v < 0.0);
        all.extend_from_slice(&self.computed[..split]);
        all.extend(std::iter::repeat_n(0.0, self.structural_zeros));
        all.extend_from_slice(&self.computed[split..]);
        all
    }

    pub fn trace(&self) -> f64 {
        self.computed.iter().sum()
    }

    /// One eigenvalue per line under a `lambda` header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda")?;
        for v in self.eigenvalues() {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }
}

fn snap_zeros(values: &mut [f64]) {
    for v in values.iter_mut() {
        if v.abs() < ZERO_SNAP {
            *v = 0.0;
        }
    }
}

/// Spectrum of `mat`; uses the `m × m` Gram form when τ ≥ 0 and `m < N`.
pub fn eigenvalues(mat: &SampleMatrix) -> Result<Spectrum> {
    mat.check_finite()?;
    let dim = mat.dimension();
    let m = mat.sample_count();
    let (mut computed, structural_zeros, path) = if mat.gram_path_applies() {
        (symmetric_eigenvalues(&mat.gram_form())?, dim - m, SpectrumPath::Gram)
    } else {
        (symmetric_eigenvalues(&mat.dense_form()?)?, 0, SpectrumPath::Dense)
    };
    snap_zeros(&mut computed);
    computed.sort_by(f64::total_cmp);
    Ok(Spectrum {
        n: mat.n,
        k: mat.k,
        m,
        computed,
        structural_zeros,
        path,
    })
}

/// Dense-path spectrum regardless of τ and `m`; the oracle for the Gram path.
pub fn eigenvalues_dense(mat: &SampleMatrix) -> Result<Spectrum> {
    mat.check_finite()?;
    let mut computed = symmetric_eigenvalues(&mat.dense_form()?)?;
    snap_zeros(&mut computed);
    computed.sort_by(f64::total_cmp);
    Ok(Spectrum {
        n: mat.n,
        k: mat.k,
        m: mat.sample_count(),
        computed,
        structural_zeros: 0,
        path: SpectrumPath::Dense,
    })
}

/// `N_n[φ] = Σ_l φ(λ_l)`.
pub fn linear_statistic(spec: &Spectrum, phi: &TestFunction) -> f64 {
    let zeros = if spec.structural_zeros > 0 {
        spec.structural_zeros as f64 * phi.eval(0.0)
    } else {
        0.0
    };
    spec.computed.iter().map(|&l| phi.eval(l)).sum::<f64>() + zeros
}

/// `γ_n(z) = Σ_l 1/(λ_l − z)`.
pub fn resolvent_trace(spec: &Spectrum, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::InvalidInput(format!("resolvent needs Im z != 0, got {z}")));
    }
    let zeros = spec.structural_zeros as f64 * (-z).inv();
    Ok(spec.computed.iter().map(|&l| (l - z).inv()).sum::<Complex64>() + zeros)
}

/// Dense resolvent `G(z) = (M − z)⁻¹` through the eigen-decomposition of `M`.
pub fn resolvent_matrix(mat: &SampleMatrix, z: Complex64) -> Result<ComplexMatrix> {
    if z.im == 0.0 {
        return Err(Error::InvalidInput("resolvent needs Im z != 0".into()));
    }
    mat.check_finite()?;
    let (values, u) = symmetric_eigen(&mat.dense_form()?)?;
    let dim = values.len();
    let weights: Vec<Complex64> = values.iter().map(|&l| (l - z).inv()).collect();
    let scaled = |part: fn(&Complex64) -> f64| {
        let left = Mat::from_fn(dim, dim, |i, j| u[(i, j)] * part(&weights[j]));
        let mut out = Mat::<f64>::zeros(dim, dim);
        matmul(&mut out, Accum::Replace, &left, u.transpose(), 1.0, Par::Seq);
        for j in 0..dim {
            for i in 0..j {
                let s = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    };
    Ok(ComplexMatrix {
        re: scaled(|w| w.re),
        im: scaled(|w| w.im),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotropic_vectors::ComponentLaw;

    fn unit(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    fn gaussian_config(n: usize, m: usize) -> EnsembleConfig {
        EnsembleConfig::with_count(n, 2, m, VectorModel::gaussian(), TauSpec::Constant { value: 1.0 }, 17)
    }

    #[test]
    fn rank_one_hook() {
        let mat = SampleMatrix::from_columns(4, 1, &[unit(4, 0)], vec![1.0]).unwrap();
        let d = mat.dense_form().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(d[(i, j)], if i == 0 && j == 0 { 1.0 } else { 0.0 });
            }
        }
        let spec = eigenvalues(&mat).unwrap();
        assert_eq!(spec.eigenvalues(), vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(spec.path, SpectrumPath::Gram);
    }

    #[test]
    fn zero_matrix() {
        let mat = SampleMatrix::from_columns(4, 1, &[unit(4, 2)], vec![0.0]).unwrap();
        let spec = eigenvalues(&mat).unwrap();
        assert!(spec.eigenvalues().iter().all(|&v| v == 0.0));
        let g = resolvent_trace(&spec, Complex64::i()).unwrap();
        assert!((g - Complex64::new(0.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn single_eigenvalue_resolvent() {
        let spec = Spectrum {
            n: 1,
            k: 1,
            m: 1,
            computed: vec![1.0],
            structural_zeros: 0,
            path: SpectrumPath::Dense,
        };
        let g = resolvent_trace(&spec, Complex64::i()).unwrap();
        assert!((g - Complex64::new(0.5, 0.5)).norm() < 1e-15);
        assert!(resolvent_trace(&spec, Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn sphere_trace_is_sample_count() {
        let cfg = EnsembleConfig::with_count(8, 2, 32, VectorModel::Sphere, TauSpec::Constant { value: 1.0 }, 3);
        let mat = assemble_replicate(&cfg, 0).unwrap();
        assert!((mat.trace() - 32.0).abs() < 1e-12);
        let d = mat.dense_form().unwrap();
        let tr: f64 = (0..64).map(|i| d[(i, i)]).sum();
        assert!((tr - 32.0).abs() < 1e-12);
    }

    #[test]
    fn dense_trace_identity() {
        let cfg = EnsembleConfig::with_count(
            5,
            2,
            7,
            VectorModel::iid(ComponentLaw::UniformSym),
            TauSpec::ExplicitList {
                values: vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0, -0.5],
            },
            1,
        );
        let mat = assemble_replicate(&cfg, 4).unwrap();
        let d = mat.dense_form().unwrap();
        let tr: f64 = (0..25).map(|i| d[(i, i)]).sum();
        assert!((tr - mat.trace()).abs() < 1e-12 * mat.trace().abs().max(1.0));
        let spec = eigenvalues(&mat).unwrap();
        assert_eq!(spec.path, SpectrumPath::Dense);
        assert!((spec.trace() - mat.trace()).abs() < 1e-8 * mat.trace().abs().max(1.0));
    }

    #[test]
    fn gram_matches_dense() {
        for (n, m, seed) in [(4usize, 5usize, 0u64), (6, 20, 1), (5, 24, 2)] {
            let mut cfg = gaussian_config(n, m);
            cfg.taus = TauSpec::DiscreteMeasure {
                atoms: vec![(0.5, 0.5), (2.0, 0.5)],
            };
            let mat = assemble(&cfg, &mut derive_stream(seed, 0)).unwrap();
            let a = eigenvalues(&mat).unwrap();
            let b = eigenvalues_dense(&mat).unwrap();
            assert_eq!(a.path, SpectrumPath::Gram);
            let (ea, eb) = (a.eigenvalues(), b.eigenvalues());
            assert_eq!(ea.len(), n * n);
            for (x, y) in ea.iter().zip(&eb) {
                assert!((x - y).abs() < 1e-8, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn rank_bound() {
        let mat = assemble_replicate(&gaussian_config(6, 10), 0).unwrap();
        let spec = eigenvalues_dense(&mat).unwrap();
        let nonzero = spec.eigenvalues().iter().filter(|&&v| v != 0.0).count();
        assert!(nonzero <= 10);
    }

    #[test]
    fn statistics_against_dense() {
        let mat = assemble_replicate(&gaussian_config(8, 40), 2).unwrap();
        let spec = eigenvalues(&mat).unwrap();
        let d = mat.dense_form().unwrap();
        let fro2: f64 = (0..64).flat_map(|i| (0..64).map(move |j| (i, j))).map(|(i, j)| d[(i, j)].powi(2)).sum();
        let one = TestFunction::Constant { value: 1.0 };
        let sq = TestFunction::Polynomial {
            coefficients: vec![0.0, 0.0, 1.0],
        };
        let id = TestFunction::Polynomial {
            coefficients: vec![0.0, 1.0],
        };
        assert_eq!(linear_statistic(&spec, &one), 64.0);
        assert!((linear_statistic(&spec, &id) - mat.trace()).abs() < 1e-10 * mat.trace());
        assert!((linear_statistic(&spec, &sq) - fro2).abs() < 1e-8 * fro2);
    }

    #[test]
    fn resolvent_trace_against_dense_solve() {
        let mat = assemble_replicate(&gaussian_config(4, 6), 5).unwrap();
        let spec = eigenvalues(&mat).unwrap();
        let z = Complex64::new(0.7, 0.3);
        let g = resolvent_matrix(&mat, z).unwrap();
        let direct = resolvent_trace(&spec, z).unwrap();
        assert!((g.trace() - direct).norm() < 1e-8 * direct.norm());
        assert!(direct.im * z.im > 0.0);
        // (M - z) G = I
        let d = mat.dense_form().unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let mut acc = -z * g.get(i, j);
                for l in 0..16 {
                    acc += d[(i, l)] * g.get(l, j);
                }
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((acc - target).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn apply_matches_dense() {
        let mat = assemble_replicate(&gaussian_config(5, 9), 6).unwrap();
        let d = mat.dense_form().unwrap();
        let v: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let mv = mat.apply(&v).unwrap();
        let norm = mv.iter().map(|x| x * x).sum::<f64>().sqrt();
        for i in 0..25 {
            let dense: f64 = (0..25).map(|j| d[(i, j)] * v[j]).sum();
            assert!((dense - mv[i]).abs() < 1e-10 * norm);
        }
        assert!(mat.apply(&vec![0.0; 25]).unwrap().iter().all(|&x| x == 0.0));
        assert!(matches!(mat.apply(&[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn apply_rank_one_unit_vector() {
        let y: Vec<f64> = vec![0.6, 0.0, 0.8, 0.0];
        let mat = SampleMatrix::from_columns(2, 2, &[y.clone()], vec![1.0]).unwrap();
        let out = mat.apply(&y).unwrap();
        for (a, b) in out.iter().zip(&y) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn replicates_are_reproducible() {
        let cfg = gaussian_config(6, 12);
        let a = assemble_replicate(&cfg, 3).unwrap();
        let b = assemble_replicate(&cfg, 3).unwrap();
        let c = assemble_replicate(&cfg, 4).unwrap();
        assert_eq!(a.factor(), b.factor());
        assert_ne!(a.factor(), c.factor());
    }

    #[test]
    fn config_validation() {
        let mut cfg = gaussian_config(4, 3);
        cfg.taus = TauSpec::ExplicitList { values: vec![1.0, 2.0] };
        assert!(matches!(cfg.validate(), Err(Error::LengthMismatch { .. })));
        cfg.m = None;
        assert!(cfg.validate().is_err());
        cfg.c = Some(0.5);
        cfg.taus = TauSpec::Constant { value: 1.0 };
        assert_eq!(cfg.sample_count().unwrap(), 8);
        let big = EnsembleConfig::with_ratio(128, 2, 4.0, VectorModel::gaussian(), TauSpec::Constant { value: 1.0 }, 0);
        assert!(matches!(big.validate(), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn spectrum_csv() {
        let mat = SampleMatrix::from_columns(2, 1, &[unit(2, 1)], vec![2.0]).unwrap();
        let mut buf = Vec::new();
        eigenvalues(&mat).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "lambda");
        assert_eq!(lines.len(), 3);
        assert!((lines[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn counting_function_variance_bound() {
        // Var N_n(Δ) ≤ 4m/N², checked with safety factor 3.
        let cfg = gaussian_config(6, 18);
        let reps = 300;
        let window = TestFunction::Indicator { lo: 0.5, hi: 1.5 };
        let samples: Vec<f64> = (0..reps)
            .map(|r| {
                let spec = eigenvalues(&assemble_replicate(&cfg, r).unwrap()).unwrap();
                linear_statistic(&spec, &window) / 36.0
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / reps as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!(var <= 3.0 * 4.0 * 18.0 / (36.0 * 36.0), "{var}");
    }
}
