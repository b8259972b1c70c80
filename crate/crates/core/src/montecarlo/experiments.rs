use super::stats::{
    complex_covariance, complex_covariance_se, complex_variance, excess_kurtosis, histogram, ks_statistic, mean,
    sample_variance, skewness, variance_jackknife_se, HistogramBin, NormalCdf,
};
use crate::ensemble::{assemble_replicate, eigenvalues, linear_statistic, resolvent_trace, EnsembleConfig, SampleMatrix};
use crate::error::{Error, Result};
use crate::fluctuation_theory::TestFunction;
use crate::isotropic_vectors::{VectorModel, VectorSampler};
use crate::linalg::ComplexMatrix;
use crate::mp_law::limiting_cdf;
use crate::rng::derive_lane;
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Replicates below which normality diagnostics are flagged as underpowered.
pub const MIN_CLT_REPLICATES: usize = 200;
/// Replicates below which covariance estimates are flagged as underpowered.
pub const MIN_COV_REPLICATES: usize = 500;
/// Normality flag thresholds at the design size of 2000 replicates.
pub const SKEW_FLAG: f64 = 0.15;
pub const KURTOSIS_FLAG: f64 = 0.3;

const BILINEAR_LANE: u64 = 0x4249_4c49;
const BILINEAR_BATCH: usize = 512;
const LIMIT_CDF_POINTS: usize = 4000;
const ESD_HISTOGRAM_BINS: usize = 100;

/// One replicated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub config: EnsembleConfig,
    pub replicates: usize,
    #[serde(default)]
    pub phis: Vec<TestFunction>,
    #[serde(default)]
    pub z_probes: Vec<Complex64>,
    /// Evaluate degree ≤ 1 statistics as `c₀N + c₁ Tr M` from the factor,
    /// skipping eigensolves. Tapered monomials are treated as untapered.
    #[serde(default)]
    pub trace_shortcut: bool,
}

impl ExperimentPlan {
    pub fn new(config: EnsembleConfig, replicates: usize) -> Self {
        Self {
            config,
            replicates,
            phis: Vec::new(),
            z_probes: Vec::new(),
            trace_shortcut: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.replicates < 2 {
            return Err(Error::InvalidInput("a plan needs at least 2 replicates".into()));
        }
        if let Some(z) = self.z_probes.iter().find(|z| z.im == 0.0) {
            return Err(Error::InvalidInput(format!("z probe {z} lies on the real axis")));
        }
        for phi in &self.phis {
            phi.validate()?;
        }
        if self.trace_shortcut {
            for phi in &self.phis {
                if trace_coefficients(phi).is_none() {
                    return Err(Error::InvalidInput(format!(
                        "trace shortcut needs polynomial statistics of degree <= 1, got {}",
                        phi.label()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `(c₀, c₁)` with `φ(λ) = c₀ + c₁λ` on the spectral range.
fn trace_coefficients(phi: &TestFunction) -> Option<(f64, f64)> {
    match phi {
        TestFunction::Constant { value } => Some((*value, 0.0)),
        TestFunction::Polynomial { coefficients } if coefficients.len() <= 2 => {
            Some((coefficients[0], coefficients.get(1).copied().unwrap_or(0.0)))
        }
        TestFunction::Monomial { degree: 0, .. } => Some((1.0, 0.0)),
        TestFunction::Monomial { degree: 1, .. } => Some((0.0, 1.0)),
        TestFunction::Scaled { factor, inner } => trace_coefficients(inner).map(|(a, b)| (factor * a, factor * b)),
        _ => None,
    }
}

/// Per-replicate output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    /// `N_n[φ]` for each plan test function.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub statistics: Vec<f64>,
    /// `γ_n(z)` for each probe.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traces: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
}

/// Summary of one scalar statistic across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub label: String,
    pub replicates: usize,
    /// Mean of the raw statistic `N_n[φ]`.
    pub raw_mean: f64,
    /// Variance of `n^{-1/2}(N_n[φ] − mean)`.
    pub variance: f64,
    pub variance_se: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Kolmogorov distance to `N(0, variance)`.
    pub ks_normal: f64,
    /// `|skewness| > 0.15` or `|excess kurtosis| > 0.3`.
    pub non_normal: bool,
}

fn summarize_samples(label: String, raw: &[f64], n: usize) -> StatSummary {
    let m = mean(raw);
    let scale = (n as f64).sqrt().recip();
    let s: Vec<f64> = raw.iter().map(|v| (v - m) * scale).collect();
    let variance = sample_variance(&s);
    let skew = skewness(&s);
    let kurt = excess_kurtosis(&s);
    StatSummary {
        label,
        replicates: raw.len(),
        raw_mean: m,
        variance,
        variance_se: variance_jackknife_se(&s),
        skewness: skew,
        excess_kurtosis: kurt,
        ks_normal: ks_statistic(
            &s,
            &NormalCdf {
                mean: 0.0,
                sd: variance.max(0.0).sqrt(),
            },
        ),
        non_normal: skew.abs() > SKEW_FLAG || kurt.abs() > KURTOSIS_FLAG,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltSummary {
    pub n: usize,
    pub statistics: Vec<StatSummary>,
    pub warnings: Vec<String>,
}

/// Recomputes the CLT summary from ordered records.
pub fn summarize_clt(n: usize, phis: &[TestFunction], records: &[ReplicateRecord]) -> CltSummary {
    let statistics = phis
        .iter()
        .enumerate()
        .map(|(i, phi)| {
            let raw: Vec<f64> = records.iter().map(|r| r.statistics[i]).collect();
            summarize_samples(phi.label(), &raw, n)
        })
        .collect();
    let mut warnings = Vec::new();
    if records.len() < MIN_CLT_REPLICATES {
        warnings.push(format!(
            "{} replicates: normality diagnostics are underpowered below {MIN_CLT_REPLICATES}",
            records.len()
        ));
    }
    CltSummary { n, statistics, warnings }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<S> {
    pub records: Vec<ReplicateRecord>,
    pub summary: S,
}

fn par_replicates<T: Send>(replicates: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..replicates as u64).into_par_iter().map(f).collect()
}

fn shortcut_statistics(mat: &SampleMatrix, phis: &[TestFunction]) -> Vec<f64> {
    let dim = mat.dimension() as f64;
    let tr = mat.trace();
    phis.iter()
        .map(|phi| {
            let (c0, c1) = trace_coefficients(phi).expect("validated");
            c0 * dim + c1 * tr
        })
        .collect()
}

/// Samples `n^{-1/2} N_n°[φ]` for every plan test function.
pub fn run_clt_experiment(plan: &ExperimentPlan) -> Result<RunResult<CltSummary>> {
    plan.validate()?;
    if plan.config.k != 2 {
        return Err(Error::InvalidInput(format!(
            "the CLT experiment is defined for k = 2, got k = {}",
            plan.config.k
        )));
    }
    if plan.phis.is_empty() {
        return Err(Error::InvalidInput("the CLT experiment needs at least one test function".into()));
    }
    let records = par_replicates(plan.replicates, |r| {
        let mat = assemble_replicate(&plan.config, r)?;
        let statistics = if plan.trace_shortcut {
            shortcut_statistics(&mat, &plan.phis)
        } else {
            let spec = eigenvalues(&mat)?;
            plan.phis.iter().map(|phi| linear_statistic(&spec, phi)).collect()
        };
        Ok(ReplicateRecord {
            replicate: r,
            statistics,
            traces: Vec::new(),
            eigenvalues: None,
        })
    })?;
    let summary = summarize_clt(plan.config.n, &plan.phis, &records);
    Ok(RunResult { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdSummary {
    /// Kolmogorov distance of the pooled eigenvalues to the limiting law.
    pub ks: f64,
    pub pooled_eigenvalues: usize,
    /// Fraction of pooled eigenvalues equal to zero.
    pub zero_fraction: f64,
    pub atom_at_zero: f64,
    pub c: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Recomputes the ESD summary from ordered records.
pub fn summarize_esd(config: &EnsembleConfig, records: &[ReplicateRecord]) -> Result<EsdSummary> {
    let pooled: Vec<f64> = records.iter().flat_map(|r| r.eigenvalues.iter().flatten().copied()).collect();
    let c = config.ratio()?;
    let sigma = config.taus.measure()?;
    let reference = limiting_cdf(&sigma, c, LIMIT_CDF_POINTS)?;
    let zeros = pooled.iter().filter(|&&v| v == 0.0).count();
    Ok(EsdSummary {
        ks: ks_statistic(&pooled, &reference),
        pooled_eigenvalues: pooled.len(),
        zero_fraction: zeros as f64 / pooled.len().max(1) as f64,
        atom_at_zero: reference.atom(),
        c,
        histogram: histogram(&pooled, ESD_HISTOGRAM_BINS),
    })
}

/// Pools full spectra (zero eigenvalues included) and compares them with the
/// limiting law.
pub fn run_esd_experiment(plan: &ExperimentPlan) -> Result<RunResult<EsdSummary>> {
    plan.validate()?;
    let records = par_replicates(plan.replicates, |r| {
        let spec = eigenvalues(&assemble_replicate(&plan.config, r)?)?;
        Ok(ReplicateRecord {
            replicate: r,
            statistics: Vec::new(),
            traces: Vec::new(),
            eigenvalues: Some(spec.eigenvalues()),
        })
    })?;
    let summary = summarize_esd(&plan.config, &records)?;
    Ok(RunResult { records, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovEstimate {
    pub z1: Complex64,
    pub z2: Complex64,
    /// `n⁻¹ Cov{γ_n(z₁), γ_n(z₂)}`.
    pub value: Complex64,
    pub se_re: f64,
    pub se_im: f64,
    pub se_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovSummary {
    pub n: usize,
    pub estimates: Vec<CovEstimate>,
    pub warnings: Vec<String>,
}

fn probe_index(probes: &[Complex64], z: Complex64) -> Option<usize> {
    probes.iter().position(|&p| p == z)
}

/// Recomputes covariance estimates for `pairs` from records holding traces at `probes`.
pub fn summarize_cov(
    n: usize,
    probes: &[Complex64],
    pairs: &[(Complex64, Complex64)],
    records: &[ReplicateRecord],
) -> Result<CovSummary> {
    let nf = n as f64;
    let estimates = pairs
        .iter()
        .map(|&(z1, z2)| {
            let (i, j) = probe_index(probes, z1)
                .zip(probe_index(probes, z2))
                .ok_or_else(|| Error::InvalidInput(format!("pair ({z1}, {z2}) is not among the probes")))?;
            let x: Vec<Complex64> = records.iter().map(|r| r.traces[i]).collect();
            let y: Vec<Complex64> = records.iter().map(|r| r.traces[j]).collect();
            let (se_re, se_im, se_modulus) = complex_covariance_se(&x, &y);
            Ok(CovEstimate {
                z1,
                z2,
                value: complex_covariance(&x, &y) / nf,
                se_re: se_re / nf,
                se_im: se_im / nf,
                se_modulus: se_modulus / nf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut warnings = Vec::new();
    if records.len() < MIN_COV_REPLICATES {
        warnings.push(format!(
            "{} replicates: covariance estimates are underpowered below {MIN_COV_REPLICATES}",
            records.len()
        ));
    }
    Ok(CovSummary { n, estimates, warnings })
}

/// Empirical `C_n(z₁, z₂) = n⁻¹ Cov{γ_n(z₁), γ_n(z₂)}` for each pair; the traces
/// are recorded at the distinct points of `pairs`.
pub fn run_cov_experiment(plan: &ExperimentPlan, pairs: &[(Complex64, Complex64)]) -> Result<RunResult<CovSummary>> {
    plan.validate()?;
    let mut probes: Vec<Complex64> = plan.z_probes.clone();
    for &(a, b) in pairs {
        for z in [a, b] {
            if z.im == 0.0 {
                return Err(Error::InvalidInput(format!("z probe {z} lies on the real axis")));
            }
            if probe_index(&probes, z).is_none() {
                probes.push(z);
            }
        }
    }
    let records = par_replicates(plan.replicates, |r| {
        let spec = eigenvalues(&assemble_replicate(&plan.config, r)?)?;
        let traces = probes.iter().map(|&z| resolvent_trace(&spec, z)).collect::<Result<Vec<_>>>()?;
        Ok(ReplicateRecord {
            replicate: r,
            statistics: Vec::new(),
            traces,
            eigenvalues: None,
        })
    })?;
    let summary = summarize_cov(plan.config.n, &probes, pairs, &records)?;
    Ok(RunResult { records, summary })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilinearRecord {
    pub replicate: u64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearSummary {
    pub n: usize,
    pub replicates: usize,
    pub mean: Complex64,
    /// `n E|ξ − Eξ|²` with `ξ = (HY, Y)`.
    pub n_variance: f64,
    pub n_variance_se: f64,
}

pub fn summarize_bilinear(n: usize, records: &[BilinearRecord]) -> BilinearSummary {
    let values: Vec<Complex64> = records.iter().map(|r| r.value).collect();
    let (var, se) = complex_variance(&values);
    BilinearSummary {
        n,
        replicates: values.len(),
        mean: values.iter().sum::<Complex64>() / values.len().max(1) as f64,
        n_variance: n as f64 * var,
        n_variance_se: n as f64 * se,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearResult {
    pub records: Vec<BilinearRecord>,
    pub summary: BilinearSummary,
}

/// Columnwise `Σ_i Y_i (A Y)_i` for a batch `Y`.
fn quadratic_forms(a: &Mat<f64>, y: &Mat<f64>) -> Vec<f64> {
    let mut ay = Mat::<f64>::zeros(y.nrows(), y.ncols());
    matmul(&mut ay, Accum::Replace, a, y, 1.0, Par::Seq);
    (0..y.ncols())
        .map(|j| y.col_as_slice(j).iter().zip(ay.col_as_slice(j)).map(|(u, v)| u * v).sum())
        .collect()
}

/// Samples `(HY, Y)` for a fixed `n² × n²` matrix `H` and `Y = y ⊗ y′`.
/// Replicates are drawn in batches, each on its own derived stream.
pub fn run_bilinear_experiment(
    h: &ComplexMatrix,
    model: VectorModel,
    n: usize,
    replicates: usize,
    master_seed: u64,
) -> Result<BilinearResult> {
    let dim = n * n;
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::InvalidInput(format!("H must be {dim}x{dim} for n = {n}")));
    }
    if replicates < 2 {
        return Err(Error::InvalidInput("at least 2 replicates are needed".into()));
    }
    let sampler = VectorSampler::new(model, n)?;
    let real = h.is_real();
    let batches = replicates.div_ceil(BILINEAR_BATCH);
    let chunks: Vec<Vec<BilinearRecord>> = (0..batches as u64)
        .into_par_iter()
        .map(|b| {
            let start = b as usize * BILINEAR_BATCH;
            let size = BILINEAR_BATCH.min(replicates - start);
            let mut stream = derive_lane(master_seed, BILINEAR_LANE, b);
            let mut y = Mat::<f64>::zeros(dim, size);
            let (mut u, mut v) = (vec![0.0; n], vec![0.0; n]);
            for j in 0..size {
                sampler.sample_into(&mut stream, &mut u);
                sampler.sample_into(&mut stream, &mut v);
                crate::isotropic_vectors::kron_into(&[&u, &v], y.col_as_slice_mut(j));
            }
            let re = quadratic_forms(&h.re, &y);
            let im = if real { vec![0.0; size] } else { quadratic_forms(&h.im, &y) };
            re.into_iter()
                .zip(im)
                .enumerate()
                .map(|(j, (a, c))| BilinearRecord {
                    replicate: (start + j) as u64,
                    value: Complex64::new(a, c),
                })
                .collect()
        })
        .collect();
    let records: Vec<BilinearRecord> = chunks.into_iter().flatten().collect();
    let summary = summarize_bilinear(n, &records);
    Ok(BilinearResult { records, summary })
}
