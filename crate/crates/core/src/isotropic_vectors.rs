//! Normalized isotropic random vectors `y ∈ Rⁿ` with `E y = 0`,
//! `E y yᵀ = I/n`, their tensor products, and the moment constants that
//! enter the fluctuation formulas.
//!
//! All models here are unconditional (law invariant under coordinate sign
//! flips) and exchangeable.

use crate::error::{Error, Result};
use crate::linalg::spectral_norm_symmetric;
use crate::montecarlo::stats::block_jackknife_mean;
use crate::quadrature::{integrate, QuadOptions};
use crate::rng::{derive_lane, Stream};
use faer::Mat;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Largest tensor length `n^k` materialized by [`tensor_sample`].
pub const TENSOR_BUDGET: usize = 1 << 24;

/// Law of the standardized components `x_i = √n · y_i` of an i.i.d. model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentLaw {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    UniformSym,
    /// Student-t with 5 degrees of freedom truncated to `|t| ≤ 10`, rescaled
    /// to unit variance. Heavy shoulders, every moment finite.
    StudentLikeBounded,
}

const STUDENT_DOF: f64 = 5.0;
const STUDENT_CUTOFF: f64 = 10.0;

/// Raw moments `E t^{2j}`, j = 1..=6, of the truncated Student law.
fn truncated_student_moments() -> &'static [f64; 6] {
    static MOMENTS: OnceLock<[f64; 6]> = OnceLock::new();
    MOMENTS.get_or_init(|| {
        let nu = STUDENT_DOF;
        let kernel = |t: f64| (1.0 + t * t / nu).powf(-(nu + 1.0) / 2.0);
        let opts = QuadOptions::with_tol(1e-14, 1e-13);
        let mass = integrate(kernel, 0.0, STUDENT_CUTOFF, opts).expect("smooth integrand").value;
        let mut out = [0.0; 6];
        for (j, o) in out.iter_mut().enumerate() {
            let p = 2 * (j as i32 + 1);
            *o = integrate(|t| t.powi(p) * kernel(t), 0.0, STUDENT_CUTOFF, opts)
                .expect("smooth integrand")
                .value
                / mass;
        }
        out
    })
}

impl ComponentLaw {
    /// `(E x⁴, E x⁶)` for the unit-variance component.
    pub fn standardized_moments(self) -> (f64, f64) {
        match self {
            ComponentLaw::Gaussian => (3.0, 15.0),
            ComponentLaw::Rademacher => (1.0, 1.0),
            ComponentLaw::UniformSym => (9.0 / 5.0, 27.0 / 7.0),
            ComponentLaw::StudentLikeBounded => {
                let m = truncated_student_moments();
                (m[1] / (m[0] * m[0]), m[2] / (m[0] * m[0] * m[0]))
            }
        }
    }

    /// Standardized twelfth moment; finite for every supported law.
    pub fn twelfth_moment(self) -> f64 {
        match self {
            ComponentLaw::Gaussian => 10395.0,
            ComponentLaw::Rademacher => 1.0,
            ComponentLaw::UniformSym => 3f64.powi(6) / 13.0,
            ComponentLaw::StudentLikeBounded => {
                let m = truncated_student_moments();
                m[5] / m[0].powi(6)
            }
        }
    }

    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            ComponentLaw::Gaussian => StandardNormal.sample(rng),
            ComponentLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            ComponentLaw::UniformSym => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
            ComponentLaw::StudentLikeBounded => {
                let t = StudentT::new(STUDENT_DOF).expect("valid dof");
                let scale = truncated_student_moments()[0].sqrt().recip();
                loop {
                    let v: f64 = t.sample(rng);
                    if v.abs() <= STUDENT_CUTOFF {
                        return v * scale;
                    }
                }
            }
        }
    }
}

/// A family of normalized isotropic vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum VectorModel {
    /// `y = x / √n` with i.i.d. even unit-variance components.
    Iid { law: ComponentLaw },
    /// Uniform on the unit sphere `S^{n-1}`.
    Sphere,
    /// Uniform on the ℓp unit ball, rescaled so that `E y_i² = 1/n`.
    #[serde(rename = "lp")]
    LpBall { p: f64 },
}

impl VectorModel {
    pub fn iid(law: ComponentLaw) -> Self {
        VectorModel::Iid { law }
    }

    pub fn gaussian() -> Self {
        Self::iid(ComponentLaw::Gaussian)
    }

    pub fn validate(&self) -> Result<()> {
        if let VectorModel::LpBall { p } = *self {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidInput(format!("lp-ball requires finite p >= 1, got {p}")));
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match self {
            VectorModel::Iid { law } => format!("iid-{}", serde_json::to_value(law).unwrap().as_str().unwrap()),
            VectorModel::Sphere => "sphere".into(),
            VectorModel::LpBall { p } => format!("lp-{p}"),
        }
    }
}

/// `E x_1²` for `x` uniform on the ℓp unit ball of `Rⁿ`:
/// `Γ(3/p) Γ(1 + n/p) / (Γ(1/p) Γ(1 + (n+2)/p))`.
fn lp_ball_second_moment(n: usize, p: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let nf = n as f64;
    (ln_gamma(3.0 / p) + ln_gamma(1.0 + nf / p) - ln_gamma(1.0 / p) - ln_gamma(1.0 + (nf + 2.0) / p)).exp()
}

/// Sampler for one `(model, n)` pair with its normalization constants
/// precomputed.
#[derive(Debug, Clone)]
pub struct VectorSampler {
    model: VectorModel,
    n: usize,
    scale: f64,
    lp_gamma: Option<Gamma<f64>>,
}

impl VectorSampler {
    pub fn new(model: VectorModel, n: usize) -> Result<Self> {
        model.validate()?;
        if n < 2 {
            return Err(Error::InvalidInput(format!("dimension n must be at least 2, got {n}")));
        }
        let (scale, lp_gamma) = match model {
            VectorModel::Iid { .. } => (1.0 / (n as f64).sqrt(), None),
            VectorModel::Sphere => (1.0, None),
            VectorModel::LpBall { p } => {
                let second = lp_ball_second_moment(n, p);
                let gamma = Gamma::new(1.0 / p, 1.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
                (1.0 / (n as f64 * second).sqrt(), Some(gamma))
            }
        };
        Ok(Self {
            model,
            n,
            scale,
            lp_gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn model(&self) -> VectorModel {
        self.model
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.n);
        match self.model {
            VectorModel::Iid { law } => {
                for v in out.iter_mut() {
                    *v = law.draw(rng) * self.scale;
                }
            }
            VectorModel::Sphere => loop {
                let mut norm2 = 0.0;
                for v in out.iter_mut() {
                    let g: f64 = StandardNormal.sample(rng);
                    *v = g;
                    norm2 += g * g;
                }
                if norm2 > 0.0 {
                    let inv = norm2.sqrt().recip();
                    out.iter_mut().for_each(|v| *v *= inv);
                    return;
                }
            },
            VectorModel::LpBall { p } => {
                // Barthe–Guédon–Mendelson–Naor: g_i with density ∝ exp(-|t|^p),
                // W ~ Exp(1); g / (Σ|g_i|^p + W)^{1/p} is uniform on the ball.
                let gamma = self.lp_gamma.as_ref().expect("lp sampler");
                let mut sum = 0.0;
                for v in out.iter_mut() {
                    let e: f64 = gamma.sample(rng);
                    sum += e;
                    let mag = e.powf(1.0 / p);
                    *v = if rng.random::<bool>() { mag } else { -mag };
                }
                let w: f64 = Exp1.sample(rng);
                let factor = self.scale / (sum + w).powf(1.0 / p);
                out.iter_mut().for_each(|v| *v *= factor);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.sample_into(rng, &mut out);
        out
    }
}

/// One draw of `y ∈ Rⁿ` from `model`.
pub fn sample_vector(model: VectorModel, n: usize, stream: &mut Stream) -> Result<Vec<f64>> {
    Ok(VectorSampler::new(model, n)?.sample(stream))
}

/// Kronecker product of the factors into `out`; the first factor's index varies
/// slowest, so entry `(j_1, …, j_k)` sits at `j_1 n^{k-1} + … + j_k`.
pub fn kron_into(factors: &[&[f64]], out: &mut [f64]) {
    let total: usize = factors.iter().map(|f| f.len()).product();
    debug_assert_eq!(out.len(), total);
    out[0] = 1.0;
    let mut len = 1;
    for f in factors {
        // Expand in place from the back so earlier entries are still intact.
        for i in (0..len).rev() {
            let base = out[i];
            for (j, &v) in f.iter().enumerate().rev() {
                out[i * f.len() + j] = base * v;
            }
        }
        len *= f.len();
    }
}

fn check_tensor_budget(n: usize, k: usize) -> Result<usize> {
    let len = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if k == 0 {
        return Err(Error::InvalidInput("tensor order k must be at least 1".into()));
    }
    if len > TENSOR_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            requested: len.min(usize::MAX as u128) as usize,
            budget: TENSOR_BUDGET,
            hint: "use the matrix-free apply path instead of materializing tensors",
        });
    }
    Ok(len as usize)
}

/// One draw of `Y = y⁽¹⁾ ⊗ … ⊗ y⁽ᵏ⁾` with independent factors.
pub fn tensor_sample(model: VectorModel, n: usize, k: usize, stream: &mut Stream) -> Result<Vec<f64>> {
    let len = check_tensor_budget(n, k)?;
    let sampler = VectorSampler::new(model, n)?;
    let factors: Vec<Vec<f64>> = (0..k).map(|_| sampler.sample(stream)).collect();
    let refs: Vec<&[f64]> = factors.iter().map(|f| f.as_slice()).collect();
    let mut out = vec![0.0; len];
    kron_into(&refs, &mut out);
    Ok(out)
}

/// Fourth and sixth order moment constants of a vector model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub n: usize,
    /// `a` in `a_{2,2} = n⁻² + a n⁻³ + O(n⁻⁴)`.
    pub a: f64,
    /// `b` in `κ₄ = b n⁻² + O(n⁻³)`.
    pub b: f64,
    /// `E y_i² y_j²`, i ≠ j, at this n.
    pub a22: f64,
    /// `E y_j⁴ - 3 a_{2,2}` at this n.
    pub kappa4: f64,
    /// `E y_i² y_j² y_k²`, distinct indices.
    pub a222: f64,
    /// `E y_i² y_j⁴`, i ≠ j.
    pub a24: f64,
    /// `E y_i⁶`.
    pub a6: f64,
    /// Empirical `max_H n Var{(Hy, y)} / ‖H‖²` over the probe set of
    /// [`probe_matrices`]; `None` for analytic profiles.
    pub deltan_estimate: Option<f64>,
}

impl MomentProfile {
    pub fn a_plus_b_plus_2(&self) -> f64 {
        self.a + self.b + 2.0
    }
}

/// Exact moments where closed forms exist.
pub fn analytic_moment_profile(model: VectorModel, n: usize) -> Result<MomentProfile> {
    model.validate()?;
    if n < 2 {
        return Err(Error::InvalidInput("n must be at least 2".into()));
    }
    let nf = n as f64;
    match model {
        VectorModel::Iid { law } => {
            let (m4, m6) = law.standardized_moments();
            Ok(MomentProfile {
                n,
                a: 0.0,
                b: m4 - 3.0,
                a22: nf.powi(-2),
                kappa4: (m4 - 3.0) / (nf * nf),
                a222: nf.powi(-3),
                a24: m4 / nf.powi(3),
                a6: m6 / nf.powi(3),
                deltan_estimate: None,
            })
        }
        VectorModel::Sphere => {
            // Dirichlet moments of (y_1², …, y_n²) ~ Dir(1/2, …, 1/2).
            let d2 = nf * (nf + 2.0);
            let d3 = d2 * (nf + 4.0);
            Ok(MomentProfile {
                n,
                a: -2.0,
                b: 0.0,
                a22: 1.0 / d2,
                kappa4: 0.0,
                a222: 1.0 / d3,
                a24: 3.0 / d3,
                a6: 15.0 / d3,
                deltan_estimate: None,
            })
        }
        VectorModel::LpBall { .. } => Err(Error::EmpiricalOnly(model.label())),
    }
}

/// Standard errors attached to an [`EmpiricalMomentProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentErrors {
    pub a: f64,
    pub b: f64,
    pub a22: f64,
    pub kappa4: f64,
    pub a222: f64,
    pub a24: f64,
    pub a6: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMomentProfile {
    pub profile: MomentProfile,
    pub se: MomentErrors,
    pub reps: usize,
}

/// Minimum replicate count for [`empirical_moment_profile`].
pub const MIN_MOMENT_REPS: usize = 10_000;
const JACKKNIFE_BLOCKS: usize = 100;
const DELTAN_DRAWS: usize = 20_000;
const PROBE_LANE: u64 = 0x5052_4f42;

/// Fixed probe set for the δ_n diagnostic: identity, alternating diagonal,
/// a rank-one coordinate projector, the symmetrized cyclic shift, and a
/// seeded symmetric random-sign matrix scaled to unit operator norm.
pub fn probe_matrices(n: usize) -> Vec<Mat<f64>> {
    let identity = Mat::<f64>::identity(n, n);
    let alternating = Mat::<f64>::from_fn(n, n, |i, j| if i == j { if i % 2 == 0 { 1.0 } else { -1.0 } } else { 0.0 });
    let projector = Mat::<f64>::from_fn(n, n, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 });
    let shift = Mat::<f64>::from_fn(n, n, |i, j| {
        if (i + 1) % n == j || (j + 1) % n == i {
            0.5
        } else {
            0.0
        }
    });
    let mut rng = derive_lane(0, PROBE_LANE, n as u64);
    let mut signs = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            signs[(i, j)] = s;
            signs[(j, i)] = s;
        }
    }
    let norm = spectral_norm_symmetric(&signs).unwrap_or(1.0);
    let wigner = Mat::<f64>::from_fn(n, n, |i, j| signs[(i, j)] / norm);
    vec![identity, alternating, projector, shift, wigner]
}

fn quadratic_form(h: &Mat<f64>, y: &[f64]) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for j in 0..n {
        let col = h.col(j);
        let mut s = 0.0;
        for i in 0..n {
            s += col[i] * y[i];
        }
        acc += s * y[j];
    }
    acc
}

/// Monte Carlo estimates of the moment constants with block-jackknife
/// standard errors. Uses symmetric power-sum estimators so each draw
/// contributes every index pair/triple.
pub fn empirical_moment_profile(
    model: VectorModel,
    n: usize,
    reps: usize,
    stream: &mut Stream,
) -> Result<EmpiricalMomentProfile> {
    if reps < MIN_MOMENT_REPS {
        return Err(Error::InvalidInput(format!(
            "empirical moments need at least {MIN_MOMENT_REPS} replicates, got {reps}"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidInput("empirical moments need n >= 3".into()));
    }
    let sampler = VectorSampler::new(model, n)?;
    let nf = n as f64;
    let pairs = nf * (nf - 1.0);
    let triples = pairs * (nf - 2.0);
    let probes = probe_matrices(n);
    let probe_norms: Vec<f64> = probes.iter().map(|h| spectral_norm_symmetric(h).unwrap_or(1.0)).collect();
    let mut probe_values: Vec<Vec<f64>> = vec![Vec::with_capacity(DELTAN_DRAWS.min(reps)); probes.len()];

    // columns: a22, E y⁴, a222, a24, a6
    let mut draws: Vec<[f64; 5]> = Vec::with_capacity(reps);
    let mut y = vec![0.0; n];
    for r in 0..reps {
        sampler.sample_into(stream, &mut y);
        let (mut p1, mut p2, mut p3) = (0.0, 0.0, 0.0);
        for &v in &y {
            let s = v * v;
            p1 += s;
            p2 += s * s;
            p3 += s * s * s;
        }
        draws.push([
            (p1 * p1 - p2) / pairs,
            p2 / nf,
            (p1 * p1 * p1 - 3.0 * p1 * p2 + 2.0 * p3) / triples,
            (p1 * p2 - p3) / pairs,
            p3 / nf,
        ]);
        if r < DELTAN_DRAWS {
            for (h, vals) in probes.iter().zip(probe_values.iter_mut()) {
                vals.push(quadratic_form(h, &y));
            }
        }
    }

    let column = |c: usize| -> Vec<f64> { draws.iter().map(|d| d[c]).collect() };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let cols: Vec<Vec<f64>> = (0..5).map(column).collect();
    let est: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let se = |c: usize| block_jackknife_mean(&cols[c], JACKKNIFE_BLOCKS).1;
    let kappa4_series: Vec<f64> = draws.iter().map(|d| d[1] - 3.0 * d[0]).collect();
    let kappa4 = est[1] - 3.0 * est[0];
    let kappa4_se = block_jackknife_mean(&kappa4_series, JACKKNIFE_BLOCKS).1;
    let a22_se = se(0);

    let deltan = probe_values
        .iter()
        .zip(&probe_norms)
        .map(|(vals, &norm)| {
            let m = mean(vals);
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (vals.len() as f64 - 1.0);
            nf * var / (norm * norm)
        })
        .fold(0.0, f64::max);

    let profile = MomentProfile {
        n,
        a: nf.powi(3) * (est[0] - nf.powi(-2)),
        b: nf * nf * kappa4,
        a22: est[0],
        kappa4,
        a222: est[2],
        a24: est[3],
        a6: est[4],
        deltan_estimate: Some(deltan),
    };
    Ok(EmpiricalMomentProfile {
        profile,
        se: MomentErrors {
            a: nf.powi(3) * a22_se,
            b: nf * nf * kappa4_se,
            a22: a22_se,
            kappa4: kappa4_se,
            a222: se(2),
            a24: se(3),
            a6: se(4),
        },
        reps,
    })
}
