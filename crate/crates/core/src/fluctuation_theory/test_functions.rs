//! Test functions `φ: R → R`, Poisson smoothing and Sobolev norms
//! `‖φ‖_s² = ∫ (1 + |t|)^{2s} |φ̂(t)|² dt` with the unitary transform
//! `φ̂(t) = (2π)^{-1/2} ∫ e^{-itx} φ(x) dx`.

use crate::error::{Error, Result};
use crate::mp_law::mp_edges;
use crate::quadrature::{integrate_semi_infinite, integrate_with_breaks, QuadOptions};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Width of the cosine taper applied to [`TestFunction::Monomial`].
pub const TAPER_WIDTH: f64 = 1.0;
/// Half-width, in units of the scale, kept for `1/x²` tails.
const HEAVY_TAIL: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunction {
    /// `exp(−(λ − center)² / (2 width²))`.
    GaussianBump { center: f64, width: f64 },
    /// `scale² / ((λ − center)² + scale²)`.
    Cauchy { center: f64, scale: f64 },
    /// `(1/π)[atan((hi − λ)/η) − atan((lo − λ)/η)]`, the Poisson image of `1_[lo,hi]`.
    PoissonSmoothedIndicator { lo: f64, hi: f64, eta: f64 },
    /// `λ^degree` on `[lo, hi]`, cosine-tapered to zero over one unit on each side.
    Monomial { degree: u32, lo: f64, hi: f64 },
    /// `Σ_j coefficients[j] λ^j`, untapered.
    Polynomial { coefficients: Vec<f64> },
    /// `1_[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
    Constant { value: f64 },
    Scaled { factor: f64, inner: Box<TestFunction> },
    /// `P_η * inner`, evaluated by quadrature.
    Smoothed { eta: f64, inner: Box<TestFunction> },
}

fn taper(x: f64, lo: f64, hi: f64) -> f64 {
    if x >= lo && x <= hi {
        1.0
    } else if x < lo && x > lo - TAPER_WIDTH {
        0.5 * (1.0 - (PI * (x - (lo - TAPER_WIDTH)) / TAPER_WIDTH).cos())
    } else if x > hi && x < hi + TAPER_WIDTH {
        0.5 * (1.0 - (PI * ((hi + TAPER_WIDTH) - x) / TAPER_WIDTH).cos())
    } else {
        0.0
    }
}

impl TestFunction {
    /// `λ^degree` with its plateau on `[a₋ − 1, a₊ + 1]` for the `τ ≡ 1` law at ratio `c`.
    pub fn tapered_monomial(degree: u32, c: f64) -> Self {
        let (lo, hi) = mp_edges(c);
        TestFunction::Monomial {
            degree,
            lo: lo - 1.0,
            hi: hi + 1.0,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        TestFunction::Scaled {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("test function: {what}")));
        match self {
            TestFunction::GaussianBump { width, center } if !(*width > 0.0) || !center.is_finite() => {
                bad("gaussian-bump needs width > 0")
            }
            TestFunction::Cauchy { scale, center } if !(*scale > 0.0) || !center.is_finite() => {
                bad("cauchy needs scale > 0")
            }
            TestFunction::PoissonSmoothedIndicator { lo, hi, eta } if !(lo < hi) || !(*eta > 0.0) => {
                bad("poisson-smoothed-indicator needs lo < hi and eta > 0")
            }
            TestFunction::Monomial { degree, lo, hi } if *degree > 2 || !(lo < hi) => {
                bad("monomial needs degree <= 2 and lo < hi")
            }
            TestFunction::Indicator { lo, hi } if !(lo < hi) => bad("indicator needs lo < hi"),
            TestFunction::Polynomial { coefficients } if coefficients.is_empty() => {
                bad("polynomial needs at least one coefficient")
            }
            TestFunction::Scaled { inner, .. } => inner.validate(),
            TestFunction::Smoothed { eta, inner } => {
                if !(*eta > 0.0) {
                    return bad("smoothing needs eta > 0");
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::GaussianBump { center, width } => {
                let u = (x - center) / width;
                (-0.5 * u * u).exp()
            }
            TestFunction::Cauchy { center, scale } => scale * scale / ((x - center).powi(2) + scale * scale),
            TestFunction::PoissonSmoothedIndicator { lo, hi, eta } => {
                (((hi - x) / eta).atan() - ((lo - x) / eta).atan()) / PI
            }
            TestFunction::Monomial { degree, lo, hi } => {
                let w = taper(x, *lo, *hi);
                if w == 0.0 {
                    0.0
                } else {
                    x.powi(*degree as i32) * w
                }
            }
            TestFunction::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c),
            TestFunction::Indicator { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Constant { value } => *value,
            TestFunction::Scaled { factor, inner } => factor * inner.eval(x),
            TestFunction::Smoothed { eta, inner } => poisson_integral(inner, *eta, x),
        }
    }

    /// Points where the function or a low derivative is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            TestFunction::Monomial { lo, hi, .. } => vec![lo - TAPER_WIDTH, *lo, *hi, hi + TAPER_WIDTH],
            TestFunction::Indicator { lo, hi } => vec![*lo, *hi],
            TestFunction::Scaled { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Interval outside which the function is negligible for integrals against
    /// kernels decaying at least like `|λ|⁻³`; `None` when it does not decay.
    pub fn effective_support(&self) -> Option<(f64, f64)> {
        match self {
            TestFunction::GaussianBump { center, width } => Some((center - 9.0 * width, center + 9.0 * width)),
            TestFunction::Cauchy { center, scale } => Some((center - HEAVY_TAIL * scale, center + HEAVY_TAIL * scale)),
            TestFunction::PoissonSmoothedIndicator { lo, hi, eta } => Some((lo - HEAVY_TAIL * eta, hi + HEAVY_TAIL * eta)),
            TestFunction::Monomial { lo, hi, .. } => Some((lo - TAPER_WIDTH, hi + TAPER_WIDTH)),
            TestFunction::Indicator { lo, hi } => Some((*lo, *hi)),
            TestFunction::Constant { .. } | TestFunction::Polynomial { .. } => None,
            TestFunction::Scaled { inner, .. } => inner.effective_support(),
            TestFunction::Smoothed { eta, inner } => inner
                .effective_support()
                .map(|(a, b)| (a - HEAVY_TAIL * eta, b + HEAVY_TAIL * eta)),
        }
    }

    /// Bounded on all of R, so Poisson smoothing is defined.
    pub fn is_bounded(&self) -> bool {
        match self {
            TestFunction::Polynomial { coefficients } => coefficients.iter().skip(1).all(|&c| c == 0.0),
            TestFunction::Scaled { inner, .. } | TestFunction::Smoothed { inner, .. } => inner.is_bounded(),
            _ => true,
        }
    }

    /// Tends to zero at ±∞.
    pub fn decays(&self) -> bool {
        match self {
            TestFunction::Constant { value } => *value == 0.0,
            TestFunction::Polynomial { coefficients } => coefficients.iter().all(|&c| c == 0.0),
            TestFunction::Scaled { factor, inner } => *factor == 0.0 || inner.decays(),
            TestFunction::Smoothed { inner, .. } => inner.decays(),
            _ => true,
        }
    }

    /// `‖φ‖_s < ∞` for every `s ≤ 3`.
    pub fn sobolev_ok(&self) -> bool {
        match self {
            TestFunction::GaussianBump { .. }
            | TestFunction::Cauchy { .. }
            | TestFunction::PoissonSmoothedIndicator { .. } => true,
            TestFunction::Monomial { .. } | TestFunction::Indicator { .. } => false,
            TestFunction::Constant { value } => *value == 0.0,
            TestFunction::Polynomial { .. } => self.decays(),
            TestFunction::Scaled { factor, inner } => *factor == 0.0 || inner.sobolev_ok(),
            // e^{-η|t|} damping makes any decaying bounded inner function smooth
            TestFunction::Smoothed { inner, .. } => inner.decays(),
        }
    }

    /// Largest `s` with `‖φ‖_s < ∞` (exclusive); infinite when every order is finite.
    fn sobolev_limit(&self) -> f64 {
        match self {
            TestFunction::Indicator { .. } => 0.5,
            // C¹ taper: |φ̂(t)| ~ |t|⁻³
            TestFunction::Monomial { .. } => 2.5,
            TestFunction::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    f64::INFINITY
                } else {
                    inner.sobolev_limit()
                }
            }
            _ => f64::INFINITY,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::GaussianBump { center, width } => format!("gaussian-bump({center},{width})"),
            TestFunction::Cauchy { center, scale } => format!("cauchy({center},{scale})"),
            TestFunction::PoissonSmoothedIndicator { lo, hi, eta } => format!("poisson-smoothed-indicator({lo},{hi},{eta})"),
            TestFunction::Monomial { degree, lo, hi } => format!("monomial({degree};{lo},{hi})"),
            TestFunction::Polynomial { coefficients } => format!("polynomial({coefficients:?})"),
            TestFunction::Indicator { lo, hi } => format!("indicator({lo},{hi})"),
            TestFunction::Constant { value } => format!("constant({value})"),
            TestFunction::Scaled { factor, inner } => format!("{factor}*{}", inner.label()),
            TestFunction::Smoothed { eta, inner } => format!("P[{eta}]*{}", inner.label()),
        }
    }
}

/// `(1/π) ∫ η φ(t) / ((x − t)² + η²) dt` through `t = x + η tan θ`.
fn poisson_integral(phi: &TestFunction, eta: f64, x: f64) -> f64 {
    let half = 0.5 * PI;
    let mut breaks = vec![-half, half];
    for b in phi.breakpoints() {
        breaks.push(((b - x) / eta).atan());
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let g = |theta: f64| {
        if theta.abs() >= half {
            return 0.0;
        }
        let v = phi.eval(x + eta * theta.tan());
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let opts = QuadOptions::with_tol(1e-13, 1e-12);
    match integrate_with_breaks(g, &breaks, opts) {
        Ok(r) => r.value / PI,
        Err(Error::Quadrature { estimate, .. }) => estimate / PI,
        Err(_) => f64::NAN,
    }
}

/// `P_η * φ` with `P_η(x) = η / (π (x² + η²))`. Constants are fixed points.
pub fn poisson_smooth(phi: &TestFunction, eta: f64) -> Result<TestFunction> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidInput(format!("poisson smoothing needs eta > 0, got {eta}")));
    }
    phi.validate()?;
    if !phi.is_bounded() {
        return Err(Error::InvalidInput(format!("{} is unbounded; its Poisson integral diverges", phi.label())));
    }
    Ok(match phi {
        TestFunction::Constant { .. } => phi.clone(),
        _ => TestFunction::Smoothed {
            eta,
            inner: Box::new(phi.clone()),
        },
    })
}

/// Points and step of the discrete transform used for compactly supported functions.
const FFT_POINTS: usize = 1 << 16;

/// `|φ̂(t)|²` either in closed form or sampled by FFT.
enum PowerSpectrum {
    Analytic(Box<dyn Fn(f64) -> f64>),
    Sampled { t: Vec<f64>, power: Vec<f64>, dt: f64 },
}

impl PowerSpectrum {
    fn damp(self, eta: f64) -> Self {
        match self {
            PowerSpectrum::Analytic(p) => PowerSpectrum::Analytic(Box::new(move |t| p(t) * (-2.0 * eta * t.abs()).exp())),
            PowerSpectrum::Sampled { t, mut power, dt } => {
                power.iter_mut().zip(&t).for_each(|(p, &tk)| *p *= (-2.0 * eta * tk.abs()).exp());
                PowerSpectrum::Sampled { t, power, dt }
            }
        }
    }

    fn scale(self, k: f64) -> Self {
        match self {
            PowerSpectrum::Analytic(p) => PowerSpectrum::Analytic(Box::new(move |t| k * p(t))),
            PowerSpectrum::Sampled { t, mut power, dt } => {
                power.iter_mut().for_each(|p| *p *= k);
                PowerSpectrum::Sampled { t, power, dt }
            }
        }
    }
}

fn indicator_power(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let len = hi - lo;
    move |t: f64| {
        if t.abs() < 1e-8 {
            len * len / (2.0 * PI)
        } else {
            2.0 * (0.5 * t * len).sin().powi(2) / (PI * t * t)
        }
    }
}

/// Sampled `|φ̂|²` of `phi` from a uniform grid on `[lo, hi]`.
fn sampled_power(phi: &TestFunction, lo: f64, hi: f64, points: usize) -> PowerSpectrum {
    let h = (hi - lo) / points as f64;
    let mut buf: Vec<Complex<f64>> = (0..points).map(|j| Complex::new(phi.eval(lo + j as f64 * h), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(points).process(&mut buf);
    let dt = 2.0 * PI / (points as f64 * h);
    let t: Vec<f64> = (0..points)
        .map(|k| {
            let kk = if k < points / 2 { k as f64 } else { k as f64 - points as f64 };
            kk * dt
        })
        .collect();
    let power = buf.iter().map(|v| h * h / (2.0 * PI) * v.norm_sqr()).collect();
    PowerSpectrum::Sampled { t, power, dt }
}

fn power_spectrum(phi: &TestFunction) -> Result<PowerSpectrum> {
    Ok(match phi {
        TestFunction::GaussianBump { width, .. } => {
            let w = *width;
            PowerSpectrum::Analytic(Box::new(move |t| w * w * (-w * w * t * t).exp()))
        }
        TestFunction::Cauchy { scale, .. } => {
            let s = *scale;
            PowerSpectrum::Analytic(Box::new(move |t| 0.5 * PI * s * s * (-2.0 * s * t.abs()).exp()))
        }
        TestFunction::Indicator { lo, hi } => PowerSpectrum::Analytic(Box::new(indicator_power(*lo, *hi))),
        TestFunction::PoissonSmoothedIndicator { lo, hi, eta } => {
            PowerSpectrum::Analytic(Box::new(indicator_power(*lo, *hi))).damp(*eta)
        }
        TestFunction::Monomial { lo, hi, .. } => {
            let (a, b) = (lo - TAPER_WIDTH, hi + TAPER_WIDTH);
            let pad = 1.5 * (b - a);
            sampled_power(phi, a - pad, b + pad, FFT_POINTS)
        }
        TestFunction::Constant { .. } | TestFunction::Polynomial { .. } => {
            PowerSpectrum::Analytic(Box::new(|_| 0.0))
        }
        TestFunction::Scaled { factor, inner } => power_spectrum(inner)?.scale(factor * factor),
        TestFunction::Smoothed { eta, inner } => power_spectrum(inner)?.damp(*eta),
    })
}

/// `‖φ‖_s` from the closed-form transform where known, otherwise an FFT.
pub fn sobolev_norm(phi: &TestFunction, s: f64) -> Result<f64> {
    phi.validate()?;
    if !phi.decays() {
        return Err(Error::NotInSobolev(format!("{} does not decay at infinity", phi.label())));
    }
    if s >= phi.sobolev_limit() {
        return Err(Error::NotInSobolev(format!("{} has infinite H_{s} norm", phi.label())));
    }
    let weight = move |t: f64| (1.0 + t.abs()).powf(2.0 * s);
    let squared = match power_spectrum(phi)? {
        PowerSpectrum::Analytic(p) => {
            let opts = QuadOptions::with_tol(1e-14, 1e-12);
            2.0 * integrate_semi_infinite(|t| weight(t) * p(t), 0.0, opts)?.value
        }
        PowerSpectrum::Sampled { t, power, dt } => weighted_sum(&t, &power, dt, s),
    };
    Ok(squared.max(0.0).sqrt())
}

/// `‖φ‖_s` from an FFT of `φ` sampled at `points` nodes on `[lo, hi]`,
/// ignoring any closed form.
pub fn sobolev_norm_discrete(phi: &TestFunction, s: f64, lo: f64, hi: f64, points: usize) -> Result<f64> {
    let edge = phi.eval(lo).abs().max(phi.eval(hi).abs());
    if edge > 1e-12 {
        return Err(Error::NotInSobolev(format!("{} is not negligible at the window ends", phi.label())));
    }
    let PowerSpectrum::Sampled { t, power, dt } = sampled_power(phi, lo, hi, points) else {
        unreachable!()
    };
    Ok(weighted_sum(&t, &power, dt, s).max(0.0).sqrt())
}

/// Trapezoid sum of `(1+|t|)^{2s} P(t)` with the Euler–Maclaurin term for the
/// kink of the weight at `t = 0`.
fn weighted_sum(t: &[f64], power: &[f64], dt: f64, s: f64) -> f64 {
    let mut total = 0.0;
    let mut p0 = 0.0;
    for (&tk, &p) in t.iter().zip(power) {
        total += (1.0 + tk.abs()).powf(2.0 * s) * p;
        if tk == 0.0 {
            p0 = p;
        }
    }
    total * dt + dt * dt / 12.0 * 4.0 * s * p0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_fixed_by_smoothing() {
        let one = TestFunction::Constant { value: 1.0 };
        let s = poisson_smooth(&one, 0.3).unwrap();
        for x in [-5.0, 0.0, 2.5] {
            assert_eq!(s.eval(x), 1.0);
        }
        // the quadrature path also integrates the kernel to one
        let g = TestFunction::Smoothed {
            eta: 0.3,
            inner: Box::new(one),
        };
        assert!((g.eval(1.7) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smoothed_indicator_value() {
        let ind = TestFunction::Indicator { lo: 0.0, hi: 1.0 };
        let s = poisson_smooth(&ind, 0.1).unwrap();
        let exact = 2.0 / PI * 5f64.atan();
        assert!((s.eval(0.5) - exact).abs() < 1e-10);
        assert!((exact - 0.8743).abs() < 1e-4);
        let closed = TestFunction::PoissonSmoothedIndicator { lo: 0.0, hi: 1.0, eta: 0.1 };
        for x in [-0.3, 0.05, 0.5, 1.2] {
            assert!((s.eval(x) - closed.eval(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn smoothing_gaussian_converges_linearly() {
        let g = TestFunction::GaussianBump { center: 0.0, width: 1.0 };
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&eta| (poisson_smooth(&g, eta).unwrap().eval(0.0) - 1.0).abs())
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.7 && ratio < 2.3, "{ratio}");
        }
        assert!(errs[2] < 0.025);
    }

    #[test]
    fn smoothing_rejects_unbounded() {
        let p = TestFunction::Polynomial {
            coefficients: vec![0.0, 1.0],
        };
        assert!(poisson_smooth(&p, 0.1).is_err());
        assert!(poisson_smooth(&TestFunction::Constant { value: 2.0 }, 0.0).is_err());
    }

    #[test]
    fn taper_is_continuous() {
        let m = TestFunction::Monomial { degree: 1, lo: 0.0, hi: 2.0 };
        assert_eq!(m.eval(1.5), 1.5);
        assert!((m.eval(-1e-9)).abs() < 1e-8);
        assert!((m.eval(2.0 + 1e-9) - 2.0).abs() < 1e-8);
        assert_eq!(m.eval(3.0), 0.0);
        assert_eq!(m.eval(-1.0), 0.0);
        assert!((m.eval(2.5) - 2.5 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_has_zero_norm() {
        assert_eq!(sobolev_norm(&TestFunction::Constant { value: 0.0 }, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_norm_matches_fine_fft() {
        let g = TestFunction::GaussianBump { center: 0.3, width: 1.0 };
        let analytic = sobolev_norm(&g, 3.0).unwrap();
        let coarse = sobolev_norm_discrete(&g, 3.0, -40.0, 40.0, 1 << 13).unwrap();
        let fine = sobolev_norm_discrete(&g, 3.0, -40.0, 40.0, 1 << 16).unwrap();
        assert!((analytic - fine).abs() < 1e-6 * analytic, "{analytic} vs {fine}");
        assert!((coarse - fine).abs() < 1e-6 * fine);
        // s = 0 is the L² norm: ∫ exp(-x²) dx = √π
        let l2 = sobolev_norm(&g, 0.0).unwrap();
        assert!((l2 * l2 - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cauchy_norm_matches_fft() {
        let c = TestFunction::Cauchy { center: 0.0, scale: 0.7 };
        let a = sobolev_norm(&c, 1.0).unwrap();
        let l2 = sobolev_norm(&c, 0.0).unwrap();
        // ∫ s⁴/(x²+s²)² dx = π s / 2
        assert!((l2 * l2 - PI * 0.7 / 2.0).abs() < 1e-10);
        assert!(a > l2);
    }

    #[test]
    fn homogeneity() {
        for phi in [
            TestFunction::GaussianBump { center: 1.0, width: 0.5 },
            TestFunction::Cauchy { center: 0.0, scale: 1.0 },
            TestFunction::PoissonSmoothedIndicator { lo: 0.0, hi: 1.0, eta: 0.2 },
        ] {
            let one = sobolev_norm(&phi, 3.0).unwrap();
            let two = sobolev_norm(&phi.clone().scaled(2.0), 3.0).unwrap();
            assert!((two - 2.0 * one).abs() < 1e-10 * one);
        }
    }

    #[test]
    fn non_decaying_is_rejected() {
        assert!(matches!(
            sobolev_norm(&TestFunction::Constant { value: 1.0 }, 1.0),
            Err(Error::NotInSobolev(_))
        ));
        assert!(matches!(
            sobolev_norm(&TestFunction::Polynomial { coefficients: vec![1.0, 1.0] }, 1.0),
            Err(Error::NotInSobolev(_))
        ));
        assert!(matches!(
            sobolev_norm(&TestFunction::Indicator { lo: 0.0, hi: 1.0 }, 1.0),
            Err(Error::NotInSobolev(_))
        ));
    }

    #[test]
    fn tapered_monomial_low_order_norms() {
        let m = TestFunction::tapered_monomial(1, 0.5);
        assert!(!m.sobolev_ok());
        assert!(sobolev_norm(&m, 3.0).is_err());
        let l2 = sobolev_norm(&m, 0.0).unwrap();
        // L² norm from the x-side by quadrature
        let (a, b) = match m {
            TestFunction::Monomial { lo, hi, .. } => (lo - 1.0, hi + 1.0),
            _ => unreachable!(),
        };
        let direct = integrate_with_breaks(|x| m.eval(x).powi(2), &[a, a + 1.0, b - 1.0, b], QuadOptions::default())
            .unwrap()
            .value;
        assert!((l2 * l2 - direct).abs() < 1e-6 * direct, "{} vs {direct}", l2 * l2);
    }

    #[test]
    fn smoothed_gaussian_norm_is_damped() {
        let g = TestFunction::GaussianBump { center: 0.0, width: 1.0 };
        let s = poisson_smooth(&g, 0.5).unwrap();
        assert!(s.sobolev_ok());
        assert!(sobolev_norm(&s, 3.0).unwrap() < sobolev_norm(&g, 3.0).unwrap());
    }

    #[test]
    fn serde_shapes() {
        let g: TestFunction = serde_json::from_str(r#"{"kind":"gaussian-bump","center":1.0,"width":0.5}"#).unwrap();
        assert_eq!(g, TestFunction::GaussianBump { center: 1.0, width: 0.5 });
        assert!(serde_json::from_str::<TestFunction>(r#"{"kind":"gaussian-bump","center":1.0}"#).is_err());
    }
}
