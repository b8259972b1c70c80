//! Limiting variance of `n^{-1/2} N_n°[φ]` for `k = 2` and the limiting
//! covariance of resolvent traces.

use super::test_functions::TestFunction;
use crate::error::{Error, Result};
use crate::mp_law::{mp_edges, solve_mpe, support_estimate, DEFAULT_ETA_SCHEDULE};
use crate::quadrature::{gauss_chebyshev, integrate_with_breaks, QuadOptions};
use crate::spectral_measures::SpectralMeasure;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Window margin, in units of η, around the support estimate; the window is
/// widened to the test function's effective support.
const WINDOW_ETAS: f64 = 10.0;
const CHEBYSHEV_NODES: usize = 4096;

/// Per-η variances `V_η[φ]` and their η → 0 limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariancePrediction {
    pub phi: TestFunction,
    pub eta_schedule: Vec<f64>,
    #[serde(rename = "V_eta")]
    pub v_eta: Vec<f64>,
    #[serde(rename = "V")]
    pub value: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// `2(a + b + 2)`, clamped at zero: it equals `n Var‖Y‖²` in the limit and
/// cannot be negative, so small negative empirical inputs mean zero.
fn moment_factor(a: f64, b: f64) -> f64 {
    (2.0 * (a + b + 2.0)).max(0.0)
}

/// Value at `x = 0` of the interpolating polynomial through `(xs, ys)`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

fn inner_integral(sigma: &SpectralMeasure, c: f64, tau: f64, phi: &TestFunction, eta: f64) -> Result<f64> {
    let (lo, hi) = support_estimate(sigma, c);
    let (mut a_lo, mut a_hi) = (lo - WINDOW_ETAS * eta, hi + WINDOW_ETAS * eta);
    if let Some((s_lo, s_hi)) = phi.effective_support() {
        a_lo = a_lo.min(s_lo);
        a_hi = a_hi.max(s_hi);
    }
    let (e_lo, e_hi) = mp_edges(c);
    let mut breaks = vec![a_lo, a_hi];
    for atom in sigma.atoms() {
        breaks.push(atom.value * e_lo);
        breaks.push(atom.value * e_hi);
    }
    breaks.push(0.0);
    breaks.extend(phi.breakpoints());
    breaks.retain(|&x| x >= a_lo && x <= a_hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let failure = std::cell::Cell::new(None);
    let integrand = |l: f64| {
        let w = phi.eval(l);
        if w == 0.0 {
            return 0.0;
        }
        match solve_mpe(sigma, c, Complex64::new(l, eta)) {
            Ok((f, d)) => {
                let den = 1.0 + tau * f;
                (d / (den * den)).im * w
            }
            Err(e) => {
                failure.set(Some(e));
                0.0
            }
        }
    };
    let r = integrate_with_breaks(integrand, &breaks, QuadOptions::with_tol(1e-11, 1e-10))?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(r.value)
}

/// `V_η[φ] = (2(a+b+2)c/π²) ∫ τ² (Im ∫ f′/(1 + τf)² φ dλ)² dσ(τ)` at `z = λ + iη`.
pub fn clt_variance_at(sigma: &SpectralMeasure, c: f64, a: f64, b: f64, phi: &TestFunction, eta: f64) -> Result<f64> {
    let pref = moment_factor(a, b) * c / (PI * PI);
    if pref == 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for atom in sigma.atoms() {
        if atom.value == 0.0 {
            continue;
        }
        let inner = inner_integral(sigma, c, atom.value, phi, eta)?;
        total += atom.mass * atom.value * atom.value * inner * inner;
    }
    Ok(pref * total)
}

/// `V[φ] = lim_{η↓0} V_η[φ]`, extrapolated by the polynomial through all
/// schedule points.
pub fn clt_variance(
    sigma: &SpectralMeasure,
    c: f64,
    a: f64,
    b: f64,
    phi: &TestFunction,
    eta_schedule: &[f64],
) -> Result<VariancePrediction> {
    phi.validate()?;
    if !(c > 0.0) {
        return Err(Error::InvalidInput(format!("ratio c must be positive, got {c}")));
    }
    if eta_schedule.is_empty() || eta_schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("eta schedule must be non-empty and positive".into()));
    }
    let v_eta = eta_schedule
        .iter()
        .map(|&eta| clt_variance_at(sigma, c, a, b, phi, eta))
        .collect::<Result<Vec<_>>>()?;
    let value = neville_at_zero(eta_schedule, &v_eta).max(0.0);
    Ok(VariancePrediction {
        phi: phi.clone(),
        eta_schedule: eta_schedule.to_vec(),
        v_eta,
        value,
        a,
        b,
        c,
    })
}

/// [`clt_variance`] with the default schedule.
pub fn clt_variance_default(sigma: &SpectralMeasure, c: f64, a: f64, b: f64, phi: &TestFunction) -> Result<VariancePrediction> {
    clt_variance(sigma, c, a, b, phi, &DEFAULT_ETA_SCHEDULE)
}

/// `τ ≡ 1` closed form
/// `V = ((a+b+2)/(2cπ²)) (∫ φ(μ)(μ − a_m)/√((a₊ − μ)(μ − a₋)) dμ)²`, `a_m = 1 + c`,
/// through `μ = a_m + 2√c x` and Gauss–Chebyshev nodes.
pub fn clt_variance_closed_form(c: f64, a: f64, b: f64, phi: &TestFunction) -> f64 {
    let am = 1.0 + c;
    let r = 2.0 * c.sqrt();
    let integral = gauss_chebyshev(|x| phi.eval(am + r * x) * r * x, CHEBYSHEV_NODES);
    0.5 * moment_factor(a, b) / (2.0 * c * PI * PI) * integral * integral
}

/// `C(z₁, z₂) = 2(a+b+2)c ∫ τ² f′(z₁) f′(z₂) / ((1 + τf(z₁))² (1 + τf(z₂))²) dσ(τ)`.
pub fn trace_covariance(sigma: &SpectralMeasure, c: f64, a: f64, b: f64, z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let (f1, d1) = solve_mpe(sigma, c, z1)?;
    let (f2, d2) = solve_mpe(sigma, c, z2)?;
    let sum = sigma.integrate(|t| {
        let (e1, e2) = (1.0 + t * f1, 1.0 + t * f2);
        t * t * d1 * d2 / (e1 * e1 * e2 * e2)
    });
    Ok(moment_factor(a, b) * c * sum)
}
