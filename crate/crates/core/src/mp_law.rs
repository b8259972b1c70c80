//! The limiting spectral law: Stieltjes transform `f` as the solution of
//!
//! ```text
//! z f(z) = c − 1 − c ∫ (1 + τ f(z))⁻¹ dσ(τ)
//! ```
//!
//! its derivative, the `τ ≡ 1` closed form, and density recovery.

use crate::error::{Error, Result};
use crate::quadrature::trapezoid;
use crate::spectral_measures::SpectralMeasure;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

const DAMPING: f64 = 0.5;
const STEP_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 10_000;
const MAX_NEWTON: usize = 60;
/// Accepted absolute residual of the fixed-point equation.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// Default η schedule for density recovery and variance extrapolation.
pub const DEFAULT_ETA_SCHEDULE: [f64; 3] = [0.05, 0.025, 0.0125];

/// One solved point with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpePoint {
    pub f: Complex64,
    pub fprime: Complex64,
    pub iterations: usize,
    pub residual: f64,
}

fn inverse_moment(sigma: &SpectralMeasure, f: Complex64) -> Complex64 {
    sigma.integrate(|t| (1.0 + t * f).inv())
}

fn derivative_moment(sigma: &SpectralMeasure, f: Complex64) -> Complex64 {
    sigma.integrate(|t| {
        let d = 1.0 + t * f;
        t * (d * d).inv()
    })
}

fn residual(sigma: &SpectralMeasure, c: f64, z: Complex64, f: Complex64) -> Complex64 {
    z * f - (c - 1.0) + c * inverse_moment(sigma, f)
}

fn newton_polish(sigma: &SpectralMeasure, c: f64, z: Complex64, mut f: Complex64) -> (Complex64, f64, usize) {
    // F(f) = z f − c + 1 + c ∫(1+τf)⁻¹ dσ, F'(f) = z − c ∫τ(1+τf)⁻² dσ
    let mut r = residual(sigma, c, z, f);
    let mut steps = 0;
    while r.norm() > 0.1 * RESIDUAL_TOL && steps < MAX_NEWTON {
        let jac = z - c * derivative_moment(sigma, f);
        if jac.norm() == 0.0 {
            break;
        }
        let candidate = f - r / jac;
        let r_candidate = residual(sigma, c, z, candidate);
        if candidate.im <= 0.0 || !r_candidate.norm().is_finite() || r_candidate.norm() >= r.norm() {
            break;
        }
        f = candidate;
        r = r_candidate;
        steps += 1;
    }
    (f, r.norm(), steps)
}

/// Damped iteration `f ← (c − 1 − c∫(1+τf)⁻¹dσ)/z` from `f₀ = −1/z`.
fn damped_iteration(sigma: &SpectralMeasure, c: f64, z: Complex64) -> (Complex64, usize) {
    let mut f = -z.inv();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let next = (c - 1.0 - c * inverse_moment(sigma, f)) / z;
        let updated = f + DAMPING * (next - f);
        iterations += 1;
        let step = (updated - f).norm();
        f = updated;
        if !f.is_finite() {
            break;
        }
        if step <= STEP_TOL * f.norm().max(1.0) {
            break;
        }
    }
    (f, iterations)
}

/// The same equation written as `f = −1/(z − c∫τ(1+τf)⁻¹dσ)`, a self-map of
/// the upper half-plane that converges wherever the damped map is repelling.
fn herglotz_iteration(sigma: &SpectralMeasure, c: f64, z: Complex64) -> (Complex64, usize) {
    let mut f = -z.inv();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let tail = sigma.integrate(|t| t * (1.0 + t * f).inv());
        let updated = -(z - c * tail).inv();
        iterations += 1;
        let step = (updated - f).norm();
        f = updated;
        if step <= 1e-9 * f.norm().max(1.0) {
            break;
        }
    }
    (f, iterations)
}

fn accept(sigma: &SpectralMeasure, c: f64, z: Complex64, start: Complex64, iterations: usize) -> Option<MpePoint> {
    if !start.is_finite() {
        return None;
    }
    let (f, res, steps) = newton_polish(sigma, c, z, start);
    if res <= RESIDUAL_TOL && f.im > 0.0 {
        let fprime = f / (c * derivative_moment(sigma, f) - z);
        Some(MpePoint {
            f,
            fprime,
            iterations: iterations + steps,
            residual: res,
        })
    } else {
        None
    }
}

fn solve_upper(sigma: &SpectralMeasure, c: f64, z: Complex64) -> Result<MpePoint> {
    let (f, iterations) = damped_iteration(sigma, c, z);
    if let Some(p) = accept(sigma, c, z, f, iterations) {
        return Ok(p);
    }
    let (g, more) = herglotz_iteration(sigma, c, z);
    if let Some(p) = accept(sigma, c, z, g, iterations + more) {
        return Ok(p);
    }
    Err(Error::NonConvergence {
        what: "limiting-law fixed point",
        iterations: iterations + more,
        residual: residual(sigma, c, z, g).norm(),
    })
}

/// Solves the fixed-point equation at one `z` off the real axis; the lower
/// half-plane follows from `f(z̄) = conj f(z)`.
pub fn solve_mpe_point(sigma: &SpectralMeasure, c: f64, z: Complex64) -> Result<MpePoint> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidInput(format!("ratio c must be positive, got {c}")));
    }
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::InvalidInput(format!("fixed point needs Im z != 0, got {z}")));
    }
    if z.im > 0.0 {
        solve_upper(sigma, c, z)
    } else {
        let p = solve_upper(sigma, c, z.conj())?;
        Ok(MpePoint {
            f: p.f.conj(),
            fprime: p.fprime.conj(),
            ..p
        })
    }
}

/// `(f(z), f′(z))`.
pub fn solve_mpe(sigma: &SpectralMeasure, c: f64, z: Complex64) -> Result<(Complex64, Complex64)> {
    let p = solve_mpe_point(sigma, c, z)?;
    Ok((p.f, p.fprime))
}

/// Solutions on a grid of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StieltjesSolution {
    pub sigma: SpectralMeasure,
    pub c: f64,
    pub grid: Vec<Complex64>,
    pub f_values: Vec<Complex64>,
    pub fprime_values: Vec<Complex64>,
    pub iterations: Vec<usize>,
    pub residuals: Vec<f64>,
}

impl StieltjesSolution {
    /// Columns `re_z,im_z,re_f,im_f,re_fprime,im_fprime`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re_z,im_z,re_f,im_f,re_fprime,im_fprime")?;
        for ((z, f), d) in self.grid.iter().zip(&self.f_values).zip(&self.fprime_values) {
            writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e}", z.re, z.im, f.re, f.im, d.re, d.im)?;
        }
        Ok(())
    }
}

pub fn solve_grid(sigma: &SpectralMeasure, c: f64, grid: &[Complex64]) -> Result<StieltjesSolution> {
    let points = grid.iter().map(|&z| solve_mpe_point(sigma, c, z)).collect::<Result<Vec<_>>>()?;
    Ok(StieltjesSolution {
        sigma: sigma.clone(),
        c,
        grid: grid.to_vec(),
        f_values: points.iter().map(|p| p.f).collect(),
        fprime_values: points.iter().map(|p| p.fprime).collect(),
        iterations: points.iter().map(|p| p.iterations).collect(),
        residuals: points.iter().map(|p| p.residual).collect(),
    })
}

/// Root of `z f² + (z − c + 1) f + 1 = 0` with `Im f · Im z > 0`.
pub fn mp_closed_form(c: f64, z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 {
        return Err(Error::InvalidInput("closed form needs Im z != 0".into()));
    }
    let b = z - c + 1.0;
    let disc = (b * b - 4.0 * z).sqrt();
    let r1 = (-b + disc) / (2.0 * z);
    let r2 = (-b - disc) / (2.0 * z);
    Ok(if r1.im * z.im >= r2.im * z.im { r1 } else { r2 })
}

/// `a_± = (1 ± √c)²`.
pub fn mp_edges(c: f64) -> (f64, f64) {
    ((1.0 - c.sqrt()).powi(2), (1.0 + c.sqrt()).powi(2))
}

/// Mass of the limiting law at zero implied by the rank bound: `max(0, 1 − c σ(τ ≠ 0))`.
pub fn atom_at_zero(sigma: &SpectralMeasure, c: f64) -> f64 {
    (1.0 - c * sigma.nonzero_mass()).max(0.0)
}

/// Interval containing the support of the limiting law:
/// `[min(0, τ_min a₊), max(0, τ_max a₊)]`.
pub fn support_estimate(sigma: &SpectralMeasure, c: f64) -> (f64, f64) {
    let (_, hi) = mp_edges(c);
    ((sigma.min_value() * hi).min(0.0), (sigma.max_value() * hi).max(0.0))
}

/// Density recovered by Stieltjes inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub lambda: Vec<f64>,
    pub density: Vec<f64>,
    pub atom_at_zero: f64,
    pub eta_schedule: Vec<f64>,
    /// The atom is certified by the rank bound only for τ ≥ 0.
    pub atom_certified: bool,
    /// The λ-grid does not cover [`support_estimate`].
    pub support_warning: bool,
}

impl DensityCurve {
    /// `∫ density dλ` by the trapezoid rule on the grid.
    pub fn continuous_mass(&self) -> f64 {
        trapezoid(&self.lambda, &self.density)
    }

    pub fn total_mass(&self) -> f64 {
        self.continuous_mass() + self.atom_at_zero
    }

    /// Columns `lambda,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "lambda,density")?;
        for (l, d) in self.lambda.iter().zip(&self.density) {
            writeln!(w, "{l:e},{d:e}")?;
        }
        Ok(())
    }

    /// One-line JSON sidecar `{"atom_at_zero": x}`.
    pub fn write_sidecar<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", serde_json::json!({ "atom_at_zero": self.atom_at_zero }))?;
        Ok(())
    }

    /// Left and right half-maximum crossings of the density, by linear interpolation.
    /// Outermost grid points where the density reaches `threshold`.
    pub fn support_edges(&self, threshold: f64) -> Option<(f64, f64)> {
        let first = self.density.iter().position(|&d| d >= threshold)?;
        let last = self.density.iter().rposition(|&d| d >= threshold)?;
        Some((self.lambda[first], self.lambda[last]))
    }

    pub fn half_max_edges(&self) -> Option<(f64, f64)> {
        let peak = self.density.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return None;
        }
        let half = 0.5 * peak;
        let cross = |i: usize, j: usize| {
            let (x0, x1, y0, y1) = (self.lambda[i], self.lambda[j], self.density[i], self.density[j]);
            x0 + (half - y0) * (x1 - x0) / (y1 - y0)
        };
        let first = self.density.iter().position(|&d| d >= half)?;
        let last = self.density.iter().rposition(|&d| d >= half)?;
        let left = if first == 0 { self.lambda[0] } else { cross(first - 1, first) };
        let right = if last + 1 == self.lambda.len() {
            self.lambda[last]
        } else {
            cross(last, last + 1)
        };
        Some((left, right))
    }
}

/// `Im f(λ + iη)/π` with the atom's Poisson image removed.
fn smoothed_density(sigma: &SpectralMeasure, c: f64, atom: f64, lambda: f64, eta: f64) -> Result<f64> {
    let (f, _) = solve_mpe(sigma, c, Complex64::new(lambda, eta))?;
    Ok(f.im / PI - atom * eta / (PI * (lambda * lambda + eta * eta)))
}

/// Density on `lambda_grid` by two-point Richardson extrapolation in η over the
/// two smallest values of `eta_schedule`, clipped at zero.
pub fn density(sigma: &SpectralMeasure, c: f64, lambda_grid: &[f64], eta_schedule: &[f64]) -> Result<DensityCurve> {
    if eta_schedule.len() < 2 {
        return Err(Error::InvalidInput("eta schedule needs at least two values".into()));
    }
    if eta_schedule.windows(2).any(|w| !(w[1] < w[0])) || eta_schedule.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidInput("eta schedule must be positive and strictly decreasing".into()));
    }
    if lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("lambda grid must be strictly increasing".into()));
    }
    let atom = atom_at_zero(sigma, c);
    let eta_a = eta_schedule[eta_schedule.len() - 2];
    let eta_b = eta_schedule[eta_schedule.len() - 1];
    let density = lambda_grid
        .iter()
        .map(|&l| {
            let da = smoothed_density(sigma, c, atom, l, eta_a)?;
            let db = smoothed_density(sigma, c, atom, l, eta_b)?;
            Ok(((eta_a * db - eta_b * da) / (eta_a - eta_b)).max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = support_estimate(sigma, c);
    let support_warning = lambda_grid.first().is_none_or(|&x| x > lo) || lambda_grid.last().is_none_or(|&x| x < hi);
    Ok(DensityCurve {
        lambda: lambda_grid.to_vec(),
        density,
        atom_at_zero: atom,
        eta_schedule: eta_schedule.to_vec(),
        atom_certified: sigma.is_nonnegative(),
        support_warning,
    })
}

/// Grid on `[lo, hi]` clustered toward both ends (Chebyshev–Lobatto spacing),
/// which keeps the trapezoid rule accurate at square-root edges.
pub fn clustered_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let k = points.max(2) - 1;
    (0..=k)
        .map(|j| {
            let theta = PI * j as f64 / k as f64;
            lo + 0.5 * (hi - lo) * (1.0 - theta.cos())
        })
        .collect()
}

/// Grid covering the support estimate with margins, clustered at every
/// breakpoint (zero and the support ends).
pub fn default_density_grid(sigma: &SpectralMeasure, c: f64, points: usize) -> Vec<f64> {
    let (lo, hi) = support_estimate(sigma, c);
    let margin = 0.5;
    let mut breaks = vec![lo - margin, hi + margin];
    if lo < 0.0 && hi > 0.0 {
        breaks.insert(1, 0.0);
    }
    let per = (points / (breaks.len() - 1)).max(2);
    let mut grid: Vec<f64> = Vec::with_capacity(points);
    for w in breaks.windows(2) {
        let seg = clustered_grid(w[0], w[1], per);
        let skip = usize::from(!grid.is_empty());
        grid.extend_from_slice(&seg[skip..]);
    }
    grid
}

/// Distribution function of the limiting law, tabulated from a [`DensityCurve`]
/// (continuous part renormalized to `1 − atom`) plus the atom at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitingCdf {
    xs: Vec<f64>,
    cumulative: Vec<f64>,
    atom: f64,
}

impl LimitingCdf {
    pub fn from_density(curve: &DensityCurve) -> Self {
        let xs = curve.lambda.clone();
        let mut cumulative = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * (xs[i] - xs[i - 1]) * (curve.density[i] + curve.density[i - 1]);
        }
        let total = cumulative.last().copied().unwrap_or(0.0);
        let target = 1.0 - curve.atom_at_zero;
        if total > 0.0 {
            cumulative.iter_mut().for_each(|v| *v *= target / total);
        }
        Self {
            xs,
            cumulative,
            atom: curve.atom_at_zero,
        }
    }

    pub fn atom(&self) -> f64 {
        self.atom
    }

    fn continuous(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 0 || x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return self.cumulative[n - 1];
        }
        let j = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (c0, c1) = (self.cumulative[j - 1], self.cumulative[j]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }

    /// `F(x) = N((−∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.continuous(x) + if x >= 0.0 { self.atom } else { 0.0 }
    }

    /// `F(x−) = N((−∞, x))`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.continuous(x) + if x > 0.0 { self.atom } else { 0.0 }
    }
}

/// Limiting distribution function on [`default_density_grid`] with the default η schedule.
pub fn limiting_cdf(sigma: &SpectralMeasure, c: f64, points: usize) -> Result<LimitingCdf> {
    let grid = default_density_grid(sigma, c, points);
    Ok(LimitingCdf::from_density(&density(sigma, c, &grid, &DEFAULT_ETA_SCHEDULE)?))
}
