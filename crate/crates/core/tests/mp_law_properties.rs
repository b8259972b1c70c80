use num_complex::Complex64;
use tensormp::mp_law::{density, mp_closed_form, mp_edges, solve_grid, solve_mpe, DEFAULT_ETA_SCHEDULE};
use tensormp::spectral_measures::{Atom, SpectralMeasure};

fn two_point() -> SpectralMeasure {
    SpectralMeasure::new(vec![Atom { value: 1.0, mass: 0.5 }, Atom { value: 2.0, mass: 0.5 }]).unwrap()
}

fn measures() -> Vec<(SpectralMeasure, f64)> {
    let mut out = Vec::new();
    for c in [0.5, 1.0, 2.0] {
        out.push((SpectralMeasure::point(1.0), c));
        out.push((two_point(), c));
    }
    let mixed = SpectralMeasure::new(vec![Atom { value: -1.0, mass: 0.3 }, Atom { value: 1.5, mass: 0.7 }]).unwrap();
    out.push((mixed, 0.8));
    out
}

fn probe_points() -> Vec<Complex64> {
    let mut zs = Vec::new();
    for &eta in &[0.05, 0.1, 0.3, 1.0] {
        for i in 0..17 {
            zs.push(Complex64::new(-2.0 + 0.6 * i as f64, eta));
        }
    }
    zs
}

fn f_at(sigma: &SpectralMeasure, c: f64, z: Complex64) -> Complex64 {
    solve_mpe(sigma, c, z).unwrap().0
}

/// Fourth-order central difference of `f` along direction `dir`.
fn directional(sigma: &SpectralMeasure, c: f64, z: Complex64, dir: Complex64, h: f64) -> Complex64 {
    let g = |t: f64| f_at(sigma, c, z + dir * t);
    (g(-2.0 * h) - 8.0 * g(-h) + 8.0 * g(h) - g(2.0 * h)) / (12.0 * h)
}

#[test]
fn herglotz_and_cauchy_riemann() {
    let h: f64 = 1e-3;
    for (sigma, c) in measures() {
        for z in probe_points() {
            let f = f_at(&sigma, c, z);
            assert!(f.im > 0.0, "Im f <= 0 at {z}");
            let dx = directional(&sigma, c, z, Complex64::new(1.0, 0.0), h.min(z.im / 4.0));
            let dy = directional(&sigma, c, z, Complex64::new(0.0, 1.0), h.min(z.im / 4.0));
            // analytic: ∂_y f = i ∂_x f
            let rel = (dy - Complex64::i() * dx).norm() / dx.norm();
            assert!(rel < 1e-4, "Cauchy-Riemann defect {rel} at {z}, c={c}");
        }
    }
}

#[test]
fn derivative_matches_finite_differences() {
    for (sigma, c) in measures() {
        for z in probe_points() {
            let (_, fp) = solve_mpe(&sigma, c, z).unwrap();
            let fd = directional(&sigma, c, z, Complex64::new(1.0, 0.0), 1e-3_f64.min(z.im / 4.0));
            let rel = (fp - fd).norm() / fp.norm();
            assert!(rel < 1e-6, "f' defect {rel} at {z}, c={c}");
        }
    }
}

#[test]
fn residual_of_the_fixed_point_equation() {
    for (sigma, c) in measures() {
        let grid = probe_points();
        let sol = solve_grid(&sigma, c, &grid).unwrap();
        for (z, f) in grid.iter().zip(&sol.f_values) {
            let rhs = c - 1.0 - c * sigma.integrate(|t| 1.0 / (1.0 + t * f));
            assert!((z * f - rhs).norm() <= 1e-12 * (1.0 + f.norm() * z.norm()), "residual at {z}");
        }
    }
}

#[test]
fn closed_form_branch_on_both_half_planes() {
    for c in [0.3, 1.0, 3.0] {
        for z in probe_points() {
            let f = mp_closed_form(c, z).unwrap();
            assert!(f.im > 0.0);
            let g = mp_closed_form(c, z.conj()).unwrap();
            assert!((g - f.conj()).norm() < 1e-14);
            // z f² + (z − c + 1) f + 1 = 0
            assert!((z * f * f + (z - c + 1.0) * f + 1.0).norm() < 1e-12);
        }
    }
}

#[test]
fn two_point_density_has_unit_mass_and_right_support() {
    let sigma = two_point();
    let c = 0.5;
    let grid = tensormp::mp_law::default_density_grid(&sigma, c, 1500);
    let curve = density(&sigma, c, &grid, &DEFAULT_ETA_SCHEDULE).unwrap();
    assert!((curve.total_mass() - 1.0).abs() < 1e-3);
    assert!((curve.atom_at_zero - 0.5).abs() < 1e-12);
    assert!(curve.density.iter().all(|&d| d >= 0.0));
    // the support lies inside [τmin a₋, τmax a₊]
    let (lo, hi) = mp_edges(c);
    for (l, d) in curve.lambda.iter().zip(&curve.density) {
        if *l < 0.5 * lo || *l > 2.2 * hi {
            assert!(*d < 1e-2, "mass outside the support at {l}: {d}");
        }
    }
}

#[test]
fn mean_of_the_limit_law() {
    // ∫λ N(dλ) = c ∫τ dσ
    for (sigma, c) in [(SpectralMeasure::point(1.0), 2.0), (two_point(), 0.5)] {
        let grid = tensormp::mp_law::default_density_grid(&sigma, c, 2000);
        let curve = density(&sigma, c, &grid, &DEFAULT_ETA_SCHEDULE).unwrap();
        let ys: Vec<f64> = curve.lambda.iter().zip(&curve.density).map(|(l, d)| l * d).collect();
        let m1 = tensormp::quadrature::trapezoid(&curve.lambda, &ys);
        let expected = c * sigma.integrate(|t| t);
        assert!((m1 - expected).abs() < 5e-3 * expected, "{m1} vs {expected}");
    }
}
