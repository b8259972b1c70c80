use num_complex::Complex64;
use tensormp::ensemble::{assemble_replicate, eigenvalues, resolvent_matrix, resolvent_trace, EnsembleConfig};
use tensormp::fluctuation_theory::{bilinear_variance_rhs, trace_covariance, TestFunction};
use tensormp::isotropic_vectors::{ComponentLaw, VectorModel};
use tensormp::linalg::ComplexMatrix;
use tensormp::montecarlo::stats::complex_variance;
use tensormp::montecarlo::{
    run_bilinear_experiment, run_clt_experiment, run_cov_experiment, run_esd_experiment, with_threads, ExperimentPlan,
};
use tensormp::spectral_measures::{SpectralMeasure, TauSpec};

fn config(n: usize, k: usize, c: f64, model: VectorModel, seed: u64) -> EnsembleConfig {
    EnsembleConfig::with_ratio(n, k, c, model, TauSpec::constant(1.0), seed)
}

#[test]
fn classical_marchenko_pastur_for_k_one() {
    let cfg = EnsembleConfig::with_count(256, 1, 128, VectorModel::gaussian(), TauSpec::constant(1.0), 3);
    let run = run_esd_experiment(&ExperimentPlan::new(cfg, 8)).unwrap();
    assert!(run.summary.ks <= 0.03, "KS {}", run.summary.ks);
    assert!((run.summary.zero_fraction - 0.5).abs() < 1e-12);
}

#[test]
fn small_tensor_ensemble_follows_the_limit_law() {
    let cfg = config(12, 2, 0.5, VectorModel::iid(ComponentLaw::Rademacher), 4);
    let run = run_esd_experiment(&ExperimentPlan::new(cfg, 20)).unwrap();
    assert!(run.summary.ks <= 0.05, "KS {}", run.summary.ks);
}

#[test]
fn resolvent_trace_variance_bound() {
    // Var{g_n(z)} ≤ 4m/(N |Im z|)², checked with safety factor 3
    let cfg = config(8, 2, 0.5, VectorModel::gaussian(), 5);
    let (dim, m) = (cfg.dimension().unwrap() as f64, cfg.sample_count().unwrap() as f64);
    for z in [Complex64::new(1.0, 0.5), Complex64::new(0.2, 0.1)] {
        let g: Vec<Complex64> = (0..300)
            .map(|r| {
                let spec = eigenvalues(&assemble_replicate(&cfg, r).unwrap()).unwrap();
                resolvent_trace(&spec, z).unwrap() / dim
            })
            .collect();
        let (var, _) = complex_variance(&g);
        let bound = 4.0 * m / (dim * z.im).powi(2);
        assert!(var <= 3.0 * bound, "{var} vs {bound}");
    }
}

#[test]
fn bilinear_identity_has_exact_finite_n_variance() {
    // ‖Y‖² = ‖y‖²‖y′‖² with Var‖y‖² = 2/n: n Var = 4 + 4/n
    let n = 16;
    let h = ComplexMatrix::identity(n * n);
    let run = run_bilinear_experiment(&h, VectorModel::gaussian(), n, 20_000, 6).unwrap();
    let exact = 4.0 + 4.0 / n as f64;
    let s = run.summary;
    assert!((s.n_variance - exact).abs() < 4.0 * s.n_variance_se, "{} ± {}", s.n_variance, s.n_variance_se);
    assert!((bilinear_variance_rhs(&h, 0.0, 0.0).unwrap() - 4.0).abs() < 1e-12);
    for model in [VectorModel::Sphere, VectorModel::iid(ComponentLaw::Rademacher)] {
        let run = run_bilinear_experiment(&h, model, n, 2_000, 6).unwrap();
        assert!(run.summary.n_variance < 1e-20, "{}", run.summary.n_variance);
    }
}

#[test]
fn bilinear_form_of_a_frozen_resolvent() {
    let n = 16;
    let cfg = config(n, 2, 1.0, VectorModel::gaussian(), 8);
    let h = resolvent_matrix(&assemble_replicate(&cfg, 0).unwrap(), Complex64::new(1.0, 1.0)).unwrap();
    let rhs = bilinear_variance_rhs(&h, 0.0, 0.0).unwrap();
    let run = run_bilinear_experiment(&h, VectorModel::gaussian(), n, 20_000, 9).unwrap();
    let rel = (run.summary.n_variance - rhs).abs() / rhs;
    assert!(rel < 0.15, "{} vs {rhs}", run.summary.n_variance);
}

#[test]
fn trace_covariance_at_small_n() {
    let cfg = config(8, 2, 1.0, VectorModel::gaussian(), 10);
    let i = Complex64::i();
    let z = Complex64::new(1.0, 1.0);
    let run = run_cov_experiment(&ExperimentPlan::new(cfg, 600), &[(i, i), (z, z.conj())]).unwrap();
    let sigma = SpectralMeasure::point(1.0);
    for est in &run.summary.estimates {
        let predicted = trace_covariance(&sigma, 1.0, 0.0, 0.0, est.z1, est.z2).unwrap();
        // the O(1/n) bias is about 30% at n = 8 and halves by n = 24
        let rel = (est.value - predicted).norm() / predicted.norm();
        assert!(rel < 0.4, "{} vs {predicted}", est.value);
    }
    let pair = &run.summary.estimates[1];
    assert!(pair.value.im.abs() < 1e-9 * pair.value.re.abs() && pair.value.re >= 0.0);
    assert!(run.summary.warnings.is_empty());
}

#[test]
fn outputs_do_not_depend_on_the_thread_count() {
    let mut plan = ExperimentPlan::new(config(6, 2, 0.5, VectorModel::gaussian(), 11), 40);
    plan.phis = vec![
        TestFunction::GaussianBump { center: 1.0, width: 0.5 },
        TestFunction::tapered_monomial(2, 0.5),
    ];
    let one = with_threads(1, || run_clt_experiment(&plan).unwrap()).unwrap();
    let three = with_threads(3, || run_clt_experiment(&plan).unwrap()).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&three).unwrap());
    let h = ComplexMatrix::identity(36);
    let b1 = with_threads(1, || run_bilinear_experiment(&h, VectorModel::Sphere, 6, 1500, 2).unwrap()).unwrap();
    let b3 = with_threads(3, || run_bilinear_experiment(&h, VectorModel::Sphere, 6, 1500, 2).unwrap()).unwrap();
    assert_eq!(serde_json::to_string(&b1).unwrap(), serde_json::to_string(&b3).unwrap());
}

#[test]
fn clt_warns_when_underpowered() {
    let mut plan = ExperimentPlan::new(config(4, 2, 0.5, VectorModel::gaussian(), 12), 20);
    plan.phis = vec![TestFunction::Constant { value: 1.0 }];
    let run = run_clt_experiment(&plan).unwrap();
    assert_eq!(run.summary.warnings.len(), 1);
    assert_eq!(run.summary.statistics[0].variance, 0.0);
}
