use crate::config::{
    BilinearConfig, CltConfig, Config, ConfigError, CovConfig, EsdConfig, MatrixSpec, MomentsConfig, MpSolveConfig,
    PredictConfig,
};
use anyhow::{Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use tensormp::ensemble::{assemble_replicate, resolvent_matrix};
use tensormp::fluctuation_theory::{
    bilinear_variance_terms, clt_variance, clt_variance_closed_form, trace_covariance, VariancePrediction,
};
use tensormp::isotropic_vectors::{analytic_moment_profile, empirical_moment_profile, MomentProfile, VectorModel};
use tensormp::linalg::ComplexMatrix;
use tensormp::montecarlo::stats::write_histogram_csv;
use tensormp::montecarlo::{
    derive_stream, run_bilinear_experiment, run_clt_experiment, run_cov_experiment, run_esd_experiment, write_json,
    write_jsonl, ExperimentPlan,
};
use tensormp::mp_law::{default_density_grid, density, mp_closed_form, solve_grid, solve_mpe, DEFAULT_ETA_SCHEDULE};
use tensormp::spectral_measures::{SpectralMeasure, TauSpec};

/// Runs `cfg`, writes its outputs into `out`, and returns the one-line summary
/// together with the names of the files written.
pub fn run(cfg: &Config, out: &Path) -> Result<(Value, Vec<String>)> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::new();
    let summary = match cfg {
        Config::Esd(c) => esd(c, out, &mut files)?,
        Config::Clt(c) => clt(c, out, &mut files)?,
        Config::Cov(c) => cov(c, out, &mut files)?,
        Config::Bilinear(c) => bilinear(c, out, &mut files)?,
        Config::MpSolve(c) => mp_solve(c, out, &mut files)?,
        Config::PredictVariance(c) => predict(c, out, &mut files)?,
        Config::Moments(c) => moments(c, out, &mut files)?,
    };
    files.sort();
    Ok((summary, files))
}

fn with_file(out: &Path, name: &str, files: &mut Vec<String>, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let path = out.join(name);
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    f(&mut w)?;
    w.flush()?;
    files.push(name.to_string());
    Ok(())
}

fn json_file<T: Serialize>(out: &Path, name: &str, value: &T, files: &mut Vec<String>) -> Result<()> {
    write_json(&out.join(name), value)?;
    files.push(name.to_string());
    Ok(())
}

fn jsonl_file<T: Serialize>(out: &Path, name: &str, records: &[T], files: &mut Vec<String>) -> Result<()> {
    write_jsonl(&out.join(name), records)?;
    files.push(name.to_string());
    Ok(())
}

fn with_experiment(experiment: &str, value: impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    if let Value::Object(map) = &mut v {
        map.insert("experiment".into(), Value::String(experiment.into()));
    }
    Ok(v)
}

/// Analytic `(a, b)` of a model, or a configuration error naming the fix.
fn model_constants(model: VectorModel, n: usize) -> Result<(f64, f64)> {
    match analytic_moment_profile(model, n) {
        Ok(p) => Ok((p.a, p.b)),
        Err(tensormp::Error::EmpiricalOnly(label)) => Err(ConfigError(format!(
            "{label} has no analytic constants; give `a` and `b` explicitly (see `tensormp moments`)"
        ))
        .into()),
        Err(e) => Err(e.into()),
    }
}

fn measure(taus: &TauSpec) -> Result<SpectralMeasure> {
    Ok(taus.measure()?)
}

fn esd(c: &EsdConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let run = run_esd_experiment(&ExperimentPlan::new(c.ensemble.clone(), c.replicates))?;
    jsonl_file(out, "records.jsonl", &run.records, files)?;
    json_file(out, "summary.json", &run.summary, files)?;
    with_file(out, "histogram.csv", files, |w| Ok(write_histogram_csv(&run.summary.histogram, w)?))?;
    let s = &run.summary;
    Ok(json!({
        "experiment": "esd",
        "replicates": run.records.len(),
        "ks": s.ks,
        "pooled_eigenvalues": s.pooled_eigenvalues,
        "zero_fraction": s.zero_fraction,
        "atom_at_zero": s.atom_at_zero,
        "c": s.c,
    }))
}

fn clt(c: &CltConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let mut plan = ExperimentPlan::new(c.ensemble.clone(), c.replicates);
    plan.phis = c.phis.clone();
    plan.trace_shortcut = c.trace_shortcut;
    let run = run_clt_experiment(&plan)?;
    let mut summary = with_experiment("clt", &run.summary)?;
    if c.predict {
        let (a, b) = model_constants(c.ensemble.model, c.ensemble.n)?;
        let sigma = measure(&c.ensemble.taus)?;
        let ratio = c.ensemble.ratio()?;
        let predictions = c
            .phis
            .iter()
            .map(|phi| clt_variance(&sigma, ratio, a, b, phi, &DEFAULT_ETA_SCHEDULE))
            .collect::<tensormp::Result<Vec<_>>>()?;
        summary["predictions"] = serde_json::to_value(&predictions)?;
    }
    jsonl_file(out, "records.jsonl", &run.records, files)?;
    json_file(out, "summary.json", &summary, files)?;
    Ok(summary)
}

fn cov(c: &CovConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let run = run_cov_experiment(&ExperimentPlan::new(c.ensemble.clone(), c.replicates), &c.pairs)?;
    let mut summary = with_experiment("cov", &run.summary)?;
    if c.predict {
        let (a, b) = model_constants(c.ensemble.model, c.ensemble.n)?;
        let sigma = measure(&c.ensemble.taus)?;
        let ratio = c.ensemble.ratio()?;
        let mut predictions = Vec::new();
        for est in &run.summary.estimates {
            let p = trace_covariance(&sigma, ratio, a, b, est.z1, est.z2)?;
            predictions.push(json!({
                "z1": est.z1,
                "z2": est.z2,
                "value": p,
                "relative_error": (est.value - p).norm() / p.norm(),
            }));
        }
        summary["predictions"] = Value::Array(predictions);
    }
    jsonl_file(out, "records.jsonl", &run.records, files)?;
    json_file(out, "summary.json", &summary, files)?;
    Ok(summary)
}

fn bilinear_matrix(c: &BilinearConfig) -> Result<ComplexMatrix> {
    let dim = c.n * c.n;
    Ok(match &c.matrix {
        MatrixSpec::Identity => ComplexMatrix::identity(dim),
        MatrixSpec::Zero => ComplexMatrix::zeros(dim),
        MatrixSpec::Resolvent { ensemble, z, replicate } => {
            if ensemble.n != c.n || ensemble.k != 2 {
                return Err(ConfigError(format!(
                    "the resolvent ensemble must have n = {} and k = 2, got n = {}, k = {}",
                    c.n, ensemble.n, ensemble.k
                ))
                .into());
            }
            resolvent_matrix(&assemble_replicate(ensemble, *replicate)?, *z)?
        }
    })
}

fn bilinear(c: &BilinearConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let h = bilinear_matrix(c)?;
    let (a, b) = match (c.a, c.b) {
        (Some(a), Some(b)) => (a, b),
        (None, None) => model_constants(c.model, c.n)?,
        _ => return Err(ConfigError("give both `a` and `b` or neither".into()).into()),
    };
    let terms = bilinear_variance_terms(&h, a, b)?;
    let run = run_bilinear_experiment(&h, c.model, c.n, c.replicates, c.master_seed)?;
    let s = &run.summary;
    let relative_error = if terms.value.abs() > 0.0 {
        Some((s.n_variance - terms.value).abs() / terms.value.abs())
    } else {
        None
    };
    let summary = json!({
        "experiment": "bilinear",
        "n": s.n,
        "replicates": s.replicates,
        "mean": s.mean,
        "n_variance": s.n_variance,
        "n_variance_se": s.n_variance_se,
        "rhs": terms.value,
        "relative_error": relative_error,
        "terms": terms,
        "a": a,
        "b": b,
    });
    jsonl_file(out, "records.jsonl", &run.records, files)?;
    json_file(out, "summary.json", &summary, files)?;
    Ok(summary)
}

fn mp_solve(c: &MpSolveConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let sigma = measure(&c.taus)?;
    let grid = c.grid.expand();
    if grid.is_empty() {
        return Err(ConfigError("the z grid is empty".into()).into());
    }
    let sol = solve_grid(&sigma, c.c, &grid)?;
    with_file(out, "stieltjes.csv", files, |w| Ok(sol.write_csv(w)?))?;
    let unit = sigma == SpectralMeasure::point(1.0);
    let closed_dev = if unit {
        let mut worst: f64 = 0.0;
        for (z, f) in grid.iter().zip(&sol.f_values) {
            worst = worst.max((f - mp_closed_form(c.c, *z)?).norm());
        }
        Some(worst)
    } else {
        None
    };
    let i = Complex64::i();
    let f_i = solve_mpe(&sigma, c.c, i)?.0;
    let mut summary = json!({
        "experiment": "mp-solve",
        "c": c.c,
        "points": grid.len(),
        "max_residual": sol.residuals.iter().cloned().fold(0.0, f64::max),
        "max_iterations": sol.iterations.iter().copied().max().unwrap_or(0),
        "f_at_i": f_i,
        "closed_form_at_i": if unit { Some(mp_closed_form(c.c, i)?) } else { None },
        "closed_form_max_deviation": closed_dev,
    });
    if let Some(d) = &c.density {
        let schedule = d.eta_schedule.clone().unwrap_or_else(|| DEFAULT_ETA_SCHEDULE.to_vec());
        let lambda = default_density_grid(&sigma, c.c, d.points);
        let curve = density(&sigma, c.c, &lambda, &schedule)?;
        with_file(out, "density.csv", files, |w| Ok(curve.write_csv(w)?))?;
        with_file(out, "density.json", files, |w| Ok(curve.write_sidecar(w)?))?;
        summary["density"] = json!({
            "points": curve.lambda.len(),
            "total_mass": curve.total_mass(),
            "atom_at_zero": curve.atom_at_zero,
            "atom_certified": curve.atom_certified,
            "support_warning": curve.support_warning,
        });
    }
    json_file(out, "summary.json", &summary, files)?;
    Ok(summary)
}

#[derive(Serialize)]
struct PredictionRecord {
    #[serde(flatten)]
    prediction: VariancePrediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form: Option<f64>,
}

fn predict(c: &PredictConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let sigma = measure(&c.taus)?;
    let (a, b) = match (c.a, c.b, c.model) {
        (Some(a), Some(b), None) => (a, b),
        (None, None, Some(model)) => model_constants(model, 64)?,
        _ => return Err(ConfigError("give either both `a` and `b` or a `model`".into()).into()),
    };
    if c.phis.is_empty() && c.pairs.is_empty() {
        return Err(ConfigError("nothing to predict: `phis` and `pairs` are both empty".into()).into());
    }
    let schedule = c.eta_schedule.clone().unwrap_or_else(|| DEFAULT_ETA_SCHEDULE.to_vec());
    let unit = sigma == SpectralMeasure::point(1.0);
    let mut records = Vec::new();
    for phi in &c.phis {
        records.push(PredictionRecord {
            prediction: clt_variance(&sigma, c.c, a, b, phi, &schedule)?,
            closed_form: unit.then(|| clt_variance_closed_form(c.c, a, b, phi)),
        });
    }
    let mut covariances = Vec::new();
    for &(z1, z2) in &c.pairs {
        covariances.push(json!({"z1": z1, "z2": z2, "value": trace_covariance(&sigma, c.c, a, b, z1, z2)?}));
    }
    let summary = json!({
        "experiment": "predict-variance",
        "a": a,
        "b": b,
        "c": c.c,
        "variances": records,
        "covariances": covariances,
    });
    json_file(out, "predictions.json", &summary, files)?;
    Ok(summary)
}

fn moment_rows(analytic: Option<&MomentProfile>, emp: &MomentProfile, se: &[f64; 8]) -> String {
    let rows = [
        ("a22", analytic.map(|p| p.a22), emp.a22),
        ("kappa4", analytic.map(|p| p.kappa4), emp.kappa4),
        ("a222", analytic.map(|p| p.a222), emp.a222),
        ("a24", analytic.map(|p| p.a24), emp.a24),
        ("a6", analytic.map(|p| p.a6), emp.a6),
        ("a", analytic.map(|p| p.a), emp.a),
        ("b", analytic.map(|p| p.b), emp.b),
        ("a+b+2", analytic.map(|p| p.a_plus_b_plus_2()), emp.a_plus_b_plus_2()),
    ];
    let mut s = format!("{:<10} {:>14} {:>14} {:>12}\n", "quantity", "analytic", "empirical", "se");
    for ((name, an, em), e) in rows.iter().zip(se) {
        let an = an.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
        s.push_str(&format!("{name:<10} {an:>14} {em:>14.6e} {e:>12.3e}\n"));
    }
    let delta = emp.deltan_estimate.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"));
    s.push_str(&format!("{:<10} {:>14} {delta:>14}\n", "deltan", "n/a"));
    s
}

fn moments(c: &MomentsConfig, out: &Path, files: &mut Vec<String>) -> Result<Value> {
    let analytic = match analytic_moment_profile(c.model, c.n) {
        Ok(p) => Some(p),
        Err(tensormp::Error::EmpiricalOnly(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let emp = empirical_moment_profile(c.model, c.n, c.reps, &mut derive_stream(c.master_seed, 0))?;
    let e = &emp.se;
    let abc_se = (e.a * e.a + e.b * e.b).sqrt();
    let se = [e.a22, e.kappa4, e.a222, e.a24, e.a6, e.a, e.b, abc_se];
    eprint!("{}", moment_rows(analytic.as_ref(), &emp.profile, &se));
    let summary = json!({
        "experiment": "moments",
        "model": c.model.label(),
        "n": c.n,
        "reps": emp.reps,
        "analytic": analytic,
        "empirical": emp.profile,
        "se": emp.se,
        "a_plus_b_plus_2": {
            "analytic": analytic.map(|p| p.a_plus_b_plus_2()),
            "empirical": emp.profile.a_plus_b_plus_2(),
            "se": abc_se,
        },
    });
    json_file(out, "moments.json", &summary, files)?;
    Ok(summary)
}
