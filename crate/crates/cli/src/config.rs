//! Run configurations. One JSON document selects one experiment through its
//! `experiment` field; unknown keys are rejected everywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use tensormp::ensemble::EnsembleConfig;
use tensormp::fluctuation_theory::TestFunction;
use tensormp::isotropic_vectors::VectorModel;
use tensormp::spectral_measures::TauSpec;

/// A configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Config {
    Esd(EsdConfig),
    Clt(CltConfig),
    Bilinear(BilinearConfig),
    Cov(CovConfig),
    MpSolve(MpSolveConfig),
    PredictVariance(PredictConfig),
    Moments(MomentsConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsdConfig {
    pub ensemble: EnsembleConfig,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltConfig {
    pub ensemble: EnsembleConfig,
    pub replicates: usize,
    pub phis: Vec<TestFunction>,
    #[serde(default)]
    pub trace_shortcut: bool,
    /// Attach the limiting variance for the model's analytic constants.
    #[serde(default)]
    pub predict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovConfig {
    pub ensemble: EnsembleConfig,
    pub replicates: usize,
    /// `[[re, im], [re, im]]` pairs `(z₁, z₂)`.
    pub pairs: Vec<(Complex64, Complex64)>,
    #[serde(default)]
    pub predict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// The fixed matrix `H` of a bilinear experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MatrixSpec {
    Identity,
    Zero,
    /// `(M − z)⁻¹` of replicate `replicate` of `ensemble`, frozen.
    Resolvent {
        ensemble: EnsembleConfig,
        z: Complex64,
        #[serde(default)]
        replicate: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearConfig {
    pub n: usize,
    pub model: VectorModel,
    pub replicates: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub matrix: MatrixSpec,
    /// Constants for the prediction; default to the model's analytic values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Horizontal segment `{x + i·im : x ∈ [re_lo, re_hi]}` sampled at `count` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridLine {
    pub re_lo: f64,
    pub re_hi: f64,
    pub count: usize,
    pub im: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZGrid {
    #[serde(default)]
    pub points: Vec<Complex64>,
    #[serde(default)]
    pub lines: Vec<GridLine>,
}

impl ZGrid {
    pub fn expand(&self) -> Vec<Complex64> {
        let mut out = self.points.clone();
        for l in &self.lines {
            for i in 0..l.count {
                let t = if l.count == 1 { 0.0 } else { i as f64 / (l.count - 1) as f64 };
                out.push(Complex64::new(l.re_lo + t * (l.re_hi - l.re_lo), l.im));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    #[serde(default = "default_density_points")]
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_schedule: Option<Vec<f64>>,
}

fn default_density_points() -> usize {
    800
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpSolveConfig {
    pub taus: TauSpec,
    pub c: f64,
    pub grid: ZGrid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictConfig {
    pub taus: TauSpec,
    pub c: f64,
    /// Either both of `a`, `b` or a `model` with analytic constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<VectorModel>,
    #[serde(default)]
    pub phis: Vec<TestFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub pairs: Vec<(Complex64, Complex64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsConfig {
    pub model: VectorModel,
    pub n: usize,
    pub reps: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
}

impl Config {
    pub fn experiment(&self) -> &'static str {
        match self {
            Config::Esd(_) => "esd",
            Config::Clt(_) => "clt",
            Config::Bilinear(_) => "bilinear",
            Config::Cov(_) => "cov",
            Config::MpSolve(_) => "mp-solve",
            Config::PredictVariance(_) => "predict-variance",
            Config::Moments(_) => "moments",
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(format!("invalid config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        let seed = o.seed;
        let reps = o.replicates;
        match self {
            Config::Esd(c) => {
                set(&mut c.ensemble.master_seed, seed);
                set(&mut c.replicates, reps);
            }
            Config::Clt(c) => {
                set(&mut c.ensemble.master_seed, seed);
                set(&mut c.replicates, reps);
            }
            Config::Cov(c) => {
                set(&mut c.ensemble.master_seed, seed);
                set(&mut c.replicates, reps);
            }
            Config::Bilinear(c) => {
                set(&mut c.master_seed, seed);
                set(&mut c.replicates, reps);
            }
            Config::Moments(c) => {
                set(&mut c.master_seed, seed);
                set(&mut c.reps, reps);
            }
            Config::MpSolve(_) | Config::PredictVariance(_) => {}
        }
    }

    /// The master seed the run draws from, if it is random.
    pub fn seed(&self) -> Option<u64> {
        match self {
            Config::Esd(c) => Some(c.ensemble.master_seed),
            Config::Clt(c) => Some(c.ensemble.master_seed),
            Config::Cov(c) => Some(c.ensemble.master_seed),
            Config::Bilinear(c) => Some(c.master_seed),
            Config::Moments(c) => Some(c.master_seed),
            Config::MpSolve(_) | Config::PredictVariance(_) => None,
        }
    }

    pub fn out(&self) -> Option<&Path> {
        match self {
            Config::Esd(c) => c.out.as_deref(),
            Config::Clt(c) => c.out.as_deref(),
            Config::Cov(c) => c.out.as_deref(),
            Config::Bilinear(c) => c.out.as_deref(),
            Config::MpSolve(c) => c.out.as_deref(),
            Config::PredictVariance(c) => c.out.as_deref(),
            Config::Moments(c) => c.out.as_deref(),
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

const MODEL_NAMES: &str = "gaussian, rademacher, uniform-sym, student-like-bounded, sphere, lp:<p>";

/// A model given on the command line: a short name or a JSON object.
pub fn parse_model(text: &str) -> Result<VectorModel, ConfigError> {
    use tensormp::isotropic_vectors::ComponentLaw::*;
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| ConfigError(format!("invalid model: {e}")));
    }
    let model = match t {
        "gaussian" => VectorModel::iid(Gaussian),
        "rademacher" => VectorModel::iid(Rademacher),
        "uniform-sym" => VectorModel::iid(UniformSym),
        "student-like-bounded" => VectorModel::iid(StudentLikeBounded),
        "sphere" => VectorModel::Sphere,
        _ => match t.strip_prefix("lp:").map(str::parse::<f64>) {
            Some(Ok(p)) => VectorModel::LpBall { p },
            _ => return Err(ConfigError(format!("unknown model `{t}`, expected one of {MODEL_NAMES}"))),
        },
    };
    Ok(model)
}
