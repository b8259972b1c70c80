//! The τ side of the model: finite sequences `{τ_α}`, their normalized
//! counting measure, limit measures and moments.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest admissible |τ|. The CLT requires uniformly bounded weights.
pub const TAU_BOUND: f64 = 1e6;

const MASS_TOL: f64 = 1e-12;

/// How the weights `τ_α` are specified in a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TauSpec {
    /// `τ_α = value` for every α.
    Constant { value: f64 },
    /// The sequence itself; its length must equal `m`.
    ExplicitList { values: Vec<f64> },
    /// A discrete probability measure, realized by quota rounding.
    DiscreteMeasure { atoms: Vec<(f64, f64)> },
}

impl TauSpec {
    pub fn constant(value: f64) -> Self {
        TauSpec::Constant { value }
    }

    pub fn validate(&self) -> Result<()> {
        let check_value = |v: f64| -> Result<()> {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("tau value {v} is not finite")));
            }
            if v.abs() > TAU_BOUND {
                return Err(Error::InvalidInput(format!("|tau| = {} exceeds bound {TAU_BOUND}", v.abs())));
            }
            Ok(())
        };
        match self {
            TauSpec::Constant { value } => check_value(*value),
            TauSpec::ExplicitList { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidInput("explicit tau list is empty".into()));
                }
                values.iter().try_for_each(|&v| check_value(v))
            }
            TauSpec::DiscreteMeasure { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidInput("discrete measure has no atoms".into()));
                }
                let mut total = 0.0;
                for (i, &(v, w)) in atoms.iter().enumerate() {
                    check_value(v)?;
                    if !(w > 0.0) || !w.is_finite() {
                        return Err(Error::InvalidInput(format!("atom weight {w} must be positive")));
                    }
                    if i > 0 && atoms[i - 1].0 >= v {
                        return Err(Error::InvalidInput("atoms must be sorted by strictly increasing tau".into()));
                    }
                    total += w;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidInput(format!("atom weights sum to {total}, expected 1")));
                }
                Ok(())
            }
        }
    }

    /// The limit measure σ this specification describes. For an explicit list
    /// this is the counting measure of the list.
    pub fn measure(&self) -> Result<SpectralMeasure> {
        self.validate()?;
        match self {
            TauSpec::Constant { value } => Ok(SpectralMeasure::point(*value)),
            TauSpec::ExplicitList { values } => ncm(values),
            TauSpec::DiscreteMeasure { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                Ok(SpectralMeasure {
                    atoms: atoms
                        .iter()
                        .map(|&(value, w)| Atom { value, mass: w / total })
                        .collect(),
                })
            }
        }
    }
}

/// Point mass in a [`SpectralMeasure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

/// A discrete probability measure with strictly increasing atom locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
}

impl SpectralMeasure {
    /// Builds a measure from atoms, checking the invariants.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.mass).sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInput(format!("total mass {total} differs from 1")));
        }
        for w in atoms.windows(2) {
            if w[0].value >= w[1].value {
                return Err(Error::InvalidInput("atom values must be strictly increasing".into()));
            }
        }
        if atoms.iter().any(|a| !(a.mass > 0.0 && a.mass <= 1.0) || !a.value.is_finite()) {
            return Err(Error::InvalidInput("atom masses must lie in (0, 1]".into()));
        }
        Ok(Self { atoms })
    }

    pub fn point(value: f64) -> Self {
        Self {
            atoms: vec![Atom { value, mass: 1.0 }],
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn min_value(&self) -> f64 {
        self.atoms[0].value
    }

    pub fn max_value(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].value
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_value() >= 0.0
    }

    /// Mass carried by nonzero τ values.
    pub fn nonzero_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.value != 0.0).map(|a| a.mass).sum()
    }

    /// `∫ g(τ) dσ(τ)`.
    pub fn integrate<T, F>(&self, mut g: F) -> T
    where
        T: std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
        F: FnMut(f64) -> T,
    {
        self.atoms.iter().map(|a| g(a.value) * a.mass).sum()
    }

    /// Right-continuous distribution function `σ((-∞, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms.iter().take_while(|a| a.value <= x).map(|a| a.mass).sum()
    }

    /// Kolmogorov distance `sup_x |F(x) - G(x)|`; for discrete measures the sup
    /// is attained at an atom of either measure.
    pub fn kolmogorov_distance(&self, other: &SpectralMeasure) -> f64 {
        self.atoms
            .iter()
            .chain(other.atoms.iter())
            .map(|a| (self.cdf(a.value) - other.cdf(a.value)).abs())
            .fold(0.0, f64::max)
    }
}

/// Expands a specification into exactly `m` weights.
///
/// Discrete measures use largest-remainder rounding of the quotas `w_i m`;
/// ties in the remainder go to the atom with the smaller τ.
pub fn realize_taus(spec: &TauSpec, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    spec.validate()?;
    match spec {
        TauSpec::Constant { value } => Ok(vec![*value; m]),
        TauSpec::ExplicitList { values } => {
            if values.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    actual: values.len(),
                });
            }
            Ok(values.clone())
        }
        TauSpec::DiscreteMeasure { atoms } => {
            let quotas: Vec<f64> = atoms.iter().map(|a| a.1 * m as f64).collect();
            let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
            let assigned: usize = counts.iter().sum();
            let mut order: Vec<usize> = (0..atoms.len()).collect();
            order.sort_by(|&i, &j| {
                let (ri, rj) = (quotas[i] - quotas[i].floor(), quotas[j] - quotas[j].floor());
                rj.total_cmp(&ri).then(i.cmp(&j))
            });
            for &i in order.iter().take(m.saturating_sub(assigned)) {
                counts[i] += 1;
            }
            Ok(atoms
                .iter()
                .zip(&counts)
                .flat_map(|(a, &c)| std::iter::repeat_n(a.0, c))
                .collect())
        }
    }
}

/// Normalized counting measure of a finite sequence.
pub fn ncm(values: &[f64]) -> Result<SpectralMeasure> {
    if values.is_empty() {
        return Err(Error::InvalidInput("ncm of an empty list".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ncm input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let j = sorted[i..].iter().take_while(|&&x| x == v).count();
        atoms.push(Atom { value: v, mass: j as f64 / m });
        i += j;
    }
    Ok(SpectralMeasure { atoms })
}

/// `∫ τ^p dμ(τ)`.
pub fn measure_moment(mu: &SpectralMeasure, p: u32) -> f64 {
    debug_assert!(p <= 8, "moments above order 8 are never needed");
    mu.atoms.iter().map(|a| a.value.powi(p as i32) * a.mass).sum()
}
