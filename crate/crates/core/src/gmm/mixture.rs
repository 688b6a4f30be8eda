use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::gaussian::{GaussianComponent, GaussianWitness};
use crate::numerics::linalg::check_len;

/// `log Σ exp(v_i)` with the maximum factored out; `−∞` for no terms.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Convex combination of Gaussian components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture")]
pub struct MixtureModel {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    components: Vec<GaussianComponent>,
}

#[derive(Deserialize)]
struct RawMixture {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    components: Vec<GaussianComponent>,
}

impl TryFrom<RawMixture> for MixtureModel {
    type Error = Error;
    fn try_from(r: RawMixture) -> Result<Self> {
        let m = MixtureModel::from_log_weights(r.log_weights, r.components)?;
        if m.weights.len() != r.weights.len()
            || m.weights.iter().zip(&r.weights).any(|(a, b)| (a - b).abs() > 1e-12)
        {
            return Err(Error::InvalidInput("weights disagree with log-weights".into()));
        }
        Ok(m)
    }
}

impl MixtureModel {
    pub fn new(weights: Vec<f64>, components: Vec<GaussianComponent>) -> Result<Self> {
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        MixtureModel::from_log_weights(log_weights, components)
    }

    /// Weights given by their natural logs; they must sum to 1 within 1e−12.
    pub fn from_log_weights(log_weights: Vec<f64>, components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() || components.len() != log_weights.len() {
            return Err(Error::InvalidInput("need one weight per component and at least one component".into()));
        }
        let d = components[0].dim();
        if components.iter().any(|g| g.dim() != d) {
            return Err(Error::InvalidInput("components have mixed dimensions".into()));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w > 0.0) {
            return Err(Error::InvalidInput("weights must lie in [0, 1]".into()));
        }
        let weights: Vec<f64> = log_weights.iter().map(|w| w.exp()).collect();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}")));
        }
        Ok(MixtureModel { weights, log_weights, components })
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        log_sum_exp(self.log_weights.iter().zip(&self.components).map(|(lw, g)| lw + g.log_density(x)))
    }
}

pub fn log_mixture_density(f: &MixtureModel, x: &[f64]) -> Result<f64> {
    check_len(x, f.dim())?;
    Ok(f.log_density(x))
}

/// Mixture of the witnesses' Gaussians translated by `translations`, with
/// softmax weights of the thresholds, and the combined threshold
/// `r_V = log Σ exp(r_i)`.
pub fn build_mixture(witnesses: &[&GaussianWitness], translations: &[Vec<f64>]) -> Result<(MixtureModel, f64)> {
    if witnesses.len() != translations.len() {
        return Err(Error::DimensionMismatch { expected: witnesses.len(), found: translations.len() });
    }
    let r_v = log_sum_exp(witnesses.iter().map(|w| w.threshold()));
    let log_weights = witnesses.iter().map(|w| w.threshold() - r_v).collect();
    let mut components = Vec::with_capacity(witnesses.len());
    for (w, t) in witnesses.iter().zip(translations) {
        check_len(t, w.component().dim())?;
        components.push(w.component().translated(t));
    }
    Ok((MixtureModel::from_log_weights(log_weights, components)?, r_v))
}
