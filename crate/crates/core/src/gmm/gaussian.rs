use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::Ellipsoid;
use crate::numerics::linalg::{add, all_finite, check_len, cholesky_pd_check, sub, SymMatrix};
use crate::Tolerances;

/// Normal density with mean `μ` and covariance `Σ`; the precision `Σ⁻¹` is
/// kept alongside so that quadratic forms are evaluated without re-inverting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent")]
pub struct GaussianComponent {
    mean: Vec<f64>,
    covariance: SymMatrix,
    precision: SymMatrix,
    #[serde(skip_serializing)]
    log_det_cov: f64,
}

#[derive(Deserialize)]
struct RawComponent {
    mean: Vec<f64>,
    covariance: SymMatrix,
    precision: SymMatrix,
}

impl TryFrom<RawComponent> for GaussianComponent {
    type Error = Error;
    fn try_from(r: RawComponent) -> Result<Self> {
        let g = GaussianComponent::from_precision(r.mean, r.precision, Tolerances::default().pd)?;
        let n = g.dim();
        let scale = 1.0 + g.covariance.norm();
        for i in 0..n {
            for j in 0..n {
                if (g.covariance.get(i, j) - r.covariance.get(i, j)).abs() > 1e-10 * scale {
                    return Err(Error::InvalidInput("covariance and precision are not inverse to each other".into()));
                }
            }
        }
        Ok(GaussianComponent { covariance: r.covariance, ..g })
    }
}

impl GaussianComponent {
    pub fn new(mean: Vec<f64>, covariance: SymMatrix, pd_tol: f64) -> Result<Self> {
        let precision = covariance.inverse_pd(pd_tol)?;
        Self::assemble(mean, covariance, precision, pd_tol)
    }

    pub fn from_precision(mean: Vec<f64>, precision: SymMatrix, pd_tol: f64) -> Result<Self> {
        let covariance = precision.inverse_pd(pd_tol)?;
        Self::assemble(mean, covariance, precision, pd_tol)
    }

    fn assemble(mean: Vec<f64>, covariance: SymMatrix, precision: SymMatrix, pd_tol: f64) -> Result<Self> {
        check_len(&mean, precision.order())?;
        if !all_finite(&mean) {
            return Err(Error::InvalidInput("mean is not finite".into()));
        }
        let chol = cholesky_pd_check(&precision, pd_tol).ok_or(Error::NotPositiveDefinite)?;
        let log_det_cov = -chol.log_det();
        Ok(GaussianComponent { mean, covariance, precision, log_det_cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &SymMatrix {
        &self.covariance
    }

    pub fn precision(&self) -> &SymMatrix {
        &self.precision
    }

    pub fn log_det_covariance(&self) -> f64 {
        self.log_det_cov
    }

    /// `d ln 2π + ln det Σ`, minus twice the log of the peak density.
    pub fn log_normalizer(&self) -> f64 {
        self.dim() as f64 * (2.0 * PI).ln() + self.log_det_cov
    }

    /// Mahalanobis form `ᵗ(x − μ) Σ⁻¹ (x − μ)`.
    pub fn mahalanobis(&self, x: &[f64]) -> f64 {
        self.precision.quad_form(&sub(x, &self.mean))
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * (self.log_normalizer() + self.mahalanobis(x))
    }

    pub fn translated(&self, t: &[f64]) -> GaussianComponent {
        GaussianComponent { mean: add(&self.mean, t), ..self.clone() }
    }

    /// A radius beyond which `log g(x) < log_eps`, from `λ_min(Σ⁻¹)`.
    pub fn vanishing_radius(&self, log_eps: f64) -> Result<f64> {
        let lam = crate::numerics::sym_eigen(&self.precision)?.values[0];
        let need = -self.log_normalizer() - 2.0 * log_eps;
        Ok((need.max(0.0) / lam).sqrt())
    }
}

/// `−(d/2) ln 2π − ½ ln det Σ − ½ ᵗ(x − μ) Σ⁻¹ (x − μ)`.
pub fn log_density(g: &GaussianComponent, x: &[f64]) -> Result<f64> {
    check_len(x, g.dim())?;
    Ok(g.log_density(x))
}

/// A Gaussian together with a natural-log threshold `r`; the superlevel set
/// is `{x : log g(x) + r > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWitness")]
pub struct GaussianWitness {
    component: GaussianComponent,
    threshold: f64,
}

#[derive(Deserialize)]
struct RawWitness {
    component: GaussianComponent,
    threshold: f64,
}

impl TryFrom<RawWitness> for GaussianWitness {
    type Error = Error;
    fn try_from(r: RawWitness) -> Result<Self> {
        GaussianWitness::new(r.component, r.threshold)
    }
}

impl GaussianWitness {
    /// Rejects thresholds whose superlevel set is empty.
    pub fn new(component: GaussianComponent, threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && 2.0 * threshold > component.log_normalizer()) {
            return Err(Error::InvalidInput(format!(
                "threshold {threshold} lies above the density maximum"
            )));
        }
        Ok(GaussianWitness { component, threshold })
    }

    pub fn component(&self) -> &GaussianComponent {
        &self.component
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn with_threshold(&self, threshold: f64) -> Result<Self> {
        GaussianWitness::new(self.component.clone(), threshold)
    }

    /// `r + log g(x)`: positive exactly inside the superlevel set.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.threshold + self.component.log_density(x)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.margin(x) > 0.0
    }

    /// The superlevel set as an ellipsoid `Σ⁻¹ / (2r − d ln 2π − ln det Σ)`.
    pub fn to_ellipsoid(&self, pd_tol: f64) -> Result<Ellipsoid> {
        let rho2 = 2.0 * self.threshold - self.component.log_normalizer();
        Ellipsoid::new(self.component.mean.clone(), self.component.precision.scaled(1.0 / rho2), pd_tol)
    }
}

/// `Σ = A⁻¹`, `μ` the center and `r = ½(1 + d ln 2π + ln det Σ)`, so that
/// `log g + r = ½(1 − ᵗ(x − μ)A(x − μ))`.
pub fn gaussian_from_ellipsoid(e: &Ellipsoid, pd_tol: f64) -> Result<GaussianWitness> {
    let g = GaussianComponent::from_precision(e.center().to_vec(), e.matrix().clone(), pd_tol)?;
    let r = 0.5 * (1.0 + g.log_normalizer());
    GaussianWitness::new(g, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    const PD: f64 = 1e-12;

    fn standard(d: usize) -> GaussianComponent {
        GaussianComponent::new(vec![0.0; d], SymMatrix::identity(d), PD).unwrap()
    }

    #[test]
    fn log_density_examples() {
        assert!((log_density(&standard(1), &[0.0]).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-15);
        assert!((log_density(&standard(2), &[0.0, 0.0]).unwrap() + (2.0 * PI).ln()).abs() < 1e-15);
        for d in 1..=3 {
            let wide = GaussianComponent::new(vec![0.0; d], SymMatrix::identity(d).scaled(4.0), PD).unwrap();
            let drop = standard(d).log_density(&vec![0.0; d]) - wide.log_density(&vec![0.0; d]);
            assert!((drop - 0.5 * d as f64 * 4f64.ln()).abs() < 1e-14);
        }
        assert!(log_density(&standard(2), &[0.0]).is_err());
    }

    #[test]
    fn from_ellipsoid_examples() {
        let e = Ellipsoid::ball(vec![0.0], 1.0).unwrap();
        let w = gaussian_from_ellipsoid(&e, PD).unwrap();
        assert!((w.threshold() - 0.5 * (1.0 + (2.0 * PI).ln())).abs() < 1e-15);
        let disc = gaussian_from_ellipsoid(&Ellipsoid::ball(vec![0.0, 0.0], 1.0).unwrap(), PD).unwrap();
        assert!((disc.threshold() - (0.5 + (2.0 * PI).ln())).abs() < 1e-15);
        assert!(w.margin(&[1.0]).abs() < 1e-12);
        assert!(w.contains(&[0.99]) && !w.contains(&[1.01]));
    }

    #[test]
    fn threshold_above_peak_rejected() {
        let g = standard(1);
        assert!(GaussianWitness::new(g.clone(), 0.5 * g.log_normalizer()).is_err());
        assert!(GaussianWitness::new(g, f64::NAN).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let g = GaussianComponent::new(vec![1.0, -2.0], SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap(), PD).unwrap();
        let w = GaussianWitness::new(g, 3.0).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: GaussianWitness = serde_json::from_str(&s).unwrap();
        assert_eq!(back.threshold(), 3.0);
        assert!((back.component().log_det_covariance() - w.component().log_det_covariance()).abs() < 1e-14);
        let bad = s.replace("\"covariance\":[[2.0", "\"covariance\":[[2.5");
        assert!(serde_json::from_str::<GaussianWitness>(&bad).is_err());
    }

    fn random_component(rng: &mut rand_chacha::ChaCha8Rng, d: usize) -> GaussianComponent {
        let l: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let cov = SymMatrix::from_fn(d, |i, j| (0..d).map(|k| l[i][k] * l[j][k]).sum::<f64>() + if i == j { 0.2 } else { 0.0 });
        let mean = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        GaussianComponent::new(mean, cov, PD).unwrap()
    }

    proptest! {
        #[test]
        fn translation_invariance(seed in any::<u64>(), d in 1usize..=3) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_component(&mut rng, d);
            let t: Vec<f64> = (0..d).map(|_| rng.random_range(-50.0..50.0)).collect();
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
            let moved = g.translated(&t);
            let a = g.log_density(&x);
            let b = moved.log_density(&add(&x, &t));
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn vanishing_beyond_radius(seed in any::<u64>(), d in 1usize..=3, log_eps in -40.0f64..0.0) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_component(&mut rng, d);
            let rho = g.vanishing_radius(log_eps).unwrap();
            for _ in 0..20 {
                let dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = crate::numerics::linalg::norm2(&dir);
                if n < 1e-6 { continue; }
                let r = rho * (1.0 + 1e-9) + rng.random_range(0.0..5.0);
                let x: Vec<f64> = g.mean().iter().zip(&dir).map(|(m, u)| m + r * u / n).collect();
                prop_assert!(g.log_density(&x) < log_eps);
            }
        }

        #[test]
        fn superlevel_matches_ellipsoid(seed in any::<u64>(), d in 1usize..=3) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = random_component(&mut rng, d);
            let r = 0.5 * g.log_normalizer() + rng.random_range(0.05..4.0);
            let w = GaussianWitness::new(g, r).unwrap();
            let e = w.to_ellipsoid(PD).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..d).map(|_| rng.random_range(-8.0..8.0)).collect();
                let m = w.margin(&x);
                if m.abs() < 1e-9 { continue; }
                prop_assert_eq!(m > 0.0, e.contains(&x));
            }
        }
    }
}
