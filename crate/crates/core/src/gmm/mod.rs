//! Gaussian superlevel sets and mixtures of translated Gaussians.

pub mod construction;
pub mod gaussian;
pub mod mixture;

pub use construction::{
    build_mixture_shatter_witness, choose_translations, separation_quantities, tighten_thresholds,
    verify_mixture_shattering, Excess, MixtureReport, MixtureShatterWitness, MixtureSubset, Separation, SpacingReport,
};
pub use gaussian::{gaussian_from_ellipsoid, log_density, GaussianComponent, GaussianWitness};
pub use mixture::{build_mixture, log_mixture_density, log_sum_exp, MixtureModel};
