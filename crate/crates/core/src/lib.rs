//! Certified shattering witnesses and refutations for ellipsoids in R^d and
//! for superlevel sets of Gaussian mixtures.
//!
//! The lifting map `φ` turns quadric membership into halfspace membership.
//! On top of it the crate builds explicit shattered sets of size
//! `(d² + 3d)/2` with witness ellipsoids, Radon-based refutations showing
//! that a given set of one more point is not shattered, an LP oracle that
//! decides ellipsoid separability of labeled point sets, and the
//! translated-mixture construction that shatters `N (d² + 3d)/2` points with
//! `N`-component Gaussian mixtures.

pub mod error;
pub mod numerics;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
pub mod lifting;
pub mod points;

pub use points::PointSet;
pub mod realizability;
pub mod shattering;
pub mod gmm;
pub mod cert;
#[cfg(feature = "cli")]
pub mod cli;

mod par;
