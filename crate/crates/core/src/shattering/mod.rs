//! Shattered sets, Radon refutations and shattering verification.

pub mod radon;
pub mod refute;
pub mod search;
pub mod verify;
pub mod witness;

pub use radon::{radon_partition, RadonCertificate};
pub use refute::{find_unrealizable_labeling, refute_lifted, LiftedRefutation, RefutationCertificate, RefutationKind};
pub use search::{estimate_vc_lower_bound, VcSearchResult};
pub use verify::{shatter_coefficient, verify_shattering, ShatterCoefficient, ShatterMode, ShatteringReport};
pub use witness::{build_shatter_witness, construct_spanning_sphere_points, halfspace_witness, ShatterWitness, SpanningSet, SubsetWitness};
