//! Explicit shattered sets of size `B = (d² + 3d)/2`.
//!
//! `B` unit vectors whose lifts are affinely independent all lie on the
//! hyperplane `ξ_1 + … + ξ_d = 1`. Solving `M b = v`, with `M` the matrix of
//! lifted points and `v_j = 1 ∓ δ`, gives for every subset a halfspace
//! `⟨b, ξ⟩ < 1` through the lifted set, and every such `b` stays close
//! enough to `(1, …, 1, 0, …, 0)` that the corresponding quadric is an
//! ellipsoid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{ellipsoid_from_quadric, lift_dimension, Ellipsoid, LiftedIndex, Quadric, QuadricSet};
use crate::numerics::linalg::{dot, norm2, norm_inf, solve_linear, Matrix};
use crate::numerics::sym_eigen;
use crate::points::{full_mask, PointSet};
use crate::realizability::trivial_witness;
use crate::Tolerances;

const MAX_ATTEMPTS: usize = 100;
pub const MAX_SPHERE_DIM: usize = 6;
pub const MAX_WITNESS_DIM: usize = 4;

/// Unit vectors whose lifts form an invertible `B × B` matrix.
#[derive(Debug, Clone)]
pub struct SpanningSet {
    pub points: PointSet,
    pub lifted: Matrix,
    pub inverse: Matrix,
    /// `‖M‖∞ ‖M⁻¹‖∞`.
    pub condition: f64,
}

impl SpanningSet {
    /// Fails with [`Error::SingularMatrix`] unless the lifts of `points`
    /// form an invertible square matrix.
    pub fn from_points(points: PointSet, tol: f64) -> Result<Self> {
        let idx = LiftedIndex::new(points.dim());
        if points.len() != idx.lifted_dim() {
            return Err(Error::DimensionMismatch { expected: idx.lifted_dim(), found: points.len() });
        }
        let rows: Vec<Vec<f64>> = points.iter().map(|p| idx.lift(p)).collect::<Result<_>>()?;
        let lifted = Matrix::from_rows(&rows)?;
        let inverse = lifted.inverse(tol)?;
        let condition = lifted.norm_inf() * inverse.norm_inf();
        Ok(SpanningSet { points, lifted, inverse, condition })
    }
}

/// Seeded construction of `B` unit vectors with affinely spanning lifts.
pub fn construct_spanning_sphere_points(d: usize, seed: u64, tol: &Tolerances) -> Result<SpanningSet> {
    if d == 0 || d > MAX_SPHERE_DIM {
        return Err(Error::InvalidInput(format!("dimension must be in 1..={MAX_SPHERE_DIM}, got {d}")));
    }
    if d == 1 {
        return SpanningSet::from_points(PointSet::from_scalars(&[-1.0, 1.0])?, tol.singular);
    }
    let b = lift_dimension(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let points: Vec<Vec<f64>> = (0..b).map(|_| random_unit_vector(d, &mut rng)).collect();
        match SpanningSet::from_points(PointSet::new(d, points)?, tol.singular) {
            Ok(s) => return Ok(s),
            Err(Error::SingularMatrix) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ConstructionFailure { attempts: MAX_ATTEMPTS })
}

pub(crate) fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm2(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Lifted coefficients `b` whose halfspace `⟨b, ξ⟩ < 1` contains exactly the
/// lifted points selected by `subset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfspaceWitness {
    pub b: Vec<f64>,
    /// Every lifted point sits at distance `δ` from the boundary value 1.
    pub delta: f64,
    /// `‖b − a‖∞` with `a = (1, …, 1, 0, …, 0)`.
    pub distance_to_a: f64,
}

/// `δ = min(ε, 1) / (2 ‖M⁻¹‖∞)` for a spanning set.
pub fn witness_delta(s: &SpanningSet, epsilon: f64) -> f64 {
    epsilon.min(1.0) / (2.0 * s.inverse.norm_inf())
}

pub fn halfspace_witness(s: &SpanningSet, subset: u64, epsilon: f64, tol: &Tolerances) -> Result<HalfspaceWitness> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let n = s.points.len();
    let delta = witness_delta(s, epsilon);
    let v: Vec<f64> = (0..n).map(|j| if subset >> j & 1 == 1 { 1.0 - delta } else { 1.0 + delta }).collect();
    let b = solve_linear(&s.lifted, &v, tol.singular)?;
    let d = s.points.dim();
    let distance_to_a = b
        .iter()
        .enumerate()
        .map(|(k, bk)| (bk - if k < d { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    Ok(HalfspaceWitness { b, delta, distance_to_a })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessSource {
    /// `{x : ⟨b, φ(x)⟩ − 1 < 0}` itself.
    Quadric,
    /// The quadric's sublevel set was empty; a far-away ball stands in.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetWitness {
    pub subset: u64,
    /// Lifted coefficients `b`; the quadric is `⟨b, φ(x)⟩ − 1`.
    pub lifted: Vec<f64>,
    pub distance_to_a: f64,
    /// Smallest eigenvalue of the quadric's quadratic part.
    pub min_eigenvalue: f64,
    /// `min_j ±(⟨b, φ(s_j)⟩ − 1)` with the sign making it positive when
    /// the point is on the correct side.
    pub slack: f64,
    pub ellipsoid: Ellipsoid,
    pub source: WitnessSource,
}

impl SubsetWitness {
    pub fn quadric(&self, d: usize) -> Result<Quadric> {
        Quadric::new(d, self.lifted.clone(), -1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub dim: usize,
    pub points: PointSet,
    pub epsilon: f64,
    pub delta: f64,
    pub condition: f64,
    /// Indexed by subset bitmask.
    pub subsets: Vec<SubsetWitness>,
}

/// `(1 − ε) − (d − 1) ε / 2`, a Gershgorin lower bound on the smallest
/// eigenvalue of every witness quadric.
pub fn gershgorin_bound(d: usize, epsilon: f64) -> f64 {
    (1.0 - epsilon) - (d as f64 - 1.0) * epsilon / 2.0
}

pub fn default_epsilon(d: usize) -> f64 {
    1.0 / (d as f64 + 1.0)
}

pub fn build_shatter_witness(d: usize, seed: u64, tol: &Tolerances) -> Result<ShatterWitness> {
    if d == 0 || d > MAX_WITNESS_DIM {
        return Err(Error::InvalidInput(format!("dimension must be in 1..={MAX_WITNESS_DIM}, got {d}")));
    }
    let spanning = construct_spanning_sphere_points(d, seed, tol)?;
    let epsilon = default_epsilon(d);
    let delta = witness_delta(&spanning, epsilon);
    let n = spanning.points.len();
    let subsets = crate::par::map_range(1u64 << n, |mask| subset_witness(&spanning, mask, epsilon, tol))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(ShatterWitness { dim: d, points: spanning.points, epsilon, delta, condition: spanning.condition, subsets })
}

fn subset_witness(s: &SpanningSet, mask: u64, epsilon: f64, tol: &Tolerances) -> Result<SubsetWitness> {
    let d = s.points.dim();
    let hw = halfspace_witness(s, mask, epsilon, tol)?;
    if hw.b.iter().all(|&x| x == 0.0) || !(hw.distance_to_a < epsilon) {
        return Err(Error::Verification(format!(
            "subset {mask:#b}: witness left the ε-ball (distance {:e})",
            hw.distance_to_a
        )));
    }
    let quadric = Quadric::new(d, hw.b.clone(), -1.0)?;
    let min_eigenvalue = sym_eigen(&quadric.quadratic_part())?.values[0];
    if min_eigenvalue < gershgorin_bound(d, epsilon) - tol.verify {
        return Err(Error::Verification(format!(
            "subset {mask:#b}: quadratic part has λ_min = {min_eigenvalue} below the Gershgorin bound"
        )));
    }
    let slack = signed_slack(&quadric, &s.points, mask)?;
    let (ellipsoid, source) = match ellipsoid_from_quadric(&quadric, tol.pd)? {
        QuadricSet::Ellipsoid(e) => (e, WitnessSource::Quadric),
        QuadricSet::Empty { .. } => (trivial_witness(&s.points, mask)?, WitnessSource::Trivial),
    };
    let cut = ellipsoid.cut_mask(s.points.iter());
    if cut != mask {
        return Err(Error::Verification(format!("subset {mask:#b}: ellipsoid cuts out {cut:#b}")));
    }
    Ok(SubsetWitness { subset: mask, lifted: hw.b, distance_to_a: hw.distance_to_a, min_eigenvalue, slack, ellipsoid, source })
}

/// Smallest clearance of the quadric's sign pattern from the labeling.
pub(crate) fn signed_slack(q: &Quadric, points: &PointSet, mask: u64) -> Result<f64> {
    let mut slack = f64::INFINITY;
    for (j, p) in points.iter().enumerate() {
        let v = q.eval(p)?;
        slack = slack.min(if mask >> j & 1 == 1 { -v } else { v });
    }
    Ok(slack)
}

impl ShatterWitness {
    /// Re-runs every pointwise check without re-solving anything.
    pub fn verify(&self, tol: &Tolerances) -> Result<()> {
        let d = self.dim;
        let n = self.points.len();
        if n != lift_dimension(d) || self.points.dim() != d {
            return Err(Error::Verification(format!("expected {} points in R^{d}", lift_dimension(d))));
        }
        for (j, p) in self.points.iter().enumerate() {
            if (norm2(p) - 1.0).abs() > 1e-12 {
                return Err(Error::Verification(format!("point {j} is not on the unit sphere")));
            }
        }
        if self.subsets.len() as u64 != 1u64 << n {
            return Err(Error::Verification(format!("expected {} subsets, found {}", 1u64 << n, self.subsets.len())));
        }
        let bound = gershgorin_bound(d, self.epsilon);
        let results = crate::par::map_range(1u64 << n, |mask| -> Result<()> {
            let w = &self.subsets[mask as usize];
            let fail = |msg: String| Err(Error::Verification(format!("subset {mask:#b}: {msg}")));
            if w.subset != mask {
                return fail("entries out of order".into());
            }
            let q = w.quadric(d)?;
            let lam = sym_eigen(&q.quadratic_part())?.values[0];
            if lam < bound - tol.verify {
                return fail(format!("λ_min = {lam} below Gershgorin bound {bound}"));
            }
            let slack = signed_slack(&q, &self.points, mask)?;
            if slack < self.delta - tol.verify {
                return fail(format!("slack {slack:e} below δ = {:e}", self.delta));
            }
            let dist = w.lifted.iter().enumerate().map(|(k, b)| (b - if k < d { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
            if !(dist < self.epsilon) || norm_inf(&w.lifted) == 0.0 {
                return fail("coefficients outside the ε-ball or zero".into());
            }
            if crate::numerics::cholesky_pd_check(w.ellipsoid.matrix(), tol.pd).is_none() {
                return fail("ellipsoid matrix is not positive definite".into());
            }
            let cut = w.ellipsoid.cut_mask(self.points.iter());
            if cut != mask {
                return fail(format!("ellipsoid cuts out {cut:#b}"));
            }
            Ok(())
        });
        results.into_iter().collect::<Result<Vec<()>>>()?;
        Ok(())
    }

    pub fn subset(&self, mask: u64) -> &SubsetWitness {
        &self.subsets[mask as usize]
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.points.len())
    }

    /// `⟨b, φ(s_j)⟩` for diagnostics.
    pub fn lifted_values(&self, mask: u64) -> Vec<f64> {
        let idx = LiftedIndex::new(self.dim);
        self.points.iter().map(|p| dot(&self.subset(mask).lifted, &idx.lift(p).unwrap())).collect()
    }
}
