//! Unrealizable labelings of `B + 1` points.
//!
//! In lifted coordinates an ellipsoid is `{ξ : ⟨a, ξ⟩ + c < 0}` with `a` in
//! the positive definite cone, on which the trace direction
//! `u = (1, …, 1, 0, …, 0)/√d` is strictly positive. Rotating `u` to the last
//! axis makes every such functional strictly increasing in the last
//! ("height") coordinate. A Radon split of the remaining `B − 1` coordinates
//! then produces two parts whose hulls are stacked vertically over a common
//! point; the lower part cannot be cut out when it sits above the other, and
//! vice versa.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{lift_dimension, LiftedIndex};
use crate::numerics::linalg::{dot, norm2};
use crate::points::PointSet;
use crate::realizability::{InfeasibilityReport, LabeledPointSet, Oracle, Realizability, MAX_LABELED_POINTS};
use crate::shattering::radon::{combine, radon_partition, RadonCertificate};
use crate::Tolerances;

/// Householder reflection `H` of `R^B` with `H u = e_B` for the trace
/// direction `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRotation {
    u: Vec<f64>,
    w: Vec<f64>,
    w_norm_sq: f64,
}

impl TraceRotation {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let b = lift_dimension(d);
        let mut u = vec![0.0; b];
        let s = 1.0 / (d as f64).sqrt();
        u[..d].iter_mut().for_each(|x| *x = s);
        let mut w = u.clone();
        w[b - 1] -= 1.0;
        let w_norm_sq = dot(&w, &w);
        Ok(TraceRotation { u, w, w_norm_sq })
    }

    pub fn direction(&self) -> &[f64] {
        &self.u
    }

    pub fn lifted_dim(&self) -> usize {
        self.u.len()
    }

    pub fn apply(&self, xi: &[f64]) -> Vec<f64> {
        let f = 2.0 * dot(&self.w, xi) / self.w_norm_sq;
        xi.iter().zip(&self.w).map(|(x, w)| x - f * w).collect()
    }

    /// Last rotated coordinate, `⟨u, ξ⟩`.
    pub fn height(&self, xi: &[f64]) -> f64 {
        dot(&self.u, xi)
    }

    /// First `B − 1` rotated coordinates.
    pub fn project(&self, xi: &[f64]) -> Vec<f64> {
        let mut v = self.apply(xi);
        v.pop();
        v
    }
}

/// How the labeling was derived from the lifted points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LiftedRefutation {
    /// Two points with the same projection; the higher one is labeled in.
    EqualProjection { lower: usize, upper: usize, lower_height: f64, upper_height: f64 },
    /// Radon split of the projections with heights `z` over `first` and
    /// `z_prime` over `second` at the Radon point.
    Radon { partition: RadonCertificate, z: f64, z_prime: f64, tie: bool },
}

impl LiftedRefutation {
    pub fn labeling(&self) -> u64 {
        match self {
            LiftedRefutation::EqualProjection { upper, .. } => 1u64 << upper,
            LiftedRefutation::Radon { partition, z, z_prime, .. } => {
                let side = if z_prime <= z { &partition.first } else { &partition.second };
                side.iter().fold(0u64, |m, &i| m | 1u64 << i)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefutationKind {
    EqualProjection,
    Radon,
}

/// Finds an unrealizable labeling of `m ≥ B + 1` lifted points, where `d` fixes
/// the trace direction.
pub fn refute_lifted(lifted: &[Vec<f64>], d: usize) -> Result<LiftedRefutation> {
    let rot = TraceRotation::new(d)?;
    let b = rot.lifted_dim();
    if lifted.iter().any(|p| p.len() != b) {
        return Err(Error::InvalidInput(format!("lifted points must have {b} coordinates")));
    }
    if lifted.len() < b + 1 || lifted.len() > MAX_LABELED_POINTS {
        return Err(Error::InvalidInput(format!(
            "need between {} and {MAX_LABELED_POINTS} lifted points, got {}",
            b + 1,
            lifted.len()
        )));
    }
    let heights: Vec<f64> = lifted.iter().map(|p| rot.height(p)).collect();
    let projections: Vec<Vec<f64>> = lifted.iter().map(|p| rot.project(p)).collect();

    let scale = 1.0 + projections.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..projections.len() {
        for j in 0..i {
            let gap = projections[i].iter().zip(&projections[j]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if gap <= 1e-12 * scale && heights[i] != heights[j] {
                let (lower, upper) = if heights[i] < heights[j] { (i, j) } else { (j, i) };
                return Ok(LiftedRefutation::EqualProjection {
                    lower,
                    upper,
                    lower_height: heights[lower],
                    upper_height: heights[upper],
                });
            }
        }
    }

    let partition = radon_partition(&projections)?;
    let z = dot(&partition.first_weights, &partition.first.iter().map(|&i| heights[i]).collect::<Vec<_>>());
    let z_prime = dot(&partition.second_weights, &partition.second.iter().map(|&i| heights[i]).collect::<Vec<_>>());
    Ok(LiftedRefutation::Radon { partition, z, z_prime, tie: z == z_prime })
}

/// A labeling of `B + 1` points that no ellipsoid cuts out, together with
/// the lifted argument and the oracle's confirmation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    pub points: PointSet,
    pub labeling: u64,
    pub kind: RefutationKind,
    pub evidence: LiftedRefutation,
    pub confirmation: InfeasibilityReport,
}

pub fn find_unrealizable_labeling(points: &PointSet, tol: &Tolerances) -> Result<RefutationCertificate> {
    let d = points.dim();
    let b = lift_dimension(d);
    if points.len() != b + 1 {
        return Err(Error::InvalidInput(format!("need exactly {} points in R^{d}, got {}", b + 1, points.len())));
    }
    points.ensure_distinct()?;
    let idx = LiftedIndex::new(d);
    let lifted: Vec<Vec<f64>> = points.iter().map(|p| idx.lift(p)).collect::<Result<_>>()?;
    let evidence = refute_lifted(&lifted, d)?;
    let labeling = evidence.labeling();
    let confirmation = confirm(points, labeling, tol)?;
    let kind = match evidence {
        LiftedRefutation::EqualProjection { .. } => RefutationKind::EqualProjection,
        LiftedRefutation::Radon { .. } => RefutationKind::Radon,
    };
    Ok(RefutationCertificate { points: points.clone(), labeling, kind, evidence, confirmation })
}

fn confirm(points: &PointSet, labeling: u64, tol: &Tolerances) -> Result<InfeasibilityReport> {
    let l = LabeledPointSet::new(points.clone(), labeling)?;
    match Oracle::new(*tol).realizable_by_ellipsoid(&l)? {
        Realizability::Infeasible(r) => Ok(r),
        Realizability::Realizable(c) => Err(Error::OracleDisagreement { labeling, margin: c.lp_margin }),
    }
}

impl RefutationCertificate {
    /// Recomputes the lifted argument from the points; the oracle is not
    /// re-run.
    pub fn verify(&self, tol: &Tolerances) -> Result<()> {
        let fail = |msg: String| Err(Error::Verification(msg));
        let d = self.points.dim();
        let b = lift_dimension(d);
        if self.points.len() != b + 1 {
            return fail(format!("expected {} points", b + 1));
        }
        let rot = TraceRotation::new(d)?;
        let idx = LiftedIndex::new(d);
        let lifted: Vec<Vec<f64>> = self.points.iter().map(|p| idx.lift(p)).collect::<Result<_>>()?;
        if self.evidence.labeling() != self.labeling {
            return fail("labeling does not follow from the evidence".into());
        }
        match &self.evidence {
            LiftedRefutation::EqualProjection { lower, upper, .. } => {
                if self.kind != RefutationKind::EqualProjection || *lower >= lifted.len() || *upper >= lifted.len() {
                    return fail("malformed equal-projection evidence".into());
                }
                let (pl, pu) = (rot.project(&lifted[*lower]), rot.project(&lifted[*upper]));
                let scale = 1.0 + norm2(&pl);
                if norm2(&crate::numerics::linalg::sub(&pl, &pu)) > tol.verify * scale
                    || !(rot.height(&lifted[*upper]) > rot.height(&lifted[*lower]))
                {
                    return fail("pair does not share a projection with the upper point higher".into());
                }
            }
            LiftedRefutation::Radon { partition, z, z_prime, .. } => {
                if self.kind != RefutationKind::Radon {
                    return fail("kind does not match evidence".into());
                }
                let projections: Vec<Vec<f64>> = lifted.iter().map(|p| rot.project(p)).collect();
                partition.verify(&projections, tol.verify)?;
                let heights: Vec<Vec<f64>> = lifted.iter().map(|p| vec![rot.height(p)]).collect();
                let z1 = combine(&heights, &partition.first, &partition.first_weights)[0];
                let z2 = combine(&heights, &partition.second, &partition.second_weights)[0];
                let hscale = 1.0 + heights.iter().fold(0.0f64, |m, h| m.max(h[0].abs()));
                if (z1 - z).abs() > tol.verify * hscale || (z2 - z_prime).abs() > tol.verify * hscale {
                    return fail("recorded heights do not match the Radon weights".into());
                }
            }
        }
        if !(self.confirmation.lp_margin <= tol.feasibility) {
            return fail(format!("recorded oracle margin {:e} exceeds the feasibility threshold", self.confirmation.lp_margin));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realizability::analytic_interval_oracle;
    use proptest::prelude::*;

    #[test]
    fn rotation_sends_u_to_last_axis() {
        for d in 1..=4 {
            let r = TraceRotation::new(d).unwrap();
            let hu = r.apply(r.direction());
            let b = r.lifted_dim();
            for (k, v) in hu.iter().enumerate() {
                let e = if k == b - 1 { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn interval_three_points() {
        let pts = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let c = find_unrealizable_labeling(&pts, &Tolerances::default()).unwrap();
        assert_eq!(c.labeling, 0b101);
        assert!(c.confirmation.lp_margin <= 1e-7);
        c.verify(&Tolerances::default()).unwrap();
    }

    #[test]
    fn symmetric_three_points() {
        // Lifts (1,−1), (0,0), (1,1); u = e_1, so the heights are the squares
        // and the projections are ∓x: the middle point sits between the
        // others, below them.
        let pts = PointSet::from_scalars(&[-1.0, 0.0, 1.0]).unwrap();
        let c = find_unrealizable_labeling(&pts, &Tolerances::default()).unwrap();
        let l = LabeledPointSet::new(pts, c.labeling).unwrap();
        assert!(!analytic_interval_oracle(&l).unwrap());
        assert_eq!(c.labeling, 0b101);
        match &c.evidence {
            LiftedRefutation::Radon { z, z_prime, .. } => {
                let (lo, hi) = if z < z_prime { (*z, *z_prime) } else { (*z_prime, *z) };
                assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
            }
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn equal_projection_case_on_synthetic_lift() {
        // Three synthetic lifted points for d = 1: the first two differ by a
        // multiple of u = e_1.
        let lifted = vec![vec![0.0, 0.3], vec![2.0, 0.3], vec![5.0, -4.0]];
        match refute_lifted(&lifted, 1).unwrap() {
            e @ LiftedRefutation::EqualProjection { lower: 0, upper: 1, .. } => assert_eq!(e.labeling(), 0b010),
            other => panic!("unexpected evidence {other:?}"),
        }
    }

    #[test]
    fn random_planar_sets_are_refuted() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let pts: Vec<Vec<f64>> = (0..6).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let pts = PointSet::new(2, pts).unwrap();
            let c = find_unrealizable_labeling(&pts, &Tolerances::default()).unwrap();
            assert!(c.confirmation.lp_margin <= 1e-7);
            c.verify(&Tolerances::default()).unwrap();
        }
    }

    #[test]
    fn wrong_size_rejected() {
        let pts = PointSet::from_scalars(&[0.0, 1.0]).unwrap();
        assert!(find_unrealizable_labeling(&pts, &Tolerances::default()).is_err());
    }

    proptest! {
        #[test]
        fn lifted_functional_increases_with_height(
            d in 1usize..=3,
            seed in any::<u64>(),
            step in 1e-3f64..10.0,
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let rot = TraceRotation::new(d).unwrap();
            let b = rot.lifted_dim();
            let mut a: Vec<f64> = (0..b).map(|_| rng.random_range(-1.0..1.0)).collect();
            let along = dot(&a, rot.direction());
            if along <= 1e-6 {
                // Flip into the half-space of positive last rotated coefficient.
                a.iter_mut().zip(rot.direction()).for_each(|(x, u)| *x += (1e-3 - along) * u);
            }
            prop_assume!(rot.apply(&a)[b - 1] > 0.0);
            let xi: Vec<f64> = (0..b).map(|_| rng.random_range(-5.0..5.0)).collect();
            let higher: Vec<f64> = xi.iter().zip(rot.direction()).map(|(x, u)| x + step * u).collect();
            let low = rot.project(&xi);
            let high = rot.project(&higher);
            for (p, q) in low.iter().zip(&high) {
                prop_assert!((p - q).abs() < 1e-9);
            }
            prop_assert!(dot(&a, &higher) > dot(&a, &xi));
        }
    }
}
