use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::lift_dimension;
use crate::points::PointSet;
use crate::realizability::Oracle;
use crate::shattering::verify::{verify_shattering, ShatterMode};
use crate::shattering::witness::construct_spanning_sphere_points;

pub const MAX_SEARCH_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcSearchResult {
    /// Largest `n` for which a trial `n`-point set verified shattered.
    pub bound: usize,
    pub witness: Option<PointSet>,
    pub sets_tried: usize,
}

/// Randomized lower bound on the VC dimension of ellipsoids in `R^d`.
///
/// For each `n = 1, 2, …` up to `B + 1`, tries `trials` point sets: the first
/// is the leading `n` points of a spanning sphere set (when `n ≤ B`), the rest
/// are Gaussian samples. The search stops at the first `n` with no shattered
/// trial.
pub fn estimate_vc_lower_bound(d: usize, oracle: &Oracle, trials: usize, seed: u64) -> Result<VcSearchResult> {
    if d == 0 || d > MAX_SEARCH_DIM {
        return Err(Error::InvalidInput(format!("dimension must be in 1..={MAX_SEARCH_DIM}, got {d}")));
    }
    let b = lift_dimension(d);
    let mut result = VcSearchResult { bound: 0, witness: None, sets_tried: 0 };
    if trials == 0 {
        return Ok(result);
    }
    let sphere = construct_spanning_sphere_points(d, seed, &oracle.tolerances)?.points;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=b + 1 {
        let mut found = None;
        for t in 0..trials {
            let x = if t == 0 && n <= b {
                PointSet::new(d, sphere.points()[..n].to_vec())?
            } else {
                let pts = (0..n).map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
                PointSet::new(d, pts)?
            };
            result.sets_tried += 1;
            if verify_shattering(&x, ShatterMode::Oracle(*oracle))?.shattered {
                found = Some(x);
                break;
            }
        }
        match found {
            Some(x) => {
                result.bound = n;
                result.witness = Some(x);
            }
            None => break,
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_gives_two() {
        let r = estimate_vc_lower_bound(1, &Oracle::default(), 3, 5).unwrap();
        assert_eq!(r.bound, 2);
        assert_eq!(r.witness.unwrap().len(), 2);
    }

    #[test]
    fn zero_trials() {
        let r = estimate_vc_lower_bound(2, &Oracle::default(), 0, 5).unwrap();
        assert_eq!(r.bound, 0);
        assert!(r.witness.is_none());
    }

    #[test]
    fn d2_gives_five() {
        let r = estimate_vc_lower_bound(2, &Oracle::default(), 2, 5).unwrap();
        assert_eq!(r.bound, 5);
    }
}
