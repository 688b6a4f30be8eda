use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::{all_finite, norm2, sub};

/// A finite list of points in `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPointSet")]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawPointSet> for PointSet {
    type Error = Error;
    fn try_from(raw: RawPointSet) -> Result<Self> {
        PointSet::new(raw.dim, raw.points)
    }
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.len() });
            }
            if !all_finite(p) {
                return Err(Error::InvalidInput("point has non-finite coordinates".into()));
            }
        }
        Ok(PointSet { dim, points })
    }

    /// One-dimensional convenience constructor.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        PointSet::new(1, xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.points.iter().map(|p| p.as_slice())
    }

    /// Sub-set selected by a bitmask, in index order.
    pub fn select(&self, mask: u64) -> PointSet {
        let points = (0..self.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.points[i].clone())
            .collect();
        PointSet { dim: self.dim, points }
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        if self.is_empty() {
            return c;
        }
        for p in &self.points {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi;
            }
        }
        let n = self.len() as f64;
        c.iter_mut().for_each(|x| *x /= n);
        c
    }

    /// Largest pairwise Euclidean distance (0 for fewer than two points).
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..i {
                best = best.max(norm2(&sub(&self.points[i], &self.points[j])));
            }
        }
        best
    }

    /// Rejects multisets: shattering is only defined for sets.
    pub fn ensure_distinct(&self) -> Result<()> {
        for i in 0..self.len() {
            for j in 0..i {
                if self.points[i] == self.points[j] {
                    return Err(Error::InvalidInput(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.len())
    }

    /// `n` points drawn uniformly from `[−1, 1]^dim`.
    pub fn random_uniform(dim: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        PointSet::new(dim, points)
    }
}

pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}
