use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Split of a point list into two parts whose convex hulls meet at `point`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadonCertificate {
    /// Indices with positive affine-dependence coefficient.
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub first_weights: Vec<f64>,
    pub second_weights: Vec<f64>,
    pub point: Vec<f64>,
}

impl RadonCertificate {
    /// Checks the partition, the convex weights and that both convex
    /// combinations land on `point` within `tol` (relative to the
    /// coordinate scale).
    pub fn verify(&self, points: &[Vec<f64>], tol: f64) -> Result<()> {
        let fail = |msg: String| Err(Error::Verification(msg));
        let mut seen = vec![false; points.len()];
        for &i in self.first.iter().chain(&self.second) {
            if i >= points.len() || seen[i] {
                return fail(format!("index {i} is out of range or repeated"));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return fail("partition does not cover every point".into());
        }
        if self.first.is_empty() || self.second.is_empty() {
            return fail("one side of the partition is empty".into());
        }
        let scale = 1.0
            + points.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        for (idx, w) in [(&self.first, &self.first_weights), (&self.second, &self.second_weights)] {
            if idx.len() != w.len() || w.iter().any(|&x| !(x >= 0.0)) {
                return fail("weights must be nonnegative, one per index".into());
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > tol {
                return fail(format!("weights sum to {sum}"));
            }
            let combo = combine(points, idx, w);
            let gap = combo.iter().zip(&self.point).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if gap > tol * scale {
                return fail(format!("convex combination misses the Radon point by {gap:e}"));
            }
        }
        Ok(())
    }
}

pub(crate) fn combine(points: &[Vec<f64>], idx: &[usize], w: &[f64]) -> Vec<f64> {
    let k = points[0].len();
    let mut out = vec![0.0; k];
    for (&i, &wi) in idx.iter().zip(w) {
        for (o, p) in out.iter_mut().zip(&points[i]) {
            *o += wi * p;
        }
    }
    out
}

/// Radon partition of `m ≥ k + 2` points in `R^k`.
///
/// A nonzero affine dependence `Σ λ_i p_i = 0`, `Σ λ_i = 0` is read off the
/// reduced row echelon form of the `(k + 1) × m` system; the indices are then
/// split by the sign of `λ_i`.
pub fn radon_partition(points: &[Vec<f64>]) -> Result<RadonCertificate> {
    let m = points.len();
    let k = points.first().map_or(0, |p| p.len());
    if points.iter().any(|p| p.len() != k) {
        return Err(Error::InvalidInput("points have mixed dimensions".into()));
    }
    if m < k + 2 {
        return Err(Error::InvalidInput(format!("need at least {} points in R^{k}, got {m}", k + 2)));
    }
    let mut rows: Vec<Vec<f64>> = (0..k).map(|r| points.iter().map(|p| p[r]).collect()).collect();
    rows.push(vec![1.0; m]);
    let lambda = null_vector(rows, m).ok_or(Error::DegenerateDependence)?;

    let pos: f64 = lambda.iter().filter(|&&l| l > 0.0).sum();
    let neg: f64 = -lambda.iter().filter(|&&l| l < 0.0).sum::<f64>();
    if !(pos > 0.0 && neg > 0.0) {
        return Err(Error::DegenerateDependence);
    }
    let (mut first, mut second, mut fw, mut sw) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, &l) in lambda.iter().enumerate() {
        if l > 0.0 {
            first.push(i);
            fw.push(l / pos);
        } else {
            second.push(i);
            sw.push(-l / neg);
        }
    }
    let point = combine(points, &first, &fw);
    Ok(RadonCertificate { first, second, first_weights: fw, second_weights: sw, point })
}

/// A nonzero vector in the null space of `rows` (each of length `n`), by
/// Gauss-Jordan elimination with partial pivoting. `None` if the matrix has
/// full column rank.
fn null_vector(mut rows: Vec<Vec<f64>>, n: usize) -> Option<Vec<f64>> {
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let eps = 1e-12 * scale;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut free = None;
    let mut r = 0;
    for col in 0..n {
        if r == rows.len() {
            free.get_or_insert(col);
            break;
        }
        let p = (r..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))?;
        if rows[p][col].abs() <= eps {
            free.get_or_insert(col);
            continue;
        }
        rows.swap(r, p);
        let pv = rows[r][col];
        rows[r].iter_mut().for_each(|v| *v /= pv);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r {
                let f = row[col];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pr)| *v -= f * pr);
                }
            }
        }
        pivots.push((r, col));
        r += 1;
    }
    let f = free?;
    let mut x = vec![0.0; n];
    x[f] = 1.0;
    for &(row, col) in &pivots {
        x[col] = -rows[row][f];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort();
        v
    }

    #[test]
    fn square_diagonals() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let c = radon_partition(&pts).unwrap();
        c.verify(&pts, 1e-9).unwrap();
        let (a, b) = (sorted(c.first.clone()), sorted(c.second.clone()));
        assert!(a == vec![0, 3] && b == vec![1, 2] || a == vec![1, 2] && b == vec![0, 3]);
        assert!((c.point[0] - 0.5).abs() < 1e-15 && (c.point[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_on_a_line() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let c = radon_partition(&pts).unwrap();
        c.verify(&pts, 1e-9).unwrap();
        let (a, b) = (sorted(c.first.clone()), sorted(c.second.clone()));
        assert!(a == vec![0, 2] && b == vec![1] || a == vec![1] && b == vec![0, 2]);
        assert!((c.point[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interior_point_of_triangle() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0], vec![0.5, 0.5]];
        let c = radon_partition(&pts).unwrap();
        c.verify(&pts, 1e-9).unwrap();
        let (a, b) = (sorted(c.first.clone()), sorted(c.second.clone()));
        assert!(a == vec![3] && b == vec![0, 1, 2] || a == vec![0, 1, 2] && b == vec![3]);
        assert!((c.point[0] - 0.5).abs() < 1e-15 && (c.point[1] - 0.5).abs() < 1e-15);
        // Barycentric coordinates of (½, ½) in the triangle: (½, ¼, ¼).
        let tri_weights = if a == vec![3] { &c.second_weights } else { &c.first_weights };
        for (w, e) in tri_weights.iter().zip([0.5, 0.25, 0.25]) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn too_few_points() {
        assert!(radon_partition(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn verify_rejects_tampering() {
        let pts = vec![vec![0.0], vec![1.0], vec![2.0]];
        let mut c = radon_partition(&pts).unwrap();
        c.point[0] += 0.1;
        assert!(c.verify(&pts, 1e-9).is_err());
    }
}
