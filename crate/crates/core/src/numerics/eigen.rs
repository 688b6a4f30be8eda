//! Cyclic Jacobi eigendecomposition for small symmetric matrices.

use super::linalg::SymMatrix;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 64;
const MAX_SWEEPS: usize = 100;

/// Eigenpairs sorted by ascending eigenvalue; `vectors[k]` belongs to
/// `values[k]` and the vectors are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl SymEigen {
    pub fn min(&self) -> (f64, &[f64]) {
        (self.values[0], &self.vectors[0])
    }
}

pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.order();
    if n == 0 || n > MAX_ORDER {
        return Err(Error::DimensionMismatch { expected: MAX_ORDER.min(n.max(1)), found: n });
    }
    let mut a = m.to_rows();
    // v[k] holds column k of the accumulated rotation.
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|k| (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let norm = m.norm();
    let target = 1e-15 * norm;

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                for k in 0..n {
                    a[k][p] = a[p][k];
                    a[k][q] = a[q][k];
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                let (vp, vq) = (v[p].clone(), v[q].clone());
                for i in 0..n {
                    v[p][i] = c * vp[i] - s * vq[i];
                    v[q][i] = s * vp[i] + c * vq[i];
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    Ok(SymEigen {
        values: order.iter().map(|&i| a[i][i]).collect(),
        vectors: order.iter().map(|&i| v[i].clone()).collect(),
    })
}
