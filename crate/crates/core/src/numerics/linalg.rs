//! Small dense vectors and matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

pub fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found: v.len() })
    }
}

/// Square dense matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            check_len(r, n)?;
            data.extend_from_slice(r);
        }
        Ok(Matrix { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Inverse by column-wise solves.
    pub fn inverse(&self, tol: f64) -> Result<Matrix> {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = solve_linear(self, &e, tol)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Symmetric matrix. Only the lower triangle is stored, so `(i, j)` and
/// `(j, i)` always read the same value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    n: usize,
    packed: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, packed: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Builds the matrix from `f(i, j)` evaluated for `i >= j` only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                packed.push(f(i, j));
            }
        }
        SymMatrix { n, packed }
    }

    /// Accepts a full square matrix; rejects it unless exactly symmetric
    /// and finite.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            check_len(r, n)?;
            if !all_finite(r) {
                return Err(Error::InvalidInput("matrix has non-finite entries".into()));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[packed_index(i, j)] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix { n: self.n, packed: self.packed.iter().map(|x| x * s).collect() }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// `ᵗv M v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn is_finite(&self) -> bool {
        all_finite(&self.packed)
    }

    /// Inverse of a positive definite matrix, via Cholesky.
    pub fn inverse_pd(&self, tol: f64) -> Result<SymMatrix> {
        let chol = cholesky_pd_check(self, tol).ok_or(Error::NotPositiveDefinite)?;
        let n = self.n;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(chol.solve(&e));
        }
        // Symmetrize the two computed triangles.
        Ok(SymMatrix::from_fn(n, |i, j| 0.5 * (cols[j][i] + cols[i][j])))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L ᵗL`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.lower[packed_index(i, j)]
        }
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.get(i, k) * y[k]).sum();
            y[i] = (b[i] - s) / self.get(i, i);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.get(k, i) * x[k]).sum();
            x[i] = (y[i] - s) / self.get(i, i);
        }
        x
    }
}

/// Positive-definiteness test by Cholesky factorization.
///
/// Succeeds iff every pivot exceeds `tol` times the largest diagonal entry.
/// The zero matrix and matrices with a non-positive diagonal are rejected.
pub fn cholesky_pd_check(m: &SymMatrix, tol: f64) -> Option<Cholesky> {
    let n = m.order();
    if n == 0 || !m.is_finite() {
        return None;
    }
    let max_diag = m.max_diagonal();
    if !(max_diag > 0.0) {
        return None;
    }
    let floor = tol * max_diag;
    let mut lower = vec![0.0f64; n * (n + 1) / 2];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= lower[packed_index(j, k)].powi(2);
        }
        if !(pivot > floor) {
            return None;
        }
        let ljj = pivot.sqrt();
        lower[packed_index(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= lower[packed_index(i, k)] * lower[packed_index(j, k)];
            }
            lower[packed_index(i, j)] = s / ljj;
        }
    }
    Some(Cholesky { n, lower })
}

/// Gaussian elimination with partial pivoting.
///
/// A pivot whose magnitude falls below `tol` times the scale of its
/// original row is reported as [`Error::SingularMatrix`].
pub fn solve_linear(m: &Matrix, v: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = m.order();
    check_len(v, n)?;
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut b = v.to_vec();
    let mut row_scale: Vec<f64> = a.iter().map(|r| norm_inf(r)).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        if !(a[p][k].abs() > tol * row_scale[p]) || row_scale[p] == 0.0 {
            return Err(Error::SingularMatrix);
        }
        a.swap(k, p);
        b.swap(k, p);
        row_scale.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = 1e-12;

    #[test]
    fn cholesky_examples() {
        assert!(cholesky_pd_check(&SymMatrix::identity(3), TAU).is_some());
        let m = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(cholesky_pd_check(&m, TAU).is_none());
        assert!(cholesky_pd_check(&SymMatrix::zeros(2), TAU).is_none());
    }

    #[test]
    fn cholesky_factor_reproduces_matrix() {
        let m = SymMatrix::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 3.0, 0.5],
            vec![0.4, 0.5, 2.0],
        ])
        .unwrap();
        let l = cholesky_pd_check(&m, TAU).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| l.get(i, k) * l.get(j, k)).sum();
                assert!((s - m.get(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let err = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.5, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn solve_examples() {
        let x = solve_linear(&Matrix::identity(2), &[1.0, 2.0], TAU).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        let d = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(solve_linear(&d, &[2.0, 4.0], TAU).unwrap(), vec![1.0, 1.0]);
        let s = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(solve_linear(&s, &[1.0, 0.0], TAU), Err(Error::SingularMatrix));
    }

    #[test]
    fn solve_length_mismatch() {
        let err = solve_linear(&Matrix::identity(3), &[1.0], TAU).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 1 });
    }

    #[test]
    fn inverse_pd_matches_general_inverse() {
        let m = SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let a = m.inverse_pd(TAU).unwrap();
        let b = m.to_matrix().inverse(TAU).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.get(i, j) - b[(i, j)]).abs() < 1e-14);
            }
        }
    }
}
