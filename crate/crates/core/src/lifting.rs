//! The quadratic lifting map `φ : R^d → R^B` and the conversions between
//! lifted coefficient vectors, quadratic polynomials and ellipsoids.
//!
//! Coordinate order of `φ(x)`: squares `x_1², …, x_d²`, then cross terms
//! `x_i x_j` for `i < j` in lexicographic pair order, then `x_1, …, x_d`.
//! For `d = 1` there is no cross segment and `φ(x) = (x², x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::{all_finite, check_len, cholesky_pd_check, dot, sub, SymMatrix};

/// `B = (d² + 3d) / 2`.
pub fn lift_dimension(d: usize) -> usize {
    d * (d + 3) / 2
}

/// Slot layout of the lifted coordinates for a fixed ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftedIndex {
    d: usize,
}

impl LiftedIndex {
    pub fn new(d: usize) -> Self {
        assert!(d >= 1, "ambient dimension must be positive");
        LiftedIndex { d }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn lifted_dim(&self) -> usize {
        lift_dimension(self.d)
    }

    pub fn square(&self, i: usize) -> usize {
        i
    }

    /// Slot of `x_i x_j`, `i < j`.
    pub fn cross(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.d);
        let before: usize = (0..i).map(|k| self.d - 1 - k).sum();
        self.d + before + (j - i - 1)
    }

    pub fn linear(&self, i: usize) -> usize {
        self.d + self.d * (self.d - 1) / 2 + i
    }

    /// Segment boundaries `(squares, cross, linear)` as half-open ranges.
    pub fn segments(&self) -> [std::ops::Range<usize>; 3] {
        let d = self.d;
        let c = d * (d - 1) / 2;
        [0..d, d..d + c, d + c..2 * d + c]
    }

    pub fn lift(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.d)?;
        let d = self.d;
        let mut out = Vec::with_capacity(self.lifted_dim());
        out.extend(x.iter().map(|v| v * v));
        for i in 0..d {
            for j in i + 1..d {
                out.push(x[i] * x[j]);
            }
        }
        out.extend_from_slice(x);
        Ok(out)
    }
}

/// `φ(x)` for `x ∈ R^d`, `d = x.len()`.
pub fn lift_point(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot lift a zero-dimensional point".into()));
    }
    LiftedIndex::new(x.len()).lift(x)
}

/// The polynomial `p_a(x) + c = ⟨a, φ(x)⟩ + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadric")]
pub struct Quadric {
    dim: usize,
    a: Vec<f64>,
    c: f64,
}

#[derive(Deserialize)]
struct RawQuadric {
    dim: usize,
    a: Vec<f64>,
    c: f64,
}

impl TryFrom<RawQuadric> for Quadric {
    type Error = Error;
    fn try_from(r: RawQuadric) -> Result<Self> {
        Quadric::new(r.dim, r.a, r.c)
    }
}

/// Matrix form `ᵗx A x + ᵗb x + c` of a quadric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadricMatrix {
    pub a: SymMatrix,
    pub b: Vec<f64>,
    pub c: f64,
}

impl Quadric {
    pub fn new(dim: usize, a: Vec<f64>, c: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        check_len(&a, lift_dimension(dim))?;
        if !all_finite(&a) || !c.is_finite() {
            return Err(Error::InvalidInput("quadric has non-finite coefficients".into()));
        }
        if a.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInput("quadric coefficient vector is zero".into()));
        }
        Ok(Quadric { dim, a, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> LiftedIndex {
        LiftedIndex::new(self.dim)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.a
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    pub fn with_constant(&self, c: f64) -> Quadric {
        Quadric { dim: self.dim, a: self.a.clone(), c }
    }

    /// Multiplies every coefficient by `s > 0` (same zero set and signs).
    pub fn scaled(&self, s: f64) -> Quadric {
        Quadric { dim: self.dim, a: self.a.iter().map(|v| v * s).collect(), c: self.c * s }
    }

    /// `p_a(x) + c`, evaluated directly from the monomials.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_len(x, self.dim)?;
        let idx = self.index();
        let d = self.dim;
        let mut q = 0.0;
        for i in 0..d {
            q += self.a[idx.square(i)] * x[i] * x[i];
            for j in i + 1..d {
                q += self.a[idx.cross(i, j)] * x[i] * x[j];
            }
        }
        let lin: f64 = (0..d).map(|i| self.a[idx.linear(i)] * x[i]).sum();
        Ok(q + lin + self.c)
    }

    /// `ℓ_{a,c}(φ(x)) = ⟨a, φ(x)⟩ + c`.
    pub fn lifted_value(&self, lifted: &[f64]) -> Result<f64> {
        check_len(lifted, self.a.len())?;
        Ok(dot(&self.a, lifted) + self.c)
    }

    /// Quadratic part `A` with `A_ii = a_sq(i)` and `A_ij = a_cross(i, j) / 2`.
    pub fn quadratic_part(&self) -> SymMatrix {
        let idx = self.index();
        SymMatrix::from_fn(self.dim, |i, j| {
            if i == j {
                self.a[idx.square(i)]
            } else {
                self.a[idx.cross(j, i)] / 2.0
            }
        })
    }

    pub fn linear_part(&self) -> Vec<f64> {
        let idx = self.index();
        (0..self.dim).map(|i| self.a[idx.linear(i)]).collect()
    }

    pub fn to_matrix(&self) -> QuadricMatrix {
        QuadricMatrix { a: self.quadratic_part(), b: self.linear_part(), c: self.c }
    }

    pub fn from_matrix(m: &QuadricMatrix) -> Result<Quadric> {
        let d = m.a.order();
        check_len(&m.b, d)?;
        let idx = LiftedIndex::new(d);
        let mut a = vec![0.0; idx.lifted_dim()];
        for i in 0..d {
            a[idx.square(i)] = m.a.get(i, i);
            for j in i + 1..d {
                a[idx.cross(i, j)] = 2.0 * m.a.get(i, j);
            }
            a[idx.linear(i)] = m.b[i];
        }
        Quadric::new(d, a, m.c)
    }
}

/// The open set `{x : ᵗ(x − μ) A (x − μ) < 1}` with `A` positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEllipsoid")]
pub struct Ellipsoid {
    center: Vec<f64>,
    matrix: SymMatrix,
}

#[derive(Deserialize)]
struct RawEllipsoid {
    center: Vec<f64>,
    matrix: SymMatrix,
}

impl TryFrom<RawEllipsoid> for Ellipsoid {
    type Error = Error;
    fn try_from(r: RawEllipsoid) -> Result<Self> {
        Ellipsoid::new(r.center, r.matrix, crate::Tolerances::default().pd)
    }
}

impl Ellipsoid {
    pub fn new(center: Vec<f64>, matrix: SymMatrix, pd_tol: f64) -> Result<Self> {
        check_len(&center, matrix.order())?;
        if !all_finite(&center) {
            return Err(Error::InvalidInput("ellipsoid center is not finite".into()));
        }
        if cholesky_pd_check(&matrix, pd_tol).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Ellipsoid { center, matrix })
    }

    /// Ball of the given radius.
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let d = center.len();
        Ellipsoid::new(center, SymMatrix::identity(d).scaled(1.0 / (radius * radius)), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    /// `ᵗ(x − μ) A (x − μ)`; membership is `form < 1`.
    pub fn form(&self, x: &[f64]) -> f64 {
        self.matrix.quad_form(&sub(x, &self.center))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.form(x) < 1.0
    }

    /// Bitmask of the points of `set` lying inside.
    pub fn cut_mask<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> u64 {
        points
            .into_iter()
            .enumerate()
            .filter(|(_, p)| self.contains(p))
            .fold(0, |m, (i, _)| m | 1 << i)
    }
}

/// Result of turning `{x : quadric(x) < 0}` into an ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadricSet {
    Ellipsoid(Ellipsoid),
    /// The quadric is nonnegative everywhere; `min_value` is its minimum.
    Empty { min_value: f64 },
}

pub fn ellipsoid_from_quadric(q: &Quadric, pd_tol: f64) -> Result<QuadricSet> {
    let m = q.to_matrix();
    let chol = cholesky_pd_check(&m.a, pd_tol).ok_or(Error::NotPositiveDefinite)?;
    let x = chol.solve(&m.b);
    let center: Vec<f64> = x.iter().map(|v| -0.5 * v).collect();
    // p(μ) = c − ¼ ᵗb A⁻¹ b = c + ½ ᵗb μ
    let min_value = m.c + 0.5 * dot(&m.b, &center);
    if min_value < 0.0 {
        let matrix = m.a.scaled(1.0 / -min_value);
        Ok(QuadricSet::Ellipsoid(Ellipsoid::new(center, matrix, pd_tol)?))
    } else {
        Ok(QuadricSet::Empty { min_value })
    }
}

/// Expands `ᵗ(x − μ) A (x − μ) − 1`.
pub fn ellipsoid_to_quadric(e: &Ellipsoid) -> Quadric {
    let a = e.matrix().clone();
    let am = a.mul_vec(e.center());
    let b: Vec<f64> = am.iter().map(|v| -2.0 * v).collect();
    let c = dot(e.center(), &am) - 1.0;
    Quadric::from_matrix(&QuadricMatrix { a, b, c }).expect("positive definite matrix is nonzero")
}
