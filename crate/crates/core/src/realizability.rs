//! Separation oracle: can a labeled finite point set be cut out by a
//! quadric, or by an ellipsoid?
//!
//! Both questions are max-margin LPs over the lifted coefficients
//! `(a, c)`. For ellipsoids the quadratic part must also be positive
//! definite; that semi-infinite constraint `λ_min(A) ≥ t` is imposed lazily
//! with eigenvector cuts `ᵗu A u ≥ t`. Points are first moved to their
//! centroid and scaled to unit RMS radius, which leaves the answer unchanged
//! since both classes are closed under similarities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{
    ellipsoid_from_quadric, ellipsoid_to_quadric, lift_dimension, Ellipsoid, LiftedIndex, Quadric,
    QuadricMatrix, QuadricSet,
};
use crate::numerics::linalg::{cholesky_pd_check, dot, sub};
use crate::numerics::{sym_eigen, LinearProgram, LpOutcome, Relation};
use crate::points::PointSet;
use crate::Tolerances;

pub const MAX_LABELED_POINTS: usize = 63;

/// A point set together with the subset `Y` (bit `j` set iff point `j ∈ Y`).
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPointSet {
    points: PointSet,
    labels: u64,
}

impl LabeledPointSet {
    pub fn new(points: PointSet, labels: u64) -> Result<Self> {
        if points.len() > MAX_LABELED_POINTS {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_LABELED_POINTS} points can be labeled, got {}",
                points.len()
            )));
        }
        points.ensure_distinct()?;
        if labels & !points.full_mask() != 0 {
            return Err(Error::InvalidInput(format!(
                "label mask {labels:#b} refers to points beyond {}",
                points.len()
            )));
        }
        Ok(LabeledPointSet { points, labels })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn labels(&self) -> u64 {
        self.labels
    }

    pub fn is_in(&self, i: usize) -> bool {
        self.labels >> i & 1 == 1
    }

    pub fn is_trivial(&self) -> bool {
        self.labels == 0 || self.labels == self.points.full_mask()
    }
}

/// Evidence that a labeling is realizable.
///
/// Values are of the certificate quadric, in the caller's coordinates:
/// every in-point has value `≤ −margin` and every out-point `≥ margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginCertificate {
    pub quadric: Quadric,
    /// Verified clearance on both sides.
    pub margin: f64,
    /// Optimal value of the last LP (normalized coordinates).
    pub lp_margin: f64,
    /// Quadric value at each point.
    pub slacks: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Present for ellipsoid certificates.
    pub ellipsoid: Option<Ellipsoid>,
    pub iterations: usize,
    pub cuts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    /// Best achievable margin `t*`, at most the feasibility threshold.
    pub lp_margin: f64,
    pub iterations: usize,
    pub cuts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Realizability {
    Realizable(MarginCertificate),
    Infeasible(InfeasibilityReport),
}

impl Realizability {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Realizability::Realizable(_))
    }

    pub fn lp_margin(&self) -> f64 {
        match self {
            Realizability::Realizable(c) => c.lp_margin,
            Realizability::Infeasible(r) => r.lp_margin,
        }
    }

    /// `|t*| ≤ τ_feas`: too close to call.
    pub fn is_indeterminate(&self, tol: &Tolerances) -> bool {
        self.lp_margin().abs() <= tol.feasibility
    }

    pub fn certificate(&self) -> Option<&MarginCertificate> {
        match self {
            Realizability::Realizable(c) => Some(c),
            Realizability::Infeasible(_) => None,
        }
    }
}

/// Similarity `x ↦ (x − center) / scale` applied before solving.
#[derive(Debug, Clone)]
struct Frame {
    center: Vec<f64>,
    scale: f64,
}

impl Frame {
    fn fit(points: &PointSet) -> Frame {
        let center = points.centroid();
        let n = points.len().max(1) as f64;
        let ms: f64 = points.iter().map(|p| dot(&sub(p, &center), &sub(p, &center))).sum::<f64>() / n;
        let scale = if ms > 0.0 { ms.sqrt() } else { 1.0 };
        Frame { center, scale }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(v, m)| (v - m) / self.scale).collect()
    }

    /// Rewrites `q((x − m)/s)` as a quadric in `x`.
    fn pull_back(&self, q: &Quadric) -> Result<Quadric> {
        let QuadricMatrix { a, b, c } = q.to_matrix();
        let s = self.scale;
        let m = &self.center;
        let am = a.mul_vec(m);
        let a_new = a.scaled(1.0 / (s * s));
        let b_new: Vec<f64> = b.iter().zip(&am).map(|(bi, ami)| bi / s - 2.0 * ami / (s * s)).collect();
        let c_new = dot(m, &am) / (s * s) - dot(&b, m) / s + c;
        Quadric::from_matrix(&QuadricMatrix { a: a_new, b: b_new, c: c_new })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Oracle {
    pub tolerances: Tolerances,
}

impl Oracle {
    pub fn new(tolerances: Tolerances) -> Self {
        Oracle { tolerances }
    }

    /// Linear separability of the lifted points with `‖(a, c)‖∞ ≤ 1`: any
    /// quadric, positive definite or not.
    pub fn realizable_by_quadric(&self, l: &LabeledPointSet) -> Result<Realizability> {
        reject_trivial(l)?;
        let frame = Frame::fit(l.points());
        let d = l.points().dim();
        let lifted = lift_all(l.points(), &frame)?;
        let b = lift_dimension(d);
        let mut lp = margin_lp(&lifted, l, b);
        for k in 0..=b {
            lp.set_bounds(k, -1.0, 1.0);
        }
        let sol = self.solve(&lp)?;
        let t = sol[b + 1];
        if t <= self.tolerances.feasibility {
            return Ok(Realizability::Infeasible(InfeasibilityReport { lp_margin: t, iterations: 1, cuts: 0 }));
        }
        let q = Quadric::new(d, sol[..b].to_vec(), sol[b] + 0.5 * t)?;
        let q = frame.pull_back(&q)?;
        let cert = self.certify(l, q, t, None, 1, 0)?;
        Ok(Realizability::Realizable(cert))
    }

    /// Ellipsoid separability by LP plus eigenvector cutting planes.
    pub fn realizable_by_ellipsoid(&self, l: &LabeledPointSet) -> Result<Realizability> {
        reject_trivial(l)?;
        let tol = &self.tolerances;
        let frame = Frame::fit(l.points());
        let d = l.points().dim();
        let idx = LiftedIndex::new(d);
        let lifted = lift_all(l.points(), &frame)?;
        let b = idx.lifted_dim();

        let mut base = margin_lp(&lifted, l, b);
        // Gauge: trace(A) = d.
        let mut trace_row = vec![0.0; b + 2];
        for i in 0..d {
            trace_row[idx.square(i)] = 1.0;
        }
        base.add_constraint(trace_row, Relation::Eq, d as f64)?;
        // |A_ij| ≤ (A_ii + A_jj)/2 for PD A, so cross slots lie in [−d, d].
        for seg in idx.segments()[1].clone() {
            base.set_bounds(seg, -(d as f64), d as f64);
        }
        for i in 0..d {
            base.set_free(idx.square(i));
            base.set_free(idx.linear(i));
        }
        base.set_free(b);

        let initial = initial_cuts(d);
        let n_initial = initial.len();
        let mut lp = base;
        for u in &initial {
            lp.add_constraint(cut_row(&idx, u), Relation::Ge, 0.0)?;
        }
        let mut iterations = 0;
        loop {
            iterations += 1;
            let sol = self.solve(&lp)?;
            let t = sol[b + 1];
            let cuts = lp.num_constraints() - l.points().len() - 1 - n_initial;
            if t <= tol.feasibility {
                return Ok(Realizability::Infeasible(InfeasibilityReport { lp_margin: t, iterations, cuts }));
            }
            let q = Quadric::new(d, sol[..b].to_vec(), sol[b])?;
            let eig = sym_eigen(&q.quadratic_part())?;
            let (lambda, u) = eig.min();
            if lambda >= t - tol.cut {
                let centered = q.with_constant(sol[b] + 0.5 * t);
                let pulled = frame.pull_back(&centered)?;
                let ellipsoid = match ellipsoid_from_quadric(&pulled, tol.pd)? {
                    QuadricSet::Ellipsoid(e) => e,
                    QuadricSet::Empty { .. } => {
                        return Err(Error::Verification("certificate quadric has an empty sublevel set".into()))
                    }
                };
                let cert = self.certify(l, pulled, t, Some(ellipsoid), iterations, cuts)?;
                return Ok(Realizability::Realizable(cert));
            }
            if cuts >= tol.max_cuts {
                return Err(Error::CutLimit { cuts });
            }
            lp.add_constraint(cut_row(&idx, u), Relation::Ge, 0.0)?;
        }
    }

    /// Ellipsoid oracle with the degenerate labelings `∅` and `X` answered by
    /// [`trivial_witness`].
    pub fn decide(&self, l: &LabeledPointSet) -> Result<Realizability> {
        if !l.is_trivial() {
            return self.realizable_by_ellipsoid(l);
        }
        let e = trivial_witness(l.points(), l.labels())?;
        let q = ellipsoid_to_quadric(&e);
        let values: Vec<f64> = l.points().iter().map(|p| q.eval(p)).collect::<Result<_>>()?;
        let margin = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let cert = self.certify(l, q, margin, Some(e), 0, 0)?;
        Ok(Realizability::Realizable(cert))
    }

    fn solve(&self, lp: &LinearProgram) -> Result<Vec<f64>> {
        match lp.solve(self.tolerances.max_pivots, self.tolerances.lp)? {
            LpOutcome::Optimal(s) => Ok(s.x),
            other => Err(Error::Verification(format!("margin LP did not reach an optimum: {other:?}"))),
        }
    }

    /// Re-verifies a candidate by direct evaluation and packages it.
    fn certify(
        &self,
        l: &LabeledPointSet,
        quadric: Quadric,
        lp_margin: f64,
        ellipsoid: Option<Ellipsoid>,
        iterations: usize,
        cuts: usize,
    ) -> Result<MarginCertificate> {
        let slacks: Vec<f64> = l.points().iter().map(|p| quadric.eval(p)).collect::<Result<_>>()?;
        let mut margin = f64::INFINITY;
        for (i, v) in slacks.iter().enumerate() {
            let signed = if l.is_in(i) { -v } else { *v };
            margin = margin.min(signed);
        }
        if !(margin > 0.0) && !l.points().is_empty() {
            return Err(Error::Verification(format!(
                "certificate does not separate the labeling (clearance {margin:e})"
            )));
        }
        let min_eigenvalue = sym_eigen(&quadric.quadratic_part())?.values[0];
        if let Some(e) = &ellipsoid {
            if cholesky_pd_check(&quadric.quadratic_part(), self.tolerances.pd).is_none()
                && !l.is_trivial()
            {
                return Err(Error::Verification("certificate quadratic part is not positive definite".into()));
            }
            let mask = e.cut_mask(l.points().iter());
            if mask != l.labels() {
                return Err(Error::Verification(format!(
                    "ellipsoid cuts out {mask:#b} instead of {:#b}",
                    l.labels()
                )));
            }
        }
        Ok(MarginCertificate { quadric, margin, lp_margin, slacks, min_eigenvalue, ellipsoid, iterations, cuts })
    }
}

pub fn realizable_by_quadric(l: &LabeledPointSet, tol: &Tolerances) -> Result<Realizability> {
    Oracle::new(*tol).realizable_by_quadric(l)
}

pub fn realizable_by_ellipsoid(l: &LabeledPointSet, tol: &Tolerances) -> Result<Realizability> {
    Oracle::new(*tol).realizable_by_ellipsoid(l)
}

fn reject_trivial(l: &LabeledPointSet) -> Result<()> {
    if l.is_trivial() {
        Err(Error::InvalidInput("empty and full labelings are handled by trivial_witness".into()))
    } else {
        Ok(())
    }
}

fn lift_all(points: &PointSet, frame: &Frame) -> Result<Vec<Vec<f64>>> {
    let idx = LiftedIndex::new(points.dim());
    points.iter().map(|p| idx.lift(&frame.apply(p))).collect()
}

/// Variables `(a_1..a_B, c, t)`; maximize `t` subject to
/// `⟨a, φ(y)⟩ + c + t ≤ 0` on `Y` and `⟨a, φ(z)⟩ + c ≥ 0` off `Y`.
fn margin_lp(lifted: &[Vec<f64>], l: &LabeledPointSet, b: usize) -> LinearProgram {
    let mut objective = vec![0.0; b + 2];
    objective[b + 1] = 1.0;
    let mut lp = LinearProgram::maximize(objective);
    lp.set_free(b + 1);
    for (i, phi) in lifted.iter().enumerate() {
        let mut row = phi.clone();
        row.push(1.0);
        if l.is_in(i) {
            row.push(1.0);
            lp.add_constraint(row, Relation::Le, 0.0).expect("row has the LP width");
        } else {
            row.push(0.0);
            lp.add_constraint(row, Relation::Ge, 0.0).expect("row has the LP width");
        }
    }
    lp
}

/// `ᵗu A u − t ≥ 0` as a row over `(a, c, t)`.
fn cut_row(idx: &LiftedIndex, u: &[f64]) -> Vec<f64> {
    let d = idx.dim();
    let b = idx.lifted_dim();
    let mut row = vec![0.0; b + 2];
    for i in 0..d {
        row[idx.square(i)] = u[i] * u[i];
        for j in i + 1..d {
            row[idx.cross(i, j)] = u[i] * u[j];
        }
    }
    row[b + 1] = -1.0;
    row
}

/// Coordinate axes and the diagonals `(e_i ± e_j)/√2`.
fn initial_cuts(d: usize) -> Vec<Vec<f64>> {
    let mut cuts = Vec::new();
    for i in 0..d {
        let mut u = vec![0.0; d];
        u[i] = 1.0;
        cuts.push(u);
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i + 1..d {
            for sign in [1.0, -1.0] {
                let mut u = vec![0.0; d];
                u[i] = h;
                u[j] = sign * h;
                cuts.push(u);
            }
        }
    }
    cuts
}

/// Ellipsoid for the labelings `Y = X` (a ball around everything) and
/// `Y = ∅` (a unit ball well away from every point).
pub fn trivial_witness(points: &PointSet, labels: u64) -> Result<Ellipsoid> {
    let centroid = points.centroid();
    let diam = points.diameter();
    let e = if labels == points.full_mask() && !points.is_empty() {
        Ellipsoid::ball(centroid, 2.0 * diam + 1.0)?
    } else if labels == 0 {
        let mut center = centroid;
        center[0] += 3.0 * diam + 3.0;
        Ellipsoid::ball(center, 1.0)?
    } else {
        return Err(Error::InvalidInput(format!("labeling {labels:#b} is not trivial")));
    };
    let mask = e.cut_mask(points.iter());
    if mask != labels {
        return Err(Error::Verification(format!("trivial witness cuts out {mask:#b}")));
    }
    Ok(e)
}

/// Brute-force oracle for `d = 1`: `Y` is an interval's trace on `X` iff
/// its members are contiguous in sorted order.
pub fn analytic_interval_oracle(l: &LabeledPointSet) -> Result<bool> {
    if l.points().dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: l.points().dim() });
    }
    let mut order: Vec<usize> = (0..l.points().len()).collect();
    order.sort_by(|&i, &j| l.points().get(i)[0].total_cmp(&l.points().get(j)[0]));
    let flags: Vec<bool> = order.iter().map(|&i| l.is_in(i)).collect();
    let first = flags.iter().position(|&b| b);
    let last = flags.iter().rposition(|&b| b);
    Ok(match (first, last) {
        (Some(f), Some(e)) => flags[f..=e].iter().all(|&b| b),
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SymMatrix;

    fn oracle() -> Oracle {
        Oracle::default()
    }

    fn labeled(xs: &[f64], labels: u64) -> LabeledPointSet {
        LabeledPointSet::new(PointSet::from_scalars(xs).unwrap(), labels).unwrap()
    }

    fn square(labels: u64) -> LabeledPointSet {
        let pts = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        LabeledPointSet::new(pts, labels).unwrap()
    }

    #[test]
    fn quadric_examples() {
        assert!(oracle().realizable_by_quadric(&labeled(&[0.0, 1.0, 2.0], 0b010)).unwrap().is_realizable());
        let concave = oracle().realizable_by_quadric(&labeled(&[0.0, 1.0, 2.0], 0b101)).unwrap();
        let cert = concave.certificate().unwrap();
        assert!(cert.min_eigenvalue < 0.0);
        let line = PointSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let r = oracle().realizable_by_quadric(&LabeledPointSet::new(line, 0b101).unwrap()).unwrap();
        assert!(r.certificate().unwrap().margin > 0.0);
    }

    #[test]
    fn ellipsoid_examples() {
        let r = oracle().realizable_by_ellipsoid(&labeled(&[0.0, 1.0, 2.0], 0b010)).unwrap();
        let e = r.certificate().unwrap().ellipsoid.as_ref().unwrap();
        assert!(e.contains(&[1.0]) && !e.contains(&[0.0]) && !e.contains(&[2.0]));

        let r = oracle().realizable_by_ellipsoid(&labeled(&[0.0, 1.0, 2.0], 0b101)).unwrap();
        assert!(!r.is_realizable());
        assert!(r.lp_margin() < -1e-7);

        let r = oracle().realizable_by_ellipsoid(&square(0b1001)).unwrap();
        let cert = r.certificate().unwrap();
        let e = cert.ellipsoid.as_ref().unwrap();
        assert_eq!(e.cut_mask([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]].iter().map(|p| &p[..])), 0b1001);
        assert!(cholesky_pd_check(&cert.quadric.quadratic_part(), 1e-12).is_some());
    }

    #[test]
    fn thin_diagonal_ellipse_by_hand() {
        // μ = (½, ½); eigenvalue 1/0.6 along (1,1)/√2, 10 across it.
        let (along, across) = (1.0 / 0.6, 10.0);
        let a = SymMatrix::from_fn(2, |i, j| if i == j { (along + across) / 2.0 } else { (along - across) / 2.0 });
        let e = Ellipsoid::new(vec![0.5, 0.5], a, 1e-12).unwrap();
        assert!((e.form(&[0.0, 0.0]) - 0.5 * along).abs() < 1e-12);
        assert!((e.form(&[1.0, 0.0]) - 0.5 * across).abs() < 1e-12);
        assert_eq!(e.cut_mask([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]].iter().map(|p| &p[..])), 0b1001);
    }

    #[test]
    fn trivial_labelings_rejected_by_lp_routes() {
        assert!(oracle().realizable_by_ellipsoid(&labeled(&[0.0, 1.0], 0)).is_err());
        assert!(oracle().realizable_by_quadric(&labeled(&[0.0, 1.0], 0b11)).is_err());
        assert!(oracle().decide(&labeled(&[0.0, 1.0], 0b11)).unwrap().is_realizable());
    }

    #[test]
    fn trivial_witness_examples() {
        let x = PointSet::from_scalars(&[0.0, 1.0]).unwrap();
        let all = trivial_witness(&x, 0b11).unwrap();
        assert!(all.contains(&[0.0]) && all.contains(&[1.0]));
        let none = trivial_witness(&x, 0).unwrap();
        assert!(!none.contains(&[0.0]) && !none.contains(&[1.0]));
        let single = PointSet::from_scalars(&[4.0]).unwrap();
        assert!(trivial_witness(&single, 1).unwrap().contains(&[4.0]));
        assert!(trivial_witness(&x, 0b01).is_err());
    }

    #[test]
    fn interval_oracle_examples() {
        assert!(analytic_interval_oracle(&labeled(&[0.0, 1.0, 2.0], 0b010)).unwrap());
        assert!(!analytic_interval_oracle(&labeled(&[0.0, 1.0, 2.0], 0b101)).unwrap());
        assert!(analytic_interval_oracle(&labeled(&[0.0, 1.0, 2.0, 3.0], 0b0110)).unwrap());
        // Unsorted input.
        assert!(!analytic_interval_oracle(&labeled(&[2.0, 0.0, 1.0], 0b011)).unwrap());
        assert!(analytic_interval_oracle(&labeled(&[2.0, 0.0, 1.0], 0b101)).unwrap());
    }

    #[test]
    fn labeled_set_validation() {
        let dup = PointSet::from_scalars(&[1.0, 1.0]).unwrap();
        assert!(LabeledPointSet::new(dup, 1).is_err());
        let x = PointSet::from_scalars(&[1.0, 2.0]).unwrap();
        assert!(LabeledPointSet::new(x, 0b100).is_err());
    }

    #[test]
    fn far_from_origin_is_handled() {
        let shift = 1e6;
        let l = labeled(&[shift, shift + 1.0, shift + 2.0], 0b010);
        assert!(oracle().realizable_by_ellipsoid(&l).unwrap().is_realizable());
        let l = labeled(&[shift, shift + 1.0, shift + 2.0], 0b101);
        assert!(!oracle().realizable_by_ellipsoid(&l).unwrap().is_realizable());
    }
}
