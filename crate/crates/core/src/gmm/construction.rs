//! Translated-mixture shattering: `N` far-apart copies of a shattered set
//! `X` are shattered by level sets of `N`-component mixtures.
//!
//! Each subset `V` of `U = ∪ (X + t_i)` splits as `∪ (Y_i + t_i)`. The
//! mixture of the translated `g_{Y_i}` with softmax weights of the
//! thresholds `r_{Y_i}` has, near `X + t_j`, log-density plus
//! `r_V = log Σ exp r_{Y_i}` equal to `r_{Y_j} + log g_{Y_j}` plus a positive
//! correction. Once the copies are far enough apart the correction drops
//! below `δ`, which is smaller than every clearance of the base witnesses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::gaussian::{gaussian_from_ellipsoid, GaussianWitness};
use crate::gmm::mixture::{build_mixture, log_mixture_density, log_sum_exp, MixtureModel};
use crate::lifting::lift_dimension;
use crate::numerics::linalg::add;
use crate::points::{full_mask, PointSet};
use crate::shattering::build_shatter_witness;
use crate::Tolerances;

pub const MAX_SPACING_DOUBLINGS: usize = 60;
pub const MAX_MIXTURE_DIM: usize = 2;
pub const MAX_COMPONENTS: usize = 3;
const TIE_TOLERANCE: f64 = 1e-12;

/// Lowers `r_Y` to the midpoint between the in-points' largest `−log g_Y`
/// and the old value whenever an out-point sits on the boundary.
///
/// `witnesses[Y]` is the witness for the subset with bitmask `Y`.
pub fn tighten_thresholds(x: &PointSet, witnesses: &[GaussianWitness]) -> Result<Vec<GaussianWitness>> {
    check_family(x, witnesses)?;
    witnesses
        .iter()
        .enumerate()
        .map(|(mask, w)| {
            let mask = mask as u64;
            let r = w.threshold();
            let neg_log: Vec<f64> = x.iter().map(|p| -w.component().log_density(p)).collect();
            let tie = neg_log.iter().enumerate().any(|(k, v)| mask >> k & 1 == 0 && (v - r).abs() <= TIE_TOLERANCE * (1.0 + r.abs()));
            if !tie {
                return Ok(w.clone());
            }
            let lo = neg_log
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, v)| *v)
                .fold(0.5 * w.component().log_normalizer(), f64::max);
            if !(lo < r) {
                return Err(Error::ImpossibleTightening { subset: mask });
            }
            w.with_threshold(0.5 * (lo + r))
        })
        .collect()
}

fn check_family(x: &PointSet, witnesses: &[GaussianWitness]) -> Result<()> {
    if x.is_empty() || x.len() > 20 {
        return Err(Error::InvalidInput(format!("base set must have 1 to 20 points, got {}", x.len())));
    }
    if witnesses.len() as u64 != 1u64 << x.len() {
        return Err(Error::DimensionMismatch { expected: 1 << x.len(), found: witnesses.len() });
    }
    if witnesses.iter().any(|w| w.component().dim() != x.dim()) {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: witnesses[0].component().dim() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    /// Smallest `−r_Y − log g_Y(z)` over proper `Y` and `z ∉ Y`.
    pub q: f64,
    /// Smallest `r_Y + log g_Y(x)` over `x ∈ Y`.
    pub in_slack: f64,
    /// `½ min(q, in_slack)`.
    pub delta: f64,
}

pub fn separation_quantities(x: &PointSet, witnesses: &[GaussianWitness]) -> Result<Separation> {
    check_family(x, witnesses)?;
    let (mut q, mut in_slack) = (f64::INFINITY, f64::INFINITY);
    for (mask, w) in witnesses.iter().enumerate() {
        for (k, p) in x.iter().enumerate() {
            let m = w.margin(p);
            if mask >> k & 1 == 1 {
                in_slack = in_slack.min(m);
            } else {
                q = q.min(-m);
            }
        }
    }
    if !(q > 0.0 && in_slack > 0.0) {
        return Err(Error::NonPositiveSeparation { q, in_slack });
    }
    Ok(Separation { q, in_slack, delta: 0.5 * q.min(in_slack) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub translations: Vec<Vec<f64>>,
    /// Distance between consecutive translations along `e_1`.
    pub spacing: f64,
    pub initial_spacing: f64,
    pub doublings: usize,
    /// Largest correction term over every check at the final spacing.
    pub max_excess: f64,
}

/// Correction term of the mixture over a single component, stored both
/// directly and as the log of `exp(excess) − 1` so that its positivity
/// survives underflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excess {
    pub excess: f64,
    /// `None` when the mixture has a single component.
    pub log_excess: Option<f64>,
}

impl Excess {
    fn from_log(log_excess: f64) -> Self {
        if log_excess == f64::NEG_INFINITY {
            return Excess { excess: 0.0, log_excess: None };
        }
        Excess { excess: log_excess.exp().ln_1p(), log_excess: Some(log_excess) }
    }

    /// `0 < excess < δ`, reading positivity off the log form.
    pub fn within(&self, delta: f64) -> bool {
        self.log_excess.is_some_and(|l| l > f64::NEG_INFINITY && !l.is_nan()) && self.excess < delta
    }
}

/// `margins[o][Y][k] = r_Y + log g_Y(x_k + (o − N + 1) s e_1)`.
struct MarginTable {
    n: usize,
    points: usize,
    margins: Vec<Vec<Vec<f64>>>,
}

impl MarginTable {
    fn new(x: &PointSet, witnesses: &[GaussianWitness], n: usize, spacing: f64) -> Self {
        let margins = (0..2 * n - 1)
            .map(|o| {
                let shift = (o as f64 - (n as f64 - 1.0)) * spacing;
                witnesses
                    .iter()
                    .map(|w| {
                        x.iter()
                            .map(|p| {
                                let mut moved = p.to_vec();
                                moved[0] += shift;
                                w.margin(&moved)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        MarginTable { n, points: x.len(), margins }
    }

    fn subsets(&self, v: u64) -> Vec<usize> {
        let m = full_mask(self.points);
        (0..self.n).map(|i| (v >> (i * self.points) & m) as usize).collect()
    }

    fn excess(&self, ys: &[usize], j: usize, k: usize) -> Excess {
        let base = self.margins[self.n - 1][ys[j]][k];
        let lse = log_sum_exp((0..self.n).filter(|&i| i != j).map(|i| self.margins[j + self.n - 1 - i][ys[i]][k] - base));
        Excess::from_log(lse)
    }

    /// Largest excess if every check passes.
    fn check(&self, delta: f64) -> Option<f64> {
        let per_tuple = crate::par::map_range(1u64 << (self.n * self.points), |v| {
            let ys = self.subsets(v);
            let mut worst = 0.0f64;
            for j in 0..self.n {
                for k in 0..self.points {
                    let e = self.excess(&ys, j, k);
                    if !e.within(delta) {
                        return None;
                    }
                    worst = worst.max(e.excess);
                }
            }
            Some(worst)
        });
        per_tuple.into_iter().try_fold(0.0f64, |m, w| w.map(|w| m.max(w)))
    }
}

fn translations(n: usize, d: usize, spacing: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut t = vec![0.0; d];
            t[0] = i as f64 * spacing;
            t
        })
        .collect()
}

/// Doubles the spacing from `2 diam(X) + 1` until every correction term of
/// every subset tuple, component and point lies in `(0, δ)`.
pub fn choose_translations(x: &PointSet, witnesses: &[GaussianWitness], n: usize, delta: f64) -> Result<SpacingReport> {
    check_family(x, witnesses)?;
    if n == 0 || n * x.len() > 20 {
        return Err(Error::InvalidInput(format!("component count {n} is out of range")));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidInput(format!("delta must be positive, got {delta}")));
    }
    let d = x.dim();
    if n == 1 {
        return Ok(SpacingReport { translations: translations(1, d, 0.0), spacing: 0.0, initial_spacing: 0.0, doublings: 0, max_excess: 0.0 });
    }
    let initial_spacing = 2.0 * x.diameter() + 1.0;
    let mut spacing = initial_spacing;
    for doublings in 0..=MAX_SPACING_DOUBLINGS {
        if let Some(max_excess) = MarginTable::new(x, witnesses, n, spacing).check(delta) {
            return Ok(SpacingReport { translations: translations(n, d, spacing), spacing, initial_spacing, doublings, max_excess });
        }
        spacing *= 2.0;
    }
    Err(Error::SpacingSearchExhausted { doublings: MAX_SPACING_DOUBLINGS, delta })
}

/// Level-set data for one subset `V` of `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSubset {
    pub subset: u64,
    /// `r_V`.
    pub threshold: f64,
    pub model: MixtureModel,
    /// `r_V + log f_V(u)` for every `u ∈ U`, indexed `j |X| + k`.
    pub values: Vec<f64>,
    pub excess: Vec<Excess>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureShatterWitness {
    pub dim: usize,
    pub components: usize,
    pub base: PointSet,
    /// Indexed by base subset bitmask.
    pub base_witnesses: Vec<GaussianWitness>,
    pub spacing: SpacingReport,
    pub separation: Separation,
    /// Indexed by subset bitmask of `U`.
    pub subsets: Vec<MixtureSubset>,
}

impl MixtureShatterWitness {
    /// `U`, with `x_k + t_j` at index `j |X| + k`.
    pub fn points(&self) -> PointSet {
        let pts = self.spacing.translations.iter().flat_map(|t| self.base.iter().map(move |p| add(p, t))).collect();
        PointSet::new(self.dim, pts).expect("translated points keep the base dimension")
    }

    /// Base subsets `(Y_1, …, Y_N)` with `V = ∪ (Y_i + t_i)`.
    pub fn decompose(&self, v: u64) -> Vec<u64> {
        let m = full_mask(self.base.len());
        (0..self.components).map(|i| v >> (i * self.base.len()) & m).collect()
    }
}

fn subset_entry(
    base: &PointSet,
    witnesses: &[GaussianWitness],
    translations: &[Vec<f64>],
    v: u64,
) -> Result<MixtureSubset> {
    let nx = base.len();
    let m = full_mask(nx);
    let ys: Vec<usize> = (0..translations.len()).map(|i| (v >> (i * nx) & m) as usize).collect();
    let chosen: Vec<&GaussianWitness> = ys.iter().map(|&y| &witnesses[y]).collect();
    let (model, threshold) = build_mixture(&chosen, translations)?;
    let mut values = Vec::with_capacity(translations.len() * nx);
    let mut excess = Vec::with_capacity(translations.len() * nx);
    for (j, t) in translations.iter().enumerate() {
        for x in base.iter() {
            let u = add(x, t);
            values.push(threshold + log_mixture_density(&model, &u)?);
            let terms: Vec<f64> = model
                .components()
                .iter()
                .zip(model.log_weights())
                .map(|(g, lw)| lw + threshold + g.log_density(&u))
                .collect();
            let base_margin = chosen[j].margin(x);
            let others = log_sum_exp(terms.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, v)| v - base_margin));
            excess.push(Excess::from_log(others));
        }
    }
    Ok(MixtureSubset { subset: v, threshold, model, values, excess })
}

/// Full pipeline: shattered base set, Gaussian witnesses, tightening,
/// separation, spacing search, one mixture per subset of `U`, and a final
/// verification pass.
pub fn build_mixture_shatter_witness(d: usize, n: usize, seed: u64, tol: &Tolerances) -> Result<MixtureShatterWitness> {
    if d == 0 || d > MAX_MIXTURE_DIM || n == 0 || n > MAX_COMPONENTS {
        return Err(Error::InvalidInput(format!(
            "need 1 ≤ d ≤ {MAX_MIXTURE_DIM} and 1 ≤ N ≤ {MAX_COMPONENTS}, got d = {d}, N = {n}"
        )));
    }
    let sw = build_shatter_witness(d, seed, tol)?;
    let base = sw.points.clone();
    let witnesses = sw
        .subsets
        .iter()
        .map(|s| gaussian_from_ellipsoid(&s.ellipsoid, tol.pd))
        .collect::<Result<Vec<_>>>()?;
    let witnesses = tighten_thresholds(&base, &witnesses)?;
    let separation = separation_quantities(&base, &witnesses)?;
    let spacing = choose_translations(&base, &witnesses, n, separation.delta)?;
    let total = 1u64 << (n * lift_dimension(d));
    let subsets = crate::par::map_range(total, |v| subset_entry(&base, &witnesses, &spacing.translations, v))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let w = MixtureShatterWitness { dim: d, components: n, base, base_witnesses: witnesses, spacing, separation, subsets };
    let report = verify_mixture_shattering(&w, tol);
    if !report.shattered {
        return Err(Error::Verification(format!(
            "{} mixture checks failed; first: {}",
            report.failures.len(),
            report.failures.first().map_or(String::new(), |f| f.reason.clone())
        )));
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFailure {
    pub subset: u64,
    pub point: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureReport {
    pub shattered: bool,
    pub total: u64,
    pub points: usize,
    /// Smallest `r_V + log f_V(u)` over `u ∈ V`.
    pub min_in_margin: f64,
    /// Smallest `−(r_V + log f_V(u))` over `u ∉ V`.
    pub min_out_margin: f64,
    pub max_excess: f64,
    pub failures: Vec<MixtureFailure>,
}

/// Re-derives every mixture from the base witnesses and translations and
/// checks membership of every point of `U` for every subset, independently
/// of the stored values.
pub fn verify_mixture_shattering(w: &MixtureShatterWitness, tol: &Tolerances) -> MixtureReport {
    let mut report = MixtureReport {
        shattered: false,
        total: w.subsets.len() as u64,
        points: w.base.len() * w.components,
        min_in_margin: f64::INFINITY,
        min_out_margin: f64::INFINITY,
        max_excess: 0.0,
        failures: Vec::new(),
    };
    if let Err(reason) = check_structure(w, tol) {
        report.failures.push(MixtureFailure { subset: 0, point: None, reason });
        return report;
    }
    let Separation { q, delta, .. } = w.separation;
    let floor = 0.5 * delta.min(q);
    let nx = w.base.len();
    let checked = crate::par::map_range(w.subsets.len() as u64, |v| {
        let mut fails = Vec::new();
        let mut stats = (f64::INFINITY, f64::INFINITY, 0.0f64);
        let stored = &w.subsets[v as usize];
        let fresh = match subset_entry(&w.base, &w.base_witnesses, &w.spacing.translations, v) {
            Ok(f) => f,
            Err(e) => return (vec![MixtureFailure { subset: v, point: None, reason: e.to_string() }], stats),
        };
        if stored.subset != v || !close(stored.threshold, fresh.threshold, 1e-12) {
            fails.push(MixtureFailure { subset: v, point: None, reason: "stored threshold or index differs from rebuild".into() });
        }
        let ys = w.decompose(v);
        for (u, value) in fresh.values.iter().enumerate() {
            let (j, k) = (u / nx, u % nx);
            let inside = v >> u & 1 == 1;
            let mut fail = |reason: String| fails.push(MixtureFailure { subset: v, point: Some(u), reason });
            if inside {
                stats.0 = stats.0.min(*value);
            } else {
                stats.1 = stats.1.min(-value);
            }
            if (*value > 0.0) != inside {
                fail(format!("membership of point {u} is wrong (value {value:e})"));
            } else if value.abs() < floor {
                fail(format!("margin {:e} below {floor:e}", value.abs()));
            }
            if stored.values.get(u).is_none_or(|s| !close(*s, *value, tol.verify)) {
                fail("stored level value differs from recomputation".into());
            }
            let e = stored.excess.get(u).copied().unwrap_or(Excess { excess: f64::NAN, log_excess: None });
            stats.2 = stats.2.max(e.excess);
            let ok = if w.components == 1 { e.excess == 0.0 && e.log_excess.is_none() } else { e.within(delta) };
            if !ok {
                fail(format!("correction term {:e} outside (0, δ)", e.excess));
            }
            let direct = value - w.base_witnesses[ys[j] as usize].margin(w.base.get(k));
            if (direct - e.excess).abs() > tol.verify * (1.0 + value.abs()) {
                fail(format!("stored correction {:e} disagrees with direct {direct:e}", e.excess));
            }
        }
        (fails, stats)
    });
    for (fails, (i, o, e)) in checked {
        report.failures.extend(fails);
        report.min_in_margin = report.min_in_margin.min(i);
        report.min_out_margin = report.min_out_margin.min(o);
        report.max_excess = report.max_excess.max(e);
    }
    report.shattered = report.failures.is_empty();
    report
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

fn check_structure(w: &MixtureShatterWitness, tol: &Tolerances) -> std::result::Result<(), String> {
    let nx = w.base.len();
    if w.components == 0 || w.base.dim() != w.dim || nx * w.components > 20 {
        return Err("malformed witness header".into());
    }
    if w.subsets.len() as u64 != 1u64 << (nx * w.components) || w.spacing.translations.len() != w.components {
        return Err("subset or translation count does not match".into());
    }
    w.base.ensure_distinct().map_err(|e| e.to_string())?;
    let diam = w.base.diameter();
    for i in 0..w.components {
        if w.spacing.translations[i].len() != w.dim {
            return Err("translation has the wrong dimension".into());
        }
        for j in 0..i {
            let gap = crate::numerics::linalg::norm2(&crate::numerics::linalg::sub(&w.spacing.translations[i], &w.spacing.translations[j]));
            if !(gap > diam) {
                return Err(format!("translations {j} and {i} are only {gap} apart"));
            }
        }
    }
    check_family(&w.base, &w.base_witnesses).map_err(|e| e.to_string())?;
    for (mask, bw) in w.base_witnesses.iter().enumerate() {
        for (k, p) in w.base.iter().enumerate() {
            if bw.contains(p) != (mask >> k & 1 == 1) {
                return Err(format!("base witness {mask:#b} misclassifies point {k}"));
            }
        }
    }
    let s = separation_quantities(&w.base, &w.base_witnesses).map_err(|e| e.to_string())?;
    let Separation { q, in_slack, delta } = w.separation;
    if !close(s.q, q, tol.verify) || !close(s.in_slack, in_slack, tol.verify) {
        return Err("recorded q or in-slack differs from recomputation".into());
    }
    if !(q > 0.0 && delta > 0.0 && delta < q && delta < in_slack) {
        return Err(format!("need 0 < δ < min(q, in-slack); got δ = {delta:e}, q = {q:e}"));
    }
    Ok(())
}
