use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::realizability::{LabeledPointSet, Oracle, Realizability};
use crate::shattering::witness::ShatterWitness;

pub const MAX_VERIFY_POINTS: usize = 20;
pub const MAX_COEFFICIENT_POINTS: usize = 16;

/// Where the per-subset evidence comes from.
#[derive(Debug, Clone, Copy)]
pub enum ShatterMode<'a> {
    /// Direct evaluation of the witness ellipsoid stored for each subset.
    Witness(&'a ShatterWitness),
    /// One ellipsoid-oracle call per labeling.
    Oracle(Oracle),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Realized { margin: f64 },
    NotRealized { margin: f64 },
    Indeterminate { margin: f64 },
    Error { message: String },
}

impl Verdict {
    pub fn is_realized(&self) -> bool {
        matches!(self, Verdict::Realized { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetOutcome {
    pub subset: u64,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatteringReport {
    pub shattered: bool,
    pub total: u64,
    pub realized: u64,
    /// Every labeling that did not verify.
    pub failures: Vec<SubsetOutcome>,
}

/// Checks every labeling of `x`. Fails only on precondition violations;
/// per-subset failures are itemized in the report.
pub fn verify_shattering(x: &PointSet, mode: ShatterMode<'_>) -> Result<ShatteringReport> {
    if x.len() > MAX_VERIFY_POINTS {
        return Err(Error::InvalidInput(format!("at most {MAX_VERIFY_POINTS} points, got {}", x.len())));
    }
    x.ensure_distinct()?;
    if let ShatterMode::Witness(w) = mode {
        if w.points.len() != x.len() || w.subsets.len() as u64 != 1u64 << x.len() {
            return Err(Error::DimensionMismatch { expected: w.points.len(), found: x.len() });
        }
    }
    let outcomes = crate::par::map_range(1u64 << x.len(), |mask| SubsetOutcome { subset: mask, verdict: judge(x, mask, mode) });
    Ok(summarize(outcomes))
}

fn summarize(outcomes: Vec<SubsetOutcome>) -> ShatteringReport {
    let total = outcomes.len() as u64;
    let realized = outcomes.iter().filter(|o| o.verdict.is_realized()).count() as u64;
    let failures: Vec<SubsetOutcome> = outcomes.into_iter().filter(|o| !o.verdict.is_realized()).collect();
    ShatteringReport { shattered: failures.is_empty(), total, realized, failures }
}

fn judge(x: &PointSet, mask: u64, mode: ShatterMode<'_>) -> Verdict {
    match mode {
        ShatterMode::Witness(w) => {
            let e = &w.subset(mask).ellipsoid;
            if e.dim() != x.dim() {
                return Verdict::Error { message: "witness dimension differs from the point set".into() };
            }
            let margin = x
                .iter()
                .enumerate()
                .map(|(j, p)| if mask >> j & 1 == 1 { 1.0 - e.form(p) } else { e.form(p) - 1.0 })
                .fold(f64::INFINITY, f64::min);
            if e.cut_mask(x.iter()) == mask {
                Verdict::Realized { margin }
            } else {
                Verdict::NotRealized { margin }
            }
        }
        ShatterMode::Oracle(oracle) => oracle_verdict(x, mask, &oracle),
    }
}

pub(crate) fn oracle_verdict(x: &PointSet, mask: u64, oracle: &Oracle) -> Verdict {
    let l = match LabeledPointSet::new(x.clone(), mask) {
        Ok(l) => l,
        Err(e) => return Verdict::Error { message: e.to_string() },
    };
    match oracle.decide(&l) {
        Ok(Realizability::Realizable(c)) => Verdict::Realized { margin: c.margin },
        Ok(r @ Realizability::Infeasible(_)) if r.is_indeterminate(&oracle.tolerances) => {
            Verdict::Indeterminate { margin: r.lp_margin() }
        }
        Ok(r) => Verdict::NotRealized { margin: r.lp_margin() },
        Err(e) => Verdict::Error { message: e.to_string() },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeCount {
    pub subset_size: usize,
    pub realizable: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterCoefficient {
    pub realizable: u64,
    pub total: u64,
    /// Indexed by subset size `0..=|X|`.
    pub by_size: Vec<SizeCount>,
    pub failures: Vec<SubsetOutcome>,
}

/// Number of labelings of `x` certified realizable by the oracle.
pub fn shatter_coefficient(x: &PointSet, oracle: &Oracle) -> Result<ShatterCoefficient> {
    if x.len() > MAX_COEFFICIENT_POINTS {
        return Err(Error::InvalidInput(format!("at most {MAX_COEFFICIENT_POINTS} points, got {}", x.len())));
    }
    x.ensure_distinct()?;
    let n = x.len();
    let outcomes = crate::par::map_range(1u64 << n, |mask| SubsetOutcome { subset: mask, verdict: oracle_verdict(x, mask, oracle) });
    let mut by_size: Vec<SizeCount> = (0..=n).map(|k| SizeCount { subset_size: k, realizable: 0, total: 0 }).collect();
    for o in &outcomes {
        let s = &mut by_size[o.subset.count_ones() as usize];
        s.total += 1;
        s.realizable += o.verdict.is_realized() as u64;
    }
    let report = summarize(outcomes);
    Ok(ShatterCoefficient { realizable: report.realized, total: report.total, by_size, failures: report.failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shattering::witness::build_shatter_witness;
    use crate::Tolerances;

    #[test]
    fn witness_mode_d1() {
        let w = build_shatter_witness(1, 0, &Tolerances::default()).unwrap();
        let r = verify_shattering(&w.points, ShatterMode::Witness(&w)).unwrap();
        assert!(r.shattered);
        assert_eq!(r.total, 4);
    }

    #[test]
    fn oracle_mode_interval_gap() {
        let x = PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap();
        let r = verify_shattering(&x, ShatterMode::Oracle(Oracle::default())).unwrap();
        assert!(!r.shattered);
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].subset, 0b101);
    }

    #[test]
    fn empty_set_is_shattered() {
        let x = PointSet::new(2, vec![]).unwrap();
        let r = verify_shattering(&x, ShatterMode::Oracle(Oracle::default())).unwrap();
        assert!(r.shattered);
        assert_eq!(r.total, 1);
    }

    #[test]
    fn coefficients() {
        let o = Oracle::default();
        let c = shatter_coefficient(&PointSet::from_scalars(&[0.0, 1.0, 2.0]).unwrap(), &o).unwrap();
        assert_eq!((c.realizable, c.total), (7, 8));
        assert_eq!(c.by_size[2], SizeCount { subset_size: 2, realizable: 2, total: 3 });
        let w = build_shatter_witness(1, 0, &Tolerances::default()).unwrap();
        assert_eq!(shatter_coefficient(&w.points, &o).unwrap().realizable, 4);
        assert_eq!(shatter_coefficient(&PointSet::from_scalars(&[3.0]).unwrap(), &o).unwrap().realizable, 2);
    }

    #[test]
    fn witness_mode_detects_foreign_points() {
        let w = build_shatter_witness(2, 1, &Tolerances::default()).unwrap();
        let moved: Vec<Vec<f64>> = w.points.iter().map(|p| p.iter().map(|v| v * 3.0).collect()).collect();
        let x = PointSet::new(2, moved).unwrap();
        let r = verify_shattering(&x, ShatterMode::Witness(&w)).unwrap();
        assert!(!r.shattered);
    }
}
