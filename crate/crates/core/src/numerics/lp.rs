//! Dense two-phase simplex with Bland's rule.
//!
//! Problems are tiny (tens of variables, a few hundred rows) so the
//! tableau is kept dense and reduced costs are recomputed from scratch at
//! every pivot.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `maximize ᵗc x` subject to linear rows and per-variable bounds.
/// Bounds default to `[0, +inf)`; either side may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
    /// Largest violation of any row or bound at the returned point.
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram { objective, constraints: Vec::new(), bounds: vec![(0.0, f64::INFINITY); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Result<()> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::DimensionMismatch { expected: self.num_vars(), found: coeffs.len() });
        }
        if !coeffs.iter().all(|c| c.is_finite()) || !rhs.is_finite() {
            return Err(Error::InvalidInput("non-finite constraint coefficient".into()));
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.bounds[var] = (lower, upper);
    }

    pub fn set_free(&mut self, var: usize) {
        self.bounds[var] = (f64::NEG_INFINITY, f64::INFINITY);
    }

    /// Largest violation of rows and bounds at `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (xi, (lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - xi).max(xi - hi);
        }
        worst
    }

    pub fn solve(&self, max_pivots: usize, tol: f64) -> Result<LpOutcome> {
        if !self.objective.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput("non-finite objective".into()));
        }
        let std = StandardForm::build(self)?;
        let Some(std) = std else {
            return Ok(LpOutcome::Infeasible);
        };
        let outcome = std.solve(max_pivots, tol)?;
        Ok(match outcome {
            StdOutcome::Infeasible => LpOutcome::Infeasible,
            StdOutcome::Unbounded => LpOutcome::Unbounded,
            StdOutcome::Optimal { y, pivots } => {
                let x = std.recover(&y);
                let value = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                let max_violation = self.violation(&x);
                LpOutcome::Optimal(LpSolution { x, value, pivots, max_violation })
            }
        })
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, lower: f64 },
    Flip { col: usize, upper: f64 },
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    maps: Vec<VarMap>,
    n_cols: usize,
    rows: Vec<(Vec<f64>, Relation, f64)>,
    cost: Vec<f64>,
}

enum StdOutcome {
    Optimal { y: Vec<f64>, pivots: usize },
    Infeasible,
    Unbounded,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Result<Option<Self>> {
        let mut maps = Vec::with_capacity(lp.num_vars());
        let mut n_cols = 0;
        let mut bound_rows = Vec::new();
        for &(lo, hi) in &lp.bounds {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::InvalidInput("invalid variable bound".into()));
            }
            if lo > hi {
                return Ok(None);
            }
            let map = if lo.is_finite() {
                if hi.is_finite() {
                    bound_rows.push((n_cols, hi - lo));
                }
                VarMap::Shift { col: n_cols, lower: lo }
            } else if hi.is_finite() {
                VarMap::Flip { col: n_cols, upper: hi }
            } else {
                n_cols += 1;
                VarMap::Split { pos: n_cols - 1, neg: n_cols }
            };
            n_cols += 1;
            maps.push(map);
        }

        let transform = |coeffs: &[f64]| -> (Vec<f64>, f64) {
            let mut row = vec![0.0; n_cols];
            let mut offset = 0.0;
            for (a, map) in coeffs.iter().zip(&maps) {
                match *map {
                    VarMap::Shift { col, lower } => {
                        row[col] += a;
                        offset += a * lower;
                    }
                    VarMap::Flip { col, upper } => {
                        row[col] -= a;
                        offset += a * upper;
                    }
                    VarMap::Split { pos, neg } => {
                        row[pos] += a;
                        row[neg] -= a;
                    }
                }
            }
            (row, offset)
        };

        let mut rows = Vec::with_capacity(lp.constraints.len() + bound_rows.len());
        for c in &lp.constraints {
            let (row, offset) = transform(&c.coeffs);
            rows.push((row, c.relation, c.rhs - offset));
        }
        for (col, width) in bound_rows {
            let mut row = vec![0.0; n_cols];
            row[col] = 1.0;
            rows.push((row, Relation::Le, width));
        }
        let (cost, _) = transform(&lp.objective);
        Ok(Some(StandardForm { maps, n_cols, rows, cost }))
    }

    fn recover(&self, y: &[f64]) -> Vec<f64> {
        self.maps
            .iter()
            .map(|m| match *m {
                VarMap::Shift { col, lower } => lower + y[col],
                VarMap::Flip { col, upper } => upper - y[col],
                VarMap::Split { pos, neg } => y[pos] - y[neg],
            })
            .collect()
    }

    fn solve(&self, max_pivots: usize, tol: f64) -> Result<StdOutcome> {
        let n = self.n_cols;
        let m = self.rows.len();
        // Column layout: structural | slack/surplus | artificial | rhs.
        let n_slack = self.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let mut n_art = 0;
        let mut normalized = Vec::with_capacity(m);
        for (row, rel, rhs) in &self.rows {
            let (row, rel, rhs) = if *rhs < 0.0 {
                let flipped = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (row.iter().map(|x| -x).collect::<Vec<_>>(), flipped, -rhs)
            } else {
                (row.clone(), *rel, *rhs)
            };
            if rel != Relation::Le {
                n_art += 1;
            }
            normalized.push((row, rel, rhs));
        }
        let width = n + n_slack + n_art;
        let art_start = n + n_slack;
        let mut tab = Tableau::new(m, width);
        let mut slack = n;
        let mut art = art_start;
        for (i, (row, rel, rhs)) in normalized.into_iter().enumerate() {
            tab.rows[i][..n].copy_from_slice(&row);
            tab.rows[i][width] = rhs;
            match rel {
                Relation::Le => {
                    tab.rows[i][slack] = 1.0;
                    tab.basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    tab.rows[i][slack] = -1.0;
                    slack += 1;
                    tab.rows[i][art] = 1.0;
                    tab.basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    tab.rows[i][art] = 1.0;
                    tab.basis[i] = art;
                    art += 1;
                }
            }
        }

        let mut pivots = 0;
        let rhs_scale = 1.0 + tab.rows.iter().map(|r| r[width].abs()).fold(0.0, f64::max);

        if n_art > 0 {
            let mut phase1 = vec![0.0; width];
            for c in phase1.iter_mut().skip(art_start) {
                *c = -1.0;
            }
            match tab.run(&phase1, width, max_pivots, tol, &mut pivots)? {
                RunResult::Optimal => {}
                // Phase one is bounded above by zero.
                RunResult::Unbounded => unreachable!("phase one cannot be unbounded"),
            }
            let infeas: f64 = (0..m)
                .filter(|&i| tab.basis[i] >= art_start)
                .map(|i| tab.rows[i][width])
                .sum();
            if infeas > tol * rhs_scale {
                return Ok(StdOutcome::Infeasible);
            }
            // Drive remaining artificials out of the basis; drop redundant rows.
            let mut i = 0;
            while i < tab.rows.len() {
                if tab.basis[i] >= art_start {
                    let entering = (0..art_start).find(|&j| tab.rows[i][j].abs() > tol);
                    match entering {
                        Some(j) => {
                            tab.pivot(i, j);
                            pivots += 1;
                        }
                        None => {
                            tab.rows.remove(i);
                            tab.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }

        let mut cost = vec![0.0; width];
        cost[..n].copy_from_slice(&self.cost);
        match tab.run(&cost, art_start, max_pivots, tol, &mut pivots)? {
            RunResult::Unbounded => Ok(StdOutcome::Unbounded),
            RunResult::Optimal => {
                let mut y = vec![0.0; n];
                for (i, &b) in tab.basis.iter().enumerate() {
                    if b < n {
                        y[b] = tab.rows[i][width].max(0.0);
                    }
                }
                Ok(StdOutcome::Optimal { y, pivots })
            }
        }
    }
}

enum RunResult {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn new(m: usize, width: usize) -> Self {
        Tableau { rows: vec![vec![0.0; width + 1]; m], basis: vec![0; m], width }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.rows[r][c];
        for x in self.rows[r].iter_mut() {
            *x /= p;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for j in 0..=w {
                    row[j] -= f * pivot_row[j];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Primal simplex over columns `0..allowed` with Bland's rule.
    fn run(
        &mut self,
        cost: &[f64],
        allowed: usize,
        max_pivots: usize,
        tol: f64,
        pivots: &mut usize,
    ) -> Result<RunResult> {
        let w = self.width;
        loop {
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                reduced > tol
            });
            let Some(j) = entering else {
                return Ok(RunResult::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j] > tol {
                    let ratio = row[w].max(0.0) / row[j];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            if ratio < best && !tie || tie && self.basis[i] < self.basis[k] {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(RunResult::Unbounded);
            };
            if *pivots >= max_pivots {
                return Err(Error::IterationLimit { pivots: *pivots });
            }
            self.pivot(r, j);
            *pivots += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn solve(lp: &LinearProgram) -> LpOutcome {
        lp.solve(10_000, TOL).unwrap()
    }

    #[test]
    fn single_bound() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.set_bounds(0, 0.0, 1.0);
        let s = solve(&lp).optimal().unwrap();
        assert_eq!(s.x, vec![1.0]);
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn contradictory_bounds() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, -1.0).unwrap();
        assert_eq!(solve(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn no_upper_bound() {
        let lp = LinearProgram::maximize(vec![1.0]);
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0).unwrap();
        lp.add_constraint(vec![0.0, 2.0], Relation::Le, 12.0).unwrap();
        lp.add_constraint(vec![3.0, 2.0], Relation::Le, 18.0).unwrap();
        let s = solve(&lp).optimal().unwrap();
        assert!((s.value - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_ge_and_free_variables() {
        // max -x - y, x + y = 1, x - y >= -3, x, y free -> value -1
        let mut lp = LinearProgram::maximize(vec![-1.0, -1.0]);
        lp.set_free(0);
        lp.set_free(1);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0).unwrap();
        lp.add_constraint(vec![1.0, -1.0], Relation::Ge, -3.0).unwrap();
        let s = solve(&lp).optimal().unwrap();
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!(s.max_violation < 1e-9);
    }

    #[test]
    fn upper_only_and_negative_lower() {
        // max x + y, x <= -2 (upper only), -5 <= y <= -1 -> -3
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.set_bounds(0, f64::NEG_INFINITY, -2.0);
        lp.set_bounds(1, -5.0, -1.0);
        let s = solve(&lp).optimal().unwrap();
        assert!((s.value + 3.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 2.0).unwrap();
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 4.0).unwrap();
        let s = solve(&lp).optimal().unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example (Beale); Bland's rule must terminate.
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0).unwrap();
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0).unwrap();
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0).unwrap();
        let s = solve(&lp).optimal().unwrap();
        assert!((s.value - 0.05).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit() {
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0).unwrap();
        lp.add_constraint(vec![3.0, 2.0], Relation::Le, 18.0).unwrap();
        assert_eq!(lp.solve(0, TOL), Err(Error::IterationLimit { pivots: 0 }));
    }

    #[test]
    fn row_length_checked() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        assert!(lp.add_constraint(vec![1.0], Relation::Le, 1.0).is_err());
    }
}
