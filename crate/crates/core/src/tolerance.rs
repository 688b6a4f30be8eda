use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the kernels and certificate checks.
///
/// Certificates embed the record they were produced with so a verifier
/// can re-run its checks under identical settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Cholesky pivots must exceed this times the largest diagonal entry.
    pub pd: f64,
    /// Relative pivot floor for the dense linear solver.
    pub singular: f64,
    /// Primal/dual feasibility and pivoting threshold of the simplex.
    pub lp: f64,
    /// Margin threshold separating realizable from infeasible labelings.
    pub feasibility: f64,
    /// Gap allowed between the LP margin and the minimum eigenvalue when
    /// the cutting loop stops.
    pub cut: f64,
    /// Slack allowed when re-verifying certificates by direct evaluation.
    pub verify: f64,
    pub max_pivots: usize,
    pub max_cuts: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pd: 1e-12,
            singular: 1e-12,
            lp: 1e-9,
            feasibility: 1e-7,
            cut: 1e-9,
            verify: 1e-9,
            max_pivots: 10_000,
            max_cuts: 200,
        }
    }
}
