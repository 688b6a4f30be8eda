//! Dense numerical kernel shared by every other module.

pub mod eigen;
pub mod linalg;
pub mod lp;

pub use eigen::{sym_eigen, SymEigen};
pub use linalg::{cholesky_pd_check, solve_linear, Cholesky, Matrix, SymMatrix};
pub use lp::{LinearProgram, LpOutcome, LpSolution, Relation};
