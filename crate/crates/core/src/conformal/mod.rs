//! Conformal rescaling u^{4/(n−2)}g: the Laplace–Beltrami stencil, the
//! linear solve for u, and the mass bookkeeping along the smoothing chain.

pub mod chain;
pub mod farfield;
pub mod laplacian;
pub mod solver;

pub use chain::{conformal_tail, mass_chain, u_convergence_norms, ChainConfig, ChainRow, MassChain, UNormTable};
pub use farfield::{a_farfield, a_integral, extract_a, FarFieldWindow};
pub use laplacian::{laplace_beltrami_apply, LaplaceOperator};
pub use solver::{
    conformal_metric, solve_conformal_factor, solve_conformal_factor_with, ConformalSolution, SolverOptions,
};
