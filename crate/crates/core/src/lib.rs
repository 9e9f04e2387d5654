//! Structured adaptive preconditioning: trace-regularized preconditioner
//! cones with closed-form solutions, a slow numeric oracle to check them
//! against, the AdaGrad/Shampoo family of optimizers built on top, and the
//! quadratic benchmark problems and regret/convergence bound calculators
//! used to verify the whole stack.

pub mod cone;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod oracle;
pub mod problem;
pub mod rng;
pub mod sampling;

pub use cone::{
    adaptive_norm, adaptive_norm_from_stat, domain_norm, dual_witness_check, h_smoothness,
    solve_preconditioner, stat_from_dense, stat_update, ConeElement, ConeSpec, GradStat,
};
pub use error::{Error, Result};
pub use linalg::{
    kron_left_apply, loewner_leq, psd_power, sym_eig, EigenDecomposition, Mat, Power, PsdMatrix,
    SymMatrix,
};
pub use optim::{DomainSpec, Mode, Optimizer, OptimizerConfig, OptimizerState, StepRecord};
pub use oracle::{
    minimize_kron_pair, minimize_subspace, monotonicity_probe, KronPairSolve,
    KroneckerPairFamily, OracleFamily, SubspaceFamily, SubspaceSolve, ViolationReport,
};
pub use problem::{
    build_paper_problem, make_cyclic_gradients, regret_bound_rhs, two_sided_bound_rhs,
    BoundReport, NoiseSpec, OnlineLoss, QuadraticProblem, ReducedProblem, SpectrumSpec,
};
