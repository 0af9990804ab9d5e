//! Accessible information of quantum-state ensembles.
//!
//! Given states `ρ_j` sent with probabilities `tr ρ_j`, the crate searches
//! for the POVM that maximizes the mutual information between the label `j`
//! and the measurement outcome. The search is a steepest ascent that stays
//! on the set of POVMs: each round conjugates the members with
//! gradient-dependent operators and renormalizes with `S^{-1/2}`.
//!
//! Modules:
//! - [`linalg`]: Hermitian matrices, inverse square roots, tensor products,
//!   partial traces, Pauli operators.
//! - [`ensemble`]: ensembles, POVMs, joint probabilities, information
//!   functionals, random POVMs, merging of equivalent members.
//! - [`optimizer`]: gradient operators, ascent rounds, diagnostics and the
//!   optimization driver.
//! - [`scenarios`]: the ad-hoc qutrit pair and the tomographic key
//!   distribution scenario with their closed-form results.
//! - [`io`]: JSON and CSV formats.

pub mod ensemble;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod scenarios;

pub use ensemble::{
    joint_probabilities, merge_equivalent, mutual_information, perturb_ignorant, random_povm,
    success_rate, Ensemble, JointDistribution, LogBase, Povm,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, HermMatrix};
pub use optimizer::{
    ascent_gain, davies_bound, gradient_operators, iterate_round, lagrange_operator, optimize,
    stationarity_residual, GradientFunctional, IterationConfig, KStrategy, Objective,
    OptimizationResult, TraceRow,
};
