//! Stability of empirical risk minimization under perturbations of the
//! objective: solution correspondences, Mosco-type convergence probes and
//! quadratic-growth deviation bounds for convex problems on R^d.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`, with `F32*` variants for single precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod error;
pub mod linalg;
pub mod perturbations;
pub mod problems;
pub mod sampling;
pub mod scalar;
pub mod serde_ext;
pub mod solution_sets;
pub mod solvers;
pub mod stability;
pub mod suites;
pub mod trust_region;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use problems::{
    ConstraintSet, ConvexProblem, ConvexityAttestation, Loss, OracleLoss, QuadraticLoss, Regularizer,
};
pub use scalar::Scalar;
pub use solution_sets::{
    distance_to, growth_constant, select, solve_exact, Distance, GrowthCertificate, SelectionRule,
    SolutionSet, SolutionShape,
};

pub type Problem = ConvexProblem<f64>;
pub type Quadratic = QuadraticLoss<f64>;
pub type Constraint = ConstraintSet<f64>;
pub type Solutions = SolutionSet<f64>;
pub type Certificate = GrowthCertificate<f64>;

pub type F32Problem = ConvexProblem<f32>;
pub type F32Quadratic = QuadraticLoss<f32>;
pub type F32Solutions = SolutionSet<f32>;
