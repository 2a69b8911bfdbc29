//! Quasi-Newton updates with image-operator and projection-operator
//! modifications, iteration drivers, test problems, and a fixed-Hessian
//! laboratory of numerical oracles.

pub mod lab;
pub mod linalg;
pub mod operators;
pub mod problems;
pub mod solvers;
pub mod updates;

pub use linalg::{DenseMatrix, DenseVector, InnerProductWeight, LinalgError};
pub use operators::{CoefficientFamily, FallbackReason, OperatorMode, Regularization, StepLength};
pub use problems::{NonlinearSystem, SmoothProblem};
pub use solvers::{
    minimize, minimize_lbfgs, solve_system, InitialMatrix, IterationTrace, SolverConfig, SolverError, SolverStatus,
    StepRule, StoppingRule, SystemMethod,
};
pub use updates::{PairKind, SecantPair, UpdateError, UpdateForm, UpdateRule};
