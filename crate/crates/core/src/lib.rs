//! Linear support vector machines trained under an explicit budget on the
//! number of samples that violate the unit margin.
//!
//! The solver is a majorization penalty method whose subproblems are
//! strongly convex quadratics, solved directly for narrow data and with
//! matrix-free conjugate gradients otherwise. The crate also carries an
//! svmlight reader, a dual coordinate descent hinge-loss baseline, and a
//! benchmark harness.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod bench;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod linalg;
pub mod model;
pub mod mpm;
pub mod scalar;

pub use data::{DatasetStats, Label, LabelMap};
pub use error::{Error, Result};
pub use geometry::{g_value, partition_indices, project_omega_s, IndexPartition};
pub use linalg::CgConfig;
pub use mpm::{mpm_train, Sparsity, SolverPath, Termination, TrainReport};
pub use scalar::Scalar;

pub type SparseDataset = data::SparseDataset<f64>;
pub type RawDataset = data::RawDataset<f64>;
pub type CsrMatrix = data::CsrMatrix<f64>;
pub type ModelTheta = model::ModelTheta<f64>;
pub type ProjectionResult = geometry::ProjectionResult<f64>;
pub type MpmConfig = mpm::MpmConfig<f64>;
pub type SolveOutcome = linalg::SolveOutcome<f64>;
pub type RegularizedNormalOperator<'a> = linalg::RegularizedNormalOperator<'a, f64>;
pub type DcdConfig = eval::DcdConfig<f64>;
