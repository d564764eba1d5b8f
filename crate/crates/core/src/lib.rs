//! Verification and simulation toolkit for the charging power of quantum
//! batteries and its variance/covariance bound.
//!
//! The composite space is ordered `W ⊗ S ⊗ B ⊗ A` with the battery `W` first.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod campaign;
pub mod cases;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod literal;
pub mod operator;
pub mod scenario;
pub mod search;
pub mod structure;
pub mod tol;

pub use error::{Error, Result};
pub use operator::{DensityMatrix, EigenDecomposition, HermitianOperator};
pub use structure::TensorStructure;
