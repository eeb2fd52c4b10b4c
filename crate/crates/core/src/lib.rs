//! Topological invariants of two-band non-Hermitian Bloch Hamiltonians, their
//! extraction from quench dynamics, and the dilation-based simulation of those
//! dynamics on a two-qubit unitary register.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod band;
pub mod dilation;
pub mod dynamics;
pub mod error;
pub mod extraction;
pub mod linalg;
pub mod pipeline;
pub mod topology;

pub use band::{eigensystem, Band, ComplexField, EigenSystem, ModelParams};
pub use error::{Error, Result};
