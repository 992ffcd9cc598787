//! Lagrange finite elements on triangulations, with assembly and prolongation.

mod assembly;
mod basis;
mod problem;
mod prolong;
pub mod quadrature;
mod space;
mod sparse;

use thiserror::Error;

pub use assembly::{
    DEFAULT_DATA_DEGREE, System, assemble_a, assemble_b, assemble_load, assemble_lower_order, assemble_system,
    energy_distance, energy_norm,
};
pub use basis::{BasisValues, LagrangeBasis};
pub use problem::{MatrixField, ProblemData, ScalarField, VectorField};
pub use prolong::{Prolongation, prolong};
pub use space::{ElementGeometry, FeSpace, QuadratureTable};
pub use sparse::{CsrMatrix, SparseRect, axpy, dot, norm2, sub};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("polynomial degree must be at least 1, got {0}")]
    Degree(usize),
    #[error("diffusion matrix is not symmetric")]
    NonSymmetricDiffusion,
    #[error("diffusion matrix is not positive definite at a quadrature point")]
    NotPositiveDefinite,
    #[error("non-finite {0} value at a quadrature point")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("fine space is not built on a refinement of the coarse mesh")]
    NotNested,
}
