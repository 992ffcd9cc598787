//! Adaptive finite elements for nonsymmetric second-order elliptic problems,
//! driven by an inexact Zarantonello symmetrization and a contractive
//! multilevel solver.

pub mod analysis;
pub mod axioms;
pub mod driver;
pub mod estimator;
pub mod fem;
pub mod mesh;
pub mod problems;
pub mod solver;
pub mod zarantonello;
