//! Contractive iterative solvers for the SPD a-operator and direct-solve oracles.
//!
//! One solver step is either one preconditioned CG iteration with the local
//! additive multilevel preconditioner or one symmetric V-cycle. The CG state
//! lives in an [`Iteration`] that is created once per right-hand side.

mod direct;
mod hierarchy;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::fem::{CsrMatrix, axpy, dot};

pub use direct::{DenseCholesky, solve_direct, solve_spd};
pub use hierarchy::{DEFAULT_COARSE_CAP, Hierarchy, changed_dofs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("operator is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("negative or zero curvature p^T K p = {curvature:e} in preconditioned CG")]
    NegativeCurvature { curvature: f64 },
    #[error("preconditioner is not positive definite (r^T z = {value:e})")]
    IndefinitePreconditioner { value: f64 },
    #[error("direct solve failed: {0}")]
    Factorization(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("coarsest level has {dim} dofs, above the cap of {cap}")]
    CoarseTooLarge { dim: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    PcgBpx,
    MgVcycle,
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pcg-bpx" => Ok(Self::PcgBpx),
            "mg-vcycle" => Ok(Self::MgVcycle),
            other => Err(format!("unknown solver kind '{other}' (expected pcg-bpx or mg-vcycle)")),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PcgBpx => "pcg-bpx",
            Self::MgVcycle => "mg-vcycle",
        })
    }
}

/// Iteration state for one fixed right-hand side.
#[derive(Debug, Clone)]
pub struct Iteration<'a> {
    kind: SolverKind,
    hierarchy: &'a Hierarchy,
    rhs: Vec<f64>,
    residual: Vec<f64>,
    direction: Vec<f64>,
    rz: f64,
    steps: usize,
}

impl<'a> Iteration<'a> {
    /// Prepares iterating on `K x = rhs` from the start vector `w`, with `K`
    /// the finest operator of `hierarchy`.
    pub fn new(kind: SolverKind, hierarchy: &'a Hierarchy, rhs: Vec<f64>, w: &[f64]) -> Result<Self, SolverError> {
        let k = hierarchy.finest();
        for len in [rhs.len(), w.len()] {
            if len != k.dim() {
                return Err(SolverError::Dimension { expected: k.dim(), found: len });
            }
        }
        let kw = k.mul_vec(w);
        let residual: Vec<f64> = rhs.iter().zip(&kw).map(|(b, a)| b - a).collect();
        let (direction, rz) = match kind {
            SolverKind::PcgBpx => {
                let z = hierarchy.bpx(&residual);
                let rz = dot(&residual, &z);
                (z, rz)
            }
            SolverKind::MgVcycle => (Vec::new(), 0.0),
        };
        let it = Self { kind, hierarchy, rhs, residual, direction, rz, steps: 0 };
        if kind == SolverKind::PcgBpx && it.rz < 0.0 {
            return Err(SolverError::IndefinitePreconditioner { value: it.rz });
        }
        Ok(it)
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    /// Performs one solver step, updating `w` in place. A zero residual leaves
    /// `w` unchanged.
    pub fn step(&mut self, w: &mut [f64]) -> Result<(), SolverError> {
        self.steps += 1;
        let k = self.hierarchy.finest();
        match self.kind {
            SolverKind::PcgBpx => {
                if self.rz == 0.0 {
                    return Ok(());
                }
                let q = k.mul_vec(&self.direction);
                let curvature = dot(&self.direction, &q);
                if curvature <= 0.0 || !curvature.is_finite() {
                    return Err(SolverError::NegativeCurvature { curvature });
                }
                let alpha = self.rz / curvature;
                axpy(alpha, &self.direction, w);
                axpy(-alpha, &q, &mut self.residual);
                let z = self.hierarchy.bpx(&self.residual);
                let rz = dot(&self.residual, &z);
                if rz < 0.0 {
                    return Err(SolverError::IndefinitePreconditioner { value: rz });
                }
                let beta = rz / self.rz;
                for (p, zi) in self.direction.iter_mut().zip(&z) {
                    *p = zi + beta * *p;
                }
                self.rz = rz;
            }
            SolverKind::MgVcycle => {
                let e = self.hierarchy.vcycle(&self.residual);
                axpy(1.0, &e, w);
                let kw = k.mul_vec(w);
                for ((r, b), a) in self.residual.iter_mut().zip(&self.rhs).zip(&kw) {
                    *r = b - a;
                }
            }
        }
        Ok(())
    }
}

/// One solver step from `w` with a fresh iteration state.
pub fn solver_step(kind: SolverKind, hierarchy: &Hierarchy, rhs: &[f64], w: &[f64]) -> Result<Vec<f64>, SolverError> {
    let mut out = w.to_vec();
    Iteration::new(kind, hierarchy, rhs.to_vec(), w)?.step(&mut out)?;
    Ok(out)
}

/// Iterates until the Euclidean residual drops below `tol * |rhs|`.
pub fn solve_iterative(
    kind: SolverKind,
    hierarchy: &Hierarchy,
    rhs: &[f64],
    w: &[f64],
    tol: f64,
    max_steps: usize,
) -> Result<(Vec<f64>, usize), SolverError> {
    let mut x = w.to_vec();
    let mut it = Iteration::new(kind, hierarchy, rhs.to_vec(), w)?;
    let target = tol * dot(rhs, rhs).sqrt();
    while dot(it.residual(), it.residual()).sqrt() > target && it.steps() < max_steps {
        it.step(&mut x)?;
    }
    Ok((x, it.steps()))
}

/// Largest observed one-step energy contraction `|||w* - w_j||| / |||w* - w_{j-1}|||`
/// over `trials` random starts and `steps` steps each, with `w*` from a direct
/// solve. Steps starting at the exact solution (zero error) are skipped, so a
/// measurement without any defined ratio returns 0.
pub fn measure_contraction(
    kind: SolverKind,
    hierarchy: &Hierarchy,
    rhs: &[f64],
    trials: usize,
    steps: usize,
    rng: &mut impl Rng,
) -> Result<f64, SolverError> {
    let k = hierarchy.finest();
    let exact = solve_spd(k, rhs)?;
    let err = |w: &[f64]| energy_error(k, &exact, w);
    let mut q: f64 = 0.0;
    for _ in 0..trials {
        let mut w: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut it = Iteration::new(kind, hierarchy, rhs.to_vec(), &w)?;
        let mut prev = err(&w);
        for _ in 0..steps {
            // Stop before the error reaches roundoff, where ratios are meaningless.
            if prev <= 1e-10 * (1.0 + dot(&exact, &exact).sqrt()) {
                break;
            }
            it.step(&mut w)?;
            let now = err(&w);
            q = q.max(now / prev);
            prev = now;
        }
    }
    Ok(q)
}

fn energy_error(k: &CsrMatrix, exact: &[f64], w: &[f64]) -> f64 {
    let d: Vec<f64> = exact.iter().zip(w).map(|(a, b)| a - b).collect();
    k.bilinear(&d, &d).max(0.0).sqrt()
}
