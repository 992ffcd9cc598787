//! Zarantonello symmetrization of the nonsymmetric Galerkin problem.
//!
//! For a damping parameter `delta > 0` the map `Phi(delta; u)` is the solution
//! `x` of the SPD problem `a(x, v) = a(u, v) + delta [F(v) - b(u, v)]`. The
//! discrete solution of `b(u, v) = F(v)` is its only fixed point, and the map
//! contracts in the energy norm for `0 < delta < 2 alpha / L^2`.

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::fem::{CsrMatrix, System};
use crate::solver::{SolverError, solve_spd};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZarantonelloError {
    #[error("damping parameter must be positive and finite, got {0}")]
    Delta(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("at least {min} samples are required, got {got}")]
    Samples { min: usize, got: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Operators of one Zarantonello step on a fixed space.
#[derive(Debug, Clone)]
pub struct ZarantonelloStep {
    delta: f64,
    stiffness: Arc<CsrMatrix>,
    nonsym: Arc<CsrMatrix>,
    load: Arc<Vec<f64>>,
}

/// Sampled ellipticity and continuity constants of `b` in the energy norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    pub alpha: f64,
    pub continuity: f64,
    /// `alpha / L^2`, the minimizer of the contraction bound `1 - delta (2 alpha - delta L^2)`.
    pub delta_star: f64,
}

impl DeltaEstimate {
    /// Contraction bound `(1 - delta (2 alpha - delta L^2))^{1/2}` of the exact map,
    /// or `None` when it is not below 1.
    pub fn contraction_bound(&self, delta: f64) -> Option<f64> {
        let q2 = 1.0 - delta * (2.0 * self.alpha - delta * self.continuity * self.continuity);
        (q2 < 1.0).then(|| q2.max(0.0).sqrt())
    }
}

impl ZarantonelloStep {
    pub fn new(
        delta: f64,
        stiffness: Arc<CsrMatrix>,
        nonsym: Arc<CsrMatrix>,
        load: Arc<Vec<f64>>,
    ) -> Result<Self, ZarantonelloError> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(ZarantonelloError::Delta(delta));
        }
        let n = stiffness.dim();
        for found in [nonsym.dim(), load.len()] {
            if found != n {
                return Err(ZarantonelloError::Dimension { expected: n, found });
            }
        }
        Ok(Self { delta, stiffness, nonsym, load })
    }

    pub fn from_system(delta: f64, system: System) -> Result<Self, ZarantonelloError> {
        Self::new(delta, Arc::new(system.stiffness), Arc::new(system.nonsym), Arc::new(system.load))
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn stiffness(&self) -> &Arc<CsrMatrix> {
        &self.stiffness
    }

    pub fn nonsym(&self) -> &Arc<CsrMatrix> {
        &self.nonsym
    }

    pub fn load(&self) -> &Arc<Vec<f64>> {
        &self.load
    }

    pub fn dim(&self) -> usize {
        self.stiffness.dim()
    }

    /// `G = K u + delta (F - B u)`, the right-hand side with `a(Phi(u), v) = G(v)`.
    pub fn step_rhs(&self, u: &[f64]) -> Result<Vec<f64>, ZarantonelloError> {
        if u.len() != self.dim() {
            return Err(ZarantonelloError::Dimension { expected: self.dim(), found: u.len() });
        }
        let ku = self.stiffness.mul_vec(u);
        let bu = self.nonsym.mul_vec(u);
        Ok(ku.iter().zip(&bu).zip(self.load.iter()).map(|((k, b), f)| k + self.delta * (f - b)).collect())
    }

    /// `Phi(delta; u)` computed with a direct solve.
    pub fn exact_map(&self, u: &[f64]) -> Result<Vec<f64>, ZarantonelloError> {
        Ok(solve_spd(&self.stiffness, &self.step_rhs(u)?)?)
    }

    /// Samples `b(v, v) / a(v, v)` and `|b(u, v)| / (|||u||| |||v|||)` over
    /// random coefficient vectors. Pairs `(v, v)` are included in the
    /// continuity sample, so `L >= alpha` always holds.
    pub fn estimate_delta(&self, samples: usize, rng: &mut impl Rng) -> Result<DeltaEstimate, ZarantonelloError> {
        if samples < 10 {
            return Err(ZarantonelloError::Samples { min: 10, got: samples });
        }
        let n = self.dim();
        if n == 0 {
            return Ok(DeltaEstimate { alpha: 1.0, continuity: 1.0, delta_star: 1.0 });
        }
        let mut random = || -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
        let (mut alpha, mut cont) = (f64::INFINITY, 0.0f64);
        for _ in 0..samples {
            let (u, v) = (random(), random());
            let (au, av) = (self.stiffness.bilinear(&u, &u).sqrt(), self.stiffness.bilinear(&v, &v).sqrt());
            if au == 0.0 || av == 0.0 {
                continue;
            }
            let rq = self.nonsym.bilinear(&v, &v) / (av * av);
            alpha = alpha.min(rq);
            cont = cont.max(rq.abs()).max(self.nonsym.bilinear(&v, &u).abs() / (au * av));
        }
        Ok(DeltaEstimate { alpha, continuity: cont, delta_star: alpha / (cont * cont) })
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::fem::{FeSpace, ProblemData, assemble_system, energy_distance};
    use crate::mesh::l_shape;
    use crate::solver::solve_direct;

    fn lshape_step(delta: f64, data: &ProblemData) -> ZarantonelloStep {
        let space = FeSpace::new(Arc::new(l_shape().uniform_refine(3)), 1).unwrap();
        ZarantonelloStep::from_system(delta, assemble_system(&space, data).unwrap()).unwrap()
    }

    fn dcr() -> ProblemData {
        ProblemData::poisson(1.0).with_convection(|x| x).with_reaction(|_| 1.0)
    }

    #[test]
    fn rejects_bad_delta() {
        let k = Arc::new(CsrMatrix::identity(2));
        for d in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                ZarantonelloStep::new(d, k.clone(), k.clone(), Arc::new(vec![0.0; 2])),
                Err(ZarantonelloError::Delta(_))
            ));
        }
        let z = ZarantonelloStep::new(0.5, k.clone(), k, Arc::new(vec![0.0; 2])).unwrap();
        assert!(z.step_rhs(&[1.0]).is_err());
    }

    #[test]
    fn discrete_solution_is_a_fixed_point() {
        let z = lshape_step(0.5, &dcr());
        let u = solve_direct(z.nonsym(), z.load()).unwrap();
        let g = z.step_rhs(&u).unwrap();
        let ku = z.stiffness().mul_vec(&u);
        assert!(g.iter().zip(&ku).all(|(a, b)| (a - b).abs() < 1e-12));
        let phi = z.exact_map(&u).unwrap();
        let norm = z.stiffness().bilinear(&u, &u).sqrt();
        assert!(energy_distance(z.stiffness(), &u, &phi) <= 1e-9 * norm);
    }

    #[test]
    fn symmetric_problem_with_unit_delta_is_solved_in_one_step() {
        let z = lshape_step(1.0, &ProblemData::poisson(1.0));
        let w: Vec<f64> = (0..z.dim()).map(|i| (i as f64).sin()).collect();
        let g = z.step_rhs(&w).unwrap();
        assert!(g.iter().zip(z.load().iter()).all(|(a, b)| (a - b).abs() < 1e-12));
        let est = z.estimate_delta(50, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!((est.alpha - 1.0).abs() < 1e-12 && (est.continuity - 1.0).abs() < 1e-12);
        assert!((est.delta_star - 1.0).abs() < 1e-11);
    }

    #[test]
    fn exact_map_contracts_on_lshape_data() {
        let z = lshape_step(0.5, &dcr());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<f64> = (0..z.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..z.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (pu, pw) = (z.exact_map(&u).unwrap(), z.exact_map(&w).unwrap());
        let q = energy_distance(z.stiffness(), &pu, &pw) / energy_distance(z.stiffness(), &u, &w);
        assert!(q < 1.0, "q = {q}");
        let est = z.estimate_delta(200, &mut rng).unwrap();
        assert!(0.0 < est.alpha && est.alpha <= est.continuity);
        assert!(0.0 < est.delta_star && est.delta_star <= 1.0);
    }

    #[test]
    fn delta_estimate_is_homogeneous() {
        let z = lshape_step(0.5, &dcr());
        let mut scaled = (**z.nonsym()).clone();
        scaled.scale(3.0);
        let zs = ZarantonelloStep::new(0.5, z.stiffness().clone(), Arc::new(scaled), z.load().clone()).unwrap();
        let a = z.estimate_delta(30, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = zs.estimate_delta(30, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!((b.alpha - 3.0 * a.alpha).abs() < 1e-12 * b.alpha);
        assert!((b.continuity - 3.0 * a.continuity).abs() < 1e-12 * b.continuity);
        assert!((b.delta_star - a.delta_star / 3.0).abs() < 1e-12);
    }
}
