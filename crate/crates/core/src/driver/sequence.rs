use std::sync::Arc;

use super::{DriverError, dorfler_mark};
use crate::estimator::estimate;
use crate::fem::{FeSpace, ProblemData, Prolongation, assemble_system};
use crate::mesh::Triangulation;
use crate::solver::{Hierarchy, changed_dofs, solve_direct};
use crate::zarantonello::ZarantonelloStep;

/// Adaptively refined meshes driven by exact discrete solutions, with the
/// solver hierarchy kept in step. Useful for studying the algebraic solver
/// and the symmetrization in isolation from the full algorithm.
pub struct LevelSequence {
    data: ProblemData,
    delta: f64,
    space: FeSpace,
    step: ZarantonelloStep,
    hierarchy: Hierarchy,
}

impl LevelSequence {
    pub fn new(
        mesh: &Triangulation,
        data: ProblemData,
        degree: usize,
        delta: f64,
        coarse_cap: usize,
    ) -> Result<Self, DriverError> {
        let space = FeSpace::new(Arc::new(mesh.clone()), degree)?;
        let step = ZarantonelloStep::from_system(delta, assemble_system(&space, &data)?)?;
        let hierarchy = Hierarchy::new(step.stiffness().clone(), coarse_cap)?;
        Ok(Self { data, delta, space, step, hierarchy })
    }

    pub fn space(&self) -> &FeSpace {
        &self.space
    }

    pub fn step(&self) -> &ZarantonelloStep {
        &self.step
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.hierarchy
    }

    /// Marks by the estimator of the discrete solution on the current mesh
    /// and refines once. Returns `false` (and leaves the state unchanged) when
    /// the estimator vanishes.
    pub fn refine(&mut self, theta: f64) -> Result<bool, DriverError> {
        let u = solve_direct(self.step.nonsym(), self.step.load())?;
        let marked = dorfler_mark(&estimate(&self.space, &self.data, &u)?, theta)?;
        if marked.is_empty() {
            return Ok(false);
        }
        let coarse_mesh = self.space.mesh_arc().clone();
        let r = coarse_mesh.refine(&marked)?;
        let fine = FeSpace::new(Arc::new(r.mesh.clone()), self.space.degree())?;
        let p = Prolongation::from_refinement(&self.space, &fine, &r)?.into_matrix();
        let local = changed_dofs(&fine, &coarse_mesh, &r);
        let step = ZarantonelloStep::from_system(self.delta, assemble_system(&fine, &self.data)?)?;
        self.hierarchy.push(step.stiffness().clone(), p, local)?;
        self.space = fine;
        self.step = step;
        Ok(true)
    }
}
