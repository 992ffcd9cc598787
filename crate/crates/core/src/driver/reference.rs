use std::sync::Arc;

use super::{DriverError, StepRecord};
use crate::fem::{FeSpace, ProblemData, Prolongation, assemble_system, energy_distance};
use crate::mesh::MarkedSet;
use crate::solver::solve_direct;

/// Level data kept for the comparison with the reference solution.
pub(super) struct History {
    spaces: Vec<FeSpace>,
    /// `parents[l]` maps the elements of level `l` to level `l - 1` (empty for `l = 0`).
    parents: Vec<Vec<usize>>,
    /// One vector per logged step, in step order.
    pub snapshots: Vec<Vec<f64>>,
}

impl History {
    pub fn new(space: FeSpace) -> Self {
        Self { spaces: vec![space], parents: vec![Vec::new()], snapshots: Vec::new() }
    }

    pub fn push_level(&mut self, space: FeSpace, parent: Vec<usize>) {
        self.spaces.push(space);
        self.parents.push(parent);
    }
}

/// Fills `ref_error` and `quasi_error` of every step using a direct solve on
/// the final mesh refined twice uniformly, with one polynomial degree more.
pub(super) fn reference_errors(
    history: &History,
    data: &ProblemData,
    degree: usize,
    steps: &mut [StepRecord],
) -> Result<(), DriverError> {
    let last = history.spaces.len() - 1;
    let finest = history.spaces[last].mesh();
    let r1 = finest.refine(&MarkedSet::all(finest.n_elements()))?;
    let r2 = r1.mesh.refine(&MarkedSet::all(r1.mesh.n_elements()))?;
    let mut parent: Vec<usize> = r2.parent.iter().map(|&p| r1.parent[p]).collect();
    let ref_space = FeSpace::new(Arc::new(r2.mesh), degree + 1)?;
    let sys = assemble_system(&ref_space, data)?;
    let u_ref = solve_direct(&sys.nonsym, &sys.load)?;

    for ell in (0..=last).rev() {
        let p = Prolongation::new(&history.spaces[ell], &ref_space, &parent)?;
        for (rec, v) in steps.iter_mut().zip(&history.snapshots).filter(|(r, _)| r.ell == ell) {
            let e = energy_distance(&sys.stiffness, &u_ref, &p.apply(v));
            rec.ref_error = Some(e);
            rec.quasi_error = Some(e + rec.alg_error.unwrap_or(0.0) + rec.eta);
        }
        if ell > 0 {
            parent = parent.iter().map(|&e| history.parents[ell][e]).collect();
        }
    }
    Ok(())
}
