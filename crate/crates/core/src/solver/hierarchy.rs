use std::sync::Arc;

use super::SolverError;
use super::direct::DenseCholesky;
use crate::fem::{CsrMatrix, FeSpace, SparseRect};
use crate::mesh::{Refinement, Triangulation};

/// Default cap on the dimension of the coarsest level.
pub const DEFAULT_COARSE_CAP: usize = 500;

#[derive(Debug)]
struct Level {
    stiffness: Arc<CsrMatrix>,
    inv_diag: Vec<f64>,
    /// Prolongation from the previous level (absent on level 0).
    prolongation: Option<SparseRect>,
    /// Free dofs of this level whose basis functions are new or changed.
    local: Vec<usize>,
}

/// Nested sequence of a-operators with prolongations between consecutive
/// levels. The last level is the current (finest) one.
#[derive(Debug)]
pub struct Hierarchy {
    levels: Vec<Level>,
    coarse: DenseCholesky,
}

fn inverse_diagonal(k: &CsrMatrix) -> Result<Vec<f64>, SolverError> {
    k.diagonal()
        .into_iter()
        .map(|d| if d > 0.0 && d.is_finite() { Ok(1.0 / d) } else { Err(SolverError::NotPositiveDefinite) })
        .collect()
}

impl Hierarchy {
    /// Starts a hierarchy from the coarsest a-operator, which is factorized densely.
    pub fn new(stiffness: Arc<CsrMatrix>, coarse_cap: usize) -> Result<Self, SolverError> {
        if stiffness.dim() > coarse_cap {
            return Err(SolverError::CoarseTooLarge { dim: stiffness.dim(), cap: coarse_cap });
        }
        let coarse = DenseCholesky::new(&stiffness)?;
        let inv_diag = inverse_diagonal(&stiffness)?;
        let local = (0..stiffness.dim()).collect();
        Ok(Self { levels: vec![Level { stiffness, inv_diag, prolongation: None, local }], coarse })
    }

    /// Appends a finer level. `prolongation` maps the current finest level into
    /// the new one and `local` lists the new level's smoothing dofs.
    pub fn push(&mut self, stiffness: Arc<CsrMatrix>, prolongation: SparseRect, local: Vec<usize>) -> Result<(), SolverError> {
        let prev = self.finest().dim();
        if prolongation.n_cols != prev || prolongation.n_rows != stiffness.dim() {
            return Err(SolverError::Dimension { expected: prev, found: prolongation.n_cols });
        }
        debug_assert!(local.iter().all(|&i| i < stiffness.dim()));
        let inv_diag = inverse_diagonal(&stiffness)?;
        self.levels.push(Level { stiffness, inv_diag, prolongation: Some(prolongation), local });
        Ok(())
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &CsrMatrix {
        &self.levels.last().unwrap().stiffness
    }

    pub fn dim(&self) -> usize {
        self.finest().dim()
    }

    /// Sizes of the smoothing sets per level.
    pub fn local_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.local.len()).collect()
    }

    /// Residuals restricted to every level, coarsest first.
    fn restrict_all(&self, r: &[f64]) -> Vec<Vec<f64>> {
        let mut out = vec![r.to_vec()];
        for level in self.levels.iter().skip(1).rev() {
            let next = level.prolongation.as_ref().unwrap().apply_transpose(out.last().unwrap());
            out.push(next);
        }
        out.reverse();
        out
    }

    /// Additive multilevel preconditioner: exact solve on level 0 plus local
    /// Jacobi on every finer level.
    pub fn bpx(&self, r: &[f64]) -> Vec<f64> {
        let rs = self.restrict_all(r);
        let mut z = self.coarse.solve(&rs[0]);
        for (level, rl) in self.levels.iter().zip(&rs).skip(1) {
            let mut next = level.prolongation.as_ref().unwrap().apply(&z);
            for &i in &level.local {
                next[i] += level.inv_diag[i] * rl[i];
            }
            z = next;
        }
        z
    }

    /// One symmetric V-cycle for `K e = b` with zero initial guess: forward
    /// Gauss-Seidel on the local dofs before the coarse correction and
    /// backward Gauss-Seidel after it.
    pub fn vcycle(&self, b: &[f64]) -> Vec<f64> {
        self.vcycle_level(self.levels.len() - 1, b)
    }

    fn vcycle_level(&self, l: usize, b: &[f64]) -> Vec<f64> {
        if l == 0 {
            return self.coarse.solve(b);
        }
        let level = &self.levels[l];
        let k = &level.stiffness;
        let mut e = vec![0.0; b.len()];
        for &i in &level.local {
            gauss_seidel_update(k, &level.inv_diag, b, &mut e, i);
        }
        let ke = k.mul_vec(&e);
        let r: Vec<f64> = b.iter().zip(&ke).map(|(x, y)| x - y).collect();
        let p = level.prolongation.as_ref().unwrap();
        let c = self.vcycle_level(l - 1, &p.apply_transpose(&r));
        p.apply_add(&c, &mut e);
        for &i in level.local.iter().rev() {
            gauss_seidel_update(k, &level.inv_diag, b, &mut e, i);
        }
        e
    }
}

fn gauss_seidel_update(k: &CsrMatrix, inv_diag: &[f64], b: &[f64], e: &mut [f64], i: usize) {
    let (cols, vals) = k.row(i);
    let mut s = b[i];
    for (&j, &v) in cols.iter().zip(vals) {
        s -= v * e[j];
    }
    e[i] += inv_diag[i] * s;
}

/// Free dofs of `fine` that belong to elements created by the refinement.
pub fn changed_dofs(fine: &FeSpace, coarse_mesh: &Triangulation, refinement: &Refinement) -> Vec<usize> {
    let unchanged = refinement.unchanged(coarse_mesh);
    let mut mark = vec![false; fine.dim()];
    for (e, &same) in unchanged.iter().enumerate() {
        if !same {
            for &d in fine.element_dofs(e) {
                if let Some(i) = fine.free_index(d) {
                    mark[i] = true;
                }
            }
        }
    }
    mark.iter().enumerate().filter_map(|(i, &m)| m.then_some(i)).collect()
}
