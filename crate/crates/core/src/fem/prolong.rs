use super::space::{ElementGeometry, FeSpace, NONE};
use super::sparse::SparseRect;
use super::FemError;
use crate::mesh::Refinement;

/// Exact transfer of discrete functions from a coarse space to a space on a
/// refinement of its mesh (same polynomial degree or higher).
#[derive(Debug, Clone)]
pub struct Prolongation {
    matrix: SparseRect,
}

impl Prolongation {
    /// `parent[e]` is the coarse element containing fine element `e`.
    pub fn new(coarse: &FeSpace, fine: &FeSpace, parent: &[usize]) -> Result<Self, FemError> {
        let cm = coarse.mesh();
        let fm = fine.mesh();
        if parent.len() != fm.n_elements()
            || fm.n_vertices() < cm.n_vertices()
            || fm.vertices()[..cm.n_vertices()] != *cm.vertices()
            || fine.degree() < coarse.degree()
        {
            return Err(FemError::NotNested);
        }
        let mut rows: Vec<Option<Vec<(usize, f64)>>> = vec![None; fine.dim()];
        let coarse_free = coarse.free_index_raw();
        let fine_free = fine.free_index_raw();
        for (e, &p) in parent.iter().enumerate() {
            if p >= cm.n_elements() {
                return Err(FemError::NotNested);
            }
            let geo = ElementGeometry::new(cm.element_coords(p));
            let centroid = {
                let c = fm.element_coords(e);
                [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0]
            };
            let xi = geo.inverse_map(centroid);
            let tol = 1e-10;
            if xi[0] < -tol || xi[1] < -tol || xi[0] + xi[1] > 1.0 + tol {
                return Err(FemError::NotNested);
            }
            let cdofs = coarse.element_dofs(p);
            for &d in fine.element_dofs(e) {
                let i = fine_free[d];
                if i == NONE || rows[i].is_some() {
                    continue;
                }
                let xi = geo.inverse_map(fine.dof_coords()[d]);
                let vals = coarse.basis().eval(xi);
                let row = cdofs
                    .iter()
                    .zip(&vals.values)
                    .filter(|&(&cd, &v)| coarse_free[cd] != NONE && v.abs() > 1e-14)
                    .map(|(&cd, &v)| (coarse_free[cd], v))
                    .collect();
                rows[i] = Some(row);
            }
        }
        let rows = rows.into_iter().map(Option::unwrap_or_default).collect();
        Ok(Self { matrix: SparseRect::from_rows(coarse.dim(), rows) })
    }

    pub fn from_refinement(coarse: &FeSpace, fine: &FeSpace, refinement: &Refinement) -> Result<Self, FemError> {
        Self::new(coarse, fine, &refinement.parent)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.matrix.apply(v)
    }

    pub fn matrix(&self) -> &SparseRect {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseRect {
        self.matrix
    }
}

/// Prolongs `v` from `coarse` to `fine`, where `parent` maps fine elements to
/// their coarse ancestors.
pub fn prolong(coarse: &FeSpace, fine: &FeSpace, parent: &[usize], v: &[f64]) -> Result<Vec<f64>, FemError> {
    if v.len() != coarse.dim() {
        return Err(FemError::Dimension { expected: coarse.dim(), found: v.len() });
    }
    Ok(Prolongation::new(coarse, fine, parent)?.apply(v))
}
