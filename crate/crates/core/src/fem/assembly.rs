//! Assembly of the principal part `a(u, v) = (A grad u, grad v)`, the full
//! form `b(u, v) = a(u, v) + (b . grad u + c u, v)`, the load functional
//! `F(v) = (f, v) + (fvec, grad v)` and the energy norm `a(v, v)^{1/2}`.

use super::space::{FeSpace, NONE, QuadratureTable};
use super::{CsrMatrix, FemError, ProblemData};

/// Default number of extra quadrature degrees reserved for variable data.
pub const DEFAULT_DATA_DEGREE: usize = 2;

/// The discrete forms and the load vector on the free dofs of a space.
#[derive(Debug, Clone)]
pub struct System {
    pub stiffness: CsrMatrix,
    pub nonsym: CsrMatrix,
    pub load: Vec<f64>,
}

/// Sparsity pattern of all free-dof couplings.
fn pattern(space: &FeSpace) -> CsrMatrix {
    let free = space.free_index_raw();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); space.dim()];
    for e in 0..space.mesh().n_elements() {
        let dofs = space.element_dofs(e);
        for &di in dofs {
            let i = free[di];
            if i == NONE {
                continue;
            }
            for &dj in dofs {
                let j = free[dj];
                if j != NONE {
                    rows[i].push(j);
                }
            }
        }
    }
    for r in &mut rows {
        r.sort_unstable();
        r.dedup();
    }
    CsrMatrix::from_pattern(rows)
}

fn check_diffusion(a: [[f64; 2]; 2]) -> Result<(), FemError> {
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FemError::NonFinite("diffusion"));
    }
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if (a[0][1] - a[1][0]).abs() > 1e-12 * scale {
        return Err(FemError::NonSymmetricDiffusion);
    }
    if !(a[0][0] > 0.0 && a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0) {
        return Err(FemError::NotPositiveDefinite);
    }
    Ok(())
}

pub(crate) fn quadrature_degree(space: &FeSpace, data: &ProblemData) -> usize {
    2 * space.degree() + data.data_degree
}

struct Parts {
    stiffness: bool,
    lower_order: bool,
}

fn assemble(space: &FeSpace, data: &ProblemData, parts: Parts) -> Result<CsrMatrix, FemError> {
    let mut mat = pattern(space);
    let table = QuadratureTable::new(space.basis(), quadrature_degree(space, data));
    let n = space.local_len();
    let free = space.free_index_raw();
    let mut local = vec![0.0; n * n];
    let mut grads = vec![[0.0; 2]; n];
    for e in 0..space.mesh().n_elements() {
        let geo = space.geometry(e);
        local.fill(0.0);
        for (q, vals) in table.values.iter().enumerate() {
            let x = geo.map(table.rule.points[q]);
            let w = table.rule.weights[q] * geo.det.abs();
            for (g, rg) in grads.iter_mut().zip(&vals.grads) {
                *g = geo.grad(*rg);
            }
            if parts.stiffness {
                let a = (data.diffusion)(x);
                check_diffusion(a)?;
                for j in 0..n {
                    let ag = [
                        a[0][0] * grads[j][0] + a[0][1] * grads[j][1],
                        a[1][0] * grads[j][0] + a[1][1] * grads[j][1],
                    ];
                    for i in 0..n {
                        local[i * n + j] += w * (ag[0] * grads[i][0] + ag[1] * grads[i][1]);
                    }
                }
            }
            if parts.lower_order {
                let b = (data.convection)(x);
                let c = (data.reaction)(x);
                if !(b[0].is_finite() && b[1].is_finite() && c.is_finite()) {
                    return Err(FemError::NonFinite("convection/reaction"));
                }
                for j in 0..n {
                    let t = b[0] * grads[j][0] + b[1] * grads[j][1] + c * vals.values[j];
                    for i in 0..n {
                        local[i * n + j] += w * t * vals.values[i];
                    }
                }
            }
        }
        let dofs = space.element_dofs(e);
        for (li, &di) in dofs.iter().enumerate() {
            let i = free[di];
            if i == NONE {
                continue;
            }
            for (lj, &dj) in dofs.iter().enumerate() {
                let j = free[dj];
                if j != NONE {
                    mat.add(i, j, local[li * n + lj]);
                }
            }
        }
    }
    Ok(mat)
}

/// Stiffness matrix of the symmetric principal part on the free dofs.
pub fn assemble_a(space: &FeSpace, data: &ProblemData) -> Result<CsrMatrix, FemError> {
    let mut k = assemble(space, data, Parts { stiffness: true, lower_order: false })?;
    if !k.check_symmetric(1e-12) {
        return Err(FemError::NonSymmetricDiffusion);
    }
    Ok(k)
}

/// Matrix of the full nonsymmetric form `b(u, v)`; entry `(i, j) = b(phi_j, phi_i)`.
pub fn assemble_b(space: &FeSpace, data: &ProblemData) -> Result<CsrMatrix, FemError> {
    assemble(space, data, Parts { stiffness: true, lower_order: true })
}

/// Convection-reaction part only (`b - a`), sharing the pattern of the others.
pub fn assemble_lower_order(space: &FeSpace, data: &ProblemData) -> Result<CsrMatrix, FemError> {
    assemble(space, data, Parts { stiffness: false, lower_order: true })
}

/// Load vector `F(phi_i) = (f, phi_i) + (fvec, grad phi_i)` on the free dofs.
pub fn assemble_load(space: &FeSpace, data: &ProblemData) -> Result<Vec<f64>, FemError> {
    let table = QuadratureTable::new(space.basis(), quadrature_degree(space, data));
    let n = space.local_len();
    let free = space.free_index_raw();
    let mut rhs = vec![0.0; space.dim()];
    let mut local = vec![0.0; n];
    for e in 0..space.mesh().n_elements() {
        let geo = space.geometry(e);
        local.fill(0.0);
        for (q, vals) in table.values.iter().enumerate() {
            let x = geo.map(table.rule.points[q]);
            let w = table.rule.weights[q] * geo.det.abs();
            let f = (data.source)(x);
            let fv = (data.flux_source)(x);
            if !(f.is_finite() && fv[0].is_finite() && fv[1].is_finite()) {
                return Err(FemError::NonFinite("source"));
            }
            for i in 0..n {
                let g = geo.grad(vals.grads[i]);
                local[i] += w * (f * vals.values[i] + fv[0] * g[0] + fv[1] * g[1]);
            }
        }
        for (li, &d) in space.element_dofs(e).iter().enumerate() {
            let i = free[d];
            if i != NONE {
                rhs[i] += local[li];
            }
        }
    }
    Ok(rhs)
}

/// Assembles both forms and the load in one pass.
pub fn assemble_system(space: &FeSpace, data: &ProblemData) -> Result<System, FemError> {
    let stiffness = assemble_a(space, data)?;
    let lower = assemble_lower_order(space, data)?;
    let nonsym = stiffness.add_scaled(1.0, &lower);
    let load = assemble_load(space, data)?;
    Ok(System { stiffness, nonsym, load })
}

/// `|||v||| = (v^T K v)^{1/2}` for the stiffness matrix `K` of the a-form.
pub fn energy_norm(stiffness: &CsrMatrix, v: &[f64]) -> Result<f64, FemError> {
    if v.len() != stiffness.dim() {
        return Err(FemError::Dimension { expected: stiffness.dim(), found: v.len() });
    }
    Ok(stiffness.bilinear(v, v).max(0.0).sqrt())
}

/// Energy norm of `u - w`.
pub fn energy_distance(stiffness: &CsrMatrix, u: &[f64], w: &[f64]) -> f64 {
    let d: Vec<f64> = u.iter().zip(w).map(|(a, b)| a - b).collect();
    stiffness.bilinear(&d, &d).max(0.0).sqrt()
}
