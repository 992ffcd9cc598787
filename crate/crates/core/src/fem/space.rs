use std::collections::HashMap;
use std::sync::Arc;

use super::FemError;
use super::basis::{BasisValues, LagrangeBasis};
use super::quadrature::TriangleRule;
use crate::mesh::{Triangulation, edge_key};

pub(crate) const NONE: usize = usize::MAX;

/// Affine map from the reference triangle onto one element.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: [f64; 2],
    /// Columns are `x1 - x0` and `x2 - x0`.
    pub jac: [[f64; 2]; 2],
    /// `J^{-T}`, maps reference gradients to physical gradients.
    pub inv_t: [[f64; 2]; 2],
    pub det: f64,
}

impl ElementGeometry {
    pub fn new([p0, p1, p2]: [[f64; 2]; 3]) -> Self {
        let jac = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let inv_t = [[jac[1][1] / det, -jac[1][0] / det], [-jac[0][1] / det, jac[0][0] / det]];
        Self { origin: p0, jac, inv_t, det }
    }

    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * xi[0] + self.jac[0][1] * xi[1],
            self.origin[1] + self.jac[1][0] * xi[0] + self.jac[1][1] * xi[1],
        ]
    }

    /// Reference coordinates of the physical point `x`.
    pub fn inverse_map(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        // J^{-1} = (J^{-T})^T
        [
            self.inv_t[0][0] * d[0] + self.inv_t[1][0] * d[1],
            self.inv_t[0][1] * d[0] + self.inv_t[1][1] * d[1],
        ]
    }

    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }

    /// Physical Hessian `[xx, xy, yy]` from a reference Hessian.
    pub fn hessian(&self, h: [f64; 3]) -> [f64; 3] {
        // H = J^{-T} H_ref J^{-1}
        let r = [[h[0], h[1]], [h[1], h[2]]];
        let t = self.inv_t;
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        s += t[i][k] * r[k][l] * t[j][l];
                    }
                }
                out[i][j] = s;
            }
        }
        [out[0][0], out[0][1], out[1][1]]
    }
}

/// Reference basis values at the points of a quadrature rule.
#[derive(Debug, Clone)]
pub struct QuadratureTable {
    pub rule: TriangleRule,
    pub values: Vec<BasisValues>,
}

impl QuadratureTable {
    pub fn new(basis: &LagrangeBasis, degree: usize) -> Self {
        let rule = TriangleRule::new(degree);
        let values = rule.points.iter().map(|&p| basis.eval(p)).collect();
        Self { rule, values }
    }
}

/// Lagrange finite element space of degree `m` with homogeneous Dirichlet
/// conditions on every boundary edge.
///
/// Global dof order: vertices (mesh order), then edge dofs (edges in order of
/// first appearance, `m - 1` per edge from the lower to the higher vertex
/// index), then interior dofs element by element. Coefficient vectors used
/// throughout the crate live on the free dofs only, in increasing global order.
#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<Triangulation>,
    basis: LagrangeBasis,
    n_dofs: usize,
    element_dofs: Vec<usize>,
    dof_coords: Vec<[f64; 2]>,
    free_index: Vec<usize>,
    free_dofs: Vec<usize>,
    edges: Vec<[usize; 2]>,
    edge_elements: Vec<[usize; 2]>,
    element_edges: Vec<[usize; 3]>,
    boundary_edge: Vec<bool>,
}

impl FeSpace {
    pub fn new(mesh: Arc<Triangulation>, degree: usize) -> Result<Self, FemError> {
        if degree == 0 {
            return Err(FemError::Degree(degree));
        }
        let basis = LagrangeBasis::new(degree);
        let m = degree;
        let nv = mesh.n_vertices();
        let ne = mesh.n_elements();
        let n_loc = basis.len();

        let mut edge_id: HashMap<[usize; 2], usize> = HashMap::with_capacity(2 * ne);
        let mut edges = Vec::new();
        let mut edge_elements = Vec::new();
        let mut element_edges = Vec::with_capacity(ne);
        for (e, &[a, b, c]) in mesh.elements().iter().enumerate() {
            let mut ids = [0; 3];
            for (slot, (p, q)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
                let key = edge_key(p, q);
                let id = *edge_id.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_elements.push([NONE, NONE]);
                    edges.len() - 1
                });
                if edge_elements[id][0] == NONE {
                    edge_elements[id][0] = e;
                } else {
                    edge_elements[id][1] = e;
                }
                ids[slot] = id;
            }
            element_edges.push(ids);
        }
        let mut boundary_edge = vec![false; edges.len()];
        for &[p, q] in mesh.boundary_edges() {
            if let Some(&id) = edge_id.get(&edge_key(p, q)) {
                boundary_edge[id] = true;
            }
        }

        let per_edge = m - 1;
        let per_elem = n_loc - 3 - 3 * per_edge;
        let n_dofs = nv + per_edge * edges.len() + per_elem * ne;
        let mut element_dofs = Vec::with_capacity(n_loc * ne);
        for (e, tri) in mesh.elements().iter().enumerate() {
            element_dofs.extend_from_slice(tri);
            for (slot, (p, q)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let id = element_edges[e][slot];
                let base = nv + per_edge * id;
                let forward = tri[p] < tri[q];
                for s in 0..per_edge {
                    element_dofs.push(if forward { base + s } else { base + per_edge - 1 - s });
                }
            }
            let base = nv + per_edge * edges.len() + per_elem * e;
            element_dofs.extend(base..base + per_elem);
        }

        let mut dof_coords = vec![[0.0; 2]; n_dofs];
        for (e, &[a, b, c]) in mesh.elements().iter().enumerate() {
            let (pa, pb, pc) = (mesh.vertices()[a], mesh.vertices()[b], mesh.vertices()[c]);
            for i in 0..n_loc {
                let l = basis.node_barycentric(i);
                dof_coords[element_dofs[e * n_loc + i]] = [
                    l[0] * pa[0] + l[1] * pb[0] + l[2] * pc[0],
                    l[0] * pa[1] + l[1] * pb[1] + l[2] * pc[1],
                ];
            }
        }

        let mut constrained = vec![false; n_dofs];
        for &[p, q] in mesh.boundary_edges() {
            constrained[p] = true;
            constrained[q] = true;
            if let Some(&id) = edge_id.get(&edge_key(p, q)) {
                let base = nv + per_edge * id;
                constrained[base..base + per_edge].fill(true);
            }
        }
        let mut free_index = vec![NONE; n_dofs];
        let mut free_dofs = Vec::new();
        for (d, &c) in constrained.iter().enumerate() {
            if !c {
                free_index[d] = free_dofs.len();
                free_dofs.push(d);
            }
        }

        Ok(Self {
            mesh,
            basis,
            n_dofs,
            element_dofs,
            dof_coords,
            free_index,
            free_dofs,
            edges,
            edge_elements,
            element_edges,
            boundary_edge,
        })
    }

    pub fn mesh(&self) -> &Triangulation {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Triangulation> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    /// Number of free (unconstrained) dofs.
    pub fn dim(&self) -> usize {
        self.free_dofs.len()
    }

    /// Number of dofs including Dirichlet ones.
    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn local_len(&self) -> usize {
        self.basis.len()
    }

    /// Global dofs of element `e` in local node order.
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        let n = self.basis.len();
        &self.element_dofs[e * n..(e + 1) * n]
    }

    pub fn dof_coords(&self) -> &[[f64; 2]] {
        &self.dof_coords
    }

    /// Free index of global dof `d`, if it is not constrained.
    pub fn free_index(&self, d: usize) -> Option<usize> {
        let i = self.free_index[d];
        (i != NONE).then_some(i)
    }

    pub(crate) fn free_index_raw(&self) -> &[usize] {
        &self.free_index
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free_dofs
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_vertices(&self, edge: usize) -> [usize; 2] {
        self.edges[edge]
    }

    /// Elements adjacent to `edge`; the second entry is `None` on the boundary.
    pub fn edge_elements(&self, edge: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_elements[edge];
        (a, (b != NONE).then_some(b))
    }

    pub fn element_edges(&self, e: usize) -> [usize; 3] {
        self.element_edges[e]
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.boundary_edge[edge]
    }

    pub fn geometry(&self, e: usize) -> ElementGeometry {
        ElementGeometry::new(self.mesh.element_coords(e))
    }

    /// Expands a free-dof vector to all dofs (constrained entries are zero).
    pub fn expand(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        let mut full = vec![0.0; self.n_dofs];
        for (i, &d) in self.free_dofs.iter().enumerate() {
            full[d] = v[i];
        }
        full
    }

    /// Nodal interpolant of `f` on the free dofs.
    pub fn interpolate(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.free_dofs.iter().map(|&d| f(self.dof_coords[d])).collect()
    }

    /// Value of the discrete function `v` (free-dof vector) at the reference
    /// point `xi` of element `e`.
    pub fn eval_in_element(&self, full: &[f64], e: usize, xi: [f64; 2]) -> f64 {
        let b = self.basis.eval(xi);
        self.element_dofs(e).iter().zip(&b.values).map(|(&d, &phi)| full[d] * phi).sum()
    }
}
