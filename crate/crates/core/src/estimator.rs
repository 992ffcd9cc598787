//! Residual a posteriori error estimator.
//!
//! For a discrete function `v` the local contribution on an element `T` is
//!
//! ```text
//! eta_T^2 = h_T^2 || -div(A grad v - fvec) + b . grad v + c v - f ||_T^2
//!         + h_T   || [(A grad v - fvec) . n] ||_{dT \ boundary}^2
//! ```
//!
//! with `h_T` the element diameter. Every interior edge is integrated once and
//! its squared jump is added to both neighbours.

use std::fmt::Write as _;

use thiserror::Error;

use crate::fem::quadrature::gauss_legendre;
use crate::fem::{FemError, FeSpace, LagrangeBasis, ProblemData, QuadratureTable};
use crate::mesh::MarkedSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("element index {index} out of range for {n_elements} elements")]
    InvalidIndex { index: usize, n_elements: usize },
}

/// Squared per-element indicators `eta_T^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Indicators {
    squared: Vec<f64>,
    total_sq: f64,
}

impl Indicators {
    pub fn from_squared(squared: Vec<f64>) -> Self {
        debug_assert!(squared.iter().all(|&x| x >= 0.0));
        let total_sq = squared.iter().sum();
        Self { squared, total_sq }
    }

    pub fn squared(&self) -> &[f64] {
        &self.squared
    }

    pub fn len(&self) -> usize {
        self.squared.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squared.is_empty()
    }

    /// `eta = (sum_T eta_T^2)^{1/2}`.
    pub fn total(&self) -> f64 {
        self.total_sq.sqrt()
    }

    pub fn total_squared(&self) -> f64 {
        self.total_sq
    }

    /// `(sum_{T in subset} eta_T^2)^{1/2}`.
    pub fn restrict(&self, subset: &MarkedSet) -> Result<f64, EstimatorError> {
        subset
            .check(self.len())
            .map_err(|_| EstimatorError::InvalidIndex { index: *subset.indices().last().unwrap(), n_elements: self.len() })?;
        Ok(subset.indices().iter().map(|&e| self.squared[e]).sum::<f64>().sqrt())
    }

    /// Restriction to the elements selected by a mask.
    pub fn restrict_mask(&self, mask: &[bool]) -> f64 {
        assert_eq!(mask.len(), self.len());
        self.squared.iter().zip(mask).filter(|(_, m)| **m).map(|(v, _)| v).sum::<f64>().sqrt()
    }

    /// `element,eta_sq` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("element,eta_sq\n");
        for (e, v) in self.squared.iter().enumerate() {
            let _ = writeln!(s, "{e},{v:e}");
        }
        s
    }
}

/// Reference coordinates of the local edge `k` (vertex `k` to `k + 1`) at parameter `s`.
fn edge_point(k: usize, s: f64) -> [f64; 2] {
    match k {
        0 => [s, 0.0],
        1 => [1.0 - s, s],
        _ => [0.0, 1.0 - s],
    }
}

/// Basis tables for the volume rule and for each local edge.
struct Tables {
    volume: QuadratureTable,
    edge_nodes: Vec<f64>,
    edge_weights: Vec<f64>,
    edge: [Vec<[f64; 2]>; 3],
    edge_grads: [Vec<Vec<[f64; 2]>>; 3],
}

impl Tables {
    fn new(basis: &LagrangeBasis, degree: usize) -> Self {
        let volume = QuadratureTable::new(basis, degree);
        let (edge_nodes, edge_weights) = gauss_legendre(degree / 2 + 1);
        let edge: [Vec<[f64; 2]>; 3] = std::array::from_fn(|k| edge_nodes.iter().map(|&s| edge_point(k, s)).collect());
        let edge_grads = std::array::from_fn(|k| edge[k].iter().map(|&p| basis.eval(p).grads).collect());
        Self { volume, edge_nodes, edge_weights, edge, edge_grads }
    }
}

/// Computes `eta_T^2` for every element of `space.mesh()`.
pub fn estimate(space: &FeSpace, data: &ProblemData, v: &[f64]) -> Result<Indicators, EstimatorError> {
    if v.len() != space.dim() {
        return Err(FemError::Dimension { expected: space.dim(), found: v.len() }.into());
    }
    let mesh = space.mesh();
    let ne = mesh.n_elements();
    let n_loc = space.local_len();
    let full = space.expand(v);
    let tables = Tables::new(space.basis(), 2 * space.degree() + data.data_degree);
    let nq_edge = tables.edge_nodes.len();

    let mut eta_sq = vec![0.0; ne];
    // Outward normal flux (A grad v - fvec) . n at each edge point, per element and local edge.
    let mut flux = vec![0.0; ne * 3 * nq_edge];
    let mut coef = vec![0.0; n_loc];
    for e in 0..ne {
        let geo = space.geometry(e);
        for (c, &d) in coef.iter_mut().zip(space.element_dofs(e)) {
            *c = full[d];
        }
        let h = mesh.diameter(e);
        let mut vol = 0.0;
        for (q, vals) in tables.volume.values.iter().enumerate() {
            let x = geo.map(tables.volume.rule.points[q]);
            let w = tables.volume.rule.weights[q] * geo.det.abs();
            let (mut val, mut g, mut hs) = (0.0, [0.0; 2], [0.0; 3]);
            for i in 0..n_loc {
                val += coef[i] * vals.values[i];
                let gi = geo.grad(vals.grads[i]);
                g[0] += coef[i] * gi[0];
                g[1] += coef[i] * gi[1];
                let hi = geo.hessian(vals.hessians[i]);
                for t in 0..3 {
                    hs[t] += coef[i] * hi[t];
                }
            }
            let a = (data.diffusion)(x);
            let da = (data.div_diffusion)(x);
            let b = (data.convection)(x);
            let div_a_grad = a[0][0] * hs[0] + (a[0][1] + a[1][0]) * hs[1] + a[1][1] * hs[2] + da[0] * g[0] + da[1] * g[1];
            let r = -div_a_grad + (data.div_flux_source)(x) + b[0] * g[0] + b[1] * g[1] + (data.reaction)(x) * val
                - (data.source)(x);
            if !r.is_finite() {
                return Err(FemError::NonFinite("residual").into());
            }
            vol += w * r * r;
        }
        eta_sq[e] = h * h * vol;

        let p = mesh.element_coords(e);
        for k in 0..3 {
            let (p0, p1) = (p[k], p[(k + 1) % 3]);
            let len = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
            let n = [(p1[1] - p0[1]) / len, -(p1[0] - p0[0]) / len];
            for q in 0..nq_edge {
                let x = geo.map(tables.edge[k][q]);
                let mut g = [0.0; 2];
                for (i, rg) in tables.edge_grads[k][q].iter().enumerate() {
                    let gi = geo.grad(*rg);
                    g[0] += coef[i] * gi[0];
                    g[1] += coef[i] * gi[1];
                }
                let a = (data.diffusion)(x);
                let fv = (data.flux_source)(x);
                let s = [a[0][0] * g[0] + a[0][1] * g[1] - fv[0], a[1][0] * g[0] + a[1][1] * g[1] - fv[1]];
                flux[(e * 3 + k) * nq_edge + q] = s[0] * n[0] + s[1] * n[1];
            }
        }
    }

    for edge in 0..space.n_edges() {
        let (e1, Some(e2)) = space.edge_elements(edge) else {
            continue;
        };
        let k1 = space.element_edges(e1).iter().position(|&x| x == edge).unwrap();
        let k2 = space.element_edges(e2).iter().position(|&x| x == edge).unwrap();
        let [a, b] = space.edge_vertices(edge);
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        // Both elements are counter-clockwise, so the shared edge is traversed
        // in opposite directions and point q on one side is point nq-1-q on the other.
        let mut jump_sq = 0.0;
        for q in 0..nq_edge {
            let j = flux[(e1 * 3 + k1) * nq_edge + q] + flux[(e2 * 3 + k2) * nq_edge + nq_edge - 1 - q];
            jump_sq += tables.edge_weights[q] * len * j * j;
        }
        eta_sq[e1] += mesh.diameter(e1) * jump_sq;
        eta_sq[e2] += mesh.diameter(e2) * jump_sq;
    }
    Ok(Indicators::from_squared(eta_sq))
}
