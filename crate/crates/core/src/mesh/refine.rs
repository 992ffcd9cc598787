use std::collections::HashMap;

use super::{MarkedSet, MeshError, Triangulation, edge_key};

const NONE: usize = usize::MAX;

/// Result of one refinement pass, with the bookkeeping needed to transfer
/// functions from the coarse mesh to the fine one.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub mesh: Triangulation,
    /// Coarse ancestor of every fine element.
    pub parent: Vec<usize>,
    /// Endpoints of the bisected coarse edge for every new vertex; entry `i`
    /// belongs to fine vertex `n_coarse_vertices + i`.
    pub new_vertex_parents: Vec<[usize; 2]>,
    pub n_coarse_vertices: usize,
    pub n_coarse_elements: usize,
}

impl Refinement {
    /// Fine elements that are identical to their coarse parent.
    pub fn unchanged(&self, coarse: &Triangulation) -> Vec<bool> {
        self.parent
            .iter()
            .enumerate()
            .map(|(e, &p)| self.mesh.generation()[e] == coarse.generation()[p])
            .collect()
    }

    /// Number of children each coarse element was split into.
    pub fn children_count(&self) -> Vec<usize> {
        let mut count = vec![0; self.n_coarse_elements];
        for &p in &self.parent {
            count[p] += 1;
        }
        count
    }
}

pub(super) fn refine(mesh: &Triangulation, marked: &MarkedSet) -> Result<Refinement, MeshError> {
    let n_el = mesh.n_elements();
    marked.check(n_el)?;

    // Edge numbering: local edge 0 is the refinement edge a-b, 1 is b-c, 2 is c-a.
    let mut edge_id: HashMap<[usize; 2], usize> = HashMap::with_capacity(2 * n_el);
    let mut edge_verts: Vec<[usize; 2]> = Vec::with_capacity(2 * n_el);
    let mut edge_elems: Vec<[usize; 2]> = Vec::with_capacity(2 * n_el);
    let mut el_edges: Vec<[usize; 3]> = Vec::with_capacity(n_el);
    for (e, &[a, b, c]) in mesh.elements().iter().enumerate() {
        let mut ids = [0; 3];
        for (slot, (p, q)) in [(a, b), (b, c), (c, a)].into_iter().enumerate() {
            let key = edge_key(p, q);
            let id = *edge_id.entry(key).or_insert_with(|| {
                edge_verts.push(key);
                edge_elems.push([NONE, NONE]);
                edge_verts.len() - 1
            });
            let slots = &mut edge_elems[id];
            if slots[0] == NONE {
                slots[0] = e;
            } else {
                slots[1] = e;
            }
            ids[slot] = id;
        }
        el_edges.push(ids);
    }

    // Closure: an element with any marked edge must have its refinement edge marked.
    let mut edge_marked = vec![false; edge_verts.len()];
    let mut stack: Vec<usize> = Vec::new();
    for &e in marked.indices() {
        let r = el_edges[e][0];
        if !edge_marked[r] {
            edge_marked[r] = true;
            stack.push(r);
        }
    }
    while let Some(edge) = stack.pop() {
        for &e in &edge_elems[edge] {
            if e == NONE {
                continue;
            }
            let r = el_edges[e][0];
            if !edge_marked[r] {
                edge_marked[r] = true;
                stack.push(r);
            }
        }
    }

    // New vertices in deterministic element/edge order.
    let n_coarse_vertices = mesh.n_vertices();
    let mut vertices = mesh.vertices().to_vec();
    let mut midpoint = vec![NONE; edge_verts.len()];
    let mut new_vertex_parents = Vec::new();
    for ids in &el_edges {
        for &id in ids {
            if edge_marked[id] && midpoint[id] == NONE {
                let [p, q] = edge_verts[id];
                let (x, y) = (vertices[p], vertices[q]);
                midpoint[id] = vertices.len();
                vertices.push([0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])]);
                new_vertex_parents.push([p, q]);
            }
        }
    }

    let mut elements = Vec::with_capacity(n_el + 2 * marked.len());
    let mut generation = Vec::with_capacity(elements.capacity());
    let mut parent = Vec::with_capacity(elements.capacity());
    for (e, &[a, b, c]) in mesh.elements().iter().enumerate() {
        let g = mesh.generation()[e];
        let [e0, e1, e2] = el_edges[e];
        if !edge_marked[e0] {
            elements.push([a, b, c]);
            generation.push(g);
            parent.push(e);
            continue;
        }
        let m = midpoint[e0];
        // Children (c, a, m) and (b, c, m); their refinement edges are c-a and b-c.
        if edge_marked[e2] {
            let m2 = midpoint[e2];
            elements.push([m, c, m2]);
            elements.push([a, m, m2]);
            generation.extend([g + 2, g + 2]);
            parent.extend([e, e]);
        } else {
            elements.push([c, a, m]);
            generation.push(g + 1);
            parent.push(e);
        }
        if edge_marked[e1] {
            let m1 = midpoint[e1];
            elements.push([m, b, m1]);
            elements.push([c, m, m1]);
            generation.extend([g + 2, g + 2]);
            parent.extend([e, e]);
        } else {
            elements.push([b, c, m]);
            generation.push(g + 1);
            parent.push(e);
        }
    }

    let mut boundary = Vec::with_capacity(mesh.boundary_edges().len());
    for &[p, q] in mesh.boundary_edges() {
        match edge_id.get(&edge_key(p, q)) {
            Some(&id) if edge_marked[id] => {
                let m = midpoint[id];
                boundary.push([p, m]);
                boundary.push([m, q]);
            }
            _ => boundary.push([p, q]),
        }
    }

    Ok(Refinement {
        mesh: Triangulation::from_parts(vertices, elements, boundary).with_generation(generation),
        parent,
        new_vertex_parents,
        n_coarse_vertices,
        n_coarse_elements: n_el,
    })
}
