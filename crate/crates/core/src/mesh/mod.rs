//! Conforming triangulations with newest-vertex-bisection refinement.
//!
//! Every element is stored as a vertex triple `[a, b, c]` in counter-clockwise
//! order. The edge `a-b` is the refinement edge and `c` is the newest vertex.

mod io;
mod refine;
mod shapes;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

pub use io::{load_mesh, save_mesh};
pub use refine::Refinement;
pub use shapes::{l_shape, reference_triangle, unit_square, z_shape};

/// Errors raised while building, reading or refining meshes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("marked element index {index} out of range (mesh has {n_elements} elements)")]
    InvalidMarked { index: usize, n_elements: usize },
    #[error("mesh is invalid: {0}")]
    Invalid(Violation),
}

/// A single broken mesh invariant, as reported by [`Triangulation::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    VertexIndex { element: usize, vertex: usize },
    BoundaryIndex { edge: usize, vertex: usize },
    Degenerate { element: usize },
    Orientation { element: usize, area: f64 },
    /// An edge is shared by more than two elements, or an edge with one
    /// incident element is not a boundary edge (hanging vertex or gap).
    Conformity { edge: [usize; 2], incidence: usize },
    /// A boundary edge is listed but is not a boundary edge of the element graph.
    StrayBoundary { edge: [usize; 2] },
    /// A boundary edge of the element graph is missing from the boundary list.
    MissingBoundary { edge: [usize; 2] },
    DuplicateBoundary { edge: [usize; 2] },
    GenerationLength { expected: usize, found: usize },
    NonFinite { vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexIndex { element, vertex } => {
                write!(f, "element {element} references missing vertex {vertex}")
            }
            Violation::BoundaryIndex { edge, vertex } => {
                write!(f, "boundary edge {edge} references missing vertex {vertex}")
            }
            Violation::Degenerate { element } => {
                write!(f, "element {element} repeats a vertex")
            }
            Violation::Orientation { element, area } => {
                write!(f, "orientation: element {element} has signed area {area:e}")
            }
            Violation::Conformity { edge, incidence } => write!(
                f,
                "conformity: edge {}-{} has {incidence} incident elements",
                edge[0], edge[1]
            ),
            Violation::StrayBoundary { edge } => write!(
                f,
                "boundary edge {}-{} is not on the boundary of the element graph",
                edge[0], edge[1]
            ),
            Violation::MissingBoundary { edge } => {
                write!(f, "boundary edge {}-{} is not listed", edge[0], edge[1])
            }
            Violation::DuplicateBoundary { edge } => {
                write!(f, "boundary edge {}-{} listed twice", edge[0], edge[1])
            }
            Violation::GenerationLength { expected, found } => {
                write!(f, "generation has {found} entries, expected {expected}")
            }
            Violation::NonFinite { vertex } => {
                write!(f, "vertex {vertex} has non-finite coordinates")
            }
        }
    }
}

/// Sorted vertex pair used as an edge key.
#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> [usize; 2] {
    if a < b { [a, b] } else { [b, a] }
}

/// A conforming 2D triangulation.
///
/// Values are immutable once built; [`Triangulation::refine`] returns a new mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    vertices: Vec<[f64; 2]>,
    elements: Vec<[usize; 3]>,
    boundary: Vec<[usize; 2]>,
    generation: Vec<u32>,
}

impl Triangulation {
    /// Builds a mesh and checks every invariant.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        boundary: Vec<[usize; 2]>,
    ) -> Result<Self, MeshError> {
        let mesh = Self::from_parts(vertices, elements, boundary);
        match mesh.validate().into_iter().next() {
            Some(v) => Err(MeshError::Invalid(v)),
            None => Ok(mesh),
        }
    }

    /// Builds a mesh without checking it. Use [`Triangulation::validate`] to
    /// inspect the result.
    pub fn from_parts(
        vertices: Vec<[f64; 2]>,
        elements: Vec<[usize; 3]>,
        boundary: Vec<[usize; 2]>,
    ) -> Self {
        let generation = vec![0; elements.len()];
        Self { vertices, elements, boundary, generation }
    }

    pub(crate) fn with_generation(mut self, generation: Vec<u32>) -> Self {
        self.generation = generation;
        self
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary
    }

    pub fn generation(&self) -> &[u32] {
        &self.generation
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.elements[e];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area of element `e` (positive for counter-clockwise ordering).
    pub fn signed_area(&self, e: usize) -> f64 {
        let [p, q, r] = self.element_coords(e);
        0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
    }

    /// Longest edge length of element `e`.
    pub fn diameter(&self, e: usize) -> f64 {
        let [p, q, r] = self.element_coords(e);
        let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        d(p, q).max(d(q, r)).max(d(r, p))
    }

    /// Per-vertex flag: true if the vertex lies on a boundary edge.
    pub fn boundary_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for &[a, b] in &self.boundary {
            mask[a] = true;
            mask[b] = true;
        }
        mask
    }

    /// Checks every mesh invariant and returns the violations found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let nv = self.vertices.len();
        for (i, v) in self.vertices.iter().enumerate() {
            if !v[0].is_finite() || !v[1].is_finite() {
                out.push(Violation::NonFinite { vertex: i });
            }
        }
        if self.generation.len() != self.elements.len() {
            out.push(Violation::GenerationLength {
                expected: self.elements.len(),
                found: self.generation.len(),
            });
        }
        let mut indices_ok = true;
        for (e, tri) in self.elements.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    out.push(Violation::VertexIndex { element: e, vertex: v });
                    indices_ok = false;
                }
            }
        }
        for (i, edge) in self.boundary.iter().enumerate() {
            for &v in edge {
                if v >= nv {
                    out.push(Violation::BoundaryIndex { edge: i, vertex: v });
                    indices_ok = false;
                }
            }
        }
        if !indices_ok {
            return out;
        }

        let mut incidence: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edge_order: Vec<[usize; 2]> = Vec::new();
        for (e, &[a, b, c]) in self.elements.iter().enumerate() {
            if a == b || b == c || c == a {
                out.push(Violation::Degenerate { element: e });
                continue;
            }
            let area = self.signed_area(e);
            if !(area > 0.0) {
                out.push(Violation::Orientation { element: e, area });
            }
            for (p, q) in [(a, b), (b, c), (c, a)] {
                let key = edge_key(p, q);
                let count = incidence.entry(key).or_insert(0);
                if *count == 0 {
                    edge_order.push(key);
                }
                *count += 1;
            }
        }

        let mut listed: HashMap<[usize; 2], usize> = HashMap::new();
        for &[a, b] in &self.boundary {
            let key = edge_key(a, b);
            let count = listed.entry(key).or_insert(0);
            *count += 1;
            if *count == 2 {
                out.push(Violation::DuplicateBoundary { edge: key });
            }
        }
        for key in &edge_order {
            let count = incidence[key];
            let on_boundary = listed.contains_key(key);
            if count > 2 || (count == 1 && !on_boundary) {
                out.push(Violation::Conformity { edge: *key, incidence: count });
            }
            if count == 2 && on_boundary {
                out.push(Violation::StrayBoundary { edge: *key });
            }
        }
        for &[a, b] in &self.boundary {
            if !incidence.contains_key(&edge_key(a, b)) {
                out.push(Violation::StrayBoundary { edge: edge_key(a, b) });
            }
        }
        // Every edge with one incident element that is not listed was already
        // reported as a conformity violation; report it as missing too only when
        // it cannot be a hanging edge, i.e. no vertex lies on its interior.
        for key in &edge_order {
            if incidence[key] == 1 && !listed.contains_key(key) && !self.has_hanging_vertex(*key) {
                out.push(Violation::MissingBoundary { edge: *key });
            }
        }
        out
    }

    fn has_hanging_vertex(&self, [a, b]: [usize; 2]) -> bool {
        let (p, q) = (self.vertices[a], self.vertices[b]);
        let len2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
        self.vertices.iter().enumerate().any(|(i, v)| {
            if i == a || i == b {
                return false;
            }
            let cross = (q[0] - p[0]) * (v[1] - p[1]) - (q[1] - p[1]) * (v[0] - p[0]);
            let t = ((v[0] - p[0]) * (q[0] - p[0]) + (v[1] - p[1]) * (q[1] - p[1])) / len2;
            cross.abs() <= 1e-12 * len2 && t > 0.0 && t < 1.0
        })
    }

    /// Convenience: `true` iff [`Triangulation::validate`] finds nothing.
    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Bisects all marked elements plus the closure needed for conformity.
    pub fn refine(&self, marked: &MarkedSet) -> Result<Refinement, MeshError> {
        refine::refine(self, marked)
    }

    /// `n` passes of [`Triangulation::refine`] with every element marked.
    pub fn uniform_refine(&self, n: usize) -> Triangulation {
        let mut mesh = self.clone();
        for _ in 0..n {
            let all = MarkedSet::all(mesh.n_elements());
            mesh = mesh.refine(&all).expect("full marking is always valid").mesh;
        }
        mesh
    }
}

/// A duplicate-free, sorted set of element indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkedSet(Vec<usize>);

impl MarkedSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn all(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    /// Rejects indices that are out of range for a mesh with `n` elements.
    pub fn check(&self, n: usize) -> Result<(), MeshError> {
        match self.0.last() {
            Some(&index) if index >= n => Err(MeshError::InvalidMarked { index, n_elements: n }),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_is_valid() {
        let m = Triangulation::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        );
        assert!(m.validate().is_empty());
    }

    #[test]
    fn flipped_element_is_an_orientation_violation() {
        let m = Triangulation::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 2, 1], [0, 2, 3]],
            vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        );
        let v = m.validate();
        assert!(v.iter().any(|v| matches!(v, Violation::Orientation { element: 0, .. })));
        assert!(!v.iter().any(|v| matches!(v, Violation::Orientation { element: 1, .. })));
    }

    #[test]
    fn hanging_vertex_breaks_conformity() {
        // Bisect element (2,0,1) across the diagonal without touching (0,2,3).
        let m = Triangulation::from_parts(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
            vec![[1, 2, 4], [0, 1, 4], [0, 2, 3]],
            vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        );
        let v = m.validate();
        // The diagonal 0-2 now borders a single element while vertex 4 sits on it.
        assert!(v.contains(&Violation::Conformity { edge: [0, 2], incidence: 1 }));
        assert!(!v.iter().any(|v| matches!(v, Violation::MissingBoundary { edge: [0, 2] })));
    }

    #[test]
    fn out_of_range_indices_are_reported() {
        let m = Triangulation::from_parts(vec![[0.0, 0.0], [1.0, 0.0]], vec![[0, 1, 5]], vec![]);
        assert_eq!(m.validate(), vec![Violation::VertexIndex { element: 0, vertex: 5 }]);
    }

    #[test]
    fn marked_set_dedups_and_checks_range() {
        let m = MarkedSet::new([3, 1, 3]);
        assert_eq!(m.indices(), &[1, 3]);
        assert!(m.check(4).is_ok());
        assert_eq!(m.check(3), Err(MeshError::InvalidMarked { index: 3, n_elements: 3 }));
    }
}
