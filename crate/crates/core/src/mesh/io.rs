//! Line-based mesh text format.
//!
//! ```text
//! V N B
//! x y          (V lines)
//! i j k        (N lines, 0-based, refinement edge i-j)
//! i j          (B lines, Dirichlet boundary edges)
//! ```

use std::fmt::Write;

use super::{MeshError, Triangulation};

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

/// Parses the text format and validates the mesh.
pub fn load_mesh(text: &str) -> Result<Triangulation, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header `V N B`"))?;
    let counts = parse_fields::<usize>(hline, header, 3)?;
    let (nv, ne, nb) = (counts[0], counts[1], counts[2]);
    if ne == 0 {
        return Err(parse_err(hline, "mesh has no elements"));
    }

    let mut take = |what: &str| {
        lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of input while reading {what}")))
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = take("vertices")?;
        let v = parse_fields::<f64>(ln, l, 2)?;
        vertices.push([v[0], v[1]]);
    }
    let mut elements = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, l) = take("elements")?;
        let v = parse_fields::<usize>(ln, l, 3)?;
        if let Some(&bad) = v.iter().find(|&&i| i >= nv) {
            return Err(parse_err(ln, format!("vertex index {bad} out of range")));
        }
        elements.push([v[0], v[1], v[2]]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, l) = take("boundary edges")?;
        let v = parse_fields::<usize>(ln, l, 2)?;
        if let Some(&bad) = v.iter().find(|&&i| i >= nv) {
            return Err(parse_err(ln, format!("vertex index {bad} out of range")));
        }
        boundary.push([v[0], v[1]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after boundary edges"));
    }
    Triangulation::new(vertices, elements, boundary)
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, n: usize) -> Result<Vec<T>, MeshError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != n {
        return Err(parse_err(line, format!("expected {n} fields, found {}", fields.len())));
    }
    fields
        .iter()
        .map(|f| f.parse::<T>().map_err(|_| parse_err(line, format!("cannot parse `{f}`"))))
        .collect()
}

/// Writes the text format. Coordinates use the shortest representation that
/// parses back to the same `f64`.
pub fn save_mesh(mesh: &Triangulation) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.n_elements(), mesh.boundary_edges().len());
    for v in mesh.vertices() {
        let _ = writeln!(s, "{} {}", v[0], v[1]);
    }
    for [i, j, k] in mesh.elements() {
        let _ = writeln!(s, "{i} {j} {k}");
    }
    for [i, j] in mesh.boundary_edges() {
        let _ = writeln!(s, "{i} {j}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{MarkedSet, l_shape, z_shape};

    #[test]
    fn builtins_round_trip() {
        for m in [l_shape(), z_shape()] {
            let back = load_mesh(&save_mesh(&m)).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn refined_mesh_round_trips_geometry() {
        let r = l_shape().refine(&MarkedSet::new([0, 3])).unwrap().mesh.uniform_refine(1);
        let back = load_mesh(&save_mesh(&r)).unwrap();
        assert_eq!(back.vertices(), r.vertices());
        assert_eq!(back.elements(), r.elements());
        assert_eq!(back.boundary_edges(), r.boundary_edges());
    }

    #[test]
    fn empty_element_list_is_rejected() {
        let err = load_mesh("3 0 0\n0 0\n1 0\n0 1\n").unwrap_err();
        assert!(matches!(err, MeshError::Parse { line: 1, .. }));
    }

    #[test]
    fn bad_index_reports_line() {
        let text = "3 1 0\n0 0\n1 0\n0 1\n0 1 9\n";
        assert!(matches!(load_mesh(text), Err(MeshError::Parse { line: 5, .. })));
        let text = "3 1 0\n0 0\n1 zero\n0 1\n0 1 2\n";
        assert!(matches!(load_mesh(text), Err(MeshError::Parse { line: 3, .. })));
    }
}
