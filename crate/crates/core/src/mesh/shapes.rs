//! Built-in initial meshes. Refinement edges are the hypotenuses of the
//! right isosceles elements, so newest vertex bisection stays shape regular.

use super::Triangulation;

fn build(vertices: Vec<[f64; 2]>, elements: Vec<[usize; 3]>, boundary: Vec<[usize; 2]>) -> Triangulation {
    Triangulation::new(vertices, elements, boundary).expect("built-in mesh is valid")
}

/// Unit square split along the diagonal (0,0)-(1,1); the diagonal is the
/// refinement edge of both elements.
pub fn unit_square() -> Triangulation {
    build(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![[2, 0, 1], [0, 2, 3]],
        vec![[0, 1], [1, 2], [2, 3], [3, 0]],
    )
}

/// Single triangle with vertices (0,0), (1,0), (0,1).
pub fn reference_triangle() -> Triangulation {
    build(
        vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        vec![[1, 2, 0]],
        vec![[0, 1], [1, 2], [2, 0]],
    )
}

/// (-1,1)^2 minus [0,1]x[-1,0]: three unit squares, six elements.
pub fn l_shape() -> Triangulation {
    build(
        vec![
            [-1.0, -1.0],
            [0.0, -1.0],
            [-1.0, 0.0],
            [0.0, 0.0],
            [1.0, 0.0],
            [-1.0, 1.0],
            [0.0, 1.0],
            [1.0, 1.0],
        ],
        vec![[3, 0, 1], [0, 3, 2], [5, 3, 6], [3, 5, 2], [3, 7, 6], [7, 3, 4]],
        vec![[0, 1], [1, 3], [3, 4], [4, 7], [7, 6], [6, 5], [5, 2], [2, 0]],
    )
}

/// (-1,1)^2 minus the closed triangle with corners (0,0), (-1,0), (-1,-1).
pub fn z_shape() -> Triangulation {
    build(
        vec![
            [0.0, 0.0],
            [-1.0, 0.0],
            [-1.0, 1.0],
            [0.0, 1.0],
            [1.0, 1.0],
            [1.0, 0.0],
            [1.0, -1.0],
            [0.0, -1.0],
            [-1.0, -1.0],
        ],
        vec![[2, 0, 3], [0, 2, 1], [0, 4, 3], [4, 0, 5], [6, 0, 7], [0, 6, 5], [0, 8, 7]],
        vec![[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [6, 7], [7, 8], [8, 0]],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(m: &Triangulation) -> f64 {
        (0..m.n_elements()).map(|e| m.signed_area(e)).sum()
    }

    #[test]
    fn shapes_are_valid_with_expected_areas() {
        let l = l_shape();
        assert_eq!((l.n_vertices(), l.n_elements()), (8, 6));
        assert_eq!(area(&l), 3.0);
        let z = z_shape();
        assert_eq!(area(&z), 3.5);
        assert_eq!(area(&unit_square()), 1.0);
        assert_eq!(area(&reference_triangle()), 0.5);
    }

    #[test]
    fn z_shape_excludes_the_wedge() {
        let z = z_shape();
        // (-0.9, -0.5) lies inside the removed wedge.
        let p = [-0.9, -0.5];
        for e in 0..z.n_elements() {
            let [a, b, c] = z.element_coords(e);
            let s = |u: [f64; 2], v: [f64; 2]| (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0]);
            assert!(!(s(a, b) > 0.0 && s(b, c) > 0.0 && s(c, a) > 0.0));
        }
    }
}
