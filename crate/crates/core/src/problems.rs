//! Built-in model problems with their initial meshes.

use crate::fem::ProblemData;
use crate::mesh::{Triangulation, l_shape, reference_triangle, z_shape};

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub mesh: Triangulation,
    pub data: ProblemData,
    /// Exact solution, when it is known in closed form.
    pub exact: Option<fn([f64; 2]) -> f64>,
}

/// Names accepted by [`Problem::builtin`].
pub const BUILTIN: [&str; 4] = ["lshape-dcr", "zshape-convection", "lshape-poisson", "manufactured"];

impl Problem {
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "lshape-dcr" => Some(lshape_dcr()),
            "zshape-convection" => Some(zshape_convection()),
            "lshape-poisson" => Some(lshape_poisson()),
            "manufactured" => Some(manufactured()),
            _ => None,
        }
    }
}

/// `-Laplace u + x . grad u + u = 1` on the L-shaped domain.
pub fn lshape_dcr() -> Problem {
    Problem {
        name: "lshape-dcr".into(),
        mesh: l_shape(),
        data: ProblemData::poisson(1.0).with_convection(|x| x).with_reaction(|_| 1.0),
        exact: None,
    }
}

/// `-Laplace u + (5, 5) . grad u = 1` on the Z-shaped domain.
pub fn zshape_convection() -> Problem {
    Problem {
        name: "zshape-convection".into(),
        mesh: z_shape(),
        data: ProblemData::poisson(1.0).with_convection(|_| [5.0, 5.0]),
        exact: None,
    }
}

/// `-Laplace u = 1` on the L-shaped domain; here the b-form equals the a-form.
pub fn lshape_poisson() -> Problem {
    Problem { name: "lshape-poisson".into(), mesh: l_shape(), data: ProblemData::poisson(1.0), exact: None }
}

fn manufactured_u(p: [f64; 2]) -> f64 {
    p[0] * p[1] * (1.0 - p[0] - p[1])
}

/// Cubic solution `u = x y (1 - x - y)` on the reference triangle with
/// convection `(1, 2)` and reaction `1`. For degree at least 3 the exact
/// solution is discrete and the estimator vanishes at it.
pub fn manufactured() -> Problem {
    let f = |p: [f64; 2]| {
        let (x, y) = (p[0], p[1]);
        let ux = y - 2.0 * x * y - y * y;
        let uy = x - x * x - 2.0 * x * y;
        2.0 * x + 2.0 * y + ux + 2.0 * uy + manufactured_u(p)
    };
    let mut data = ProblemData::poisson(0.0).with_source(f).with_convection(|_| [1.0, 2.0]).with_reaction(|_| 1.0);
    data.data_degree = 3;
    Problem { name: "manufactured".into(), mesh: reference_triangle(), data, exact: Some(manufactured_u) }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::estimator::estimate;
    use crate::fem::FeSpace;

    #[test]
    fn builtin_names_resolve() {
        for name in BUILTIN {
            let p = Problem::builtin(name).unwrap();
            assert_eq!(p.name, name);
            assert!(p.mesh.is_valid());
        }
        assert!(Problem::builtin("nope").is_none());
    }

    #[test]
    fn manufactured_interpolant_has_zero_estimator() {
        let p = manufactured();
        let space = FeSpace::new(Arc::new(p.mesh.uniform_refine(1)), 3).unwrap();
        let u = space.interpolate(p.exact.unwrap());
        assert!(estimate(&space, &p.data, &u).unwrap().total() < 1e-12);
    }
}
