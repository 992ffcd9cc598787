//! Element-level and space-level oracles for the finite element layer.

use std::sync::Arc;

use aisfem::fem::{
    FeSpace, ProblemData, Prolongation, assemble_a, assemble_b, assemble_load, assemble_lower_order, energy_norm,
};
use aisfem::mesh::{MarkedSet, Triangulation, l_shape, unit_square};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Same geometry without boundary edges, so no dof is constrained.
fn unconstrained(mesh: &Triangulation) -> Triangulation {
    Triangulation::from_parts(mesh.vertices().to_vec(), mesh.elements().to_vec(), vec![])
}

fn reference_triangle_free() -> Arc<Triangulation> {
    Arc::new(Triangulation::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[1, 2, 0]], vec![]))
}

#[test]
fn p1_reference_stiffness() {
    let space = FeSpace::new(reference_triangle_free(), 1).unwrap();
    let k = assemble_a(&space, &ProblemData::poisson(0.0)).unwrap();
    let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((k.get(i, j) - expect[i][j]).abs() < 1e-13, "K[{i}][{j}] = {}", k.get(i, j));
        }
    }
    assert!(k.is_symmetric());
}

#[test]
fn p1_reference_mass() {
    let space = FeSpace::new(reference_triangle_free(), 1).unwrap();
    let data = ProblemData::poisson(0.0).with_reaction(|_| 1.0);
    let m = assemble_lower_order(&space, &data).unwrap();
    let area = 0.5;
    for i in 0..3 {
        for j in 0..3 {
            let expect = area / 12.0 * if i == j { 2.0 } else { 1.0 };
            assert!((m.get(i, j) - expect).abs() < 1e-13);
        }
    }
}

#[test]
fn stiffness_is_linear_in_diffusion() {
    let mesh = Arc::new(l_shape().uniform_refine(2));
    let space = FeSpace::new(mesh, 2).unwrap();
    let k1 = assemble_a(&space, &ProblemData::poisson(0.0)).unwrap();
    let k2 = assemble_a(&space, &ProblemData::poisson(0.0).with_constant_diffusion([[2.0, 0.0], [0.0, 2.0]])).unwrap();
    for (a, b) in k1.values().iter().zip(k2.values()) {
        assert_eq!(2.0 * a, *b);
    }
}

#[test]
fn nonsymmetric_diffusion_is_rejected() {
    let space = FeSpace::new(Arc::new(unit_square().uniform_refine(1)), 1).unwrap();
    let data = ProblemData::poisson(1.0).with_constant_diffusion([[1.0, 0.5], [0.0, 1.0]]);
    assert!(assemble_a(&space, &data).is_err());
    let data = ProblemData::poisson(1.0).with_constant_diffusion([[1.0, 0.0], [0.0, -1.0]]);
    assert!(assemble_a(&space, &data).is_err());
}

#[test]
fn energy_norm_of_linear_function() {
    for m in 1..=3 {
        let mesh = Arc::new(unconstrained(&unit_square().uniform_refine(2)));
        let space = FeSpace::new(mesh, m).unwrap();
        let k = assemble_a(&space, &ProblemData::poisson(0.0)).unwrap();
        let v = space.interpolate(|x| x[0]);
        let e = energy_norm(&k, &v).unwrap();
        assert!((e - 1.0).abs() < 1e-13, "m={m}: {e}");
        let scaled: Vec<f64> = v.iter().map(|x| -3.0 * x).collect();
        assert!((energy_norm(&k, &scaled).unwrap() - 3.0 * e).abs() < 1e-12);
        assert_eq!(energy_norm(&k, &vec![0.0; v.len()]).unwrap(), 0.0);
        assert!(energy_norm(&k, &[1.0]).is_err());
    }
}

#[test]
fn b_form_without_lower_order_terms_equals_a_form() {
    let space = FeSpace::new(Arc::new(l_shape().uniform_refine(1)), 2).unwrap();
    let data = ProblemData::poisson(1.0);
    let a = assemble_a(&space, &data).unwrap();
    let b = assemble_b(&space, &data).unwrap();
    assert_eq!(a.values(), b.values());
}

#[test]
fn constant_source_load_is_a_third_of_the_patch_area() {
    let mesh = unconstrained(&l_shape().uniform_refine(2));
    let space = FeSpace::new(Arc::new(mesh.clone()), 1).unwrap();
    let f = assemble_load(&space, &ProblemData::poisson(1.0)).unwrap();
    let mut patch = vec![0.0; mesh.n_vertices()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        for &v in tri {
            patch[v] += mesh.signed_area(e);
        }
    }
    for (fi, p) in f.iter().zip(&patch) {
        assert!((fi - p / 3.0).abs() < 1e-14);
    }
    let zero = assemble_load(&space, &ProblemData::poisson(0.0)).unwrap();
    assert!(zero.iter().all(|&x| x == 0.0));
}

#[test]
fn constant_flux_source_matches_gradient_oracle() {
    // Oracle: grad(lambda_i) = rot(opposite edge) / (2|T|), integrated exactly.
    let mesh = unconstrained(&l_shape().uniform_refine(1));
    let space = FeSpace::new(Arc::new(mesh.clone()), 1).unwrap();
    let fv = [0.7, -1.3];
    let data = ProblemData::poisson(0.0).with_flux_source(move |_| fv, |_| 0.0);
    let load = assemble_load(&space, &data).unwrap();
    let mut oracle = vec![0.0; mesh.n_vertices()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let p = mesh.element_coords(e);
        let area = mesh.signed_area(e);
        for k in 0..3 {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            let grad = [-(b[1] - a[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
            oracle[tri[k]] += area * (fv[0] * grad[0] + fv[1] * grad[1]);
        }
    }
    for (x, y) in load.iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-13);
    }
}

#[test]
fn prolongation_reproduces_constants_without_constraints() {
    let coarse_mesh = unconstrained(&l_shape());
    let r = coarse_mesh.refine(&MarkedSet::new([0, 4])).unwrap();
    let coarse = FeSpace::new(Arc::new(coarse_mesh), 1).unwrap();
    let fine = FeSpace::new(Arc::new(r.mesh.clone()), 1).unwrap();
    let p = Prolongation::from_refinement(&coarse, &fine, &r).unwrap();
    let ones = p.apply(&vec![1.0; coarse.dim()]);
    assert!(ones.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    assert!(p.apply(&vec![0.0; coarse.dim()]).iter().all(|&x| x == 0.0));
}

#[test]
fn prolongation_preserves_energy_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for m in 1..=3 {
        let coarse_mesh = l_shape().uniform_refine(1);
        let marked = MarkedSet::new((0..coarse_mesh.n_elements()).filter(|_| rng.gen_bool(0.4)));
        let r = coarse_mesh.refine(&marked).unwrap();
        let coarse = FeSpace::new(Arc::new(coarse_mesh), m).unwrap();
        let fine = FeSpace::new(Arc::new(r.mesh.clone()), m).unwrap();
        let data = ProblemData::poisson(0.0);
        let (kc, kf) = (assemble_a(&coarse, &data).unwrap(), assemble_a(&fine, &data).unwrap());
        let v: Vec<f64> = (0..coarse.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pv = Prolongation::from_refinement(&coarse, &fine, &r).unwrap().apply(&v);
        let (ec, ef) = (energy_norm(&kc, &v).unwrap(), energy_norm(&kf, &pv).unwrap());
        assert!(((ec - ef) / ec).abs() < 1e-12, "m={m}: {ec} vs {ef}");
    }
}

#[test]
fn non_nested_spaces_are_rejected() {
    let a = FeSpace::new(Arc::new(l_shape()), 1).unwrap();
    let b = FeSpace::new(Arc::new(unit_square().uniform_refine(2)), 1).unwrap();
    let parent = vec![0; b.mesh().n_elements()];
    assert!(Prolongation::new(&a, &b, &parent).is_err());
}
