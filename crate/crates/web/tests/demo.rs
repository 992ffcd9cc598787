use aisfem_web::{delta_sweep, marking_demo, run_demo};

#[test]
fn adaptive_run_reaches_the_requested_size() {
    let r = run_demo("lshape-dcr", 1, 0.5, 0.1, 0.1, 0.5, 2_000, "pcg-bpx").unwrap();
    assert_eq!(r.status, "max-dim");
    assert!(r.dim >= 2_000 && r.eta > 0.0 && r.total_steps > r.levels_csv.lines().count() - 1);
    assert_eq!(r.mesh_svg.matches("<polygon").count(), r.n_elements);
    assert!(r.levels_csv.starts_with("ell,nT,dim"));
}

#[test]
fn run_rejects_bad_input() {
    assert!(run_demo("nope", 1, 0.5, 0.1, 0.1, 0.5, 100, "pcg-bpx").is_err());
    assert!(run_demo("lshape-dcr", 1, 0.5, 0.1, 0.1, 0.5, 100, "gauss-seidel").is_err());
    assert!(run_demo("lshape-dcr", 1, 1.5, 0.1, 0.1, 0.5, 100, "pcg-bpx").is_err());
}

#[test]
fn delta_sweep_on_the_symmetric_problem() {
    // For a symmetric operator the map is u -> (1 - delta) u + delta u*, so q = |1 - delta|.
    let rows = delta_sweep("lshape-poisson", 1, 2, &[0.25, 0.5, 1.0, 1.5]).unwrap();
    for (d, q) in &rows[..2] {
        assert!((q - (1.0 - d)).abs() < 1e-10, "delta {d}: q {q}");
    }
    // delta = 1 hits the solution in one step; the ratio is at roundoff level.
    assert!(rows[2].1 < 1e-8);
    assert!((rows[3].1 - 0.5).abs() < 1e-10);
}

#[test]
fn delta_sweep_contracts_for_moderate_damping_on_convection_problems() {
    let rows = delta_sweep("lshape-dcr", 1, 3, &[0.1, 0.5, 1.0]).unwrap();
    assert!(rows.iter().all(|(_, q)| *q < 1.0), "{rows:?}");
}

#[test]
fn marking_is_minimal_and_carries_theta() {
    let m = marking_demo("lshape-dcr", 1, 3, 0.5).unwrap();
    assert!(m.marked_fraction >= 0.5 - 1e-12);
    assert!(m.n_marked >= 1 && m.n_marked < m.n_elements);
    assert_eq!(m.mesh_svg.matches("<polygon").count(), m.n_elements + m.n_marked);
    let all = marking_demo("lshape-dcr", 1, 1, 1.0).unwrap();
    assert!((all.marked_fraction - 1.0).abs() < 1e-12);
}
