use std::sync::Arc;

use aisfem::driver::{AdaptiveConfig, BoundCase, RunStatus, StopRule, run, run_with_observer};
use aisfem::fem::{FeSpace, ProblemData, Prolongation};
use aisfem::mesh::{MarkedSet, l_shape};
use aisfem::problems::{lshape_dcr, manufactured};
use aisfem::solver::solve_direct;

fn levels(n: usize) -> AdaptiveConfig {
    AdaptiveConfig { stop: StopRule { max_levels: Some(n), ..StopRule::default() }, ..AdaptiveConfig::default() }
}

#[test]
fn zero_data_stops_immediately_as_exact() {
    let data = ProblemData::poisson(0.0).with_convection(|x| x);
    let out = run(&l_shape(), &data, &levels(5)).unwrap();
    assert_eq!(out.log.status, RunStatus::Exact);
    assert_eq!(out.log.levels.len(), 1);
    assert_eq!(out.log.levels[0].k_bar, 1);
    assert_eq!(out.log.levels[0].j_bars, vec![1]);
    assert!(out.log.steps.iter().all(|s| s.eta == 0.0));
}

#[test]
fn manufactured_solution_with_zero_tolerance_ends_exact() {
    let p = manufactured();
    let cfg = AdaptiveConfig {
        degree: 3,
        stop: StopRule { tau: Some(0.0), ..StopRule::default() },
        ..AdaptiveConfig::default()
    };
    let out = run(&p.mesh, &p.data, &cfg).unwrap();
    assert_eq!(out.log.status, RunStatus::Exact, "{:?}", out.log.levels);
    assert!(out.indicators.total() <= 1e-9, "eta = {}", out.indicators.total());
    let u = p.exact.unwrap();
    for (i, x) in out.space.dof_coords().iter().enumerate() {
        if let Some(f) = out.space.free_index(i) {
            assert!((out.solution[f] - u(*x)).abs() < 1e-8);
        }
    }
}

#[test]
fn symmetric_problem_with_unit_delta_needs_at_most_two_symmetrization_steps() {
    let cfg = AdaptiveConfig { delta: 1.0, solver: aisfem::solver::SolverKind::MgVcycle, ..levels(6) };
    let out = run(&l_shape(), &ProblemData::poisson(1.0), &cfg).unwrap();
    assert_eq!(out.log.status, RunStatus::MaxLevels);
    for lv in &out.log.levels {
        assert!(lv.k_bar <= 2, "level {} k_bar {}", lv.ell, lv.k_bar);
    }
}

#[test]
fn run_starting_at_the_fixed_point_stops_after_one_solver_step() {
    // At the discrete solution the Zarantonello right-hand side is K u*, so
    // the first solver step leaves u* in place and diff_alg = 0 meets the
    // j-criterion at j = 1.
    let p = lshape_dcr();
    let space = FeSpace::new(Arc::new(p.mesh.clone()), 1).unwrap();
    let sys = aisfem::fem::assemble_system(&space, &p.data).unwrap();
    let u = solve_direct(&sys.nonsym, &sys.load).unwrap();
    let z = aisfem::zarantonello::ZarantonelloStep::from_system(0.5, sys).unwrap();
    let h = aisfem::solver::Hierarchy::new(z.stiffness().clone(), 500).unwrap();
    let g = z.step_rhs(&u).unwrap();
    let w = aisfem::solver::solver_step(aisfem::solver::SolverKind::PcgBpx, &h, &g, &u).unwrap();
    let diff = aisfem::fem::energy_distance(z.stiffness(), &w, &u);
    let norm = aisfem::fem::energy_norm(z.stiffness(), &u).unwrap();
    assert!(diff <= 1e-10 * norm, "diff {diff}");
}

#[test]
fn log_is_consistent() {
    let p = lshape_dcr();
    let cfg = AdaptiveConfig { diagnostics: true, ..levels(8) };
    let mut seen = Vec::new();
    let out = run_with_observer(&p.mesh, &p.data, &cfg, &mut |v| seen.push((v.ell, v.space.dim()))).unwrap();
    let log = &out.log;
    assert_eq!(log.status, RunStatus::MaxLevels);
    assert_eq!(seen.len(), 8);
    assert_eq!(log.levels.len(), 8);
    for (i, s) in log.steps.iter().enumerate() {
        assert_eq!(s.step, i + 1);
        if i > 0 {
            let prev = &log.steps[i - 1];
            assert!(s.cost_cum > prev.cost_cum);
            assert!(s.time_s >= prev.time_s);
            assert!((s.ell, s.k, s.j) > (prev.ell, prev.k, prev.j));
        }
        if s.j >= 1 {
            let (da, ds) = (s.diff_alg.unwrap(), s.diff_sym.unwrap());
            let stop_j = da <= cfg.lambda_alg * (cfg.lambda_sym * s.eta + ds);
            let expected = match (stop_j, ds <= cfg.lambda_sym * s.eta) {
                (false, _) => BoundCase::MidAlgebraic,
                (true, false) => BoundCase::PostAlgebraic,
                (true, true) => BoundCase::PostSymmetrization,
            };
            assert_eq!(s.case, expected);
        }
    }
    for lv in &log.levels {
        assert_eq!(lv.j_bars.len(), lv.k_bar);
        // The coarsest L-shape mesh has no free dofs, so no factor exists there.
        if lv.dim > 0 {
            assert!(lv.q_alg.unwrap() < 0.9, "{lv:?}");
            assert!(lv.q_sym.unwrap() < 1.0);
        }
    }
    for (a, b) in log.levels.iter().zip(&log.levels[1..]) {
        assert!(b.n_elements > a.n_elements);
    }
    let c = log.c_mesh.unwrap();
    assert!(c > 0.0 && c.is_finite());
    let csv = log.to_csv();
    assert!(csv.starts_with("ell,k,j,step,nT,dim,eta,diff_alg,diff_sym,cost_cum,time_s,delta_quasi,case\n"));
    assert_eq!(csv.lines().count(), log.steps.len() + 1);
}

#[test]
fn reference_mode_fills_quasi_errors() {
    let p = lshape_dcr();
    let cfg = AdaptiveConfig { reference: true, ..levels(5) };
    let out = run(&p.mesh, &p.data, &cfg).unwrap();
    for s in &out.log.steps {
        let q = s.quasi_error.unwrap();
        assert!(q >= s.eta && q.is_finite());
    }
    // The error against the reference decreases across levels.
    let finals = out.log.final_steps();
    assert!(finals.last().unwrap().ref_error.unwrap() < finals[0].ref_error.unwrap());
}

#[test]
fn nested_iteration_preserves_the_function() {
    let mesh = Arc::new(l_shape().uniform_refine(1));
    for m in 1..=3 {
        let coarse = FeSpace::new(mesh.clone(), m).unwrap();
        let r = mesh.refine(&MarkedSet::new(vec![0, 3, 7])).unwrap();
        let fine = FeSpace::new(Arc::new(r.mesh.clone()), m).unwrap();
        let p = Prolongation::from_refinement(&coarse, &fine, &r).unwrap();
        let v: Vec<f64> = (0..coarse.dim()).map(|i| ((i * 7 + 3) as f64).cos()).collect();
        let w = p.apply(&v);
        let (vf, wf) = (coarse.expand(&v), fine.expand(&w));
        for (child, &parent) in r.parent.iter().enumerate() {
            for xi in [[0.2, 0.3], [0.6, 0.1], [1.0 / 3.0, 1.0 / 3.0]] {
                let x = fine.geometry(child).map(xi);
                let xc = coarse.geometry(parent).inverse_map(x);
                let a = fine.eval_in_element(&wf, child, xi);
                let b = coarse.eval_in_element(&vf, parent, xc);
                assert!((a - b).abs() < 1e-12, "m={m} child {child}: {a} vs {b}");
            }
        }
    }
}
