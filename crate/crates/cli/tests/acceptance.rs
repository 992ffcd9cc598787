//! Acceptance suite. Every test prints one `criterion N: PASS|FAIL` line to
//! the (uncaptured) standard error, then asserts the same condition. Runs
//! shared by several criteria are computed once.

use std::io::Write as _;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};
use std::time::Instant;

use aisfem::axioms::{sample_axioms, sample_max};
use aisfem::driver::{LevelSequence, RunLog, RunStatus, dorfler_mark};
use aisfem::estimator::{Indicators, estimate};
use aisfem::fem::{FeSpace, ProblemData, assemble_a, assemble_lower_order, energy_distance};
use aisfem::mesh::{MarkedSet, Triangulation, l_shape, reference_triangle, unit_square, z_shape};
use aisfem::problems::lshape_dcr;
use aisfem::solver::{DEFAULT_COARSE_CAP, SolverKind, solve_direct, solve_iterative};
use aisfem_cli::commands::{Cell, RunOutput, cmd_contraction, cmd_run, linear_convergence_fit, study_cell};
use aisfem_cli::config::ExperimentConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const RATE_TOL: f64 = 0.1;
const RATE_TOL_ZSHAPE: f64 = 0.12;
const COST_RATE_TOL: f64 = 0.1;
const STEP_TREND_FACTOR: f64 = 1.5;
const Q_ALG_MAX: f64 = 0.9;
const Q_SYM_SYMMETRIC: f64 = 1e-8;
const A1_DOUBLING_RATIO: f64 = 1.5;
const AXIOM_RUNTIME_S: f64 = 120.0;
const ORACLE_RESIDUAL: f64 = 1e-10;
const ORACLE_ENERGY: f64 = 1e-8;
const ELEMENT_TOL: f64 = 1e-13;
const ESTIMATOR_TOL: f64 = 1e-12;
const GEOMETRIC_R2: f64 = 0.9;

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "criterion {criterion}: {verdict}  {detail}");
    pass
}

fn out_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name)
}

/// Statuses of every adaptive run of the suite, for the termination criterion.
static STATUSES: Mutex<Vec<(String, RunStatus)>> = Mutex::new(Vec::new());

fn record(name: &str, log: &RunLog) {
    STATUSES.lock().unwrap().push((name.to_string(), log.status.clone()));
}

fn lshape_cfg(name: &str, degree: usize, lambda_sym: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.problem = "lshape-dcr".into();
    cfg.out = out_dir(name);
    let a = &mut cfg.adaptive;
    a.degree = degree;
    a.theta = 0.5;
    a.lambda_sym = lambda_sym;
    a.lambda_alg = 0.1;
    a.delta = 0.5;
    a.stop.max_dim = Some(100_000);
    cfg
}

fn shared_run(cell: &'static OnceLock<RunOutput>, name: &str, cfg: impl FnOnce() -> ExperimentConfig) -> &'static RunOutput {
    cell.get_or_init(|| {
        let out = cmd_run(&cfg()).expect("run succeeds");
        record(name, &out.log);
        out
    })
}

fn lshape_m1() -> &'static RunOutput {
    static R: OnceLock<RunOutput> = OnceLock::new();
    shared_run(&R, "lshape-dcr m=1", || lshape_cfg("lshape_m1", 1, 0.1))
}

fn lshape_m2() -> &'static RunOutput {
    static R: OnceLock<RunOutput> = OnceLock::new();
    shared_run(&R, "lshape-dcr m=2", || lshape_cfg("lshape_m2", 2, 0.1))
}

fn lshape_m1_lsym_small() -> &'static RunOutput {
    static R: OnceLock<RunOutput> = OnceLock::new();
    shared_run(&R, "lshape-dcr m=1 lambda_sym=1e-2", || lshape_cfg("lshape_m1_lsym1e-2", 1, 1e-2))
}

fn zshape_m1() -> &'static RunOutput {
    static R: OnceLock<RunOutput> = OnceLock::new();
    shared_run(&R, "zshape-convection m=1", || {
        let mut cfg = lshape_cfg("zshape_m1", 1, 0.1);
        cfg.problem = "zshape-convection".into();
        cfg
    })
}

fn reached_dim(out: &RunOutput, min_dim: usize) -> bool {
    out.log.status == RunStatus::MaxDim && out.log.levels.last().is_some_and(|l| l.dim >= min_dim)
}

fn rate_check(out: &RunOutput, m: usize, tol: f64) -> (bool, String) {
    let target = -(m as f64) / 2.0;
    match &out.fits.dim {
        Some(f) => {
            let final_dim = out.log.levels.last().map_or(0, |l| l.dim);
            let ok = reached_dim(out, 100_000) && (f.slope - target).abs() <= tol;
            (ok, format!("m={m}: slope {:.4} (target {target}, tol {tol}), final dim {final_dim}", f.slope))
        }
        None => (false, format!("m={m}: no fit")),
    }
}

#[test]
fn criterion_01_optimal_rate_lshape() {
    let (ok1, d1) = rate_check(lshape_m1(), 1, RATE_TOL);
    let (ok2, d2) = rate_check(lshape_m2(), 2, RATE_TOL);
    assert!(report("1", ok1 && ok2, &format!("{d1}; {d2}")));
}

#[test]
fn criterion_02_cost_rate_equivalence() {
    let mut ok = true;
    let mut details = Vec::new();
    for (m, out) in [(1, lshape_m1()), (2, lshape_m2())] {
        let (Some(nt), Some(cum)) = (&out.fits.n_elements, &out.fits.cost_cum) else {
            ok = false;
            details.push(format!("m={m}: missing fit"));
            continue;
        };
        let diff = (nt.slope - cum.slope).abs();
        ok &= diff <= COST_RATE_TOL;
        details.push(format!("m={m}: slope vs #T {:.4}, vs cumulative #T {:.4}, |diff| {diff:.4}", nt.slope, cum.slope));
    }
    assert!(report("2", ok, &details.join("; ")));
}

#[test]
fn criterion_03_optimal_rate_zshape() {
    let (ok, d) = rate_check(zshape_m1(), 1, RATE_TOL_ZSHAPE);
    assert!(report("3", ok, &d));
}

fn step_trend(log: &RunLog) -> Option<(f64, f64)> {
    let steps: Vec<f64> = log.levels.iter().filter(|l| l.ell > 2).map(|l| l.steps as f64).collect();
    if steps.len() < 10 {
        return None;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Some((mean(&steps[..5]), mean(&steps[steps.len() - 5..])))
}

#[test]
fn criterion_04_bounded_solver_effort() {
    let mut ok = true;
    let mut details = Vec::new();
    for (lsym, out) in [(1e-1, lshape_m1()), (1e-2, lshape_m1_lsym_small())] {
        match step_trend(&out.log) {
            Some((first, last)) => {
                ok &= last <= STEP_TREND_FACTOR * first;
                details.push(format!("lambda_sym {lsym:e}: first-5 mean {first:.2}, last-5 mean {last:.2}"));
            }
            None => {
                ok = false;
                details.push(format!("lambda_sym {lsym:e}: fewer than 10 levels after l=2"));
            }
        }
    }
    assert!(report("4", ok, &details.join("; ")));
}

fn contraction_run() -> &'static aisfem_cli::commands::ContractionOutput {
    static R: OnceLock<aisfem_cli::commands::ContractionOutput> = OnceLock::new();
    R.get_or_init(|| {
        let mut cfg = lshape_cfg("contraction", 1, 0.1);
        cfg.adaptive.diagnostics = true;
        cfg.adaptive.stop.max_dim = Some(20_000);
        let out = cmd_contraction(&cfg).expect("contraction run succeeds");
        record("contraction lshape-dcr", &out.log);
        out
    })
}

fn symmetric_run() -> &'static RunOutput {
    static R: OnceLock<RunOutput> = OnceLock::new();
    shared_run(&R, "lshape-poisson delta=1", || {
        let mut cfg = lshape_cfg("symmetric", 1, 0.1);
        cfg.problem = "lshape-poisson".into();
        cfg.adaptive.delta = 1.0;
        cfg.adaptive.diagnostics = true;
        cfg.adaptive.stop.max_dim = Some(5_000);
        cfg
    })
}

fn study_cells() -> &'static Vec<Cell> {
    static R: OnceLock<Vec<Cell>> = OnceLock::new();
    R.get_or_init(|| {
        let mut cfg = ExperimentConfig::default();
        cfg.out = out_dir("study");
        cfg.adaptive.degree = 2;
        cfg.adaptive.lambda_alg = 1e-2;
        cfg.study_tol = 1e-3;
        cfg.adaptive.stop.max_dim = Some(1_000_000);
        let cells: Vec<Cell> = [(0.3, 1e-1), (0.9, 1e-1), (0.3, 1e-4)]
            .iter()
            .map(|&(t, l)| study_cell(&cfg, t, l).expect("study cell runs"))
            .collect();
        let mut st = STATUSES.lock().unwrap();
        for c in &cells {
            // Cells report their status as text; only caps and failures matter here.
            let status = match c.status.as_str() {
                "max-dim" => RunStatus::MaxDim,
                "tolerance" => RunStatus::Tolerance,
                "exact" => RunStatus::Exact,
                other => RunStatus::Failed(other.to_string()),
            };
            st.push((format!("study theta={} lambda_sym={:e}", c.theta, c.lambda_sym), status));
        }
        cells
    })
}

#[test]
fn criterion_05_contraction_suite() {
    let c = contraction_run();
    let levels = &c.log.levels;
    let max = |f: fn(&aisfem::driver::LevelRecord) -> Option<f64>| levels.iter().filter_map(f).reduce(f64::max);
    let q_alg = max(|l| l.q_alg);
    let q_sym = max(|l| l.q_sym);
    let q_sym_bar = max(|l| l.q_sym_bar);
    // Every level that performed algebraic steps reports q_alg.
    let all_measured = levels.iter().filter(|l| l.dim > 0).all(|l| l.q_alg.is_some() && l.q_sym.is_some());
    let contraction_ok = all_measured
        && q_alg.is_some_and(|q| q < Q_ALG_MAX)
        && q_sym.is_some_and(|q| q < 1.0)
        && q_sym_bar.is_some_and(|q| q < 1.0)
        && c.log.status.is_regular();

    let sym = symmetric_run();
    let sym_q: Vec<f64> = sym.log.levels.iter().filter_map(|l| l.q_sym).collect();
    let sym_ok = !sym_q.is_empty() && sym_q.iter().all(|&q| q <= Q_SYM_SYMMETRIC);

    let cells = study_cells();
    let cost = |i: usize| cells[i].weighted_cost;
    let order_ok = match (cost(0), cost(1), cost(2)) {
        (Some(a), Some(b), Some(d)) => a <= b && a <= d,
        _ => false,
    };
    let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
    let detail = format!(
        "max q_alg {} (< {Q_ALG_MAX}), max q_sym {}, max q_sym_bar {} over {} levels; symmetric max q_sym {:.2e} over {} levels; \
         cost(0.3,1e-1) {} [{}], cost(0.9,1e-1) {} [{}], cost(0.3,1e-4) {} [{}]",
        fmt(q_alg),
        fmt(q_sym),
        fmt(q_sym_bar),
        levels.len(),
        sym_q.iter().copied().fold(0.0, f64::max),
        sym_q.len(),
        fmt(cost(0)),
        cells[0].status,
        fmt(cost(1)),
        cells[1].status,
        fmt(cost(2)),
        cells[2].status,
    );
    assert!(report("5", contraction_ok && sym_ok && order_ok, &detail));
}

#[test]
fn criterion_06_axiom_instrumentation() {
    let start = Instant::now();
    let problem = lshape_dcr();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let doubled = sample_axioms(&problem.mesh, &problem.data, 1, 100, &mut rng).expect("axiom sampling runs");
    let elapsed = start.elapsed().as_secs_f64();
    // The same seed reproduces the first 50 pairs, so the first half is the base sample.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let base = sample_axioms(&problem.mesh, &problem.data, 1, 50, &mut rng).expect("axiom sampling runs");
    let finite = |v: &[f64]| !v.is_empty() && v.iter().all(|x| x.is_finite());

    let a1_50 = sample_max(&base.stability);
    let a1_100 = sample_max(&doubled.stability);
    let a1_ok = finite(&base.stability)
        && finite(&doubled.stability)
        && matches!((a1_50, a1_100), (Some(a), Some(b)) if b <= A1_DOUBLING_RATIO * a);
    let q_red = sample_max(&base.reduction);
    let a2_ok = finite(&base.reduction) && q_red.is_some_and(|q| q < 1.0);
    let a3 = sample_max(&base.reliability);
    let a4 = sample_max(&base.discrete_reliability);
    let a34_ok = finite(&base.reliability) && finite(&base.discrete_reliability);
    let detail = format!(
        "A1 max {:.3} (50 pairs) vs {:.3} (100 pairs); A2 q_red {:.3}; A3 {:.3}; A4 {:.3}; {:.2} s for 100 pairs",
        a1_50.unwrap_or(f64::NAN),
        a1_100.unwrap_or(f64::NAN),
        q_red.unwrap_or(f64::NAN),
        a3.unwrap_or(f64::NAN),
        a4.unwrap_or(f64::NAN),
        elapsed
    );
    assert!(report("6", a1_ok && a2_ok && a34_ok && elapsed < AXIOM_RUNTIME_S, &detail));
}

#[test]
fn criterion_07_oracle_equivalence() {
    let problem = lshape_dcr();
    let mut seq = LevelSequence::new(&problem.mesh, problem.data.clone(), 2, 0.5, DEFAULT_COARSE_CAP).expect("level 0");
    let mut worst: f64 = 0.0;
    let mut levels = 0;
    let mut ok = true;
    loop {
        let rhs = seq.step().step_rhs(seq.step().load()).expect("rhs");
        let k = seq.step().stiffness();
        let direct = solve_direct(k, &rhs).expect("direct solve");
        for kind in [SolverKind::PcgBpx, SolverKind::MgVcycle] {
            let zero = vec![0.0; rhs.len()];
            let (w, _) = solve_iterative(kind, seq.hierarchy(), &rhs, &zero, ORACLE_RESIDUAL, 10_000).expect("iterative");
            let residual: f64 = {
                let kw = k.mul_vec(&w);
                let r: f64 = kw.iter().zip(&rhs).map(|(a, b)| (a - b).powi(2)).sum();
                let b: f64 = rhs.iter().map(|x| x * x).sum();
                if b > 0.0 { (r / b).sqrt() } else { r.sqrt() }
            };
            let err = energy_distance(k, &direct, &w);
            ok &= residual <= ORACLE_RESIDUAL && err <= ORACLE_ENERGY;
            worst = worst.max(err);
        }
        levels += 1;
        if levels == 10 {
            break;
        }
        assert!(seq.refine(0.9).expect("refinement"), "marking never empties on this problem");
    }
    let detail = format!(
        "{levels} levels, final dim {}, both solvers, max energy difference {worst:.2e} (tol {ORACLE_ENERGY:e})",
        seq.space().dim()
    );
    assert!(report("7", ok && levels == 10, &detail));
}

fn free_triangle() -> std::sync::Arc<Triangulation> {
    std::sync::Arc::new(Triangulation::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[1, 2, 0]], vec![]))
}

#[test]
fn criterion_08_element_oracles() {
    let space = FeSpace::new(free_triangle(), 1).unwrap();
    let k = assemble_a(&space, &ProblemData::poisson(0.0)).unwrap();
    let m = assemble_lower_order(&space, &ProblemData::poisson(0.0).with_reaction(|_| 1.0)).unwrap();
    // Vertex order of the element is [1, 2, 0]; the closed forms are in global numbering.
    let k_ref = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    let area = 0.5;
    let mut k_err: f64 = 0.0;
    let mut m_err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            k_err = k_err.max((k.get(i, j) - k_ref[i][j]).abs());
            let m_ref = area / 12.0 * if i == j { 2.0 } else { 1.0 };
            m_err = m_err.max((m.get(i, j) - m_ref).abs());
        }
    }

    let mut est_err: f64 = 0.0;
    for mesh in [l_shape().uniform_refine(3), z_shape().uniform_refine(2), unit_square().uniform_refine(4)] {
        let space = FeSpace::new(std::sync::Arc::new(mesh), 1).unwrap();
        let eta = estimate(&space, &ProblemData::poisson(1.0), &vec![0.0; space.dim()]).unwrap();
        for (e, &sq) in eta.squared().iter().enumerate() {
            let mesh = space.mesh();
            let expect = mesh.diameter(e).powi(2) * mesh.signed_area(e).abs();
            est_err = est_err.max((sq - expect).abs());
        }
    }
    let ok = k_err <= ELEMENT_TOL && m_err <= ELEMENT_TOL && est_err <= ESTIMATOR_TOL;
    let detail = format!("stiffness {k_err:.1e}, mass {m_err:.1e} (tol {ELEMENT_TOL:e}); estimator {est_err:.1e} (tol {ESTIMATOR_TOL:e})");
    assert!(report("8", ok, &detail));
}

/// Smallest cardinality of a subset carrying at least `theta` of the total.
fn brute_force_min(eta2: &[f64], theta: f64) -> usize {
    let total: f64 = eta2.iter().sum();
    let n = eta2.len();
    (0u32..1 << n)
        .filter(|mask| {
            let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| eta2[i]).sum();
            s >= theta * total
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

#[test]
fn criterion_09_dorfler_minimality() {
    let meshes: Vec<Triangulation> = vec![
        reference_triangle(),
        unit_square(),
        unit_square().uniform_refine(1),
        unit_square().uniform_refine(2),
        l_shape(),
        l_shape().uniform_refine(1),
        z_shape(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    let mut ok = true;
    for mesh in meshes.iter().filter(|m| m.n_elements() <= 12) {
        let n = mesh.n_elements();
        for _ in 0..100 {
            let theta: f64 = rng.gen_range(0.05..=1.0);
            // Some repeated values exercise ties.
            let eta2: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.5 } else { rng.gen_range(0.0..1.0) }).collect();
            let marked: MarkedSet = dorfler_mark(&Indicators::from_squared(eta2.clone()), theta).unwrap();
            let total: f64 = eta2.iter().sum();
            let sum: f64 = marked.indices().iter().map(|&i| eta2[i]).sum();
            ok &= sum >= theta * total * (1.0 - 1e-12) && marked.len() == brute_force_min(&eta2, theta);
            checked += 1;
        }
    }
    assert!(report("9", ok && checked >= 600, &format!("{checked} random fields on meshes with at most 12 elements")));
}

#[test]
fn criterion_10_termination() {
    let mut cfg = ExperimentConfig::default();
    cfg.problem = "manufactured".into();
    cfg.out = out_dir("manufactured");
    cfg.adaptive.degree = 3;
    cfg.adaptive.stop.tau = Some(0.0);
    cfg.adaptive.stop.max_dim = None;
    let manufactured = cmd_run(&cfg).expect("manufactured run");
    record("manufactured tau=0", &manufactured.log);
    let exact = manufactured.log.status == RunStatus::Exact;

    // Force every shared run of the suite so all statuses are inspected.
    let _ = (lshape_m1(), lshape_m2(), lshape_m1_lsym_small(), zshape_m1(), contraction_run(), symmetric_run());
    let _ = (study_cells(), reference_run());
    let statuses = STATUSES.lock().unwrap().clone();
    let capped: Vec<String> = statuses
        .iter()
        .filter(|(_, s)| matches!(s, RunStatus::JCap { .. } | RunStatus::KCap { .. } | RunStatus::Failed(_)))
        .map(|(n, s)| format!("{n}: {s}"))
        .collect();
    let detail = format!(
        "manufactured tau=0 status {}; {} runs inspected, caps or failures: {}",
        manufactured.log.status,
        statuses.len(),
        if capped.is_empty() { "none".to_string() } else { capped.join(", ") }
    );
    assert!(report("10", exact && capped.is_empty(), &detail));
}

fn reference_run() -> &'static RunOutput {
    static R: OnceLock<RunOutput> = OnceLock::new();
    shared_run(&R, "lshape-dcr reference", || {
        let mut cfg = lshape_cfg("reference", 1, 0.1);
        cfg.adaptive.diagnostics = true;
        cfg.adaptive.reference = true;
        cfg.adaptive.stop.max_dim = Some(10_000);
        cfg
    })
}

#[test]
fn criterion_11_linear_convergence() {
    let out = reference_run();
    let fit = linear_convergence_fit(&out.log, 0.4);
    let ok = fit.as_ref().is_some_and(|(q, f)| *q < 1.0 && f.r2 >= GEOMETRIC_R2);
    let detail = match fit {
        Some((q, f)) => format!("q {q:.4}, R^2 {:.4} over {} steps (last 60%)", f.r2, f.n),
        None => "no quasi-error sequence".to_string(),
    };
    assert!(report("11", ok, &detail));
}
