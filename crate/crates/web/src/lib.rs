//! WebAssembly front end for a single static page.
//!
//! The page can run the adaptive loop, sweep the measured Zarantonello
//! contraction over the damping parameter, or show one Dörfler marking.
//! Each operation has a plain Rust version (used by the tests) and a thin
//! `wasm_bindgen` wrapper.

mod render;

use std::sync::Arc;

use aisfem::driver::{AdaptiveConfig, dorfler_mark, run};
use aisfem::estimator::estimate;
use aisfem::fem::{FeSpace, assemble_system, energy_distance, energy_norm};
use aisfem::problems::Problem;
use aisfem::solver::{SolverKind, solve_direct};
use aisfem::zarantonello::ZarantonelloStep;
use wasm_bindgen::prelude::*;

pub use render::mesh_svg;

/// Largest mesh the page may request, to keep the tab responsive.
pub const MAX_DIM: usize = 200_000;

fn problem(name: &str) -> Result<Problem, String> {
    Problem::builtin(name).ok_or_else(|| format!("unknown problem `{name}`"))
}

/// Everything the page shows after an adaptive run.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: String,
    /// Per-level CSV as written by the command line tool.
    pub levels_csv: String,
    /// Final mesh coloured by the final error indicators.
    pub mesh_svg: String,
    pub n_elements: usize,
    pub dim: usize,
    pub eta: f64,
    pub total_steps: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn run_demo(
    problem_name: &str,
    degree: usize,
    theta: f64,
    lambda_sym: f64,
    lambda_alg: f64,
    delta: f64,
    max_dim: usize,
    solver: &str,
) -> Result<RunResult, String> {
    let p = problem(problem_name)?;
    let mut cfg = AdaptiveConfig { degree, theta, lambda_sym, lambda_alg, delta, ..AdaptiveConfig::default() };
    cfg.stop.max_dim = Some(max_dim.min(MAX_DIM));
    cfg.solver = solver.parse::<SolverKind>().map_err(|e| e.to_string())?;
    let out = run(&p.mesh, &p.data, &cfg).map_err(|e| e.to_string())?;
    Ok(RunResult {
        status: out.log.status.to_string(),
        levels_csv: out.log.levels_csv(),
        mesh_svg: mesh_svg(out.space.mesh(), Some(out.indicators.squared()), &[]),
        n_elements: out.space.mesh().n_elements(),
        dim: out.space.dim(),
        eta: out.indicators.total(),
        total_steps: out.log.steps.len(),
    })
}

/// Measured one-step contraction `|||u* - Phi(delta; u)||| / |||u* - u|||` of
/// the exact symmetrization map, maximised over a few iterations started
/// at zero, for every `delta` in `deltas`. Rows are `(delta, q)`; `q` is
/// `NaN` when the iteration left the measurable range immediately.
pub fn delta_sweep(problem_name: &str, degree: usize, refinements: usize, deltas: &[f64]) -> Result<Vec<(f64, f64)>, String> {
    let p = problem(problem_name)?;
    let space = FeSpace::new(Arc::new(p.mesh.uniform_refine(refinements)), degree).map_err(|e| e.to_string())?;
    let system = assemble_system(&space, &p.data).map_err(|e| e.to_string())?;
    let (k, b, f) = (Arc::new(system.stiffness), Arc::new(system.nonsym), Arc::new(system.load));
    let exact = solve_direct(&b, &f).map_err(|e| e.to_string())?;
    let scale = energy_norm(&k, &exact).map_err(|e| e.to_string())?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let step = ZarantonelloStep::new(delta, k.clone(), b.clone(), f.clone()).map_err(|e| e.to_string())?;
        let mut u = vec![0.0; exact.len()];
        let mut q = f64::NAN;
        for _ in 0..6 {
            let before = energy_distance(&k, &exact, &u);
            if before <= 1e-10 * scale {
                break;
            }
            u = step.exact_map(&u).map_err(|e| e.to_string())?;
            let ratio = energy_distance(&k, &exact, &u) / before;
            q = if q.is_nan() { ratio } else { q.max(ratio) };
        }
        rows.push((delta, q));
    }
    Ok(rows)
}

/// Dörfler marking of the estimator at the exact discrete solution on a
/// uniformly refined initial mesh.
#[wasm_bindgen(getter_with_clone)]
#[derive(Debug, Clone)]
pub struct Marking {
    pub mesh_svg: String,
    pub n_marked: usize,
    pub n_elements: usize,
    /// Share of `eta^2` carried by the marked elements.
    pub marked_fraction: f64,
}

pub fn marking_demo(problem_name: &str, degree: usize, refinements: usize, theta: f64) -> Result<Marking, String> {
    let p = problem(problem_name)?;
    let space = FeSpace::new(Arc::new(p.mesh.uniform_refine(refinements)), degree).map_err(|e| e.to_string())?;
    let system = assemble_system(&space, &p.data).map_err(|e| e.to_string())?;
    let u = solve_direct(&system.nonsym, &system.load).map_err(|e| e.to_string())?;
    let eta = estimate(&space, &p.data, &u).map_err(|e| e.to_string())?;
    let marked = dorfler_mark(&eta, theta).map_err(|e| e.to_string())?;
    let total = eta.total_squared();
    let share: f64 = marked.indices().iter().map(|&i| eta.squared()[i]).sum();
    Ok(Marking {
        mesh_svg: mesh_svg(space.mesh(), Some(eta.squared()), marked.indices()),
        n_marked: marked.len(),
        n_elements: space.mesh().n_elements(),
        marked_fraction: if total > 0.0 { share / total } else { 1.0 },
    })
}

/// Runs the adaptive algorithm; see [`run_demo`].
#[wasm_bindgen(js_name = runAdaptive)]
#[allow(clippy::too_many_arguments)]
pub fn run_adaptive(
    problem_name: &str,
    degree: usize,
    theta: f64,
    lambda_sym: f64,
    lambda_alg: f64,
    delta: f64,
    max_dim: usize,
    solver: &str,
) -> Result<RunResult, JsValue> {
    run_demo(problem_name, degree, theta, lambda_sym, lambda_alg, delta, max_dim, solver).map_err(|e| JsValue::from_str(&e))
}

/// CSV `delta,q` for `count` equispaced damping values in `(0, max_delta]`.
#[wasm_bindgen(js_name = sweepDelta)]
pub fn sweep_delta(problem_name: &str, degree: usize, refinements: usize, max_delta: f64, count: usize) -> Result<String, JsValue> {
    let count = count.max(1);
    let deltas: Vec<f64> = (1..=count).map(|i| max_delta * i as f64 / count as f64).collect();
    let rows = delta_sweep(problem_name, degree, refinements, &deltas).map_err(|e| JsValue::from_str(&e))?;
    let mut csv = String::from("delta,q\n");
    for (d, q) in rows {
        csv.push_str(&format!("{d},{q}\n"));
    }
    Ok(csv)
}

/// Dörfler marking picture; see [`marking_demo`].
#[wasm_bindgen(js_name = markElements)]
pub fn mark_elements(problem_name: &str, degree: usize, refinements: usize, theta: f64) -> Result<Marking, JsValue> {
    marking_demo(problem_name, degree, refinements, theta).map_err(|e| JsValue::from_str(&e))
}
