//! The experiment subcommands. Each writes its artifacts to the configured
//! output directory and returns the data behind them.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use aisfem::analysis::{LinearFit, final_decade_fit, geometric_fit};
use aisfem::driver::{
    AdaptiveConfig, LevelView, RunLog, RunStatus, lambda_alg_bound, perturbed_contraction_bound, run_with_observer,
};
use aisfem::fem::FeSpace;
use aisfem::mesh::{Triangulation, save_mesh};
use aisfem::problems::Problem;
use aisfem::solver::solve_direct;
use anyhow::{Context, Result, bail};

use crate::config::ExperimentConfig;
use crate::plot::{Plot, Scale, Series, slope_guide};
use crate::problem::{self, Resolved};

/// Convergence rates of the final estimator per level against several cost measures.
#[derive(Debug, Clone, Default)]
pub struct Fits {
    pub dim: Option<LinearFit>,
    pub n_elements: Option<LinearFit>,
    /// Against the cumulative number of elements over all steps.
    pub cost_cum: Option<LinearFit>,
    /// Against the cumulative number of degrees of freedom over all steps.
    pub dim_cum: Option<LinearFit>,
}

impl Fits {
    pub fn from_log(log: &RunLog) -> Self {
        let lv: Vec<_> = log.levels.iter().filter(|l| l.dim > 0 && l.eta > 0.0).collect();
        let eta: Vec<f64> = lv.iter().map(|l| l.eta).collect();
        let fit = |x: Vec<f64>| final_decade_fit(&x, &eta);
        Self {
            dim: fit(lv.iter().map(|l| l.dim as f64).collect()),
            n_elements: fit(lv.iter().map(|l| l.n_elements as f64).collect()),
            cost_cum: fit(lv.iter().map(|l| l.cost_cum as f64).collect()),
            dim_cum: fit(lv.iter().map(|l| l.dim_cum as f64).collect()),
        }
    }
}

/// Geometric fit `Delta_n ~ C q^n` of the quasi-error over the steps that
/// remain after discarding the initial `discard` fraction.
pub fn linear_convergence_fit(log: &RunLog, discard: f64) -> Option<(f64, LinearFit)> {
    let delta: Vec<f64> = log.steps.iter().filter_map(|s| s.quasi_error).collect();
    if delta.len() != log.steps.len() {
        return None;
    }
    let start = (discard * delta.len() as f64).floor() as usize;
    geometric_fit(&delta[start..])
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn prepare(cfg: &ExperimentConfig) -> Result<Resolved> {
    let mut resolved = problem::resolve(&cfg.problem, &cfg.base_dir)?;
    if let Some(d) = cfg.data_degree {
        resolved.problem.data.data_degree = d;
    }
    Ok(resolved)
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn fmt_fit(name: &str, f: &Option<LinearFit>) -> String {
    match f {
        Some(f) => format!("{name}: slope {:.4}, R^2 {:.4}, points {}\n", f.slope, f.r2, f.n),
        None => format!("{name}: not enough levels\n"),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.4}"))
}

fn max_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.flatten().reduce(f64::max)
}

/// Everything `run` produced.
#[derive(Debug)]
pub struct RunOutput {
    pub log: RunLog,
    pub fits: Fits,
    pub linear: Option<(f64, LinearFit)>,
    pub summary: String,
    /// Largest nodal error against a known exact solution, when available.
    pub nodal_error: Option<f64>,
}

fn describe(cfg: &ExperimentConfig, problem: &Problem) -> String {
    let a = &cfg.adaptive;
    let mut s = String::new();
    let _ = writeln!(s, "problem: {}", problem.name);
    let _ = writeln!(s, "degree: {}", a.degree);
    let _ = writeln!(
        s,
        "theta: {}  lambda_sym: {}  lambda_alg: {}  delta: {}  solver: {}  seed: {}",
        a.theta, a.lambda_sym, a.lambda_alg, a.delta, a.solver, a.seed
    );
    let st = &a.stop;
    let _ = writeln!(s, "stop: max_dim {:?}, tau {:?}, max_steps {:?}, max_levels {:?}", st.max_dim, st.tau, st.max_steps, st.max_levels);
    s
}

fn max_nodal_error(space: &FeSpace, u: &[f64], exact: &dyn Fn([f64; 2]) -> f64) -> f64 {
    let full = space.expand(u);
    space.dof_coords().iter().zip(&full).map(|(x, v)| (exact(*x) - v).abs()).fold(0.0, f64::max)
}

/// Runs the adaptive algorithm and writes `runlog.csv`, `levels.csv`,
/// `summary.txt`, the convergence plots and the final mesh.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    run_with(cfg, &mut |_| {})
}

fn run_with(cfg: &ExperimentConfig, observer: &mut dyn FnMut(&LevelView)) -> Result<RunOutput> {
    let Resolved { problem, exact } = prepare(cfg)?;
    create_out(&cfg.out)?;
    let out = run_with_observer(&problem.mesh, &problem.data, &cfg.adaptive, observer)?;
    let log = out.log;
    let fits = Fits::from_log(&log);
    let linear = linear_convergence_fit(&log, cfg.discard_fraction);
    let nodal_error = exact.as_ref().map(|f| max_nodal_error(&out.space, &out.solution, f.as_ref()));

    let mut s = describe(cfg, &problem);
    let _ = writeln!(s, "status: {}", log.status);
    let last = log.levels.last();
    let _ = writeln!(s, "levels: {}", log.levels.len());
    let _ = writeln!(s, "steps: {}", log.steps.len());
    if let Some(l) = last {
        let _ = writeln!(s, "final: nT {}, dim {}, eta {:.6e}, time {:.3} s", l.n_elements, l.dim, l.eta, l.time_s);
    }
    s.push_str(&fmt_fit("rate eta vs dim (final decade)", &fits.dim));
    s.push_str(&fmt_fit("rate eta vs nT (final decade)", &fits.n_elements));
    s.push_str(&fmt_fit("rate eta vs cumulative nT (final decade)", &fits.cost_cum));
    s.push_str(&fmt_fit("rate eta vs cumulative dim (final decade)", &fits.dim_cum));
    let steps: Vec<usize> = log.levels.iter().map(|l| l.steps).collect();
    let _ = writeln!(s, "solver steps per level: max {}, mean {:.2}", steps.iter().max().unwrap_or(&0), mean(&steps));
    let _ = writeln!(s, "k_bar max: {}", log.levels.iter().map(|l| l.k_bar).max().unwrap_or(0));
    let _ = writeln!(s, "C_mesh (measured): {}", fmt_opt(log.c_mesh));
    if let Some(d) = log.delta_estimate {
        let _ = writeln!(
            s,
            "sampled alpha {:.4}, L {:.4}, delta* {:.4}, contraction bound at delta: {}",
            d.alpha,
            d.continuity,
            d.delta_star,
            fmt_opt(d.contraction_bound(cfg.adaptive.delta))
        );
    }
    if cfg.adaptive.diagnostics || cfg.adaptive.reference {
        let _ = writeln!(s, "max q_alg: {}", fmt_opt(max_of(log.levels.iter().map(|l| l.q_alg))));
        let _ = writeln!(s, "max q_sym: {}", fmt_opt(max_of(log.levels.iter().map(|l| l.q_sym))));
        let _ = writeln!(s, "max q_sym_bar: {}", fmt_opt(max_of(log.levels.iter().map(|l| l.q_sym_bar))));
    }
    if let Some((q, fit)) = &linear {
        let _ = writeln!(
            s,
            "linear convergence of the quasi-error (last {:.0}% of steps): q {:.4}, R^2 {:.4}",
            100.0 * (1.0 - cfg.discard_fraction),
            q,
            fit.r2
        );
    }
    if let Some(e) = nodal_error {
        let _ = writeln!(s, "max nodal error against the exact solution: {e:.3e}");
    }
    for w in &log.warnings {
        let _ = writeln!(s, "warning: {w}");
    }

    write(&cfg.out, "runlog.csv", &log.to_csv())?;
    write(&cfg.out, "levels.csv", &log.levels_csv())?;
    if cfg.adaptive.diagnostics || cfg.adaptive.reference {
        write(&cfg.out, "diagnostics.csv", &log.diagnostics_csv())?;
    }
    write(&cfg.out, "summary.txt", &s)?;
    write(&cfg.out, "final_mesh.txt", &save_mesh(out.space.mesh()))?;
    write_run_plots(cfg, &log)?;
    Ok(RunOutput { log, fits, linear, summary: s, nodal_error })
}

fn mean(v: &[usize]) -> f64 {
    if v.is_empty() { 0.0 } else { v.iter().sum::<usize>() as f64 / v.len() as f64 }
}

fn write_run_plots(cfg: &ExperimentConfig, log: &RunLog) -> Result<()> {
    let m = cfg.adaptive.degree as f64;
    let lv: Vec<_> = log.levels.iter().filter(|l| l.dim > 0 && l.eta > 0.0).collect();
    let by_dim: Vec<(f64, f64)> = lv.iter().map(|l| (l.dim as f64, l.eta)).collect();
    let by_cost: Vec<(f64, f64)> = lv.iter().map(|l| (l.cost_cum as f64, l.eta)).collect();
    let by_time: Vec<(f64, f64)> = lv.iter().map(|l| (l.time_s, l.eta)).collect();
    let mut p = Plot::new("Estimator over degrees of freedom", "dim", "eta").with(Series::new("eta", by_dim.clone()));
    if let Some(g) = slope_guide(&format!("slope -{}/2", cfg.adaptive.degree), &by_dim, -m / 2.0) {
        p = p.with(g);
    }
    write(&cfg.out, "eta_dim.svg", &p.to_svg())?;
    let mut p = Plot::new("Estimator over cumulative cost", "sum of #T over all steps", "eta")
        .with(Series::new("eta", by_cost.clone()));
    if let Some(g) = slope_guide(&format!("slope -{}/2", cfg.adaptive.degree), &by_cost, -m / 2.0) {
        p = p.with(g);
    }
    write(&cfg.out, "eta_cost.svg", &p.to_svg())?;
    let p = Plot::new("Estimator over wall time", "time [s]", "eta").with(Series::new("eta", by_time));
    write(&cfg.out, "eta_time.svg", &p.to_svg())?;
    let steps: Vec<(f64, f64)> = log.levels.iter().map(|l| (l.ell as f64, l.steps as f64)).collect();
    let p = Plot::new("Solver steps per level", "level", "steps")
        .scales(Scale::Linear, Scale::Linear)
        .with(Series::new("steps", steps));
    write(&cfg.out, "steps.svg", &p.to_svg())?;
    let quasi: Vec<(f64, f64)> = log.steps.iter().filter_map(|s| Some((s.step as f64, s.quasi_error?))).collect();
    if !quasi.is_empty() {
        let p = Plot::new("Quasi-error over steps", "step", "Delta")
            .scales(Scale::Linear, Scale::Log)
            .with(Series::new("quasi-error", quasi));
        write(&cfg.out, "quasi_error.svg", &p.to_svg())?;
    }
    Ok(())
}

/// Per-level contraction factors and derived parameter bounds.
#[derive(Debug, Clone)]
pub struct ContractionRow {
    pub ell: usize,
    pub dim: usize,
    pub q_alg: Option<f64>,
    pub q_sym: Option<f64>,
    pub q_sym_bar: Option<f64>,
    /// `q_sym_bar` restricted to `k < k_bar`.
    pub q_sym_bar_pre: Option<f64>,
    /// Perturbed bound from the measured `q_sym`, `q_alg` and the configured `lambda_alg`.
    pub q_sym_bar_bound: Option<f64>,
    pub lambda_alg_bar: Option<f64>,
}

#[derive(Debug)]
pub struct ContractionOutput {
    pub rows: Vec<ContractionRow>,
    pub log: RunLog,
    /// Descriptions of factors outside `[0, 1)` or above `q_cap`.
    pub flags: Vec<String>,
    pub summary: String,
}

/// Runs with oracle diagnostics and reports the level-wise contraction factors.
pub fn cmd_contraction(cfg: &ExperimentConfig) -> Result<ContractionOutput> {
    if !cfg.adaptive.diagnostics {
        bail!("contraction factors need oracle solves; pass --diagnostics or set adaptive.diagnostics = true");
    }
    let out = cmd_run(cfg)?;
    let lambda_alg = cfg.adaptive.lambda_alg;
    let mut rows = Vec::new();
    let mut flags = Vec::new();
    for l in &out.log.levels {
        let bound = match (l.q_sym, l.q_alg) {
            (Some(qs), Some(qa)) => perturbed_contraction_bound(qs, qa, lambda_alg),
            _ => None,
        };
        let lam = match (l.q_sym, l.q_alg) {
            (Some(qs), Some(qa)) if qa > 0.0 => Some(lambda_alg_bound(qs, qa)),
            _ => None,
        };
        for (name, v) in [("q_alg", l.q_alg), ("q_sym", l.q_sym), ("q_sym_bar", l.q_sym_bar), ("q_sym_bar_pre", l.q_sym_bar_pre)] {
            if let Some(q) = v {
                if !(0.0..1.0).contains(&q) {
                    flags.push(format!("level {}: {name} = {q:.4} outside [0, 1)", l.ell));
                }
            }
        }
        if l.ell >= 1 && l.q_alg.is_some_and(|q| q > cfg.q_cap) {
            flags.push(format!("level {}: q_alg = {:.4} above q_cap = {}", l.ell, l.q_alg.unwrap(), cfg.q_cap));
        }
        rows.push(ContractionRow {
            ell: l.ell,
            dim: l.dim,
            q_alg: l.q_alg,
            q_sym: l.q_sym,
            q_sym_bar: l.q_sym_bar,
            q_sym_bar_pre: l.q_sym_bar_pre,
            q_sym_bar_bound: bound,
            lambda_alg_bar: lam,
        });
    }
    let mut csv = String::from("ell,dim,q_alg,q_sym,q_sym_bar,q_sym_bar_pre,q_sym_bar_bound,lambda_alg_bar\n");
    let o = |v: Option<f64>| v.map(|x| format!("{x:.8e}")).unwrap_or_default();
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.ell,
            r.dim,
            o(r.q_alg),
            o(r.q_sym),
            o(r.q_sym_bar),
            o(r.q_sym_bar_pre),
            o(r.q_sym_bar_bound),
            o(r.lambda_alg_bar)
        );
    }
    write(&cfg.out, "contraction.csv", &csv)?;
    let series = |f: fn(&ContractionRow) -> Option<f64>| -> Vec<(f64, f64)> {
        rows.iter().filter_map(|r| Some((r.ell as f64, f(r)?))).collect()
    };
    let p = Plot::new("Level-wise contraction factors", "level", "factor")
        .scales(Scale::Linear, Scale::Linear)
        .with(Series::new("q_alg", series(|r| r.q_alg)))
        .with(Series::new("q_sym", series(|r| r.q_sym)))
        .with(Series::new("q_sym_bar", series(|r| r.q_sym_bar)));
    write(&cfg.out, "contraction.svg", &p.to_svg())?;
    let p = Plot::new("Upper bound for lambda_alg", "level", "lambda_alg bar")
        .scales(Scale::Linear, Scale::Log)
        .with(Series::new("(1-q_sym)(1-q_alg)/(4 q_alg)", series(|r| r.lambda_alg_bar)));
    write(&cfg.out, "lambda_alg_bound.svg", &p.to_svg())?;

    let mut s = out.summary;
    let _ = writeln!(s, "min lambda_alg bound over levels: {}", fmt_opt(rows.iter().filter_map(|r| r.lambda_alg_bar).reduce(f64::min)));
    if flags.is_empty() {
        s.push_str("all contraction factors lie in [0, 1)\n");
    }
    for f in &flags {
        let _ = writeln!(s, "flag: {f}");
    }
    write(&cfg.out, "summary.txt", &s)?;
    Ok(ContractionOutput { rows, log: out.log, flags, summary: s })
}

#[derive(Debug, Clone)]
pub struct TimingRow {
    pub ell: usize,
    pub dim: usize,
    pub dim_cum: u64,
    pub cost_cum: u64,
    pub aisfem_cum: f64,
    pub direct: f64,
    pub direct_cum: f64,
}

#[derive(Debug)]
pub struct TimingOutput {
    pub rows: Vec<TimingRow>,
    pub log: RunLog,
    /// Log-log slope of the cumulative iterative time against the cumulative cost.
    pub iterative_fit: Option<LinearFit>,
    /// Log-log slope of the per-level direct solve time against the dimension.
    pub direct_fit: Option<LinearFit>,
    pub summary: String,
}

/// Compares the cumulative time of the adaptive loop with a direct solve of
/// the nonsymmetric system on every level. Direct solves run inside the
/// level observer, so they do not count towards the adaptive time.
pub fn cmd_timing(cfg: &ExperimentConfig) -> Result<TimingOutput> {
    let mut direct: Vec<(usize, f64)> = Vec::new();
    let mut failure = None;
    let out = run_with(cfg, &mut |v: &LevelView| {
        let t = Instant::now();
        if let Err(e) = solve_direct(v.step.nonsym(), v.step.load()) {
            failure.get_or_insert(e.to_string());
        }
        direct.push((v.ell, t.elapsed().as_secs_f64()));
    })?;
    if let Some(e) = failure {
        bail!("direct solve failed: {e}");
    }
    let mut rows = Vec::new();
    let mut cum = 0.0;
    for (l, &(ell, t)) in out.log.levels.iter().zip(&direct) {
        debug_assert_eq!(l.ell, ell);
        cum += t;
        rows.push(TimingRow {
            ell,
            dim: l.dim,
            dim_cum: l.dim_cum,
            cost_cum: l.cost_cum,
            aisfem_cum: l.time_s,
            direct: t,
            direct_cum: cum,
        });
    }
    let mut csv = String::from("ell,dim,dim_cum,cost_cum,aisfem_time_cum,direct_time,direct_time_cum\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            r.ell, r.dim, r.dim_cum, r.cost_cum, r.aisfem_cum, r.direct, r.direct_cum
        );
    }
    write(&cfg.out, "timing.csv", &csv)?;
    let pos: Vec<&TimingRow> = rows.iter().filter(|r| r.dim > 0).collect();
    let iterative_fit = final_decade_fit(
        &pos.iter().map(|r| r.cost_cum as f64).collect::<Vec<_>>(),
        &pos.iter().map(|r| r.aisfem_cum).collect::<Vec<_>>(),
    );
    let direct_fit = final_decade_fit(
        &pos.iter().map(|r| r.dim as f64).collect::<Vec<_>>(),
        &pos.iter().map(|r| r.direct).collect::<Vec<_>>(),
    );
    let p = Plot::new("Cumulative time", "dim", "time [s]")
        .with(Series::new("adaptive loop (cumulative)", pos.iter().map(|r| (r.dim as f64, r.aisfem_cum)).collect()))
        .with(Series::new("direct solves (cumulative)", pos.iter().map(|r| (r.dim as f64, r.direct_cum)).collect()));
    write(&cfg.out, "timing.svg", &p.to_svg())?;
    let mut s = out.summary;
    s.push_str(&fmt_fit("cumulative adaptive time vs cumulative nT (final decade)", &iterative_fit));
    s.push_str(&fmt_fit("direct solve time per level vs dim (final decade)", &direct_fit));
    if let Some(r) = rows.last() {
        let _ = writeln!(s, "total: adaptive {:.3} s, direct solves {:.3} s", r.aisfem_cum, r.direct_cum);
    }
    write(&cfg.out, "summary.txt", &s)?;
    Ok(TimingOutput { rows, log: out.log, iterative_fit, direct_fit, summary: s })
}

/// One cell of the parameter study.
#[derive(Debug, Clone)]
pub struct Cell {
    pub theta: f64,
    pub lambda_sym: f64,
    pub status: String,
    pub reached_tol: bool,
    pub levels: usize,
    pub dim: usize,
    pub eta: f64,
    pub dim_cum: u64,
    /// `eta_final * sum over all steps of dim`, or `None` when the cell failed.
    pub weighted_cost: Option<f64>,
}

#[derive(Debug)]
pub struct StudyOutput {
    pub cells: Vec<Cell>,
    pub thetas: Vec<f64>,
    pub lambda_syms: Vec<f64>,
    pub summary: String,
}

impl StudyOutput {
    pub fn cost(&self, theta: f64, lambda_sym: f64) -> Option<f64> {
        self.cells.iter().find(|c| c.theta == theta && c.lambda_sym == lambda_sym).and_then(|c| c.weighted_cost)
    }
}

fn run_cell(cfg: &ExperimentConfig, problem: &Problem, theta: f64, lambda_sym: f64, tol: f64) -> Cell {
    let mut a: AdaptiveConfig = cfg.adaptive.clone();
    a.theta = theta;
    a.lambda_sym = lambda_sym;
    a.stop.tau = Some(tol);
    let dir = cell_dir(&cfg.out, theta, lambda_sym);
    let result = create_out(&dir)
        .and_then(|_| Ok(run_with_observer(&problem.mesh, &problem.data, &a, &mut |_| {})?))
        .and_then(|out| {
            write(&dir, "runlog.csv", &out.log.to_csv())?;
            Ok(out.log)
        });
    match result {
        Ok(log) => {
            let last = log.levels.last();
            let eta = last.map_or(f64::NAN, |l| l.eta);
            let dim_cum = log.steps.last().map_or(0, |s| s.dim_cum);
            let ok = log.status.is_regular();
            Cell {
                theta,
                lambda_sym,
                status: log.status.to_string(),
                reached_tol: matches!(log.status, RunStatus::Tolerance | RunStatus::Exact),
                levels: log.levels.len(),
                dim: last.map_or(0, |l| l.dim),
                eta,
                dim_cum,
                weighted_cost: ok.then_some(eta * dim_cum as f64),
            }
        }
        Err(e) => Cell {
            theta,
            lambda_sym,
            status: format!("error: {e}"),
            reached_tol: false,
            levels: 0,
            dim: 0,
            eta: f64::NAN,
            dim_cum: 0,
            weighted_cost: None,
        },
    }
}

/// A single cell of the parameter study, computed exactly as in
/// [`cmd_param_study`] and written below `cfg.out`.
pub fn study_cell(cfg: &ExperimentConfig, theta: f64, lambda_sym: f64) -> Result<Cell> {
    let Resolved { problem, .. } = prepare(cfg)?;
    Ok(run_cell(cfg, &problem, theta, lambda_sym, cfg.study_tol))
}

/// Runs the `lambda_sym x theta` grid with stopping tolerance `study_tol`
/// and writes the weighted-cost matrix to `table.csv`.
pub fn cmd_param_study(cfg: &ExperimentConfig) -> Result<StudyOutput> {
    if cfg.thetas.is_empty() || cfg.lambda_syms.is_empty() {
        bail!("the parameter grid is empty");
    }
    let Resolved { problem, .. } = prepare(cfg)?;
    create_out(&cfg.out)?;
    let grid: Vec<(f64, f64)> =
        cfg.lambda_syms.iter().flat_map(|&l| cfg.thetas.iter().map(move |&t| (t, l))).collect();
    let problem = Arc::new(problem);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut cells: Vec<Option<Cell>> = vec![None; grid.len()];
    let slots = std::sync::Mutex::new(&mut cells);
    std::thread::scope(|scope| {
        for _ in 0..cfg.threads.min(grid.len()) {
            scope.spawn(|| {
                loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    let Some(&(theta, lsym)) = grid.get(i) else { break };
                    let cell = run_cell(cfg, &problem, theta, lsym, cfg.study_tol);
                    slots.lock().unwrap()[i] = Some(cell);
                }
            });
        }
    });
    let cells: Vec<Cell> = cells.into_iter().map(|c| c.expect("every cell is computed")).collect();

    let mut table = String::from("lambda_sym\\theta");
    for t in &cfg.thetas {
        let _ = write!(table, ",{t}");
    }
    table.push('\n');
    for (li, l) in cfg.lambda_syms.iter().enumerate() {
        let _ = write!(table, "{l:e}");
        for ti in 0..cfg.thetas.len() {
            let c = &cells[li * cfg.thetas.len() + ti];
            let _ = write!(table, ",{}", c.weighted_cost.map(|v| format!("{v:.6e}")).unwrap_or_default());
        }
        table.push('\n');
    }
    write(&cfg.out, "table.csv", &table)?;
    let mut long = String::from("theta,lambda_sym,status,reached_tol,levels,dim,eta,dim_cum,weighted_cost\n");
    for c in &cells {
        let _ = writeln!(
            long,
            "{},{:e},{},{},{},{},{:.6e},{},{}",
            c.theta,
            c.lambda_sym,
            c.status.replace(',', ";"),
            c.reached_tol,
            c.levels,
            c.dim,
            c.eta,
            c.dim_cum,
            c.weighted_cost.map(|v| format!("{v:.6e}")).unwrap_or_default()
        );
    }
    write(&cfg.out, "cells.csv", &long)?;
    let mut p = Plot::new("Weighted cost over theta", "theta", "eta * sum dim").scales(Scale::Linear, Scale::Log);
    for l in &cfg.lambda_syms {
        let pts = cells.iter().filter(|c| c.lambda_sym == *l).filter_map(|c| Some((c.theta, c.weighted_cost?))).collect();
        p = p.with(Series::new(format!("lambda_sym = {l:e}"), pts));
    }
    write(&cfg.out, "cost_theta.svg", &p.to_svg())?;

    let out = StudyOutput { cells, thetas: cfg.thetas.clone(), lambda_syms: cfg.lambda_syms.clone(), summary: String::new() };
    let summary = study_summary(cfg, &problem, &out);
    write(&cfg.out, "summary.txt", &summary)?;
    Ok(StudyOutput { summary, ..out })
}

/// Mean over groups of `max / min` within the group.
fn mean_spread(groups: impl Iterator<Item = Vec<f64>>) -> Option<f64> {
    let spreads: Vec<f64> = groups
        .filter(|g| g.len() >= 2)
        .map(|g| g.iter().copied().fold(f64::MIN, f64::max) / g.iter().copied().fold(f64::MAX, f64::min))
        .collect();
    (!spreads.is_empty()).then(|| spreads.iter().sum::<f64>() / spreads.len() as f64)
}

fn study_summary(cfg: &ExperimentConfig, problem: &Problem, out: &StudyOutput) -> String {
    let mut s = describe(cfg, problem);
    let _ = writeln!(s, "study tolerance: {:e}", cfg.study_tol);
    let _ = writeln!(s, "weighted cost: final eta times the sum of dim over all steps");
    for c in &out.cells {
        let cost = c.weighted_cost.map_or_else(|| "-".into(), |v| format!("{v:.4e}"));
        let _ = writeln!(
            s,
            "theta {:<4} lambda_sym {:<7e} cost {cost:>11}  status {}{}",
            c.theta,
            c.lambda_sym,
            c.status,
            if c.reached_tol { "" } else { " (tolerance not reached)" }
        );
    }
    let best = out.cells.iter().filter(|c| c.weighted_cost.is_some()).min_by(|a, b| {
        a.weighted_cost.unwrap().total_cmp(&b.weighted_cost.unwrap())
    });
    if let Some(b) = best {
        let _ = writeln!(
            s,
            "minimum: theta {} lambda_sym {:e} cost {:.4e}  <== best",
            b.theta,
            b.lambda_sym,
            b.weighted_cost.unwrap()
        );
    }
    let costs = |pred: &dyn Fn(&Cell) -> bool| -> Vec<f64> {
        out.cells.iter().filter(|c| pred(c)).filter_map(|c| c.weighted_cost).collect()
    };
    let theta_spread = mean_spread(out.lambda_syms.iter().map(|&l| costs(&|c| c.lambda_sym == l)));
    let lambda_spread = mean_spread(out.thetas.iter().map(|&t| costs(&|c| c.theta == t)));
    let _ = writeln!(s, "mean max/min ratio across theta (fixed lambda_sym): {}", fmt_opt(theta_spread));
    let _ = writeln!(s, "mean max/min ratio across lambda_sym (fixed theta): {}", fmt_opt(lambda_spread));
    if let (Some(t), Some(l)) = (theta_spread, lambda_spread) {
        let which = if t > l { "theta" } else { "lambda_sym" };
        let _ = writeln!(s, "stronger impact on the cost: {which}");
    }
    s
}

/// Basic statistics of a mesh.
pub fn mesh_info(mesh: &Triangulation, degree: Option<usize>) -> Result<String> {
    let mut s = String::new();
    let area: f64 = (0..mesh.n_elements()).map(|e| mesh.signed_area(e)).sum();
    let diam: Vec<f64> = (0..mesh.n_elements()).map(|e| mesh.diameter(e)).collect();
    let _ = writeln!(s, "vertices: {}", mesh.n_vertices());
    let _ = writeln!(s, "elements: {}", mesh.n_elements());
    let _ = writeln!(s, "boundary edges: {}", mesh.boundary_edges().len());
    let _ = writeln!(s, "area: {area:.12}");
    let _ = writeln!(
        s,
        "diameter: min {:.6e}, max {:.6e}",
        diam.iter().copied().fold(f64::INFINITY, f64::min),
        diam.iter().copied().fold(0.0, f64::max)
    );
    let violations = mesh.validate();
    let _ = writeln!(s, "valid: {}", violations.is_empty());
    for v in violations.iter().take(10) {
        let _ = writeln!(s, "  violation: {v:?}");
    }
    if let Some(m) = degree {
        let space = FeSpace::new(Arc::new(mesh.clone()), m)?;
        let _ = writeln!(s, "degree {m}: {} dofs, {} free", space.n_dofs(), space.dim());
    }
    Ok(s)
}

/// Loads a mesh by name, falling back to a file path.
pub fn load_named_mesh(name: &str, base: &Path) -> Result<Triangulation> {
    match problem::resolve(name, base) {
        Ok(r) => Ok(r.problem.mesh),
        Err(_) => problem::named_mesh(name, base),
    }
}

/// Output directory of a parameter-study cell.
pub fn cell_dir(out: &Path, theta: f64, lambda_sym: f64) -> PathBuf {
    out.join(format!("theta{theta}_lsym{lambda_sym:e}"))
}
