use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use web_time::{Duration, Instant};

use super::reference::{History, reference_errors};
use super::{AdaptiveConfig, BoundCase, DriverError, LevelRecord, RunLog, RunStatus, StepRecord, dorfler_mark};
use crate::estimator::{Indicators, estimate};
use crate::fem::{CsrMatrix, FeSpace, ProblemData, Prolongation, assemble_system, energy_distance};
use crate::mesh::Triangulation;
use crate::solver::{Hierarchy, Iteration, changed_dofs, solve_direct, solve_spd};
use crate::zarantonello::ZarantonelloStep;

/// State handed to an observer at the end of every level, before marking.
pub struct LevelView<'a> {
    pub ell: usize,
    pub space: &'a FeSpace,
    pub step: &'a ZarantonelloStep,
    /// `u_l^{k_bar, j_bar}`.
    pub solution: &'a [f64],
    pub indicators: &'a Indicators,
}

/// Outcome of a run: the log and the state of the last level reached.
#[derive(Debug)]
pub struct Run {
    pub log: RunLog,
    pub space: FeSpace,
    pub solution: Vec<f64>,
    pub indicators: Indicators,
}

struct Clock {
    start: Instant,
    excluded: Duration,
}

impl Clock {
    fn seconds(&self) -> f64 {
        self.start.elapsed().saturating_sub(self.excluded).as_secs_f64()
    }
}

/// Append-only step log with the running cost sums.
struct Recorder {
    steps: Vec<StepRecord>,
    cost_cum: u64,
    dim_cum: u64,
    clock: Clock,
    max_steps: Option<usize>,
    history: Option<History>,
}

/// Oracle values attached to a step when diagnostics are on.
#[derive(Default)]
struct Oracle {
    alg_error: Option<f64>,
    discrete_error: Option<f64>,
    q_alg: Option<f64>,
}

impl Recorder {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        (ell, k, j): (usize, usize, usize),
        space: &FeSpace,
        eta: f64,
        diff_alg: Option<f64>,
        diff_sym: Option<f64>,
        (case, bound): (BoundCase, f64),
        oracle: Oracle,
        v: &[f64],
    ) -> bool {
        self.cost_cum += space.mesh().n_elements() as u64;
        self.dim_cum += space.dim() as u64;
        self.steps.push(StepRecord {
            ell,
            k,
            j,
            step: self.steps.len() + 1,
            n_elements: space.mesh().n_elements(),
            dim: space.dim(),
            eta,
            diff_alg,
            diff_sym,
            cost_cum: self.cost_cum,
            dim_cum: self.dim_cum,
            time_s: self.clock.seconds(),
            case,
            bound,
            alg_error: oracle.alg_error,
            discrete_error: oracle.discrete_error,
            q_alg: oracle.q_alg,
            ref_error: None,
            quasi_error: None,
        });
        if let Some(h) = &mut self.history {
            h.snapshots.push(v.to_vec());
        }
        self.max_steps.is_some_and(|m| self.steps.len() >= m)
    }
}

struct State<'d> {
    data: &'d ProblemData,
    cfg: &'d AdaptiveConfig,
    rec: Recorder,
    levels: Vec<LevelRecord>,
    mesh: Arc<Triangulation>,
    space: FeSpace,
    z: ZarantonelloStep,
    hierarchy: Hierarchy,
    u: Vec<f64>,
    indicators: Indicators,
    exact_floor: f64,
    n_elements0: usize,
    marked_total: usize,
    c_mesh: Option<f64>,
}

/// Contraction ratios are only meaningful while the reference error is
/// above roundoff relative to the size of the limit.
const RATIO_FLOOR: f64 = 1e-10;

fn ratio(num: f64, den: f64, scale: f64) -> Option<f64> {
    (den > RATIO_FLOOR * scale).then(|| num / den)
}

fn dist(k: &CsrMatrix, a: &[f64], b: &[f64]) -> f64 {
    energy_distance(k, a, b)
}

/// Runs the adaptive algorithm on `mesh` until the stop rule of `cfg` holds.
///
/// Invalid configurations and setup failures on the initial mesh are
/// returned as errors; failures later on end the run with
/// [`RunStatus::Failed`] and keep the partial log.
pub fn run(mesh: &Triangulation, data: &ProblemData, cfg: &AdaptiveConfig) -> Result<Run, DriverError> {
    run_with_observer(mesh, data, cfg, &mut |_| {})
}

/// Like [`run`], calling `observer` at the end of every level. Time spent in
/// the observer is excluded from the logged wall time.
pub fn run_with_observer(
    mesh: &Triangulation,
    data: &ProblemData,
    cfg: &AdaptiveConfig,
    observer: &mut dyn FnMut(&LevelView),
) -> Result<Run, DriverError> {
    cfg.validate()?;
    let start = Instant::now();
    let mesh = Arc::new(mesh.clone());
    let space = FeSpace::new(mesh.clone(), cfg.degree)?;
    let z = ZarantonelloStep::from_system(cfg.delta, assemble_system(&space, data)?)?;
    let hierarchy = Hierarchy::new(z.stiffness().clone(), cfg.coarse_cap)?;
    let u = vec![0.0; space.dim()];
    let indicators = estimate(&space, data, &u)?;
    let history = cfg.reference.then(|| History::new(space.clone()));
    let mut state = State {
        data,
        cfg,
        rec: Recorder {
            steps: Vec::new(),
            cost_cum: 0,
            dim_cum: 0,
            clock: Clock { start, excluded: Duration::ZERO },
            max_steps: cfg.stop.max_steps,
            history,
        },
        levels: Vec::new(),
        exact_floor: cfg.exact_floor * indicators.total(),
        n_elements0: mesh.n_elements(),
        mesh,
        space,
        z,
        hierarchy,
        u,
        indicators,
        marked_total: 0,
        c_mesh: None,
    };
    let status = match drive(&mut state, observer) {
        Ok(status) => status,
        Err(e) => RunStatus::Failed(e.to_string()),
    };

    let mut warnings = Vec::new();
    if let Some(history) = &state.rec.history {
        if !matches!(status, RunStatus::Failed(_)) {
            if let Err(e) = reference_errors(history, data, cfg.degree, &mut state.rec.steps) {
                warnings.push(format!("reference solve failed: {e}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let delta_estimate = state.z.estimate_delta(cfg.samples.max(10), &mut rng).ok();
    if let Some(est) = delta_estimate {
        if cfg.delta >= 2.0 * est.delta_star {
            warnings.push(format!(
                "delta = {} is at least twice the sampled delta* = {:.4}; contraction is not guaranteed",
                cfg.delta, est.delta_star
            ));
        }
    }
    let log = RunLog {
        steps: state.rec.steps,
        levels: state.levels,
        status,
        c_mesh: state.c_mesh,
        delta_estimate,
        warnings,
    };
    Ok(Run { log, space: state.space, solution: state.u, indicators: state.indicators })
}

fn drive(s: &mut State, observer: &mut dyn FnMut(&LevelView)) -> Result<RunStatus, DriverError> {
    let cfg = s.cfg;
    let diagnostics = cfg.diagnostics || cfg.reference;
    let (lambda_sym, lambda_alg) = (cfg.lambda_sym, cfg.lambda_alg);
    let mut prev_eta: Option<f64> = None;
    let mut ell = 0;
    loop {
        let level_first_step = s.rec.steps.len() + 1;
        let k_mat = s.z.stiffness().clone();
        let u_star = if diagnostics { Some(solve_direct(s.z.nonsym(), s.z.load())?) } else { None };
        let star_norm = u_star.as_ref().map_or(0.0, |us| k_mat.bilinear(us, us).sqrt());

        // (l, 0, 0)
        let eta0 = s.indicators.total();
        let start_bound = match prev_eta {
            None => (BoundCase::Initial, eta0),
            Some(e) => (BoundCase::PostRefinement, e),
        };
        let oracle = Oracle {
            alg_error: diagnostics.then_some(0.0),
            discrete_error: u_star.as_ref().map(|us| dist(&k_mat, us, &s.u)),
            q_alg: None,
        };
        if s.rec.push((ell, 0, 0), &s.space, eta0, None, None, start_bound, oracle, &s.u) {
            return Ok(RunStatus::MaxSteps);
        }

        let mut u_prev = s.u.clone();
        let (mut eta_prev, mut bound_prev) = (eta0, start_bound.1);
        let (mut q_alg_level, mut q_sym_level): (Option<f64>, Option<f64>) = (None, None);
        let mut q_sym_bar_k: Vec<f64> = Vec::new();
        let mut j_bars = Vec::new();
        let mut k = 0;
        let (diff_alg_final, diff_sym_final) = loop {
            k += 1;
            if k > cfg.k_cap {
                return Ok(RunStatus::KCap { ell });
            }
            let g = s.z.step_rhs(&u_prev)?;
            let u_kstar = if diagnostics { Some(solve_spd(&k_mat, &g)?) } else { None };
            let kstar_norm = u_kstar.as_ref().map_or(0.0, |uk| k_mat.bilinear(uk, uk).sqrt());
            let err_prev = u_star.as_ref().map(|us| dist(&k_mat, us, &u_prev));
            if let (Some(us), Some(uk), Some(e)) = (&u_star, &u_kstar, err_prev) {
                if let Some(q) = ratio(dist(&k_mat, us, uk), e, star_norm) {
                    q_sym_level = Some(q_sym_level.map_or(q, |m: f64| m.max(q)));
                }
            }

            // (l, k, 0) repeats u^{k-1, j_bar}.
            let oracle = Oracle {
                alg_error: u_kstar.as_ref().map(|uk| dist(&k_mat, uk, &u_prev)),
                discrete_error: err_prev,
                q_alg: None,
            };
            let restart = (BoundCase::Restart, bound_prev);
            if s.rec.push((ell, k, 0), &s.space, eta_prev, None, Some(0.0), restart, oracle, &u_prev) {
                return Ok(RunStatus::MaxSteps);
            }

            let mut it = Iteration::new(cfg.solver, &s.hierarchy, g, &u_prev)?;
            let mut w = u_prev.clone();
            let mut j = 0;
            let (eta, diff_alg, diff_sym, stop_k, bound) = loop {
                j += 1;
                if j > cfg.j_cap {
                    s.u = w;
                    return Ok(RunStatus::JCap { ell, k });
                }
                let w_old = w.clone();
                it.step(&mut w)?;
                s.indicators = estimate(&s.space, s.data, &w)?;
                let eta = s.indicators.total();
                let diff_alg = dist(&k_mat, &w, &w_old);
                let diff_sym = dist(&k_mat, &w, &u_prev);
                let stop_j = diff_alg <= lambda_alg * (lambda_sym * eta + diff_sym);
                let stop_k = stop_j && diff_sym <= lambda_sym * eta;
                let bound = if !stop_j {
                    (BoundCase::MidAlgebraic, eta + diff_sym + diff_alg)
                } else if !stop_k {
                    (BoundCase::PostAlgebraic, eta + diff_sym)
                } else {
                    (BoundCase::PostSymmetrization, eta)
                };
                let q_alg = u_kstar.as_ref().and_then(|uk| ratio(dist(&k_mat, uk, &w), dist(&k_mat, uk, &w_old), kstar_norm));
                if let Some(q) = q_alg {
                    q_alg_level = Some(q_alg_level.map_or(q, |m: f64| m.max(q)));
                }
                let oracle = Oracle {
                    alg_error: u_kstar.as_ref().map(|uk| dist(&k_mat, uk, &w)),
                    discrete_error: u_star.as_ref().map(|us| dist(&k_mat, us, &w)),
                    q_alg,
                };
                let full = s.rec.push((ell, k, j), &s.space, eta, Some(diff_alg), Some(diff_sym), bound, oracle, &w);
                if full {
                    s.u = w;
                    return Ok(RunStatus::MaxSteps);
                }
                if stop_j {
                    break (eta, diff_alg, diff_sym, stop_k, bound.1);
                }
            };
            j_bars.push(j);
            if let (Some(us), Some(e)) = (&u_star, err_prev) {
                if let Some(q) = ratio(dist(&k_mat, us, &w), e, star_norm) {
                    q_sym_bar_k.push(q);
                }
            }
            u_prev = w;
            s.u.clone_from(&u_prev);
            eta_prev = eta;
            bound_prev = bound;
            if stop_k {
                break (diff_alg, diff_sym);
            }
        };
        let k_bar = k;
        let eta = eta_prev;

        let observed = Instant::now();
        observer(&LevelView { ell, space: &s.space, step: &s.z, solution: &s.u, indicators: &s.indicators });
        s.rec.clock.excluded += observed.elapsed();

        let q_sym_bar = q_sym_bar_k.iter().copied().reduce(f64::max);
        let q_sym_bar_pre = q_sym_bar_k.iter().take(k_bar.saturating_sub(1)).copied().reduce(f64::max);
        let last = s.rec.steps.last().unwrap();
        s.levels.push(LevelRecord {
            ell,
            n_elements: s.space.mesh().n_elements(),
            dim: s.space.dim(),
            k_bar,
            j_bars,
            steps: last.step - level_first_step,
            eta,
            n_marked: 0,
            q_alg: q_alg_level,
            q_sym: q_sym_level,
            q_sym_bar,
            q_sym_bar_pre,
            time_s: last.time_s,
            cost_cum: last.cost_cum,
            dim_cum: last.dim_cum,
        });

        let composite = eta + diff_sym_final + diff_alg_final;
        if composite <= s.exact_floor {
            return Ok(RunStatus::Exact);
        }
        if cfg.stop.tau.is_some_and(|tau| composite <= tau) {
            return Ok(RunStatus::Tolerance);
        }
        if cfg.stop.max_dim.is_some_and(|d| s.space.dim() >= d) {
            return Ok(RunStatus::MaxDim);
        }
        if cfg.stop.max_levels.is_some_and(|n| ell + 1 >= n) {
            return Ok(RunStatus::MaxLevels);
        }
        let marked = dorfler_mark(&s.indicators, cfg.theta)?;
        if marked.is_empty() {
            return Ok(RunStatus::Exact);
        }
        s.levels.last_mut().unwrap().n_marked = marked.len();

        let refinement = s.mesh.refine(&marked)?;
        let fine_mesh = Arc::new(refinement.mesh.clone());
        let fine = FeSpace::new(fine_mesh.clone(), cfg.degree)?;
        let p = Prolongation::from_refinement(&s.space, &fine, &refinement)?.into_matrix();
        let local = changed_dofs(&fine, &s.mesh, &refinement);
        s.u = p.apply(&s.u);
        s.z = ZarantonelloStep::from_system(cfg.delta, assemble_system(&fine, s.data)?)?;
        s.hierarchy.push(s.z.stiffness().clone(), p, local)?;
        if let Some(h) = &mut s.rec.history {
            h.push_level(fine.clone(), refinement.parent);
        }
        s.marked_total += marked.len();
        let growth = (fine_mesh.n_elements() - s.n_elements0) as f64 / s.marked_total as f64;
        s.c_mesh = Some(s.c_mesh.map_or(growth, |c| c.max(growth)));
        s.mesh = fine_mesh;
        s.space = fine;
        s.indicators = estimate(&s.space, s.data, &s.u)?;
        prev_eta = Some(eta);
        ell += 1;
    }
}
