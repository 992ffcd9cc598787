//! The adaptive loop: inexact Zarantonello symmetrization with a contractive
//! algebraic solver inside, Dörfler marking, newest vertex bisection and
//! nested iteration.
//!
//! Every iterate `u_l^{k,j}` is logged as one [`StepRecord`], in the order in
//! which the algorithm produces it. Besides the algebraic iterates (`j >= 1`)
//! this includes the start of each level `(l, 0, 0)` and the start of every
//! symmetrization step `(l, k, 0)`, which repeats the last iterate of step `k - 1`.

mod marking;
mod reference;
mod run;
mod sequence;

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::estimator::EstimatorError;
use crate::fem::FemError;
use crate::mesh::MeshError;
use crate::solver::{DEFAULT_COARSE_CAP, SolverError, SolverKind};
use crate::zarantonello::{DeltaEstimate, ZarantonelloError};

pub use marking::dorfler_mark;
pub use run::{LevelView, Run, run, run_with_observer};
pub use sequence::LevelSequence;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriverError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Zarantonello(#[from] ZarantonelloError),
}

/// Conditions that end a run regularly. The first one that holds wins; at
/// least one must be set.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StopRule {
    /// Stop once a level with at least this many degrees of freedom is solved.
    pub max_dim: Option<usize>,
    /// Stop once `eta + |||u^{k,j} - u^{k-1,j}||| + |||u^{k,j} - u^{k,j-1}||| <= tau`
    /// holds at the end of a level.
    pub tau: Option<f64>,
    /// Stop after this many logged steps.
    pub max_steps: Option<usize>,
    /// Stop after this many levels have been solved.
    pub max_levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig {
    pub degree: usize,
    pub theta: f64,
    /// Accepted for completeness; marking is always of minimal cardinality.
    pub c_mark: f64,
    pub lambda_sym: f64,
    pub lambda_alg: f64,
    pub delta: f64,
    pub stop: StopRule,
    pub solver: SolverKind,
    pub coarse_cap: usize,
    pub j_cap: usize,
    pub k_cap: usize,
    /// The composite stopping quantity counts as zero below
    /// `exact_floor * eta_0(0)`, the estimator of the zero initial guess.
    pub exact_floor: f64,
    /// Oracle solves for contraction factors and algebraic errors. Never used
    /// in control flow.
    pub diagnostics: bool,
    /// Quasi-error against a direct solve on a refinement of the final mesh.
    /// Implies `diagnostics`.
    pub reference: bool,
    /// Random samples for the advisory estimate of `delta*`.
    pub samples: usize,
    pub seed: u64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            degree: 1,
            theta: 0.5,
            c_mark: 1.0,
            lambda_sym: 0.1,
            lambda_alg: 0.1,
            delta: 0.5,
            stop: StopRule { max_dim: Some(100_000), ..StopRule::default() },
            solver: SolverKind::PcgBpx,
            coarse_cap: DEFAULT_COARSE_CAP,
            j_cap: 10_000,
            k_cap: 1_000,
            exact_floor: 1e-10,
            diagnostics: false,
            reference: false,
            samples: 200,
            seed: 0,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<(), DriverError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() { Ok(()) } else { Err(DriverError::Config(format!("{name} must be positive, got {v}"))) }
        };
        if self.degree == 0 {
            return Err(DriverError::Config("polynomial degree must be at least 1".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(DriverError::Config(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if !(self.c_mark >= 1.0) {
            return Err(DriverError::Config(format!("C_mark must be at least 1, got {}", self.c_mark)));
        }
        positive("lambda_sym", self.lambda_sym)?;
        positive("lambda_alg", self.lambda_alg)?;
        positive("delta", self.delta)?;
        if !(self.exact_floor >= 0.0) {
            return Err(DriverError::Config("exact_floor must be nonnegative".into()));
        }
        if self.j_cap == 0 || self.k_cap == 0 {
            return Err(DriverError::Config("safety caps must be at least 1".into()));
        }
        let s = &self.stop;
        if s.max_dim.is_none() && s.tau.is_none() && s.max_steps.is_none() && s.max_levels.is_none() {
            return Err(DriverError::Config("no stop rule given".into()));
        }
        if let Some(tau) = s.tau {
            if !(tau >= 0.0) {
                return Err(DriverError::Config(format!("tau must be nonnegative, got {tau}")));
            }
        }
        Ok(())
    }
}

/// Which of the computable error bounds applies to a logged iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundCase {
    /// `(0, 0, 0)`: the zero initial guess, bounded by its estimator.
    Initial,
    /// `1 <= j < j_bar`: `eta + |||u^{k,j} - u^{k-1,j_bar}||| + |||u^{k,j} - u^{k,j-1}|||`.
    MidAlgebraic,
    /// `j = j_bar`, `k < k_bar`: `eta + |||u^{k,j_bar} - u^{k-1,j_bar}|||`.
    PostAlgebraic,
    /// `k = k_bar`, `j = j_bar`: `eta` alone.
    PostSymmetrization,
    /// `l > 0`, `k = 0`: the final estimator of the previous level.
    PostRefinement,
    /// `(l, k, 0)` with `k >= 1`: the same vector as the previous iterate, same bound.
    Restart,
}

impl BoundCase {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Initial => "initial",
            Self::MidAlgebraic => "mid-algebraic",
            Self::PostAlgebraic => "post-algebraic",
            Self::PostSymmetrization => "post-symmetrization",
            Self::PostRefinement => "post-refinement",
            Self::Restart => "restart",
        }
    }
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One iterate of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub ell: usize,
    pub k: usize,
    pub j: usize,
    /// 1-based rank of `(l, k, j)` in the run.
    pub step: usize,
    pub n_elements: usize,
    pub dim: usize,
    pub eta: f64,
    /// `|||u^{k,j} - u^{k,j-1}|||`, for `j >= 1`.
    pub diff_alg: Option<f64>,
    /// `|||u^{k,j} - u^{k-1,j_bar}|||`, for `k >= 1`.
    pub diff_sym: Option<f64>,
    /// Sum of the element counts over all steps so far.
    pub cost_cum: u64,
    /// Sum of the space dimensions over all steps so far.
    pub dim_cum: u64,
    pub time_s: f64,
    pub case: BoundCase,
    /// Computable bound of the energy error (up to an unknown constant).
    pub bound: f64,
    /// `|||u^{k,*} - u^{k,j}|||` (diagnostics).
    pub alg_error: Option<f64>,
    /// `|||u_l^* - u^{k,j}|||` against the exact discrete solution (diagnostics).
    pub discrete_error: Option<f64>,
    /// One-step algebraic contraction ratio (diagnostics, `j >= 1`).
    pub q_alg: Option<f64>,
    /// `|||u_ref - u^{k,j}|||` (reference mode).
    pub ref_error: Option<f64>,
    /// `|||u_ref - u^{k,j}||| + |||u^{k,*} - u^{k,j}||| + eta` (reference mode).
    pub quasi_error: Option<f64>,
}

/// Summary of one mesh level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub ell: usize,
    pub n_elements: usize,
    pub dim: usize,
    pub k_bar: usize,
    pub j_bars: Vec<usize>,
    /// `|l, k_bar, j_bar| - |l, 0, 0|`.
    pub steps: usize,
    /// `eta_l(u_l^{k_bar, j_bar})`.
    pub eta: f64,
    pub n_marked: usize,
    pub q_alg: Option<f64>,
    /// Largest `|||u* - u^{k,*}||| / |||u* - u^{k-1,j_bar}|||` on this level.
    pub q_sym: Option<f64>,
    /// Largest `|||u* - u^{k,j_bar}||| / |||u* - u^{k-1,j_bar}|||` over `1 <= k <= k_bar`.
    pub q_sym_bar: Option<f64>,
    /// The same maximum over `1 <= k < k_bar` only, the range where the
    /// perturbed contraction is guaranteed. `None` whenever `k_bar = 1`.
    pub q_sym_bar_pre: Option<f64>,
    pub time_s: f64,
    pub cost_cum: u64,
    pub dim_cum: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    MaxDim,
    Tolerance,
    /// The estimator and both iteration differences vanished (up to the floor).
    Exact,
    MaxSteps,
    MaxLevels,
    JCap { ell: usize, k: usize },
    KCap { ell: usize },
    Failed(String),
}

impl RunStatus {
    /// True iff the run ended through its stop rule rather than a safety cap or an error.
    pub fn is_regular(&self) -> bool {
        matches!(self, Self::MaxDim | Self::Tolerance | Self::Exact | Self::MaxSteps | Self::MaxLevels)
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MaxDim => f.write_str("max-dim"),
            Self::Tolerance => f.write_str("tolerance"),
            Self::Exact => f.write_str("exact"),
            Self::MaxSteps => f.write_str("max-steps"),
            Self::MaxLevels => f.write_str("max-levels"),
            Self::JCap { ell, k } => write!(f, "j-cap reached on level {ell}, step k={k}"),
            Self::KCap { ell } => write!(f, "k-cap reached on level {ell}"),
            Self::Failed(msg) => write!(f, "failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub steps: Vec<StepRecord>,
    pub levels: Vec<LevelRecord>,
    pub status: RunStatus,
    /// Largest `(#T_l - #T_0) / sum_{l' < l} #M_l'` over the run.
    pub c_mesh: Option<f64>,
    /// Sampled `alpha`, `L` and `delta*` on the final level.
    pub delta_estimate: Option<DeltaEstimate>,
    pub warnings: Vec<String>,
}

/// Header of [`RunLog::to_csv`].
pub const RUNLOG_HEADER: &str = "ell,k,j,step,nT,dim,eta,diff_alg,diff_sym,cost_cum,time_s,delta_quasi,case";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12e}")).unwrap_or_default()
}

impl RunLog {
    /// Per-step CSV; optional columns are left empty when unavailable.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(RUNLOG_HEADER);
        s.push('\n');
        for r in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{:.12e},{},{},{},{:.6},{},{}",
                r.ell,
                r.k,
                r.j,
                r.step,
                r.n_elements,
                r.dim,
                r.eta,
                opt(r.diff_alg),
                opt(r.diff_sym),
                r.cost_cum,
                r.time_s,
                opt(r.quasi_error),
                r.case
            );
        }
        s
    }

    /// Per-level CSV.
    pub fn levels_csv(&self) -> String {
        let mut s = String::from("ell,nT,dim,k_bar,steps,eta,n_marked,q_alg,q_sym,q_sym_bar,q_sym_bar_pre,cost_cum,dim_cum,time_s\n");
        for l in &self.levels {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.12e},{},{},{},{},{},{},{},{:.6}",
                l.ell,
                l.n_elements,
                l.dim,
                l.k_bar,
                l.steps,
                l.eta,
                l.n_marked,
                opt(l.q_alg),
                opt(l.q_sym),
                opt(l.q_sym_bar),
                opt(l.q_sym_bar_pre),
                l.cost_cum,
                l.dim_cum,
                l.time_s
            );
        }
        s
    }

    /// Per-step oracle quantities (empty fields when diagnostics are off).
    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("step,ell,k,j,case,bound,alg_error,discrete_error,q_alg,ref_error,quasi_error\n");
        for r in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:.12e},{},{},{},{},{}",
                r.step,
                r.ell,
                r.k,
                r.j,
                r.case,
                r.bound,
                opt(r.alg_error),
                opt(r.discrete_error),
                opt(r.q_alg),
                opt(r.ref_error),
                opt(r.quasi_error)
            );
        }
        s
    }

    /// Final record of every level, i.e. the iterates `u_l^{k_bar, j_bar}`.
    pub fn final_steps(&self) -> Vec<&StepRecord> {
        let mut out: Vec<&StepRecord> = Vec::new();
        for r in &self.steps {
            match out.last() {
                Some(last) if last.ell == r.ell => *out.last_mut().unwrap() = r,
                _ => out.push(r),
            }
        }
        out
    }
}

/// `qbar_sym = (q_sym + 2 q_alg/(1-q_alg) lambda) / (1 - 2 q_alg/(1-q_alg) lambda)`,
/// the perturbed contraction bound; `None` when it is not in `(0, 1)`.
pub fn perturbed_contraction_bound(q_sym: f64, q_alg: f64, lambda_alg: f64) -> Option<f64> {
    if !(q_alg < 1.0) {
        return None;
    }
    let t = 2.0 * q_alg / (1.0 - q_alg) * lambda_alg;
    let q = (q_sym + t) / (1.0 - t);
    (t < 1.0 && q > 0.0 && q < 1.0).then_some(q)
}

/// Upper bound `(1 - q_sym)(1 - q_alg) / (4 q_alg)` for admissible `lambda_alg`.
pub fn lambda_alg_bound(q_sym: f64, q_alg: f64) -> f64 {
    (1.0 - q_sym) * (1.0 - q_alg) / (4.0 * q_alg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(AdaptiveConfig::default().validate().is_ok());
        let bad = [
            AdaptiveConfig { theta: 0.0, ..Default::default() },
            AdaptiveConfig { theta: 1.1, ..Default::default() },
            AdaptiveConfig { delta: 0.0, ..Default::default() },
            AdaptiveConfig { lambda_alg: -1.0, ..Default::default() },
            AdaptiveConfig { c_mark: 0.5, ..Default::default() },
            AdaptiveConfig { degree: 0, ..Default::default() },
            AdaptiveConfig { stop: StopRule::default(), ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn contraction_bounds() {
        // With q_alg -> 0 the perturbed bound tends to q_sym.
        assert!((perturbed_contraction_bound(0.5, 1e-12, 0.1).unwrap() - 0.5).abs() < 1e-10);
        assert!(perturbed_contraction_bound(0.5, 0.9, 1.0).is_none());
        assert!((lambda_alg_bound(0.5, 0.5) - 0.125).abs() < 1e-15);
    }
}
