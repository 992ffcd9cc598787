//! Experiment configuration: built-in defaults, then an optional TOML file,
//! then command-line flags, each overriding the previous layer.
//!
//! ```toml
//! problem = "lshape-dcr"        # built-in name or path to a problem file
//! degree = 1
//! seed = 0
//! out = "out"
//!
//! [adaptive]
//! theta = 0.5
//! lambda_sym = 0.1
//! lambda_alg = 0.1
//! c_mark = 1.0
//! j_cap = 10000
//! k_cap = 1000
//! exact_floor = 1e-10
//! diagnostics = false
//! reference = false
//!
//! [stop]
//! max_dim = 100000
//! tau = 1e-3
//! max_steps = 100000
//! max_levels = 60
//!
//! [solver]
//! kind = "pcg-bpx"              # or "mg-vcycle"
//! coarse_cap = 500
//! q_cap = 0.9
//!
//! [zarantonello]
//! delta = 0.5
//! samples = 200
//!
//! [fem]
//! data_degree = 2               # extra quadrature degree for variable data
//!
//! [study]
//! thetas = [0.1, 0.3, 0.5, 0.7, 0.9]
//! lambda_syms = [0.1, 0.01, 0.001, 0.0001]
//! tol = 1e-3
//! threads = 4
//!
//! [analysis]
//! discard_fraction = 0.4
//! ```

use std::path::{Path, PathBuf};

use aisfem::driver::{AdaptiveConfig, StopRule};
use aisfem::solver::SolverKind;
use anyhow::{Context, Result, bail};
use clap::Args;
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    pub degree: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub adaptive: AdaptiveSection,
    #[serde(default)]
    pub stop: StopSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub zarantonello: ZarantonelloSection,
    #[serde(default)]
    pub fem: FemSection,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub theta: Option<f64>,
    pub lambda_sym: Option<f64>,
    pub lambda_alg: Option<f64>,
    pub c_mark: Option<f64>,
    pub j_cap: Option<usize>,
    pub k_cap: Option<usize>,
    pub exact_floor: Option<f64>,
    pub diagnostics: Option<bool>,
    pub reference: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSection {
    pub max_dim: Option<usize>,
    pub tau: Option<f64>,
    pub max_steps: Option<usize>,
    pub max_levels: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub kind: Option<String>,
    pub coarse_cap: Option<usize>,
    pub q_cap: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZarantonelloSection {
    pub delta: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemSection {
    pub data_degree: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub thetas: Option<Vec<f64>>,
    pub lambda_syms: Option<Vec<f64>>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub discard_fraction: Option<f64>,
}

/// Flags shared by all experiment subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML configuration file; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in problem name or path to a problem file.
    #[arg(long)]
    pub problem: Option<String>,
    /// Polynomial degree m.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Dörfler marking parameter in (0, 1].
    #[arg(long)]
    pub theta: Option<f64>,
    /// Symmetrization stops once the symmetrization update is below lambda_sym times eta.
    #[arg(long)]
    pub lambda_sym: Option<f64>,
    /// Solver steps stop once the algebraic update is below lambda_alg times the symmetrization bound.
    #[arg(long)]
    pub lambda_alg: Option<f64>,
    /// Zarantonello damping parameter.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Stop once the number of degrees of freedom reaches this value.
    #[arg(long)]
    pub stop_dim: Option<usize>,
    /// Stop once the computable error bound drops below this value.
    #[arg(long)]
    pub stop_eta: Option<f64>,
    /// Stop after this many levels.
    #[arg(long)]
    pub stop_levels: Option<usize>,
    /// Algebraic solver: pcg-bpx or mg-vcycle.
    #[arg(long)]
    pub solver: Option<String>,
    /// Compute oracle solutions and contraction factors (direct solves on every level).
    #[arg(long)]
    pub diagnostics: bool,
    /// Compute quasi-errors against a reference solution on the refined final mesh.
    #[arg(long)]
    pub reference: bool,
    /// Seed of the sampled estimate of the optimal delta.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved settings of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: String,
    /// Directory used to resolve relative problem and mesh paths.
    pub base_dir: PathBuf,
    pub adaptive: AdaptiveConfig,
    pub data_degree: Option<usize>,
    pub q_cap: f64,
    pub out: PathBuf,
    pub thetas: Vec<f64>,
    pub lambda_syms: Vec<f64>,
    pub study_tol: f64,
    pub threads: usize,
    pub discard_fraction: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: "lshape-dcr".into(),
            base_dir: PathBuf::from("."),
            adaptive: AdaptiveConfig::default(),
            data_degree: None,
            q_cap: 0.9,
            out: PathBuf::from("out"),
            thetas: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            lambda_syms: vec![1e-1, 1e-2, 1e-3, 1e-4],
            study_tol: 1e-3,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            discard_fraction: 0.4,
        }
    }
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl ExperimentConfig {
    /// Layers the flags over the config file named in `args`, over the defaults.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            let file = load_file(path)?;
            cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            cfg.apply_file(&file)?;
        }
        cfg.apply_args(args)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, f: &FileConfig) -> Result<()> {
        let a = &mut self.adaptive;
        set(&mut self.problem, f.problem.clone());
        set(&mut a.degree, f.degree);
        set(&mut a.seed, f.seed);
        if let Some(out) = &f.out {
            self.out = self.base_dir.join(out);
        }
        let s = &f.adaptive;
        set(&mut a.theta, s.theta);
        set(&mut a.lambda_sym, s.lambda_sym);
        set(&mut a.lambda_alg, s.lambda_alg);
        set(&mut a.c_mark, s.c_mark);
        set(&mut a.j_cap, s.j_cap);
        set(&mut a.k_cap, s.k_cap);
        set(&mut a.exact_floor, s.exact_floor);
        set(&mut a.diagnostics, s.diagnostics);
        set(&mut a.reference, s.reference);
        let st = &f.stop;
        if st.max_dim.is_some() || st.tau.is_some() || st.max_steps.is_some() || st.max_levels.is_some() {
            a.stop = StopRule { max_dim: st.max_dim, tau: st.tau, max_steps: st.max_steps, max_levels: st.max_levels };
        }
        if let Some(kind) = &f.solver.kind {
            a.solver = parse_solver(kind)?;
        }
        set(&mut a.coarse_cap, f.solver.coarse_cap);
        set(&mut self.q_cap, f.solver.q_cap);
        set(&mut a.delta, f.zarantonello.delta);
        set(&mut a.samples, f.zarantonello.samples);
        if f.fem.data_degree.is_some() {
            self.data_degree = f.fem.data_degree;
        }
        set(&mut self.thetas, f.study.thetas.clone());
        set(&mut self.lambda_syms, f.study.lambda_syms.clone());
        set(&mut self.study_tol, f.study.tol);
        set(&mut self.threads, f.study.threads);
        set(&mut self.discard_fraction, f.analysis.discard_fraction);
        Ok(())
    }

    pub fn apply_args(&mut self, args: &CommonArgs) -> Result<()> {
        let a = &mut self.adaptive;
        set(&mut self.problem, args.problem.clone());
        set(&mut a.degree, args.degree);
        set(&mut a.theta, args.theta);
        set(&mut a.lambda_sym, args.lambda_sym);
        set(&mut a.lambda_alg, args.lambda_alg);
        set(&mut a.delta, args.delta);
        set(&mut a.seed, args.seed);
        if args.stop_dim.is_some() {
            a.stop.max_dim = args.stop_dim;
        }
        if args.stop_eta.is_some() {
            a.stop.tau = args.stop_eta;
        }
        if args.stop_levels.is_some() {
            a.stop.max_levels = args.stop_levels;
        }
        if let Some(kind) = &args.solver {
            a.solver = parse_solver(kind)?;
        }
        a.diagnostics |= args.diagnostics;
        a.reference |= args.reference;
        set(&mut self.out, args.out.clone());
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.adaptive.validate()?;
        if !(self.q_cap > 0.0 && self.q_cap < 1.0) {
            bail!("solver.q_cap must lie in (0, 1), got {}", self.q_cap);
        }
        if !(0.0..1.0).contains(&self.discard_fraction) {
            bail!("analysis.discard_fraction must lie in [0, 1), got {}", self.discard_fraction);
        }
        if self.threads == 0 {
            bail!("study.threads must be at least 1");
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn parse_solver(kind: &str) -> Result<SolverKind> {
    kind.parse::<SolverKind>().map_err(|e| anyhow::anyhow!("solver.kind: {e}"))
}
