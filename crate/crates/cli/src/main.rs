use std::path::PathBuf;
use std::process::ExitCode;

use aisfem::mesh::save_mesh;
use aisfem_cli::commands::{self, load_named_mesh, mesh_info};
use aisfem_cli::config::{CommonArgs, ExperimentConfig};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Adaptive iteratively symmetrized finite elements: experiment harness.
#[derive(Parser)]
#[command(name = "aisfem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the adaptive algorithm and write the logs with their plots.
    Run(CommonArgs),
    /// Weighted-cost table over a grid of lambda_sym and theta.
    ParamStudy {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated marking parameters.
        #[arg(long, value_delimiter = ',')]
        thetas: Option<Vec<f64>>,
        /// Comma-separated symmetrization parameters.
        #[arg(long, value_delimiter = ',')]
        lambda_syms: Option<Vec<f64>>,
        /// Estimator tolerance of every cell.
        #[arg(long)]
        tol: Option<f64>,
        /// Number of worker threads.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Level-wise contraction factors measured with oracle solves (needs --diagnostics).
    Contraction(CommonArgs),
    /// Cumulative time of the adaptive loop against per-level direct solves.
    Timing(CommonArgs),
    /// Statistics of a named or file-based mesh.
    MeshInfo {
        /// A built-in problem or shape name (lshape, zshape, square, triangle), or a mesh file.
        #[arg(long, default_value = "lshape-dcr")]
        problem: String,
        /// Uniform refinements applied before reporting.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        /// Also report the number of degrees of freedom for this degree.
        #[arg(long)]
        degree: Option<usize>,
        /// Write the (refined) mesh in text format.
        #[arg(long)]
        save: Option<PathBuf>,
    },
}

fn status_code(regular: bool) -> ExitCode {
    if regular { ExitCode::SUCCESS } else { ExitCode::from(2) }
}

fn main_inner() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            let out = commands::cmd_run(&cfg)?;
            print!("{}", out.summary);
            Ok(status_code(out.log.status.is_regular()))
        }
        Command::ParamStudy { common, thetas, lambda_syms, tol, threads } => {
            let mut cfg = ExperimentConfig::resolve(&common)?;
            if let Some(t) = thetas {
                cfg.thetas = t;
            }
            if let Some(l) = lambda_syms {
                cfg.lambda_syms = l;
            }
            if let Some(t) = tol {
                cfg.study_tol = t;
            }
            if let Some(n) = threads {
                cfg.threads = n.max(1);
            }
            let out = commands::cmd_param_study(&cfg)?;
            print!("{}", out.summary);
            Ok(ExitCode::SUCCESS)
        }
        Command::Contraction(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            let out = commands::cmd_contraction(&cfg)?;
            print!("{}", out.summary);
            Ok(status_code(out.log.status.is_regular()))
        }
        Command::Timing(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            let out = commands::cmd_timing(&cfg)?;
            print!("{}", out.summary);
            Ok(status_code(out.log.status.is_regular()))
        }
        Command::MeshInfo { problem, refine, degree, save } => {
            let mesh = load_named_mesh(&problem, std::path::Path::new("."))?.uniform_refine(refine);
            print!("{}", mesh_info(&mesh, degree)?);
            if let Some(path) = save {
                std::fs::write(&path, save_mesh(&mesh)).with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
