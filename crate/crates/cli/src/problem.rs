//! Problem resolution: built-in names or TOML problem files with symbolic
//! coefficients in the variables `x` and `y`.
//!
//! ```toml
//! mesh = "triangle"            # lshape, zshape, square, triangle or a mesh file path
//! refine = 0                   # uniform refinements applied to the mesh
//! diffusion = [["1", "0"], ["0", "1"]]
//! convection = ["1", "2"]
//! reaction = "1"
//! source = "2*x + 2*y"
//! flux_source = ["0", "0"]
//! data_degree = 3
//! exact = "x*y*(1-x-y)"        # optional, used for error reports only
//! ```
//!
//! Divergences of the diffusion matrix and the flux source, which enter the
//! error estimator, are obtained by symbolic differentiation.

use std::path::Path;
use std::sync::Arc;

use aisfem::fem::ProblemData;
use aisfem::mesh::{Triangulation, l_shape, load_mesh, reference_triangle, unit_square, z_shape};
use aisfem::problems::{BUILTIN, Problem};
use anyhow::{Context, Result, anyhow, bail};
use exmex::prelude::*;
use serde::Deserialize;

/// A parsed expression in `x` and `y`.
#[derive(Clone)]
pub struct Expr {
    ex: FlatEx<f64>,
    /// For each variable of `ex`, 0 for `x` and 1 for `y`.
    slots: Vec<usize>,
}

impl Expr {
    pub fn parse(text: &str) -> Result<Self> {
        let ex = exmex::parse::<f64>(text).map_err(|e| anyhow!("cannot parse `{text}`: {e}"))?;
        Self::from_flat(ex, text)
    }

    fn from_flat(ex: FlatEx<f64>, text: &str) -> Result<Self> {
        let slots = ex
            .var_names()
            .iter()
            .map(|v| match v.as_str() {
                "x" => Ok(0),
                "y" => Ok(1),
                other => Err(anyhow!("unknown variable `{other}` in `{text}`; only x and y are allowed")),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { ex, slots })
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let mut args = [0.0; 2];
        for (a, &s) in args.iter_mut().zip(&self.slots) {
            *a = p[s];
        }
        // Parsing succeeded and the argument count matches, so evaluation cannot fail.
        self.ex.eval(&args[..self.slots.len()]).unwrap_or(f64::NAN)
    }

    /// Partial derivative with respect to `x` (`dir = 0`) or `y` (`dir = 1`).
    pub fn derivative(&self, dir: usize) -> Result<Self> {
        match self.slots.iter().position(|&s| s == dir) {
            None => Self::parse("0"),
            Some(i) => {
                let d = self.ex.clone().partial(i).map_err(|e| anyhow!("cannot differentiate: {e}"))?;
                // The derivative may lose variables; re-derive the slot map by name.
                let names: Vec<String> = d.var_names().to_vec();
                let slots = names.iter().map(|n| if n == "x" { 0 } else { 1 }).collect();
                Ok(Self { ex: d, slots })
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub mesh: String,
    #[serde(default)]
    pub refine: usize,
    pub diffusion: Option<[[String; 2]; 2]>,
    pub convection: Option<[String; 2]>,
    pub reaction: Option<String>,
    pub source: Option<String>,
    pub flux_source: Option<[String; 2]>,
    pub data_degree: Option<usize>,
    pub exact: Option<String>,
}

/// A resolved problem. Custom problems carry their exact solution as an
/// expression instead of a function pointer.
pub struct Resolved {
    pub problem: Problem,
    pub exact: Option<Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>>,
}

/// Resolves a built-in name, or else a problem file relative to `base`.
pub fn resolve(name: &str, base: &Path) -> Result<Resolved> {
    if let Some(problem) = Problem::builtin(name) {
        let exact = problem.exact.map(|f| Arc::new(f) as Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>);
        return Ok(Resolved { problem, exact });
    }
    let path = base.join(name);
    if !path.is_file() {
        bail!("unknown problem `{name}`: not one of {BUILTIN:?} and no such file");
    }
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let file: ProblemFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut resolved = build(&file, dir)?;
    resolved.problem.name = path.file_stem().map_or_else(|| name.to_string(), |s| s.to_string_lossy().into_owned());
    Ok(resolved)
}

pub fn named_mesh(name: &str, dir: &Path) -> Result<Triangulation> {
    Ok(match name {
        "lshape" => l_shape(),
        "zshape" => z_shape(),
        "square" => unit_square(),
        "triangle" => reference_triangle(),
        path => {
            let p = dir.join(path);
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading mesh {}", p.display()))?;
            load_mesh(&text).with_context(|| format!("loading mesh {}", p.display()))?
        }
    })
}

fn parse_opt(e: &Option<String>, default: &str) -> Result<Expr> {
    Expr::parse(e.as_deref().unwrap_or(default))
}

fn parse_pair(e: &Option<[String; 2]>) -> Result<[Expr; 2]> {
    match e {
        Some([a, b]) => Ok([Expr::parse(a)?, Expr::parse(b)?]),
        None => Ok([Expr::parse("0")?, Expr::parse("0")?]),
    }
}

/// Builds problem data from the symbolic description in `file`.
pub fn build(file: &ProblemFile, dir: &Path) -> Result<Resolved> {
    let mesh = named_mesh(&file.mesh, dir)?.uniform_refine(file.refine);
    let a = match &file.diffusion {
        Some(rows) => [
            [Expr::parse(&rows[0][0])?, Expr::parse(&rows[0][1])?],
            [Expr::parse(&rows[1][0])?, Expr::parse(&rows[1][1])?],
        ],
        None => [[Expr::parse("1")?, Expr::parse("0")?], [Expr::parse("0")?, Expr::parse("1")?]],
    };
    // Column-wise divergence (d_x a11 + d_y a21, d_x a12 + d_y a22).
    let div_a = [
        [a[0][0].derivative(0)?, a[1][0].derivative(1)?],
        [a[0][1].derivative(0)?, a[1][1].derivative(1)?],
    ];
    let b = parse_pair(&file.convection)?;
    let c = parse_opt(&file.reaction, "0")?;
    let f = parse_opt(&file.source, "0")?;
    let fv = parse_pair(&file.flux_source)?;
    let div_fv = [fv[0].derivative(0)?, fv[1].derivative(1)?];
    let exact = file.exact.as_deref().map(Expr::parse).transpose()?;

    let mut data = ProblemData::poisson(0.0)
        .with_diffusion(
            move |p| [[a[0][0].eval(p), a[0][1].eval(p)], [a[1][0].eval(p), a[1][1].eval(p)]],
            move |p| [div_a[0][0].eval(p) + div_a[0][1].eval(p), div_a[1][0].eval(p) + div_a[1][1].eval(p)],
        )
        .with_convection(move |p| [b[0].eval(p), b[1].eval(p)])
        .with_reaction(move |p| c.eval(p))
        .with_source(move |p| f.eval(p))
        .with_flux_source(move |p| [fv[0].eval(p), fv[1].eval(p)], move |p| div_fv[0].eval(p) + div_fv[1].eval(p));
    if let Some(d) = file.data_degree {
        data.data_degree = d;
    }
    let problem = Problem { name: "custom".into(), mesh, data, exact: None };
    let exact = exact.map(|e| Arc::new(move |p: [f64; 2]| e.eval(p)) as Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>);
    Ok(Resolved { problem, exact })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions_and_derivatives() {
        let e = Expr::parse("x*y*(1-x-y)").unwrap();
        assert!((e.eval([0.5, 0.25]) - 0.5 * 0.25 * 0.25).abs() < 1e-15);
        let dx = e.derivative(0).unwrap();
        assert!((dx.eval([0.5, 0.25]) - (0.25 - 2.0 * 0.5 * 0.25 - 0.25 * 0.25)).abs() < 1e-14);
        let only_y = Expr::parse("sin(y)").unwrap();
        assert_eq!(only_y.derivative(0).unwrap().eval([3.0, 1.0]), 0.0);
        assert!((only_y.derivative(1).unwrap().eval([3.0, 1.0]) - 1f64.cos()).abs() < 1e-15);
        assert_eq!(Expr::parse("7").unwrap().eval([1.0, 2.0]), 7.0);
        assert!(Expr::parse("x + z").is_err());
        assert!(Expr::parse("x +").is_err());
    }

    #[test]
    fn builtin_and_missing_problems() {
        assert!(resolve("lshape-dcr", Path::new(".")).is_ok());
        assert!(resolve("manufactured", Path::new(".")).unwrap().exact.is_some());
        assert!(resolve("no-such-problem", Path::new(".")).is_err());
    }

    #[test]
    fn symbolic_data_matches_closed_form() {
        let file: ProblemFile = toml::from_str(
            r#"
            mesh = "square"
            diffusion = [["1 + x", "0"], ["0", "1 + y^2"]]
            flux_source = ["x^2", "x*y"]
            "#,
        )
        .unwrap();
        let r = build(&file, Path::new(".")).unwrap();
        let d = &r.problem.data;
        let p = [0.3, 0.7];
        assert_eq!((d.diffusion)(p), [[1.3, 0.0], [0.0, 1.0 + 0.49]]);
        let div = (d.div_diffusion)(p);
        assert!((div[0] - 1.0).abs() < 1e-14 && (div[1] - 1.4).abs() < 1e-14);
        assert!(((d.div_flux_source)(p) - (0.6 + 0.3)).abs() < 1e-14);
    }
}
