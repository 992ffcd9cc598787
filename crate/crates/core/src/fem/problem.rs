use std::fmt;
use std::sync::Arc;

pub type ScalarField = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
/// 2x2 matrix field, row major. Symmetry is checked at assembly.
pub type MatrixField = Arc<dyn Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync>;

/// Coefficients and data of `-div(A grad u) + b . grad u + c u = f - div fvec`
/// with homogeneous Dirichlet conditions.
///
/// `div_diffusion` is the divergence of the columns of `A`, i.e.
/// `(d_x a11 + d_y a21, d_x a12 + d_y a22)`, and `div_flux_source` the
/// divergence of `fvec`. Both enter the strong residual of the error
/// estimator and are zero for constant fields.
#[derive(Clone)]
pub struct ProblemData {
    pub diffusion: MatrixField,
    pub div_diffusion: VectorField,
    pub convection: VectorField,
    pub reaction: ScalarField,
    pub source: ScalarField,
    pub flux_source: VectorField,
    pub div_flux_source: ScalarField,
    /// Polynomial degree of the coefficients, used to choose quadrature.
    pub data_degree: usize,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData").field("data_degree", &self.data_degree).finish_non_exhaustive()
    }
}

impl ProblemData {
    /// `-Laplace u = f` with constant source.
    pub fn poisson(f: f64) -> Self {
        Self {
            diffusion: Arc::new(|_| [[1.0, 0.0], [0.0, 1.0]]),
            div_diffusion: Arc::new(|_| [0.0, 0.0]),
            convection: Arc::new(|_| [0.0, 0.0]),
            reaction: Arc::new(|_| 0.0),
            source: Arc::new(move |_| f),
            flux_source: Arc::new(|_| [0.0, 0.0]),
            div_flux_source: Arc::new(|_| 0.0),
            data_degree: 2,
        }
    }

    /// Constant diffusion matrix.
    pub fn with_constant_diffusion(mut self, a: [[f64; 2]; 2]) -> Self {
        self.diffusion = Arc::new(move |_| a);
        self.div_diffusion = Arc::new(|_| [0.0, 0.0]);
        self
    }

    /// Variable diffusion together with its row-wise divergence.
    pub fn with_diffusion(
        mut self,
        a: impl Fn([f64; 2]) -> [[f64; 2]; 2] + Send + Sync + 'static,
        div_a: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.diffusion = Arc::new(a);
        self.div_diffusion = Arc::new(div_a);
        self
    }

    pub fn with_convection(mut self, b: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static) -> Self {
        self.convection = Arc::new(b);
        self
    }

    pub fn with_reaction(mut self, c: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.reaction = Arc::new(c);
        self
    }

    pub fn with_source(mut self, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn with_flux_source(
        mut self,
        fvec: impl Fn([f64; 2]) -> [f64; 2] + Send + Sync + 'static,
        div: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.flux_source = Arc::new(fvec);
        self.div_flux_source = Arc::new(div);
        self
    }

    /// Multiplies the right-hand side `f - div fvec` by `s`, leaving the
    /// operator unchanged.
    pub fn scaled_rhs(&self, s: f64) -> Self {
        let (f, fv, dfv) = (self.source.clone(), self.flux_source.clone(), self.div_flux_source.clone());
        Self {
            source: Arc::new(move |x| s * f(x)),
            flux_source: Arc::new(move |x| {
                let v = fv(x);
                [s * v[0], s * v[1]]
            }),
            div_flux_source: Arc::new(move |x| s * dfv(x)),
            ..self.clone()
        }
    }
}
