use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};

use super::SolverError;
use crate::fem::{CsrMatrix, norm2};

fn to_faer(k: &CsrMatrix) -> Result<SparseColMat<usize, f64>, SolverError> {
    let mut triplets = Vec::with_capacity(k.nnz());
    for i in 0..k.dim() {
        let (cols, vals) = k.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            triplets.push(Triplet::new(i, j, v));
        }
    }
    SparseColMat::try_new_from_triplets(k.dim(), k.dim(), &triplets)
        .map_err(|e| SolverError::Factorization(format!("{e:?}")))
}

fn check_residual(k: &CsrMatrix, rhs: &[f64], x: Vec<f64>) -> Result<Vec<f64>, SolverError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::Factorization("non-finite solution, matrix is singular".into()));
    }
    let kx = k.mul_vec(&x);
    let res: Vec<f64> = kx.iter().zip(rhs).map(|(a, b)| a - b).collect();
    let (r, b) = (norm2(&res), norm2(rhs));
    if r > 1e-8 * b.max(f64::MIN_POSITIVE) && r > 0.0 {
        return Err(SolverError::Factorization(format!("relative residual {:.3e} after direct solve", r / b)));
    }
    Ok(x)
}

fn check_dims(k: &CsrMatrix, rhs: &[f64]) -> Result<(), SolverError> {
    if rhs.len() != k.dim() {
        return Err(SolverError::Dimension { expected: k.dim(), found: rhs.len() });
    }
    Ok(())
}

/// Solves `K x = rhs` by sparse LU with partial pivoting. Works for the
/// nonsymmetric b-operator as well as for the a-operator.
pub fn solve_direct(k: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    check_dims(k, rhs)?;
    if k.dim() == 0 {
        return Ok(Vec::new());
    }
    let lu = to_faer(k)?.sp_lu().map_err(|e| SolverError::Factorization(format!("{e:?}")))?;
    let b = Col::from_fn(k.dim(), |i| rhs[i]);
    let x = lu.solve(&b);
    check_residual(k, rhs, (0..k.dim()).map(|i| x[i]).collect())
}

/// Solves `K x = rhs` for symmetric positive definite `K` by sparse Cholesky.
pub fn solve_spd(k: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
    check_dims(k, rhs)?;
    if k.dim() == 0 {
        return Ok(Vec::new());
    }
    let llt = to_faer(k)?.sp_cholesky(Side::Lower).map_err(|_| SolverError::NotPositiveDefinite)?;
    let b = Col::from_fn(k.dim(), |i| rhs[i]);
    let x = llt.solve(&b);
    check_residual(k, rhs, (0..k.dim()).map(|i| x[i]).collect())
}

/// Dense Cholesky factor of a small SPD matrix, used on the coarsest level.
#[derive(Debug)]
pub struct DenseCholesky {
    n: usize,
    factor: Option<faer::linalg::solvers::Llt<f64>>,
}

impl DenseCholesky {
    pub fn new(k: &CsrMatrix) -> Result<Self, SolverError> {
        let n = k.dim();
        if n == 0 {
            return Ok(Self { n, factor: None });
        }
        let dense = Mat::from_fn(n, n, |i, j| k.get(i, j));
        let factor = dense.llt(Side::Lower).map_err(|_| SolverError::NotPositiveDefinite)?;
        Ok(Self { n, factor: Some(factor) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        match &self.factor {
            None => Vec::new(),
            Some(f) => {
                let x = f.solve(Col::from_fn(self.n, |i| rhs[i]));
                (0..self.n).map(|i| x[i]).collect()
            }
        }
    }
}
