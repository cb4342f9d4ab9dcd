//! Generalized symmetric-definite eigenproblems `A x = γ B x`.
//!
//! `B` is factored as `L Lᵀ`, the standard problem `L⁻¹ A L⁻ᵀ y = γ y` is
//! solved for its leading eigenpairs and each vector is mapped back through
//! `x = L⁻ᵀ y`. Returned vectors have unit Euclidean norm and are
//! sign-normalized so that their largest-magnitude entry is positive.

mod tridiag;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, norm_inf, LowerTriangular, Matrix, SymMatrix};

/// Numerical tolerances for the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigConfig {
    /// Largest accepted relative residual (see [`residual`]).
    pub residual_tol: f64,
    /// A Cholesky pivot `<= n * pivot_rel * max(diag)` is treated as zero.
    pub pivot_rel: f64,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            residual_tol: 1e-8,
            pivot_rel: 1e-14,
        }
    }
}

/// Leading eigenpairs of a generalized problem, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `n x k`, column `j` pairs with `values[j]`.
    pub vectors: Matrix,
    pub residuals: Vec<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

/// Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(m: &SymMatrix) -> Result<LowerTriangular> {
    cholesky_with(m, &EigConfig::default())
}

pub fn cholesky_with(m: &SymMatrix, cfg: &EigConfig) -> Result<LowerTriangular> {
    let n = m.n();
    let max_diag = (0..n).map(|i| m[(i, i)]).fold(0.0, f64::max);
    let threshold = n as f64 * cfg.pivot_rel * max_diag;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        {
            let row_j = &l.row(j)[..j];
            pivot -= row_j.iter().map(|v| v * v).sum::<f64>();
        }
        if !(pivot > threshold) || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let (top, bottom) = l.as_mut_slice().split_at_mut(i * n);
            let row_j = &top[j * n..j * n + j];
            let row_i = &mut bottom[..n];
            let s = m[(i, j)] - crate::linalg::dot(&row_i[..j], row_j);
            row_i[j] = s / ljj;
        }
    }
    Ok(LowerTriangular(l))
}

/// `L⁻¹ A L⁻ᵀ`, symmetrized.
pub fn reduce_to_standard(a: &SymMatrix, l: &LowerTriangular) -> Result<SymMatrix> {
    if a.n() != l.n() {
        return Err(Error::dims(format!("A is {0}x{0} but B is {1}x{1}", a.n(), l.n())));
    }
    let mut w = a.as_matrix().clone();
    l.solve_lower_in_place(&mut w);
    let mut c = w.transpose();
    l.solve_lower_in_place(&mut c);
    SymMatrix::symmetrize(c)
}

/// Top `k` eigenpairs of `A x = γ B x` with default tolerances.
pub fn solve_gsym_eig(a: &SymMatrix, b: &SymMatrix, k: usize) -> Result<EigenPairs> {
    solve_gsym_eig_with(a, b, k, &EigConfig::default())
}

pub fn solve_gsym_eig_with(
    a: &SymMatrix,
    b: &SymMatrix,
    k: usize,
    cfg: &EigConfig,
) -> Result<EigenPairs> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::dims(format!("A is {n}x{n} but B is {0}x{0}", b.n())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenpairs of a problem of order {n}"
        )));
    }
    let l = cholesky_with(b, cfg)?;
    let c = reduce_to_standard(a, &l)?;
    let (values, ys) = tridiag::symmetric_top(&c, k);

    let mut vectors = Matrix::zeros(n, k);
    let mut residuals = Vec::with_capacity(k);
    for (j, &gamma) in values.iter().enumerate() {
        let mut x = l.solve_upper_transposed(&ys.column(j));
        normalize_with_sign(&mut x);
        let r = residual(a, b, gamma, &x)?;
        if !(r <= cfg.residual_tol) {
            return Err(Error::ResidualTooLarge {
                index: j,
                residual: r,
                tolerance: cfg.residual_tol,
            });
        }
        residuals.push(r);
        for (i, v) in x.iter().enumerate() {
            vectors[(i, j)] = *v;
        }
    }
    Ok(EigenPairs {
        values,
        vectors,
        residuals,
    })
}

/// Scales `x` to unit Euclidean norm with its largest-magnitude entry
/// positive (first such entry on ties).
pub fn normalize_with_sign(x: &mut [f64]) {
    let nrm = norm2(x);
    if nrm == 0.0 {
        return;
    }
    let mut best = 0;
    for (i, v) in x.iter().enumerate() {
        if v.abs() > x[best].abs() {
            best = i;
        }
    }
    let s = if x[best] < 0.0 { -1.0 / nrm } else { 1.0 / nrm };
    for v in x.iter_mut() {
        *v *= s;
    }
}

/// `‖A x − γ B x‖∞ / ((‖A‖∞ + |γ| ‖B‖∞) ‖x‖∞)`.
pub fn residual(a: &SymMatrix, b: &SymMatrix, gamma: f64, x: &[f64]) -> Result<f64> {
    let n = a.n();
    if b.n() != n || x.len() != n {
        return Err(Error::dims(format!(
            "A is {n}x{n}, B is {0}x{0}, x has length {1}",
            b.n(),
            x.len()
        )));
    }
    let ax = a.as_matrix().matvec(x)?;
    let bx = b.as_matrix().matvec(x)?;
    let num = ax
        .iter()
        .zip(&bx)
        .map(|(p, q)| (p - gamma * q).abs())
        .fold(0.0, f64::max);
    let den = (a.as_matrix().inf_norm() + gamma.abs() * b.as_matrix().inf_norm()) * norm_inf(x);
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(num / den)
}

/// Top `k` eigenpairs of a standard symmetric problem, orthonormal vectors.
pub fn symmetric_eig_top(c: &SymMatrix, k: usize) -> (Vec<f64>, Matrix) {
    tridiag::symmetric_top(c, k)
}
