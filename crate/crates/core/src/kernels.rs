//! Per-view Gram matrices and cross-kernels for out-of-sample projection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SymMatrix};

/// One view of a dataset: `rows` samples by `cols` features. Row `i` of
/// every view of a dataset describes the same paired observation.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewMatrix {
    data: Matrix,
}

impl ViewMatrix {
    pub fn new(data: Matrix) -> Result<Self> {
        if data.rows() == 0 || data.cols() == 0 {
            return Err(Error::dims(format!(
                "a view needs at least one row and one column, got {}x{}",
                data.rows(),
                data.cols()
            )));
        }
        if !data.is_finite() {
            return Err(Error::NonFinite("view entry".into()));
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    /// Materializes `(row, col, value)` triplets; absent entries are zero.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = Matrix::zeros(rows, cols);
        for &(r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange {
                    index: if r >= rows { r } else { c },
                    len: if r >= rows { rows } else { cols },
                });
            }
            m[(r, c)] = v;
        }
        Self::new(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.data.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    /// Rows `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols());
        for &i in indices {
            if i >= self.rows() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.rows(),
                });
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(Matrix::from_vec(indices.len(), self.cols(), data)?)
    }

    pub fn nnz(&self) -> usize {
        self.data.as_slice().iter().filter(|v| **v != 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Linear,
    Rbf,
}

/// Kernel choice. `bandwidth` is required for `rbf` and ignored otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: Option<f64>,
    pub center: bool,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::linear()
    }
}

impl KernelSpec {
    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            bandwidth: None,
            center: false,
        }
    }

    pub fn rbf(bandwidth: f64) -> Self {
        Self {
            kind: KernelKind::Rbf,
            bandwidth: Some(bandwidth),
            center: false,
        }
    }

    pub fn centered(mut self) -> Self {
        self.center = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == KernelKind::Rbf {
            match self.bandwidth {
                Some(h) if h > 0.0 && h.is_finite() => {}
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "rbf bandwidth must be positive, got {other:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Linear => dot(x, y),
            KernelKind::Rbf => {
                let h = self.bandwidth.unwrap_or(1.0);
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * h * h)).exp()
            }
        }
    }
}

/// Symmetric positive semidefinite Gram matrix of one view.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix(SymMatrix);

impl KernelMatrix {
    /// Wraps a precomputed Gram matrix. Positive semidefiniteness is the
    /// caller's responsibility.
    pub fn new(m: SymMatrix) -> Self {
        Self(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Self(SymMatrix::from_rows(rows)?))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_sym(&self) -> &SymMatrix {
        &self.0
    }

    pub fn as_matrix(&self) -> &Matrix {
        self.0.as_matrix()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n()).map(|i| self.0[(i, i)]).sum()
    }

    /// Double centering `H K H` with `H = I − 11ᵀ/ℓ`.
    pub fn centered(&self) -> KernelMatrix {
        let stats = CenteringStats::from_gram(self.as_matrix());
        let n = self.n();
        let m = self.as_matrix();
        // Computed on the lower triangle and mirrored so the result is
        // exactly symmetric.
        KernelMatrix(SymMatrix::from_lower_fn(n, |i, j| {
            m[(i, j)] - stats.col_means[i] - stats.col_means[j] + stats.grand_mean
        }))
    }
}

/// Training-side statistics needed to center cross-kernels consistently.
#[derive(Debug, Clone, PartialEq)]
struct CenteringStats {
    col_means: Vec<f64>,
    grand_mean: f64,
}

impl CenteringStats {
    fn from_gram(k: &Matrix) -> Self {
        let n = k.rows();
        let mut col_means = vec![0.0; n];
        for i in 0..n {
            for (j, v) in k.row(i).iter().enumerate() {
                col_means[j] += v;
            }
        }
        col_means.iter_mut().for_each(|v| *v /= n as f64);
        let grand_mean = col_means.iter().sum::<f64>() / n as f64;
        Self {
            col_means,
            grand_mean,
        }
    }
}

fn raw_gram(x: &ViewMatrix, spec: &KernelSpec) -> Matrix {
    let n = x.rows();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (0..=i).map(|j| spec.eval(x.row(i), x.row(j))).collect())
        .collect();
    let mut m = Matrix::zeros(n, n);
    for (i, r) in rows.into_iter().enumerate() {
        for (j, v) in r.into_iter().enumerate() {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Gram matrix of one view, double-centered when `spec.center` is set.
pub fn gram(x: &ViewMatrix, spec: &KernelSpec) -> Result<KernelMatrix> {
    spec.validate()?;
    let k = KernelMatrix(SymMatrix::new(raw_gram(x, spec))?);
    Ok(if spec.center { k.centered() } else { k })
}

/// `ℓ_new x ℓ_train` matrix of kernel values between new and training
/// samples. With centering, the training set's statistics are used.
pub fn cross_gram(train: &ViewMatrix, new: &ViewMatrix, spec: &KernelSpec) -> Result<Matrix> {
    spec.validate()?;
    if train.cols() != new.cols() {
        return Err(Error::dims(format!(
            "training view has {} features, new samples have {}",
            train.cols(),
            new.cols()
        )));
    }
    let lt = train.rows();
    let rows: Vec<Vec<f64>> = (0..new.rows())
        .into_par_iter()
        .map(|i| (0..lt).map(|j| spec.eval(new.row(i), train.row(j))).collect())
        .collect();
    let mut out = Matrix::from_rows(&rows)?;
    if spec.center {
        let stats = CenteringStats::from_gram(&raw_gram(train, spec));
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            let row_mean = row.iter().sum::<f64>() / lt as f64;
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v - stats.col_means[j] - row_mean + stats.grand_mean;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rows_give_identity_gram() {
        let x = ViewMatrix::new(Matrix::identity(3)).unwrap();
        let k = gram(&x, &KernelSpec::linear()).unwrap();
        assert_eq!(k.as_matrix(), &Matrix::identity(3));
    }

    #[test]
    fn linear_gram_by_hand() {
        let x = ViewMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let k = gram(&x, &KernelSpec::linear()).unwrap();
        assert_eq!(k.as_matrix().as_slice(), &[1.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn rbf_diagonal_is_one() {
        let x = ViewMatrix::from_rows(&[vec![1.0, 5.0], vec![-3.0, 2.0], vec![0.5, 0.5]]).unwrap();
        let k = gram(&x, &KernelSpec::rbf(0.7)).unwrap();
        for i in 0..3 {
            assert_eq!(k.as_matrix()[(i, i)], 1.0);
        }
        assert!(gram(&x, &KernelSpec::rbf(0.0)).is_err());
        assert!(gram(&x, &KernelSpec { kind: KernelKind::Rbf, bandwidth: None, center: false }).is_err());
    }

    #[test]
    fn cross_gram_by_hand() {
        let train = ViewMatrix::new(Matrix::identity(2)).unwrap();
        let new = ViewMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let c = cross_gram(&train, &new, &KernelSpec::linear()).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 1.0]);
        let bad = ViewMatrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(matches!(
            cross_gram(&train, &bad, &KernelSpec::linear()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cross_gram_of_training_set_matches_gram() {
        let x = ViewMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![0.5, -1.0, 3.0],
            vec![2.0, 0.0, 1.0],
            vec![-1.0, 1.0, 1.0],
        ])
        .unwrap();
        for spec in [
            KernelSpec::linear(),
            KernelSpec::linear().centered(),
            KernelSpec::rbf(1.5),
            KernelSpec::rbf(1.5).centered(),
        ] {
            let k = gram(&x, &spec).unwrap();
            let c = cross_gram(&x, &x, &spec).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((k.as_matrix()[(i, j)] - c[(i, j)]).abs() < 1e-12, "{spec:?}");
                }
            }
        }
    }

    #[test]
    fn single_sample_row_matches_gram_row() {
        let x = ViewMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -1.0], vec![0.0, 4.0]]).unwrap();
        let k = gram(&x, &KernelSpec::linear()).unwrap();
        let one = x.select_rows(&[1]).unwrap();
        let c = cross_gram(&x, &one, &KernelSpec::linear()).unwrap();
        assert_eq!(c.row(0), k.as_matrix().row(1));
    }

    #[test]
    fn triplets_out_of_range() {
        assert!(ViewMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(ViewMatrix::from_triplets(0, 2, &[]).is_err());
    }
}
