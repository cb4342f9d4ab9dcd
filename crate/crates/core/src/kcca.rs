//! Regularized kernel CCA baseline, pairwise or multi-view.
//!
//! Solves `C x = ρ D x` with `C_ij = K_i K_j` for `i ≠ j`, `C_ii = 0` and
//! `D = blockdiag((K_i + τI)²)`. The result is stored as a [`PwcaModel`]
//! tagged [`Method::Kcca`], so projection and retrieval share one code path
//! with PWCA; the only difference is that KCCA projections are not divided
//! by the eigenvalue.
//!
//! Trained KCCA duals are canonical variates: each stacked component is
//! rescaled to `xᵀ D x = 1`. Retrieval sums absolute inner products across
//! components, so this per-component scale changes rankings; unit-variance
//! variates keep every correlation direction on an equal footing.

use crate::eigsolve::{solve_gsym_eig_with, EigConfig};
use crate::error::{Error, Result};
use crate::kernels::{KernelMatrix, KernelSpec, ViewMatrix};
use crate::linalg::{Matrix, SymMatrix};
use crate::model::{Method, PwcaModel};
use crate::pwca::{split_components, view_kernels, Components};

/// Builds `(C, D)`.
pub fn assemble_kcca_system(kernels: &[KernelMatrix], tau: f64) -> Result<(SymMatrix, SymMatrix)> {
    if kernels.len() < 2 {
        return Err(Error::TooFewViews(kernels.len()));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
    }
    let s = kernels.len();
    let l = kernels[0].n();
    if let Some(bad) = kernels.iter().position(|k| k.n() != l) {
        return Err(Error::dims(format!("kernel {bad} differs in size from kernel 0")));
    }
    let n = s * l;
    let mut c = Matrix::zeros(n, n);
    for i in 0..s {
        for j in i + 1..s {
            let p = kernels[i].as_matrix().matmul(kernels[j].as_matrix())?;
            c.set_block(i * l, j * l, &p);
            c.set_block(j * l, i * l, &p.transpose());
        }
    }
    let mut d = Matrix::zeros(n, n);
    for (i, k) in kernels.iter().enumerate() {
        let mut reg = k.as_matrix().clone();
        for r in 0..l {
            reg[(r, r)] += tau;
        }
        let sq = SymMatrix::symmetrize(reg.matmul(&reg)?)?;
        d.set_block(i * l, i * l, sq.as_matrix());
    }
    Ok((SymMatrix::new(c)?, SymMatrix::new(d)?))
}

pub fn solve_kcca(kernels: &[KernelMatrix], tau: f64, k: usize) -> Result<Components> {
    solve_kcca_with(kernels, tau, k, &EigConfig::default())
}

pub fn solve_kcca_with(
    kernels: &[KernelMatrix],
    tau: f64,
    k: usize,
    cfg: &EigConfig,
) -> Result<Components> {
    let (c, d) = assemble_kcca_system(kernels, tau)?;
    let n = c.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k must be in 1..={n}, got {k}")));
    }
    let pairs = solve_gsym_eig_with(&c, &d, k, cfg)?;
    Ok(split_components(&pairs, kernels.len(), kernels[0].n()))
}

/// Rescales every component to `xᵀ D x = Σ_i ‖(K_i + τI) α_i‖² = 1`.
pub fn to_canonical_variates(comps: &mut Components, kernels: &[KernelMatrix], tau: f64) -> Result<()> {
    if comps.duals.len() != kernels.len() {
        return Err(Error::dims(format!(
            "{} dual blocks for {} kernels",
            comps.duals.len(),
            kernels.len()
        )));
    }
    for j in 0..comps.k() {
        let mut q = 0.0;
        for (d, k) in comps.duals.iter().zip(kernels) {
            let a = d.column(j);
            let y = k.as_matrix().matvec(&a)?;
            q += y.iter().zip(&a).map(|(y, a)| (y + tau * a).powi(2)).sum::<f64>();
        }
        let scale = 1.0 / q.sqrt();
        for d in comps.duals.iter_mut() {
            for i in 0..d.rows() {
                d[(i, j)] *= scale;
            }
        }
    }
    Ok(())
}

/// Trains the KCCA baseline. `gammas` of the returned model hold the
/// canonical correlations `ρ`; duals are canonical variates.
pub fn train_kcca(views: &[ViewMatrix], spec: &KernelSpec, tau: f64, k: usize) -> Result<PwcaModel> {
    let kernels = view_kernels(views, spec)?;
    let mut comps = solve_kcca(&kernels, tau, k)?;
    to_canonical_variates(&mut comps, &kernels, tau)?;
    PwcaModel::from_parts(Method::Kcca, tau, *spec, comps.gammas, comps.duals, views.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigsolve::solve_gsym_eig;

    #[test]
    fn scalar_correlation() {
        let k = KernelMatrix::from_rows(&[vec![2.0]]).unwrap();
        let comps = solve_kcca(&[k.clone(), k], 0.01, 2).unwrap();
        // ±4/2.01²; the negative one is dropped.
        assert_eq!(comps.k(), 1);
        assert!((comps.gammas[0] - 4.0 / (2.01 * 2.01)).abs() < 1e-12);
    }

    #[test]
    fn identical_views_symmetric_and_antisymmetric_pairs() {
        let k = KernelMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let tau = 0.05;
        let (c, d) = assemble_kcca_system(&[k.clone(), k.clone()], tau).unwrap();
        let all = solve_gsym_eig(&c, &d, 4).unwrap();
        // Eigenvalues of K: (5 ± √5)/2.
        let lam = [(5.0 + 5f64.sqrt()) / 2.0, (5.0 - 5f64.sqrt()) / 2.0];
        let rho = |l: f64| l * l / ((l + tau) * (l + tau));
        let mut want = vec![rho(lam[0]), rho(lam[1]), -rho(lam[1]), -rho(lam[0])];
        want.sort_by(|a, b| b.total_cmp(a));
        for (g, w) in all.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
        // The most negative one pairs blocks with opposite sign.
        let x = all.vector(3);
        assert!((x[0] + x[2]).abs() < 1e-10 && (x[1] + x[3]).abs() < 1e-10);
    }

    #[test]
    fn canonical_variates_have_unit_d_norm() {
        let ka = KernelMatrix::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let kb = KernelMatrix::from_rows(&[vec![2.0, -0.5], vec![-0.5, 1.0]]).unwrap();
        let tau = 0.1;
        let ks = [ka, kb];
        let mut comps = solve_kcca(&ks, tau, 2).unwrap();
        to_canonical_variates(&mut comps, &ks, tau).unwrap();
        let (_, d) = assemble_kcca_system(&ks, tau).unwrap();
        for j in 0..comps.k() {
            let x = comps.stacked(j);
            let dx = d.as_matrix().matvec(&x).unwrap();
            let q: f64 = x.iter().zip(&dx).map(|(a, b)| a * b).sum();
            assert!((q - 1.0).abs() < 1e-12, "{q}");
        }
    }

    #[test]
    fn rejects_zero_tau() {
        let k = KernelMatrix::from_rows(&[vec![2.0]]).unwrap();
        assert!(matches!(
            assemble_kcca_system(&[k.clone(), k], 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }
}
