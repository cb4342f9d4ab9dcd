//! Pairwise cluster analysis: the block generalized eigenproblem over
//! per-view kernels and its stationarity checks.
//!
//! For `s` views with kernels `K_1..K_s` on the same `ℓ` samples, PWCA
//! solves
//!
//! ```text
//! blockdiag(K_1, …, K_s) x = γ (ones(s,s) ⊗ I_ℓ + τ I_sℓ) x,   x = (α_1; …; α_s)
//! ```
//!
//! so every component satisfies `K_i α_i = γ (Σ_m α_m + τ α_i)` for each view.
//!
//! The right-hand matrix has eigenvalue `s + τ` on the consensus subspace
//! (all blocks equal) and `τ` on its orthogonal complement. The spectrum
//! therefore has two parts: up to `ℓ` eigenpairs whose dual blocks agree
//! (the solutions of the unregularized system, stable as `τ → 0`), and
//! `(s−1)ℓ` eigenpairs whose blocks nearly cancel and whose eigenvalues grow
//! like `1/τ`. [`consensus_share`] tells them apart. Training keeps the top
//! `k` eigenpairs by eigenvalue, whichever part they come from.

use crate::eigsolve::{solve_gsym_eig_with, EigConfig, EigenPairs};
use crate::error::{Error, Result};
use crate::kernels::{gram, KernelMatrix, KernelSpec, ViewMatrix};
use crate::linalg::{norm_inf, Matrix, SymMatrix};
use crate::model::{Method, PwcaModel};

/// Regularization used when none is given.
pub const DEFAULT_TAU: f64 = 0.01;

/// Components with `γ < DROP_RATIO · γ_max` are discarded.
pub const DROP_RATIO: f64 = 1e-10;

/// Upper limit of the default component count.
pub const DEFAULT_MAX_K: usize = 100;

/// `min(ℓ, 100)`.
pub fn default_k(l: usize) -> usize {
    l.min(DEFAULT_MAX_K)
}

fn check_kernels(kernels: &[KernelMatrix]) -> Result<usize> {
    if kernels.len() < 2 {
        return Err(Error::TooFewViews(kernels.len()));
    }
    let l = kernels[0].n();
    for (i, k) in kernels.iter().enumerate() {
        if k.n() != l {
            return Err(Error::dims(format!("kernel {i} is {0}x{0}, expected {l}x{l}", k.n())));
        }
    }
    Ok(l)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
    }
    Ok(())
}

/// `A = blockdiag(K_1, …, K_s)` and `B = ones(s,s) ⊗ I_ℓ + τ I`.
pub fn assemble_pwca_system(kernels: &[KernelMatrix], tau: f64) -> Result<(SymMatrix, SymMatrix)> {
    let l = check_kernels(kernels)?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    let s = kernels.len();
    let n = s * l;
    let mut a = Matrix::zeros(n, n);
    for (i, k) in kernels.iter().enumerate() {
        a.set_block(i * l, i * l, k.as_matrix());
    }
    let mut b = Matrix::zeros(n, n);
    for bi in 0..s {
        for bj in 0..s {
            let diag = if bi == bj { 1.0 + tau } else { 1.0 };
            for r in 0..l {
                b[(bi * l + r, bj * l + r)] = diag;
            }
        }
    }
    Ok((SymMatrix::new(a)?, SymMatrix::new(b)?))
}

/// The two-view system written out block by block:
/// `[[K_a, 0], [0, K_b]]` against `[[(1+τ)I, I], [I, (1+τ)I]]`.
pub fn assemble_two_view_system(
    ka: &KernelMatrix,
    kb: &KernelMatrix,
    tau: f64,
) -> Result<(SymMatrix, SymMatrix)> {
    let l = ka.n();
    if kb.n() != l {
        return Err(Error::dims(format!("kernels are {l}x{l} and {0}x{0}", kb.n())));
    }
    let a = Matrix::from_fn(2 * l, 2 * l, |i, j| match (i < l, j < l) {
        (true, true) => ka.as_matrix()[(i, j)],
        (false, false) => kb.as_matrix()[(i - l, j - l)],
        _ => 0.0,
    });
    let b = Matrix::from_fn(2 * l, 2 * l, |i, j| {
        if i == j {
            1.0 + tau
        } else if i % l == j % l {
            1.0
        } else {
            0.0
        }
    });
    Ok((SymMatrix::new(a)?, SymMatrix::new(b)?))
}

/// Eigenvalues and per-view dual blocks of a trained system.
#[derive(Debug, Clone, PartialEq)]
pub struct Components {
    pub gammas: Vec<f64>,
    /// One `ℓ x k` block per view.
    pub duals: Vec<Matrix>,
}

impl Components {
    pub fn k(&self) -> usize {
        self.gammas.len()
    }

    pub fn stacked(&self, j: usize) -> Vec<f64> {
        self.duals.iter().flat_map(|d| d.column(j)).collect()
    }
}

/// Splits eigenpairs into per-view blocks, dropping components below the
/// relative eigenvalue threshold.
pub(crate) fn split_components(pairs: &EigenPairs, s: usize, l: usize) -> Components {
    let gmax = pairs.values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..pairs.len())
        .filter(|&j| gmax > 0.0 && pairs.values[j] >= DROP_RATIO * gmax)
        .collect();
    let gammas = keep.iter().map(|&j| pairs.values[j]).collect();
    let duals = (0..s)
        .map(|v| Matrix::from_fn(l, keep.len(), |r, c| pairs.vectors[(v * l + r, keep[c])]))
        .collect();
    Components { gammas, duals }
}

/// Solves the PWCA system for precomputed kernels.
pub fn solve_pwca(kernels: &[KernelMatrix], tau: f64, k: usize) -> Result<Components> {
    solve_pwca_with(kernels, tau, k, &EigConfig::default())
}

pub fn solve_pwca_with(
    kernels: &[KernelMatrix],
    tau: f64,
    k: usize,
    cfg: &EigConfig,
) -> Result<Components> {
    check_tau(tau)?;
    let l = check_kernels(kernels)?;
    let s = kernels.len();
    if k == 0 || k > s * l {
        return Err(Error::InvalidParameter(format!(
            "k must be in 1..={}, got {k}",
            s * l
        )));
    }
    let (a, b) = assemble_pwca_system(kernels, tau)?;
    let pairs = solve_gsym_eig_with(&a, &b, k, cfg)?;
    Ok(split_components(&pairs, s, l))
}

/// Trains PWCA on aligned views.
pub fn train_pwca(views: &[ViewMatrix], spec: &KernelSpec, tau: f64, k: usize) -> Result<PwcaModel> {
    check_tau(tau)?;
    let kernels = view_kernels(views, spec)?;
    let comps = solve_pwca(&kernels, tau, k)?;
    PwcaModel::from_parts(Method::Pwca, tau, *spec, comps.gammas, comps.duals, views.to_vec())
}

pub(crate) fn view_kernels(views: &[ViewMatrix], spec: &KernelSpec) -> Result<Vec<KernelMatrix>> {
    if views.len() < 2 {
        return Err(Error::TooFewViews(views.len()));
    }
    let l = views[0].rows();
    for (i, v) in views.iter().enumerate() {
        if v.rows() != l {
            return Err(Error::dims(format!("view {i} has {} rows, expected {l}", v.rows())));
        }
    }
    views.iter().map(|v| gram(v, spec)).collect()
}

fn check_components(comps: &Components, kernels: &[KernelMatrix]) -> Result<usize> {
    let l = check_kernels(kernels)?;
    if comps.duals.len() != kernels.len() {
        return Err(Error::dims(format!(
            "{} dual blocks for {} kernels",
            comps.duals.len(),
            kernels.len()
        )));
    }
    for d in &comps.duals {
        if d.rows() != l || d.cols() != comps.k() {
            return Err(Error::dims("dual block shape disagrees with kernels"));
        }
    }
    Ok(l)
}

/// Per-view, per-component stationarity residuals
/// `‖K_i α_i − γ(Σ_m α_m + τ α_i)‖∞`, normalized as
/// [`crate::eigsolve::residual`] normalizes the full system.
/// Indexed `[view][component]`.
pub fn validate_stationarity(
    comps: &Components,
    kernels: &[KernelMatrix],
    tau: f64,
) -> Result<Vec<Vec<f64>>> {
    let l = check_components(comps, kernels)?;
    let s = kernels.len();
    let b_norm = s as f64 - 1.0 + (1.0 + tau).abs();
    let a_norm = kernels.iter().map(|k| k.as_matrix().inf_norm()).fold(0.0, f64::max);
    let mut out = vec![Vec::with_capacity(comps.k()); s];
    for j in 0..comps.k() {
        let gamma = comps.gammas[j];
        let blocks: Vec<Vec<f64>> = comps.duals.iter().map(|d| d.column(j)).collect();
        let x_inf = blocks.iter().map(|b| norm_inf(b)).fold(0.0, f64::max);
        let consensus: Vec<f64> = (0..l).map(|r| blocks.iter().map(|b| b[r]).sum()).collect();
        let den = (a_norm + gamma.abs() * b_norm) * x_inf;
        for (i, k) in kernels.iter().enumerate() {
            let ka = k.as_matrix().matvec(&blocks[i])?;
            let num = (0..l)
                .map(|r| (ka[r] - gamma * (consensus[r] + tau * blocks[i][r])).abs())
                .fold(0.0, f64::max);
            out[i].push(if den > 0.0 { num / den } else { num });
        }
    }
    Ok(out)
}

/// Scaled residuals of the two exact consequences of the two-view
/// stationarity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoViewIdentities {
    /// `‖K_a α − K_b β − γτ(α − β)‖∞ / scale`.
    pub kernel_balance: f64,
    /// `‖β − (K_a α/γ − (1+τ)α)‖∞ / (scale/γ)`.
    pub elimination: f64,
    /// `‖K_a α − K_b β‖∞`, unscaled; vanishes with τ on the consensus part.
    pub kernel_gap: f64,
    /// `(max(‖K_a‖∞, ‖K_b‖∞) + γ‖B‖∞) ‖x‖∞`.
    pub scale: f64,
}

/// Checks, for each component of a two-view model, that
/// `K_a α − K_b β = γτ(α − β)` (subtracting the two stationarity
/// conditions) and that `β = K_a α/γ − (1+τ)α` (solving the first one for
/// `β`).
pub fn two_view_identities(
    comps: &Components,
    ka: &KernelMatrix,
    kb: &KernelMatrix,
    tau: f64,
) -> Result<Vec<TwoViewIdentities>> {
    let kernels = [ka.clone(), kb.clone()];
    let l = check_components(comps, &kernels)?;
    let norm_k = ka.as_matrix().inf_norm().max(kb.as_matrix().inf_norm());
    let b_norm = 2.0 + tau;
    (0..comps.k())
        .map(|j| {
            let gamma = comps.gammas[j];
            let alpha = comps.duals[0].column(j);
            let beta = comps.duals[1].column(j);
            let kaa = ka.as_matrix().matvec(&alpha)?;
            let kbb = kb.as_matrix().matvec(&beta)?;
            let x_inf = norm_inf(&alpha).max(norm_inf(&beta));
            let scale = (norm_k + gamma.abs() * b_norm) * x_inf;
            let mut balance: f64 = 0.0;
            let mut gap: f64 = 0.0;
            let mut elim: f64 = 0.0;
            for r in 0..l {
                let d = kaa[r] - kbb[r];
                gap = gap.max(d.abs());
                balance = balance.max((d - gamma * tau * (alpha[r] - beta[r])).abs());
                elim = elim.max((beta[r] - (kaa[r] / gamma - (1.0 + tau) * alpha[r])).abs());
            }
            Ok(TwoViewIdentities {
                kernel_balance: balance / scale,
                elimination: elim / (scale / gamma.abs()),
                kernel_gap: gap,
                scale,
            })
        })
        .collect()
}

/// `‖Σ_m α_m‖² / xᵀBx` for a stacked vector `x` of `s` blocks: the fraction
/// of the right-hand quadratic form carried by the consensus subspace.
/// Close to 1 for consensus eigenpairs and of order `τ` for the eigenpairs
/// whose blocks cancel.
pub fn consensus_share(x: &[f64], s: usize, tau: f64) -> f64 {
    let l = x.len() / s;
    let mut c2 = 0.0;
    for r in 0..l {
        let c: f64 = (0..s).map(|v| x[v * l + r]).sum();
        c2 += c * c;
    }
    let x2: f64 = x.iter().map(|v| v * v).sum();
    c2 / (c2 + tau * x2)
}
