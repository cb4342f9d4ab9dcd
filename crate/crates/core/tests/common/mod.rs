//! Helpers shared by the integration tests: an independent Jacobi-rotation
//! eigenvalue oracle and random instance builders.

#![allow(dead_code, clippy::needless_range_loop)]

use pwca_core::{KernelMatrix, Matrix, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal by Box-Muller; good enough for test fixtures.
pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn dense(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
/// descending.
pub fn jacobi_eigenvalues(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * norm.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    vals.sort_by(|x, y| y.total_cmp(x));
    vals
}

/// Eigenvalues of `A x = γ B x` through a textbook Cholesky, an explicit
/// triangular inverse and Jacobi on `L⁻¹ A L⁻ᵀ`.
pub fn oracle_generalized(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = b[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        assert!(d > 0.0, "oracle: B is not positive definite");
        l[j][j] = d.sqrt();
        for i in j + 1..n {
            l[i][j] = (b[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / l[j][j];
        }
    }
    let mut inv = vec![vec![0.0; n]; n];
    for c in 0..n {
        for i in 0..n {
            let rhs = if i == c { 1.0 } else { 0.0 };
            inv[i][c] = (rhs - (0..i).map(|k| l[i][k] * inv[k][c]).sum::<f64>()) / l[i][i];
        }
    }
    // C = inv · A · invᵀ
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            t[i][j] = (0..n).map(|k| inv[i][k] * a[k][j]).sum();
        }
    }
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = (0..n).map(|k| t[i][k] * inv[j][k]).sum();
        }
    }
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = m;
            c[j][i] = m;
        }
    }
    jacobi_eigenvalues(&c)
}

/// `G Gᵀ / d + shift·I` with standard normal `G` (`l x d`).
pub fn random_kernel(r: &mut ChaCha8Rng, l: usize, d: usize, shift: f64) -> KernelMatrix {
    let g: Vec<Vec<f64>> = (0..l).map(|_| (0..d).map(|_| normal(r)).collect()).collect();
    let m = SymMatrix::from_lower_fn(l, |i, j| {
        let v: f64 = g[i].iter().zip(&g[j]).map(|(a, b)| a * b).sum::<f64>() / d as f64;
        if i == j {
            v + shift
        } else {
            v
        }
    });
    KernelMatrix::new(m)
}

/// Random symmetric matrix with standard normal entries.
pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let vals: Vec<f64> = (0..n * n).map(|_| normal(r)).collect();
    SymMatrix::from_lower_fn(n, |i, j| vals[i * n + j])
}

/// Random SPD matrix `G Gᵀ / n + I`.
pub fn random_spd(r: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    random_kernel(r, n, n, 1.0).as_sym().clone()
}

/// `max |a_i − b_i| / |b_i|`.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
