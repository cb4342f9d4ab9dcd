//! Dense symmetric eigensolver for the leading part of the spectrum.
//!
//! Householder reduction to tridiagonal form, Sturm-sequence bisection for
//! the requested eigenvalues, inverse iteration (with Gram-Schmidt inside
//! eigenvalue clusters) for their eigenvectors, then back-transformation
//! through the stored reflectors. Only the requested eigenvectors are ever
//! formed.

use crate::linalg::{axpy, dot, norm2, Matrix, SymMatrix};

/// Householder reflector `H = I - tau * v vᵀ` acting on indices `offset..`.
struct Reflector {
    offset: usize,
    tau: f64,
    v: Vec<f64>,
}

/// `Qᵀ C Q = T`, with `T` tridiagonal (`diag`, `off`) and `Q` the product of
/// the reflectors.
pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    reflectors: Vec<Reflector>,
}

impl Tridiagonal {
    /// Reduces `c`. Only the lower triangle of the working copy is read or
    /// updated after the first step.
    pub fn reduce(c: &SymMatrix) -> Self {
        let n = c.n();
        let mut a = c.as_matrix().clone();
        let mut diag = Vec::with_capacity(n);
        let mut off = Vec::with_capacity(n.saturating_sub(1));
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];

        for k in 0..n.saturating_sub(1) {
            diag.push(a[(k, k)]);
            let m = n - k - 1;
            let alpha = a[(k + 1, k)];
            let mut xnorm_sq = 0.0;
            for i in k + 2..n {
                let x = a[(i, k)];
                xnorm_sq += x * x;
            }
            if xnorm_sq == 0.0 {
                off.push(alpha);
                continue;
            }
            let beta = -alpha.signum() * alpha.hypot(xnorm_sq.sqrt());
            let tau = (beta - alpha) / beta;
            let scale = 1.0 / (alpha - beta);
            let mut v = Vec::with_capacity(m);
            v.push(1.0);
            for i in k + 2..n {
                v.push(a[(i, k)] * scale);
            }
            off.push(beta);

            // p = tau * S v over the trailing block S = a[k+1.., k+1..],
            // reading the lower triangle only.
            let p = &mut p[..m];
            p.fill(0.0);
            for li in 0..m {
                let row = &a.row(k + 1 + li)[k + 1..k + 2 + li];
                p[li] += dot(row, &v[..=li]);
                axpy(v[li], &row[..li], &mut p[..li]);
            }
            for pi in p.iter_mut() {
                *pi *= tau;
            }
            let half = 0.5 * tau * dot(p, &v);
            // w = p - half * v, stored in p.
            axpy(-half, &v, p);

            // S -= v wᵀ + w vᵀ on the lower triangle.
            for li in 0..m {
                let (vi, wi) = (v[li], p[li]);
                let row = &mut a.row_mut(k + 1 + li)[k + 1..k + 2 + li];
                axpy(-vi, &p[..=li], row);
                axpy(-wi, &v[..=li], row);
            }
            reflectors.push(Reflector {
                offset: k + 1,
                tau,
                v,
            });
        }
        if n > 0 {
            diag.push(a[(n - 1, n - 1)]);
        }
        Self {
            diag,
            off,
            reflectors,
        }
    }

    /// Maps an eigenvector of `T` to an eigenvector of `C`.
    pub fn back_transform(&self, y: &mut [f64]) {
        for r in self.reflectors.iter().rev() {
            let seg = &mut y[r.offset..];
            let s = r.tau * dot(&r.v, seg);
            if s != 0.0 {
                axpy(-s, &r.v, seg);
            }
        }
    }

    fn norm_estimate(&self) -> f64 {
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

/// One unreduced diagonal block `[start, end)` of the tridiagonal matrix.
#[derive(Clone, Copy)]
struct Block {
    start: usize,
    end: usize,
}

/// Number of eigenvalues of the block strictly less than `x`.
fn sturm_count(d: &[f64], e2: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        q = d[i] - x - e2[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue (0-based) of one block, by bisection.
fn bisect(d: &[f64], e2: &[f64], index: usize, lo: f64, hi: f64, pivmin: f64, abstol: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    loop {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if mid <= lo
            || mid >= hi
            || width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs())
            || width <= abstol
        {
            return mid;
        }
        if sturm_count(d, e2, mid, pivmin) <= index {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Solves `(T_block - lambda I) x = b` in place by Gaussian elimination with
/// partial pivoting; pivots below `tiny` are replaced by `tiny`.
fn shifted_solve(d: &[f64], e: &[f64], lambda: f64, tiny: f64, b: &mut [f64]) {
    let m = d.len();
    if m == 1 {
        let mut a = d[0] - lambda;
        if a.abs() < tiny {
            a = if a < 0.0 { -tiny } else { tiny };
        }
        b[0] /= a;
        return;
    }
    // U rows: (diag, super1, super2).
    let mut u = vec![(0.0f64, 0.0f64, 0.0f64); m];
    let mut mults = vec![(false, 0.0f64); m - 1];
    let (mut ca, mut cb, mut cc) = (d[0] - lambda, e[0], 0.0);
    for k in 0..m - 1 {
        let s = e[k];
        let dd = d[k + 1] - lambda;
        let ee = if k + 2 < m { e[k + 1] } else { 0.0 };
        if ca.abs() >= s.abs() {
            if ca.abs() < tiny {
                ca = if ca < 0.0 { -tiny } else { tiny };
            }
            let mult = s / ca;
            u[k] = (ca, cb, cc);
            mults[k] = (false, mult);
            ca = dd - mult * cb;
            cb = ee - mult * cc;
            cc = 0.0;
        } else {
            let mult = ca / s;
            u[k] = (s, dd, ee);
            mults[k] = (true, mult);
            let (na, nb) = (cb - mult * dd, cc - mult * ee);
            ca = na;
            cb = nb;
            cc = 0.0;
        }
    }
    if ca.abs() < tiny {
        ca = if ca < 0.0 { -tiny } else { tiny };
    }
    u[m - 1] = (ca, 0.0, 0.0);

    for k in 0..m - 1 {
        let (swap, mult) = mults[k];
        if swap {
            b.swap(k, k + 1);
        }
        b[k + 1] -= mult * b[k];
    }
    for k in (0..m).rev() {
        let (p, q, r) = u[k];
        let mut v = b[k];
        if k + 1 < m {
            v -= q * b[k + 1];
        }
        if k + 2 < m {
            v -= r * b[k + 2];
        }
        b[k] = v / p;
    }
}

fn tridiag_residual(d: &[f64], e: &[f64], lambda: f64, y: &[f64]) -> f64 {
    let m = d.len();
    let mut r: f64 = 0.0;
    for i in 0..m {
        let mut v = (d[i] - lambda) * y[i];
        if i > 0 {
            v += e[i - 1] * y[i - 1];
        }
        if i + 1 < m {
            v += e[i] * y[i + 1];
        }
        r = r.max(v.abs());
    }
    r
}

/// Deterministic start vector for inverse iteration.
fn start_vector(m: usize, seed: usize) -> Vec<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (seed as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (0..m)
        .map(|_| {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

fn orthogonalize(y: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(q, y);
        axpy(-c, q, y);
    }
}

/// Top `k` eigenpairs of `c`, eigenvalues descending. Columns of the
/// returned matrix are orthonormal eigenvectors.
pub(crate) fn symmetric_top(c: &SymMatrix, k: usize) -> (Vec<f64>, Matrix) {
    let n = c.n();
    let k = k.min(n);
    if n == 0 || k == 0 {
        return (Vec::new(), Matrix::zeros(n, 0));
    }
    let t = Tridiagonal::reduce(c);
    let tnorm = t.norm_estimate().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;

    // Split where the off-diagonal is negligible.
    let mut off = t.off.clone();
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 0..n.saturating_sub(1) {
        if off[i].abs() <= eps * (t.diag[i].abs().sqrt() * t.diag[i + 1].abs().sqrt()) || off[i] == 0.0 {
            off[i] = 0.0;
            blocks.push(Block { start, end: i + 1 });
            start = i + 1;
        }
    }
    blocks.push(Block { start, end: n });

    let max_e2 = off.iter().map(|x| x * x).fold(0.0, f64::max);
    let pivmin = f64::MIN_POSITIVE * max_e2.max(1.0);
    let abstol = 1e-3 * eps * tnorm;

    // Candidate eigenvalues: top min(k, size) of each block.
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for (bi, blk) in blocks.iter().enumerate() {
        let d = &t.diag[blk.start..blk.end];
        let e = &off[blk.start..blk.end - 1];
        let e2: Vec<f64> = e.iter().map(|x| x * x).collect();
        let m = d.len();
        let (mut glo, mut ghi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..m {
            let mut r = 0.0;
            if i > 0 {
                r += e[i - 1].abs();
            }
            if i + 1 < m {
                r += e[i].abs();
            }
            glo = glo.min(d[i] - r);
            ghi = ghi.max(d[i] + r);
        }
        let pad = 2.0 * eps * tnorm + 2.0 * pivmin;
        glo -= pad;
        ghi += pad;
        for j in 0..k.min(m) {
            let index = m - 1 - j;
            let lambda = bisect(d, &e2, index, glo, ghi, pivmin, abstol);
            candidates.push((lambda, bi));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    candidates.truncate(k);

    let mut values = Vec::with_capacity(k);
    let mut vectors = Matrix::zeros(n, k);
    let tiny = eps * tnorm;
    let cluster_gap = 1e-3 * tnorm;
    // Per block: vectors of the current cluster and the last eigenvalue seen.
    let mut clusters: Vec<(Vec<Vec<f64>>, f64)> = vec![(Vec::new(), f64::INFINITY); blocks.len()];

    for (j, &(lambda, bi)) in candidates.iter().enumerate() {
        let blk = blocks[bi];
        let d = &t.diag[blk.start..blk.end];
        let e = &off[blk.start..blk.end - 1];
        let m = d.len();
        let (cluster, last) = &mut clusters[bi];
        if *last - lambda > cluster_gap {
            cluster.clear();
        }
        *last = lambda;

        let mut y = if m == 1 { vec![1.0] } else { start_vector(m, j) };
        if m > 1 {
            let target = 10.0 * eps * tnorm;
            for iter in 0..12 {
                orthogonalize(&mut y, cluster);
                let nrm = norm2(&y);
                if nrm == 0.0 {
                    y = start_vector(m, j + 7919 * (iter + 1));
                    continue;
                }
                y.iter_mut().for_each(|v| *v /= nrm);
                shifted_solve(d, e, lambda, tiny, &mut y);
                let nrm = norm2(&y);
                y.iter_mut().for_each(|v| *v /= nrm);
                if iter >= 1 && tridiag_residual(d, e, lambda, &y) <= target {
                    break;
                }
            }
            orthogonalize(&mut y, cluster);
            let nrm = norm2(&y);
            y.iter_mut().for_each(|v| *v /= nrm);
        }
        cluster.push(y.clone());

        let mut full = vec![0.0; n];
        full[blk.start..blk.end].copy_from_slice(&y);
        t.back_transform(&mut full);
        for (i, v) in full.iter().enumerate() {
            vectors[(i, j)] = *v;
        }
        values.push(lambda);
    }
    (values, vectors)
}
