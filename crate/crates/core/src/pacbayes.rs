//! PAC-Bayes diagnostics for pairwise clustering over finite hypothesis
//! grids.
//!
//! A pairwise cluster is a pair of intervals `(c_z, c_y)`; it contradicts a
//! sample `(z, y)` when exactly one of `z ∈ c_z`, `y ∈ c_y` holds. Weightings
//! `Q` over such hypotheses are checked against the bound
//!
//! ```text
//! kl(E_Q[R_n], E_Q[R]) <= (KL(Q, P) + ln(1/δ) + ln(2√n)) / n,   n >= 8
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `Σ weights = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Weights over an enumerated hypothesis set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("distribution has no atoms".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::OutOfRange(format!("weight {w} is not a probability")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::OutOfRange(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        Self::new(vec![1.0 / m as f64; m])
    }

    /// Uniform over `support`, zero elsewhere.
    pub fn uniform_on(m: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptyInput("empty support".into()));
        }
        let mut w = vec![0.0; m];
        let p = 1.0 / support.len() as f64;
        for &i in support {
            *w.get_mut(i).ok_or(Error::IndexOutOfRange { index: i, len: m })? = p;
        }
        Self::new(w)
    }

    /// Normalizes nonnegative weights.
    pub fn from_unnormalized(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::OutOfRange("weights must have positive mass".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange(format!("{name} = {v} is outside [0, 1]")));
    }
    Ok(())
}

/// `q ln(q/p) + (1−q) ln((1−q)/(1−p))` with `0 ln 0 = 0`; `+∞` when the
/// divergence is unbounded.
pub fn bernoulli_kl(q: f64, p: f64) -> Result<f64> {
    check_unit("q", q)?;
    check_unit("p", p)?;
    let term = |a: f64, b: f64| -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    Ok(term(q, p) + term(1.0 - q, 1.0 - p))
}

/// `Σ Q_i ln(Q_i / P_i)`, `+∞` if `Q` has mass where `P` has none.
pub fn discrete_kl(q: &DiscreteDistribution, p: &DiscreteDistribution) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::dims(format!("supports of size {} and {}", q.len(), p.len())));
    }
    let mut total = 0.0;
    for (&qi, &pi) in q.weights.iter().zip(&p.weights) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(f64::INFINITY);
        }
        total += qi * (qi / pi).ln();
    }
    Ok(total)
}

/// `(KL(Q,P) + ln(1/δ) + ln(2√n)) / n`.
pub fn pac_bound_rhs(n: usize, delta: f64, kl_qp: f64) -> Result<f64> {
    if n < 8 {
        return Err(Error::SampleSizeTooSmall { n });
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange(format!("delta = {delta} is outside (0, 1)")));
    }
    if !(kl_qp >= 0.0) {
        return Err(Error::OutOfRange(format!("KL = {kl_qp} is negative")));
    }
    let nf = n as f64;
    Ok((kl_qp + (1.0 / delta).ln() + (2.0 * nf.sqrt()).ln()) / nf)
}

/// Largest `p ∈ [q, 1]` with `kl(q, p) <= c`, by bisection until the
/// bracket holds two adjacent floats.
pub fn kl_inverse_upper(q_emp: f64, c: f64) -> Result<f64> {
    check_unit("q", q_emp)?;
    if !(c >= 0.0) {
        return Err(Error::OutOfRange(format!("c = {c} is negative")));
    }
    if c == 0.0 || q_emp == 1.0 {
        return Ok(q_emp);
    }
    // Past the largest float below 1 the answer rounds to 1.
    if bernoulli_kl(q_emp, 1.0 - f64::EPSILON / 2.0)? <= c {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (q_emp, 1.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bernoulli_kl(q_emp, mid)? <= c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `ln Σ Q² + ln |H| − KL(Q, uniform)`; nonnegative for every `Q`, zero
/// exactly when `Q` is uniform on its support.
pub fn prop1_gap(q: &DiscreteDistribution) -> Result<f64> {
    let m = q.len();
    let sum_sq: f64 = q.weights.iter().map(|w| w * w).sum();
    let kl = discrete_kl(q, &DiscreteDistribution::uniform(m)?)?;
    Ok(sum_sq.ln() + (m as f64).ln() - kl)
}

/// All pairs of intervals from two partitions of the real line.
///
/// Intervals are half-open `[a, b)` except the last one in each domain,
/// which is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHypothesisSpace {
    edges_z: Vec<f64>,
    edges_y: Vec<f64>,
}

impl GridHypothesisSpace {
    pub fn new(edges_z: Vec<f64>, edges_y: Vec<f64>) -> Result<Self> {
        for (name, e) in [("z", &edges_z), ("y", &edges_y)] {
            if e.len() < 2 {
                return Err(Error::InvalidParameter(format!("{name} needs at least two edges")));
            }
            if e.windows(2).any(|w| !(w[0] < w[1])) || e.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} edges must be finite and strictly increasing"
                )));
            }
        }
        Ok(Self { edges_z, edges_y })
    }

    /// `cells` equal intervals on `[lo, hi]` in both domains.
    pub fn uniform(cells: usize, lo: f64, hi: f64) -> Result<Self> {
        if cells == 0 || !(lo < hi) {
            return Err(Error::InvalidParameter("need cells >= 1 and lo < hi".into()));
        }
        let edges: Vec<f64> = (0..=cells)
            .map(|i| if i == cells { hi } else { lo + (hi - lo) * i as f64 / cells as f64 })
            .collect();
        Self::new(edges.clone(), edges)
    }

    pub fn cells_z(&self) -> usize {
        self.edges_z.len() - 1
    }

    pub fn cells_y(&self) -> usize {
        self.edges_y.len() - 1
    }

    pub fn edges_z(&self) -> &[f64] {
        &self.edges_z
    }

    pub fn edges_y(&self) -> &[f64] {
        &self.edges_y
    }

    pub fn len(&self) -> usize {
        self.cells_z() * self.cells_y()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hypothesis index of the interval pair `(iz, iy)`.
    pub fn index(&self, iz: usize, iy: usize) -> usize {
        iz * self.cells_y() + iy
    }

    /// Inverse of [`Self::index`].
    pub fn cells(&self, h: usize) -> (usize, usize) {
        (h / self.cells_y(), h % self.cells_y())
    }

    fn locate(edges: &[f64], x: f64) -> Option<usize> {
        let last = edges.len() - 1;
        if !(x >= edges[0] && x <= edges[last]) {
            return None;
        }
        if x == edges[last] {
            return Some(last - 1);
        }
        Some(edges.partition_point(|e| *e <= x) - 1)
    }

    /// Cell indices of a sample, if it lies inside the grid.
    pub fn locate_sample(&self, z: f64, y: f64) -> Option<(usize, usize)> {
        Some((Self::locate(&self.edges_z, z)?, Self::locate(&self.edges_y, y)?))
    }
}

/// Empirical contradiction risk per hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskVector {
    pub counts: Vec<usize>,
    pub n: usize,
}

impl RiskVector {
    pub fn risk(&self, h: usize) -> f64 {
        self.counts[h] as f64 / self.n as f64
    }

    pub fn risks(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|h| self.risk(h)).collect()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Fraction of samples each hypothesis contradicts.
pub fn grid_risks(grid: &GridHypothesisSpace, samples: &[(f64, f64)]) -> Result<RiskVector> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples".into()));
    }
    let (nz, ny) = (grid.cells_z(), grid.cells_y());
    let mut marg_z = vec![0usize; nz];
    let mut marg_y = vec![0usize; ny];
    let mut joint = vec![0usize; nz * ny];
    for (index, &(z, y)) in samples.iter().enumerate() {
        let (a, b) = grid
            .locate_sample(z, y)
            .ok_or(Error::SampleOutOfGrid { index, z, y })?;
        marg_z[a] += 1;
        marg_y[b] += 1;
        joint[grid.index(a, b)] += 1;
    }
    // Samples in exactly one of the two intervals.
    let counts = (0..nz * ny)
        .map(|h| {
            let (a, b) = grid.cells(h);
            marg_z[a] + marg_y[b] - 2 * joint[h]
        })
        .collect();
    Ok(RiskVector {
        counts,
        n: samples.len(),
    })
}

/// Minimum-norm weighting supported on hypotheses with risk `<= epsilon`:
/// uniform over that set.
pub fn realizable_q(risks: &RiskVector, epsilon: f64) -> Result<DiscreteDistribution> {
    if !(epsilon >= 0.0) {
        return Err(Error::OutOfRange(format!("epsilon = {epsilon} is negative")));
    }
    let support: Vec<usize> = (0..risks.len()).filter(|&h| risks.risk(h) <= epsilon).collect();
    if support.is_empty() {
        return Err(Error::Infeasible { epsilon });
    }
    DiscreteDistribution::uniform_on(risks.len(), &support)
}

/// `Σ Q_h R_n(h)`.
pub fn expected_risk(q: &DiscreteDistribution, risks: &RiskVector) -> Result<f64> {
    expected_value(q, &risks.risks())
}

/// `Σ Q_h r_h` for an arbitrary per-hypothesis vector.
pub fn expected_value(q: &DiscreteDistribution, values: &[f64]) -> Result<f64> {
    if q.len() != values.len() {
        return Err(Error::dims(format!(
            "{} weights for {} values",
            q.len(),
            values.len()
        )));
    }
    Ok(q.weights.iter().zip(values).map(|(w, r)| w * r).sum())
}

/// Output of the `bound` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kl_qp: f64,
    pub rhs: f64,
    pub risk_upper_bound: f64,
}

/// Bound right-hand side and the implied upper bound on `E_Q[R]` given the
/// empirical value `emp_risk`.
pub fn bound_report(n: usize, delta: f64, kl_qp: f64, emp_risk: f64) -> Result<BoundReport> {
    let rhs = pac_bound_rhs(n, delta, kl_qp)?;
    Ok(BoundReport {
        kl_qp,
        rhs,
        risk_upper_bound: kl_inverse_upper(emp_risk, rhs)?,
    })
}

/// A distribution over grid cells; samples are uniform within a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellDistribution {
    grid: GridHypothesisSpace,
    probs: Vec<f64>,
}

impl CellDistribution {
    /// `probs[index(iz, iy)]` is the probability of cell `(iz, iy)`.
    pub fn new(grid: GridHypothesisSpace, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != grid.len() {
            return Err(Error::dims("one probability per cell is required"));
        }
        DiscreteDistribution::new(probs.clone())?;
        Ok(Self { grid, probs })
    }

    pub fn grid(&self) -> &GridHypothesisSpace {
        &self.grid
    }

    /// Exact contradiction probability `P(z ∈ c_z) + P(y ∈ c_y) − 2P(cell)`
    /// for every hypothesis.
    pub fn true_risks(&self) -> Vec<f64> {
        let (nz, ny) = (self.grid.cells_z(), self.grid.cells_y());
        let mut pz = vec![0.0; nz];
        let mut py = vec![0.0; ny];
        for h in 0..self.probs.len() {
            let (a, b) = self.grid.cells(h);
            pz[a] += self.probs[h];
            py[b] += self.probs[h];
        }
        (0..self.probs.len())
            .map(|h| {
                let (a, b) = self.grid.cells(h);
                (pz[a] + py[b] - 2.0 * self.probs[h]).clamp(0.0, 1.0)
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<(f64, f64)> {
        let (ez, ey) = (self.grid.edges_z(), self.grid.edges_y());
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut h = self.probs.len() - 1;
                for (i, p) in self.probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        h = i;
                        break;
                    }
                }
                let (a, b) = self.grid.cells(h);
                let z = ez[a] + (ez[a + 1] - ez[a]) * rng.gen::<f64>();
                let y = ey[b] + (ey[b + 1] - ey[b]) * rng.gen::<f64>();
                (z, y)
            })
            .collect()
    }
}
