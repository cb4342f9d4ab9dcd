//! Mate retrieval: rank every test candidate of one view against each query
//! of another view and summarize with Average Precision.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::ViewMatrix;
use crate::linalg::compensated_sum;
use crate::model::{project, similarity, Embedding, Method, PwcaModel};

/// Rank (1-based) of `scores[mate]`. Candidates with a higher score rank
/// ahead of the mate, and so do equal-scored candidates with a smaller
/// index.
pub fn rank_of_mate(scores: &[f64], mate: usize) -> Result<usize> {
    let target = *scores.get(mate).ok_or(Error::IndexOutOfRange {
        index: mate,
        len: scores.len(),
    })?;
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("retrieval score".into()));
    }
    let ahead = scores
        .iter()
        .enumerate()
        .filter(|&(j, &s)| j != mate && (s > target || (s == target && j < mate)))
        .count();
    Ok(1 + ahead)
}

/// Mean reciprocal rank, `(1/ℓ) Σ 1/I_i`.
pub fn average_precision(ranks: &[usize]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::EmptyInput("no ranks".into()));
    }
    if ranks.contains(&0) {
        return Err(Error::OutOfRange("ranks start at 1".into()));
    }
    let total = compensated_sum(ranks.iter().map(|&r| 1.0 / r as f64));
    Ok(total / ranks.len() as f64)
}

/// AP of a uniformly random ranking over `n` candidates, `H_n / n`.
pub fn expected_random_ap(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    compensated_sum((1..=n).map(|i| 1.0 / i as f64)) / n as f64
}

/// Ranks `targets[i]` among all targets for every `queries[i]`.
pub fn rank_mates(queries: &[Embedding], targets: &[Embedding]) -> Result<Vec<usize>> {
    if queries.len() != targets.len() {
        return Err(Error::dims(format!(
            "{} queries but {} targets",
            queries.len(),
            targets.len()
        )));
    }
    queries
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let scores = targets
                .iter()
                .map(|t| similarity(q, t))
                .collect::<Result<Vec<_>>>()?;
            rank_of_mate(&scores, i)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    pub query_view: usize,
    pub target_view: usize,
    pub n_queries: usize,
    pub ranks: Vec<usize>,
    pub ap: f64,
    pub method: Method,
    pub k: usize,
    pub tau: f64,
    pub seed: Option<u64>,
}

/// The JSON summary written next to the per-query CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub ap: f64,
    pub n_queries: usize,
    pub method: Method,
    pub k: usize,
    pub tau: f64,
    pub seed: Option<u64>,
    pub query_view: usize,
    pub target_view: usize,
}

impl RetrievalReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            ap: self.ap,
            n_queries: self.n_queries,
            method: self.method,
            k: self.k,
            tau: self.tau,
            seed: self.seed,
            query_view: self.query_view,
            target_view: self.target_view,
        }
    }

    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.summary())?;
        s.push('\n');
        Ok(s)
    }

    /// `query_index,rank` rows with a header line.
    pub fn ranks_csv(&self) -> String {
        let mut out = String::from("query_index,rank\n");
        for (i, r) in self.ranks.iter().enumerate() {
            let _ = writeln!(out, "{i},{r}");
        }
        out
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// Retrieves, for every row `i` of `test_views[query_view]`, its mate (row
/// `i` of `test_views[target_view]`) among all rows of the target view.
pub fn mate_retrieval(
    model: &PwcaModel,
    test_views: &[ViewMatrix],
    query_view: usize,
    target_view: usize,
) -> Result<RetrievalReport> {
    for &v in &[query_view, target_view] {
        if v >= test_views.len() {
            return Err(Error::IndexOutOfRange {
                index: v,
                len: test_views.len(),
            });
        }
    }
    let n = test_views[query_view].rows();
    if test_views[target_view].rows() != n {
        return Err(Error::dims(format!(
            "query view has {n} rows, target view has {}",
            test_views[target_view].rows()
        )));
    }
    let queries = project(model, query_view, &test_views[query_view])?;
    let targets = project(model, target_view, &test_views[target_view])?;
    let ranks = rank_mates(&queries, &targets)?;
    let ap = average_precision(&ranks)?;
    Ok(RetrievalReport {
        query_view,
        target_view,
        n_queries: n,
        ranks,
        ap,
        method: model.method(),
        k: model.k(),
        tau: model.tau(),
        seed: None,
    })
}

/// Reports for every ordered pair of distinct views.
pub fn all_directions(model: &PwcaModel, test_views: &[ViewMatrix]) -> Result<Vec<RetrievalReport>> {
    let s = test_views.len();
    let mut out = Vec::with_capacity(s * (s - 1));
    for q in 0..s {
        for t in 0..s {
            if q != t {
                out.push(mate_retrieval(model, test_views, q, t)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank_of_mate(&[0.1, 0.9, 0.3], 1).unwrap(), 1);
        // 1-based mate index 2 -> 0-based 1.
        assert_eq!(rank_of_mate(&[0.9, 0.9, 0.1], 1).unwrap(), 2);
        assert_eq!(rank_of_mate(&[0.9, 0.9, 0.1], 0).unwrap(), 1);
        assert_eq!(rank_of_mate(&[0.5; 7], 6).unwrap(), 7);
        assert!(matches!(rank_of_mate(&[0.5], 1), Err(Error::IndexOutOfRange { .. })));
        assert!(rank_of_mate(&[f64::NAN, 1.0], 1).is_err());
    }

    #[test]
    fn ap_examples() {
        assert_eq!(average_precision(&[2; 10]).unwrap(), 0.5);
        assert!((average_precision(&[1, 2, 3]).unwrap() - 11.0 / 18.0).abs() <= 1e-15);
        assert_eq!(average_precision(&[1, 1, 1]).unwrap(), 1.0);
        assert!(matches!(average_precision(&[]), Err(Error::EmptyInput(_))));
        assert!(average_precision(&[0]).is_err());
    }

    #[test]
    fn random_baseline() {
        assert_eq!(expected_random_ap(1), 1.0);
        assert_eq!(expected_random_ap(2), 0.75);
        // H_200 = 5.878030948121446...
        assert!((expected_random_ap(200) - 0.029390154740607).abs() < 1e-12);
    }

    #[test]
    fn rank_mates_checks_lengths() {
        let e = vec![Embedding(vec![1.0])];
        assert!(rank_mates(&e, &[]).is_err());
        assert_eq!(rank_mates(&e, &e).unwrap(), vec![1]);
    }
}
