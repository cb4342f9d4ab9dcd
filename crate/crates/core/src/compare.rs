//! Side-by-side AP tables across methods and view pairs.
//!
//! A column is an unordered view pair `a-b` (`a < b`) holding the mean AP
//! of its two retrieval directions; a final `mean` column averages the
//! pair columns. Rows are methods in name order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::Method;
use crate::retrieval::RetrievalReport;

/// AP per method, pair label and direction.
type Grouped = BTreeMap<Method, BTreeMap<String, [Option<f64>; 2]>>;

fn pair_label(a: usize, b: usize) -> String {
    format!("{}-{}", a.min(b), a.max(b))
}

fn group(reports: &[RetrievalReport]) -> Result<Grouped> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InconsistentReports("no reports".into()))?;
    let mut out: Grouped = BTreeMap::new();
    for r in reports {
        if r.n_queries != first.n_queries {
            return Err(Error::InconsistentReports(format!(
                "reports cover {} and {} queries",
                first.n_queries, r.n_queries
            )));
        }
        if r.query_view == r.target_view {
            return Err(Error::InconsistentReports(format!(
                "report retrieves view {} from itself",
                r.query_view
            )));
        }
        let slot = usize::from(r.query_view > r.target_view);
        let cell = out
            .entry(r.method)
            .or_default()
            .entry(pair_label(r.query_view, r.target_view))
            .or_insert([None, None]);
        if cell[slot].replace(r.ap).is_some() {
            return Err(Error::InconsistentReports(format!(
                "{} has two reports for {} -> {}",
                r.method, r.query_view, r.target_view
            )));
        }
    }
    let labels: Vec<&String> = out.values().next().map(|m| m.keys().collect()).unwrap_or_default();
    for (method, pairs) in &out {
        if pairs.keys().collect::<Vec<_>>() != labels {
            return Err(Error::InconsistentReports(format!(
                "{method} covers a different set of view pairs"
            )));
        }
        for (label, dirs) in pairs {
            if dirs.iter().any(Option::is_none) {
                return Err(Error::InconsistentReports(format!(
                    "{method} is missing one direction of pair {label}"
                )));
            }
        }
    }
    Ok(out)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: Method,
    /// Per pair, in column order.
    pub values: Vec<f64>,
    pub mean: f64,
}

/// Column labels and rows of the comparison table.
pub fn comparison_rows(reports: &[RetrievalReport]) -> Result<(Vec<String>, Vec<ComparisonRow>)> {
    let grouped = group(reports)?;
    let labels: Vec<String> = grouped.values().next().map(|m| m.keys().cloned().collect()).unwrap_or_default();
    let rows = grouped
        .into_iter()
        .map(|(method, pairs)| {
            let values: Vec<f64> = pairs
                .values()
                .map(|d| 0.5 * (d[0].unwrap_or(f64::NAN) + d[1].unwrap_or(f64::NAN)))
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            ComparisonRow { method, values, mean }
        })
        .collect();
    Ok((labels, rows))
}

/// CSV with header `method,<pairs...>,mean`.
pub fn emit_comparison_table(reports: &[RetrievalReport]) -> Result<String> {
    let (labels, rows) = comparison_rows(reports)?;
    let mut out = String::from("method");
    for l in &labels {
        out.push(',');
        out.push_str(l);
    }
    out.push_str(",mean\n");
    for row in rows {
        out.push_str(row.method.as_str());
        for v in &row.values {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", row.mean);
    }
    Ok(out)
}

/// CSV with one line per method and direction:
/// `method,query_view,target_view,ap`.
pub fn emit_direction_table(reports: &[RetrievalReport]) -> Result<String> {
    group(reports)?;
    let mut sorted: Vec<&RetrievalReport> = reports.iter().collect();
    sorted.sort_by_key(|r| (r.method, r.query_view, r.target_view));
    let mut out = String::from("method,query_view,target_view,ap\n");
    for r in sorted {
        let _ = writeln!(out, "{},{},{},{}", r.method, r.query_view, r.target_view, r.ap);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(method: Method, q: usize, t: usize, ap: f64) -> RetrievalReport {
        RetrievalReport {
            query_view: q,
            target_view: t,
            n_queries: 4,
            ranks: vec![],
            ap,
            method,
            k: 2,
            tau: 0.01,
            seed: None,
        }
    }

    #[test]
    fn one_pair_two_methods() {
        let reps = vec![
            report(Method::Pwca, 0, 1, 0.5),
            report(Method::Pwca, 1, 0, 0.75),
            report(Method::Kcca, 1, 0, 0.25),
            report(Method::Kcca, 0, 1, 0.25),
        ];
        let csv = emit_comparison_table(&reps).unwrap();
        assert_eq!(csv, "method,0-1,mean\npwca,0.625,0.625\nkcca,0.25,0.25\n");
    }

    #[test]
    fn missing_direction() {
        let reps = vec![report(Method::Pwca, 0, 1, 0.5)];
        assert!(matches!(emit_comparison_table(&reps), Err(Error::InconsistentReports(_))));
    }

    #[test]
    fn mismatched_pairs_and_duplicates() {
        let reps = vec![
            report(Method::Pwca, 0, 1, 0.5),
            report(Method::Pwca, 1, 0, 0.5),
            report(Method::Kcca, 0, 2, 0.5),
            report(Method::Kcca, 2, 0, 0.5),
        ];
        assert!(emit_comparison_table(&reps).is_err());
        let dup = vec![
            report(Method::Pwca, 0, 1, 0.5),
            report(Method::Pwca, 0, 1, 0.5),
            report(Method::Pwca, 1, 0, 0.5),
        ];
        assert!(emit_comparison_table(&dup).is_err());
    }

    #[test]
    fn direction_table() {
        let reps = vec![report(Method::Pwca, 1, 0, 0.75), report(Method::Pwca, 0, 1, 0.5)];
        assert_eq!(
            emit_direction_table(&reps).unwrap(),
            "method,query_view,target_view,ap\npwca,0,1,0.5\npwca,1,0,0.75\n"
        );
    }
}
