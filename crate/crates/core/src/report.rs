//! Per-developer aggregation, inflated-commit detection, rank correlation and report output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::InflatedConfig;
use crate::pipeline::{AnalysisRun, CommitEntry, SCHEMA_VERSION};
use crate::repo::DeveloperIdentity;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("rank correlation needs equal-length inputs, got {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("rank correlation needs at least 2 points, got {0}")]
    TooFew(usize),
    #[error("all ranks are equal in one input")]
    ZeroVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeveloperReport {
    pub identity: DeveloperIdentity,
    pub commit_count: usize,
    pub commit_share: f64,
    pub cvalue_total: f64,
    pub cvalue_share: f64,
    pub inflated: bool,
    /// No commit by this developer has a nonzero edit size.
    pub zero_syntax: bool,
}

/// Shares over every commit in the run, keyed by email. The display name is
/// taken from the developer's first commit. When the run's total CValue is 0
/// every cvalue share is 0.
pub fn aggregate_by_developer(run: &AnalysisRun) -> Vec<DeveloperReport> {
    aggregate_commits(&run.commits, &run.config.inflated)
}

pub fn aggregate_commits(commits: &[CommitEntry], thresholds: &InflatedConfig) -> Vec<DeveloperReport> {
    let mut by_email: BTreeMap<&str, DeveloperReport> = BTreeMap::new();
    for c in commits {
        let r = by_email.entry(&c.author.email).or_insert_with(|| DeveloperReport {
            identity: c.author.clone(),
            commit_count: 0,
            commit_share: 0.0,
            cvalue_total: 0.0,
            cvalue_share: 0.0,
            inflated: false,
            zero_syntax: true,
        });
        r.commit_count += 1;
        r.cvalue_total += c.score.cvalue;
        r.identity.is_bot |= c.author.is_bot;
        if c.score.delta_ast() != 0.0 {
            r.zero_syntax = false;
        }
    }
    let n = commits.len() as f64;
    let total = by_email.values().fold(0.0, |acc, r| acc + r.cvalue_total);
    let mut out: Vec<DeveloperReport> = by_email.into_values().collect();
    for r in &mut out {
        r.commit_share = r.commit_count as f64 / n;
        r.cvalue_share = if total > 0.0 { r.cvalue_total / total } else { 0.0 };
    }
    detect_inflated(&mut out, thresholds.commit_share_min, thresholds.ratio_max);
    out
}

/// Flag developers with `commit_share > commit_share_min` and
/// `cvalue_share < ratio_max * commit_share`. Returns the flagged emails.
pub fn detect_inflated(reports: &mut [DeveloperReport], commit_share_min: f64, ratio_max: f64) -> Vec<String> {
    let mut flagged = Vec::new();
    for r in reports.iter_mut() {
        r.inflated = r.commit_share > commit_share_min && r.cvalue_share < ratio_max * r.commit_share;
        if r.inflated {
            flagged.push(r.identity.email.clone());
        }
    }
    flagged
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks<T: Scalar>(xs: &[T]) -> Vec<T> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("no NaN in rank input"));
    let mut ranks = vec![T::zero(); xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        // positions i..=j hold ranks i+1..=j+1
        let r = T::of_count(i + j + 2) / T::of(2.0);
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of the average ranks.
pub fn spearman<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T, EvalError> {
    if xs.len() != ys.len() {
        return Err(EvalError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(EvalError::TooFew(xs.len()));
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = T::of_count(xs.len());
    let mx = rx.iter().copied().sum::<T>() / n;
    let my = ry.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (a, b) in rx.iter().zip(&ry) {
        let (dx, dy) = (*a - mx, *b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(EvalError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRow {
    pub commit: String,
    pub author: String,
    pub timestamp: i64,
    pub bulk: bool,
    pub delta_ast: f64,
    pub cvalue: f64,
    pub functions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub repository: String,
    pub commits: Vec<CommitRow>,
    pub developers: Vec<DeveloperReport>,
}

impl Report {
    pub fn new(run: &AnalysisRun, developers: Vec<DeveloperReport>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            repository: run.repository.clone(),
            commits: run
                .commits
                .iter()
                .map(|c| CommitRow {
                    commit: c.commit.clone(),
                    author: c.author.email.clone(),
                    timestamp: c.timestamp,
                    bulk: c.bulk,
                    delta_ast: c.score.delta_ast(),
                    cvalue: c.score.cvalue,
                    functions: c.score.function_scores.len(),
                })
                .collect(),
            developers,
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Developer table as CSV: a header plus one row per developer.
pub fn developers_csv(reports: &[DeveloperReport]) -> String {
    let mut out = String::from("email,name,is_bot,commit_count,commit_share,cvalue_total,cvalue_share,inflated,zero_syntax\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            csv_field(&r.identity.email),
            csv_field(&r.identity.display_name),
            r.identity.is_bot,
            r.commit_count,
            r.commit_share,
            r.cvalue_total,
            r.cvalue_share,
            r.inflated,
            r.zero_syntax
        ));
    }
    out
}

/// Commit table as CSV, one row per commit in walk order.
pub fn commits_csv(rows: &[CommitRow]) -> String {
    let mut out = String::from("commit,author,timestamp,bulk,delta_ast,cvalue,functions\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.commit,
            csv_field(&r.author),
            r.timestamp,
            r.bulk,
            r.delta_ast,
            r.cvalue,
            r.functions
        ));
    }
    out
}

/// Render the report. JSON carries both tables; CSV is the developer table.
pub fn emit_report(run: &AnalysisRun, reports: &[DeveloperReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let report = Report::new(run, reports.to_vec());
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => developers_csv(reports),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dev(email: &str, commit_share: f64, cvalue_share: f64) -> DeveloperReport {
        DeveloperReport {
            identity: DeveloperIdentity {
                email: email.into(),
                display_name: email.into(),
                is_bot: false,
            },
            commit_count: 1,
            commit_share,
            cvalue_total: 0.0,
            cvalue_share,
            inflated: false,
            zero_syntax: false,
        }
    }

    #[test]
    fn inflated_thresholds() {
        let mut rs = vec![dev("a", 0.2217, 0.0204), dev("b", 0.005, 0.0), dev("c", 0.5, 0.1)];
        let flagged = detect_inflated(&mut rs, 0.01, 0.2);
        assert_eq!(flagged, vec!["a".to_string()]);
        assert!(!rs[2].inflated, "equality is not inflation");
    }

    #[test]
    fn spearman_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&xs, &xs).unwrap(), 1.0);
        assert_eq!(spearman(&xs, &[4.0, 3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((spearman(&xs, &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6f64).abs() < 1e-12);
        assert_eq!(spearman(&xs, &[1.0; 4]), Err(EvalError::ZeroVariance));
        assert_eq!(spearman(&xs, &[1.0]), Err(EvalError::LengthMismatch(4, 1)));
        assert_eq!(spearman(&[1.0f32], &[1.0]), Err(EvalError::TooFew(1)));
    }

    #[test]
    fn ties_share_ranks() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn csv_has_header_plus_rows() {
        let rs = vec![dev("a@x", 0.5, 0.5), dev("b,c@x", 0.5, 0.5)];
        let csv = developers_csv(&rs);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("\"b,c@x\""));
    }
}
