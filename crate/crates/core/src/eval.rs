//! Per-split evaluation of commit scores against a labeled manifest.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DatasetManifest, Split};
use crate::metrics::{best_f1_threshold, confusion_metrics, MetricsReport};

/// One line of a scores file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredCommit {
    pub repo: String,
    pub commit: String,
    pub score: f64,
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: Split,
    pub commits: usize,
    /// Metrics at [`DEFAULT_THRESHOLD`].
    pub default_threshold: MetricsReport,
    /// Metrics at the threshold that maximizes F1 on this split.
    pub best_f1: MetricsReport,
}

/// Commit ids match when one is a prefix of the other, so abbreviated
/// manifest ids line up with full hashes.
fn same_commit(a: &str, b: &str) -> bool {
    !a.is_empty() && !b.is_empty() && (a.starts_with(b) || b.starts_with(a))
}

/// Reports for every split whose commits are all scored. The test split
/// must be present and fully scored.
pub fn evaluate(manifest: &DatasetManifest, scores: &[ScoredCommit]) -> Result<Vec<SplitReport>> {
    let mut counts: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for s in scores {
        *counts.entry((&s.repo, &s.commit)).or_default() += 1;
    }
    let dups: Vec<String> =
        counts.iter().filter(|(_, &n)| n > 1).map(|((r, c), _)| format!("{r}@{c}")).collect();
    if !dups.is_empty() {
        return Err(Error::Validation(format!("duplicate scores for {}", dups.join(", "))));
    }
    if !manifest.records.iter().any(|r| r.split == Split::Test) {
        return Err(Error::Validation("the test split is empty".into()));
    }
    let mut by_repo: BTreeMap<&str, Vec<&ScoredCommit>> = BTreeMap::new();
    for s in scores {
        by_repo.entry(&s.repo).or_default().push(s);
    }
    let mut reports = Vec::new();
    for split in Split::ALL {
        let mut scored = Vec::new();
        let mut missing = Vec::new();
        for r in manifest.records.iter().filter(|r| r.split == split) {
            let hits: Vec<&&ScoredCommit> = by_repo
                .get(r.repo.as_str())
                .map(|v| v.iter().filter(|s| same_commit(&s.commit, &r.commit)).collect())
                .unwrap_or_default();
            match hits.as_slice() {
                [s] => scored.push((s.score, r.label)),
                [] => missing.push(format!("{}@{}", r.repo, r.commit)),
                _ => return Err(Error::Validation(format!("ambiguous scores for {}@{}", r.repo, r.commit))),
            }
        }
        if scored.is_empty() && missing.is_empty() {
            continue;
        }
        if !missing.is_empty() {
            if split == Split::Test {
                return Err(Error::Validation(format!("missing scores for {}", missing.join(", "))));
            }
            log::info!("skipping {split} split: {} commits unscored", missing.len());
            continue;
        }
        let best = best_f1_threshold(&scored);
        reports.push(SplitReport {
            split,
            commits: scored.len(),
            default_threshold: confusion_metrics(&scored, DEFAULT_THRESHOLD),
            best_f1: confusion_metrics(&scored, best),
        });
    }
    Ok(reports)
}

/// Plain-text rendering of split reports.
pub fn format_reports(reports: &[SplitReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!("[{}] commits={}\n", r.split, r.commits));
        for (label, m) in [("default threshold", &r.default_threshold), ("best-F1 threshold", &r.best_f1)] {
            let auc = m.auc.map_or("undefined".to_string(), |a| format!("{a:.4}"));
            out.push_str(&format!(
                "  {label} {:.4}: auc={auc} precision={:.4} recall={:.4} f1={:.4} mcc={:.4} tp={} fp={} tn={} fn={}\n",
                m.threshold, m.precision, m.recall, m.f1, m.mcc, m.tp, m.fp, m.tn, m.fn_
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ManifestRecord;

    fn rec(repo: &str, commit: &str, label: bool, split: Split) -> ManifestRecord {
        ManifestRecord { repo: repo.into(), commit: commit.into(), label, split }
    }

    fn sc(repo: &str, commit: &str, score: f64) -> ScoredCommit {
        ScoredCommit { repo: repo.into(), commit: commit.into(), score }
    }

    fn six() -> (DatasetManifest, Vec<ScoredCommit>) {
        let m = DatasetManifest {
            records: vec![
                rec("a", "c1", true, Split::Test),
                rec("a", "c2", false, Split::Test),
                rec("a", "c3", true, Split::Test),
                rec("b", "c4", false, Split::Test),
                rec("b", "c5", false, Split::Test),
                rec("b", "c6", true, Split::Test),
                rec("t", "c7", true, Split::Train),
            ],
        };
        let s = vec![
            sc("a", "c1aaaa", 0.9),
            sc("a", "c2", 0.6),
            sc("a", "c3", 0.4),
            sc("b", "c4", 0.3),
            sc("b", "c5", 0.2),
            sc("b", "c6", 0.35),
        ];
        (m, s)
    }

    #[test]
    fn six_commit_hand_computation() {
        let (m, s) = six();
        let r = evaluate(&m, &s).unwrap();
        // train split is unscored and skipped
        assert_eq!(r.len(), 1);
        let t = &r[0];
        assert_eq!(t.split, Split::Test);
        // at 0.5: predicted positive {0.9, 0.6} -> TP=1 FP=1 FN=2 TN=2
        let d = &t.default_threshold;
        assert_eq!((d.tp, d.fp, d.fn_, d.tn), (1, 1, 2, 2));
        assert_eq!(d.precision, 0.5);
        assert!((d.recall - 1.0 / 3.0).abs() < 1e-12);
        assert!((d.f1 - 0.4).abs() < 1e-12);
        // MCC = (1*2 - 1*2) / sqrt(...) = 0
        assert_eq!(d.mcc, 0.0);
        // positives {0.9,0.4,0.35} vs negatives {0.6,0.3,0.2}: 7 of 9 pairs
        assert!((d.auc.unwrap() - 7.0 / 9.0).abs() < 1e-12);
        // best F1 at 0.35: TP=3 FP=1 -> P=0.75 R=1 F1=6/7
        assert_eq!(t.best_f1.threshold, 0.35);
        assert!((t.best_f1.f1 - 6.0 / 7.0).abs() < 1e-12);
        assert!(format_reports(&r).contains("best-F1 threshold"));
    }

    #[test]
    fn errors() {
        let (m, mut s) = six();
        let missing = evaluate(&m, &s[1..]).unwrap_err().to_string();
        assert!(missing.contains("a@c1"), "{missing}");

        s.push(sc("b", "c5", 0.1));
        let dup = evaluate(&m, &s).unwrap_err().to_string();
        assert!(dup.contains("b@c5"), "{dup}");

        let no_test = DatasetManifest { records: vec![rec("t", "c7", true, Split::Train)] };
        assert!(evaluate(&no_test, &[]).is_err());
    }
}
