//! Ranking and threshold metrics over scored labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `None` when only one class is present.
    pub auc: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub threshold: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    pub undefined: Vec<String>,
}

/// Mann-Whitney AUC. Tied positive/negative pairs count one half.
pub fn auc(scored: &[(f64, bool)]) -> Result<f64> {
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::UndefinedMetric("AUC over NaN scores".into()));
    }
    let pos = scored.iter().filter(|(_, y)| *y).count();
    let neg = scored.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!("AUC needs both classes ({pos} positive, {neg} negative)")));
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // sum of average ranks of the positives
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg_rank * sorted[i..j].iter().filter(|(_, y)| *y).count() as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

fn ratio(num: f64, den: f64, name: &str, flags: &mut Vec<String>) -> f64 {
    if den == 0.0 {
        flags.push(name.to_string());
        0.0
    } else {
        num / den
    }
}

/// Metrics from confusion counts.
pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize, threshold: f64) -> MetricsReport {
    let (tpf, fpf, tnf, fnf) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
    let mut undefined = Vec::new();
    let precision = ratio(tpf, tpf + fpf, "precision", &mut undefined);
    let recall = ratio(tpf, tpf + fnf, "recall", &mut undefined);
    let f1 = ratio(2.0 * precision * recall, precision + recall, "f1", &mut undefined);
    let den = ((tpf + fpf) * (tpf + fnf) * (tnf + fpf) * (tnf + fnf)).sqrt();
    let mcc = ratio(tpf * tnf - fpf * fnf, den, "mcc", &mut undefined);
    MetricsReport { auc: None, precision, recall, f1, mcc, tp, fp, tn, fn_, threshold, undefined }
}

/// Threshold metrics; a score at or above `threshold` is predicted positive.
/// AUC is filled in when both classes are present.
pub fn confusion_metrics(scored: &[(f64, bool)], threshold: f64) -> MetricsReport {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for &(s, y) in scored {
        match (s >= threshold, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut report = from_counts(tp, fp, tn, fn_, threshold);
    report.auc = auc(scored).ok();
    if report.auc.is_none() {
        report.undefined.push("auc".into());
    }
    report
}

/// Threshold with the highest F1 among the distinct scores. Ties go to
/// the higher threshold. Every threshold partitions the scores like one of
/// these candidates or predicts nothing positive, so no threshold does
/// better.
pub fn best_f1_threshold(scored: &[(f64, bool)]) -> f64 {
    let mut cands: Vec<f64> = scored.iter().map(|(s, _)| *s).filter(|s| !s.is_nan()).collect();
    cands.sort_by(|a, b| b.total_cmp(a));
    cands.dedup();
    let mut best = (f64::NEG_INFINITY, 0.5);
    for t in cands {
        let f1 = confusion_metrics(scored, t).f1;
        if f1 > best.0 {
            best = (f1, t);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn scored(pos: &[f64], neg: &[f64]) -> Vec<(f64, bool)> {
        pos.iter().map(|&s| (s, true)).chain(neg.iter().map(|&s| (s, false))).collect()
    }

    /// Brute force over all positive/negative pairs.
    fn auc_pairs(s: &[(f64, bool)]) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(a, ya) in s {
            for &(b, yb) in s {
                if ya && !yb {
                    den += 1.0;
                    num += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&scored(&[0.9, 0.8], &[0.4, 0.3])).unwrap(), 1.0);
        assert_eq!(auc(&scored(&[0.5], &[0.5])).unwrap(), 0.5);
        assert_eq!(auc(&scored(&[0.9, 0.4], &[0.8, 0.3])).unwrap(), 0.75);
        assert!(matches!(auc(&scored(&[0.9], &[])), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn confusion_examples() {
        let r = from_counts(2, 1, 4, 3, 0.5);
        assert!((r.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.recall, 0.4);
        assert_eq!(r.f1, 0.5);
        assert!((r.mcc - 0.2182).abs() < 1e-4);
        assert!(r.undefined.is_empty());

        let perfect = confusion_metrics(&scored(&[0.9, 0.7], &[0.2]), 0.5);
        assert_eq!((perfect.f1, perfect.mcc, perfect.auc), (1.0, 1.0, Some(1.0)));

        let none = confusion_metrics(&scored(&[0.3], &[0.2]), 0.5);
        assert_eq!(none.precision, 0.0);
        assert!(none.undefined.contains(&"precision".to_string()));
        assert_eq!(none.tp + none.fp + none.tn + none.fn_, 2);
    }

    #[test]
    fn threshold_is_inclusive() {
        let r = confusion_metrics(&scored(&[0.5], &[0.49]), 0.5);
        assert_eq!((r.tp, r.tn), (1, 1));
    }

    fn labelled() -> impl Strategy<Value = Vec<(f64, bool)>> {
        proptest::collection::vec(((0u32..20).prop_map(|k| k as f64 / 20.0), any::<bool>()), 2..40)
    }

    proptest! {
        #[test]
        fn auc_matches_pairs_oracle(s in labelled()) {
            prop_assume!(s.iter().any(|x| x.1) && s.iter().any(|x| !x.1));
            prop_assert!((auc(&s).unwrap() - auc_pairs(&s)).abs() < 1e-12);
        }

        #[test]
        fn auc_monotone_invariant(s in labelled(), a in 0.1f64..5.0, b in -3.0f64..3.0, cube in any::<bool>()) {
            prop_assume!(s.iter().any(|x| x.1) && s.iter().any(|x| !x.1));
            let f = |x: f64| if cube { (a * x + b).powi(3) } else { (a * x + b).exp() };
            let mapped: Vec<(f64, bool)> = s.iter().map(|&(x, y)| (f(x), y)).collect();
            prop_assert!((auc(&s).unwrap() - auc(&mapped).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn mcc_symmetric_under_swap(tp in 0usize..30, fp in 0usize..30, tn in 0usize..30, fn_ in 0usize..30) {
            let a = from_counts(tp, fp, tn, fn_, 0.5);
            let b = from_counts(tn, fn_, tp, fp, 0.5);
            prop_assert!((a.mcc - b.mcc).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a.mcc));
            for v in [a.precision, a.recall, a.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn f1_ignores_true_negatives(tp in 0usize..30, fp in 0usize..30, tn in 0usize..30, fn_ in 0usize..30, extra in 1usize..50) {
            prop_assert_eq!(from_counts(tp, fp, tn, fn_, 0.5).f1, from_counts(tp, fp, tn + extra, fn_, 0.5).f1);
        }

        #[test]
        fn best_threshold_dominates_default(s in labelled()) {
            let best = confusion_metrics(&s, best_f1_threshold(&s)).f1;
            prop_assert!(confusion_metrics(&s, 0.5).f1 <= best);
        }
    }
}
