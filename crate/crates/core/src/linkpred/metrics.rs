use serde::{Deserialize, Serialize};

use super::LinkPredError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub threshold: f64,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent when the labels hold a single class.
    pub auroc: Option<f64>,
    pub auprc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn check(scores: &[f64], labels: &[bool]) -> Result<(), LinkPredError> {
    if scores.len() != labels.len() {
        return Err(LinkPredError::Metrics(format!("{} scores but {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(LinkPredError::Metrics("non-finite score".into()));
    }
    Ok(())
}

fn both_classes(labels: &[bool]) -> Result<(), LinkPredError> {
    if !labels.contains(&true) || !labels.contains(&false) {
        return Err(LinkPredError::Metrics("AUROC/AUPRC need at least one positive and one negative".into()));
    }
    Ok(())
}

/// Positive prediction means `score >= threshold`.
pub fn confusion(scores: &[f64], labels: &[bool], threshold: f64) -> Confusion {
    let mut c = Confusion::default();
    for (s, y) in scores.iter().zip(labels) {
        match (*s >= threshold, *y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// Mann-Whitney U over average ranks, normalized to [0, 1].
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64, LinkPredError> {
    check(scores, labels)?;
    both_classes(labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_sum_pos += avg_rank * idx[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let p = labels.iter().filter(|y| **y).count() as f64;
    let n = labels.len() as f64 - p;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average precision: sum over distinct score thresholds of precision times
/// the recall gained at that threshold.
pub fn auprc(scores: &[f64], labels: &[bool]) -> Result<f64, LinkPredError> {
    check(scores, labels)?;
    both_classes(labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let total_pos = labels.iter().filter(|y| **y).count() as f64;
    let (mut tp, mut fp, mut ap, mut last_recall) = (0.0, 0.0, 0.0, 0.0);
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            if labels[idx[j]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            j += 1;
        }
        let recall = tp / total_pos;
        ap += (recall - last_recall) * tp / (tp + fp);
        last_recall = recall;
        i = j;
    }
    Ok(ap)
}

/// Threshold metrics always; ranking metrics when both classes occur.
pub fn evaluate(scores: &[f64], labels: &[bool], threshold: f64) -> Result<MetricsReport, LinkPredError> {
    check(scores, labels)?;
    let c = confusion(scores, labels, threshold);
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    Ok(MetricsReport {
        threshold,
        confusion: c,
        accuracy: ratio(c.tp + c.tn, scores.len()),
        precision,
        recall,
        f1: f1_of(precision, recall),
        auroc: auroc(scores, labels).ok(),
        auprc: auprc(scores, labels).ok(),
    })
}

/// F1-maximizing threshold among 0, 1 and the midpoints between adjacent
/// distinct scores; the lowest wins ties.
pub fn select_threshold(scores: &[f64], labels: &[bool]) -> Result<f64, LinkPredError> {
    check(scores, labels)?;
    if scores.is_empty() {
        return Err(LinkPredError::Metrics("no scores to choose a threshold from".into()));
    }
    if !labels.contains(&true) {
        return Err(LinkPredError::Metrics("threshold selection needs a positive label".into()));
    }
    let mut distinct: Vec<f64> = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut candidates = vec![0.0, 1.0];
    candidates.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // Sorted scores with suffix counts answer "how many >= t" by bisection.
    let mut pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pos_suffix = vec![0usize; pairs.len() + 1];
    for i in (0..pairs.len()).rev() {
        pos_suffix[i] = pos_suffix[i + 1] + usize::from(pairs[i].1);
    }
    let total_pos = pos_suffix[0];
    let mut best = (f64::NEG_INFINITY, 0.0);
    for t in candidates {
        let first = pairs.partition_point(|p| p.0 < t);
        let predicted = pairs.len() - first;
        let tp = pos_suffix[first];
        let f1 = f1_of(ratio(tp, predicted), ratio(tp, total_pos));
        if f1 > best.0 {
            best = (f1, t);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise_auroc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut credit = 0.0;
        let mut pairs = 0.0;
        for (i, si) in scores.iter().enumerate() {
            for (j, sj) in scores.iter().enumerate() {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    credit += if si > sj { 1.0 } else if si == sj { 0.5 } else { 0.0 };
                }
            }
        }
        credit / pairs
    }

    fn enumerate_threshold(scores: &[f64], labels: &[bool]) -> f64 {
        let mut s = scores.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        let mut cands = vec![0.0, 1.0];
        for w in s.windows(2) {
            cands.push(w[0] + (w[1] - w[0]) / 2.0);
        }
        cands.sort_by(f64::total_cmp);
        let mut best = (-1.0, 0.0);
        for t in cands {
            let f1 = evaluate(scores, labels, t).unwrap().f1;
            if f1 > best.0 {
                best = (f1, t);
            }
        }
        best.1
    }

    #[test]
    fn hand_confusion_example() {
        let r = evaluate(&[0.9, 0.8, 0.4, 0.2], &[true, false, true, false], 0.5).unwrap();
        assert_eq!(r.confusion, Confusion { tp: 1, fp: 1, tn: 1, fn_: 1 });
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (0.5, 0.5, 0.5, 0.5));
        assert_eq!(r.auroc, Some(0.75));
        assert!((r.auprc.unwrap() - (0.5 * 1.0 + 0.5 * (2.0 / 3.0))).abs() < 1e-12);
    }

    #[test]
    fn perfect_separation() {
        let r = evaluate(&[0.9, 0.7, 0.3, 0.1], &[true, true, false, false], 0.5).unwrap();
        assert_eq!((r.auroc, r.auprc), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn single_class_keeps_threshold_metrics() {
        let r = evaluate(&[0.9, 0.2], &[true, true], 0.5).unwrap();
        assert_eq!((r.auroc, r.auprc), (None, None));
        assert_eq!(r.recall, 0.5);
        assert!(auroc(&[0.1], &[false]).is_err());
        assert!(auprc(&[0.1], &[true]).is_err());
        assert!(evaluate(&[0.1], &[true, false], 0.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(select_threshold(&[0.9, 0.1], &[true, false]).unwrap(), 0.5);
        assert_eq!(select_threshold(&[0.4, 0.4, 0.4], &[true, false, true]).unwrap(), 0.0);
        let t = select_threshold(&[0.95, 0.8, 0.3, 0.2], &[true, true, false, false]).unwrap();
        assert_eq!(t, 0.55);
        assert!(select_threshold(&[], &[]).is_err());
        assert!(select_threshold(&[0.3], &[false]).is_err());
    }

    #[test]
    fn average_precision_with_ties() {
        // One tie group containing a positive and a negative, then a positive.
        let ap = auprc(&[0.8, 0.8, 0.3], &[true, false, true]).unwrap();
        assert!((ap - (0.5 * 0.5 + 0.5 * (2.0 / 3.0))).abs() < 1e-12);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..60).prop_flat_map(|n| {
            (
                prop::collection::vec(prop_oneof![(0u8..10).prop_map(|k| f64::from(k) / 10.0), 0.0f64..1.0], n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn auroc_matches_pairwise((scores, mut labels) in instance()) {
            labels[0] = true;
            labels[1] = false;
            let a = auroc(&scores, &labels).unwrap();
            prop_assert!((a - pairwise_auroc(&scores, &labels)).abs() < 1e-9);
        }

        #[test]
        fn f1_identity_and_ranges((scores, labels) in instance(), t in 0.0f64..1.0) {
            let r = evaluate(&scores, &labels, t).unwrap();
            if r.precision + r.recall > 0.0 {
                prop_assert!((r.f1 - 2.0 * r.precision * r.recall / (r.precision + r.recall)).abs() < 1e-9);
            }
            for v in [r.accuracy, r.precision, r.recall, r.f1].into_iter().chain(r.auroc).chain(r.auprc) {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn threshold_matches_enumeration((scores, mut labels) in instance()) {
            labels[0] = true;
            prop_assert_eq!(select_threshold(&scores, &labels).unwrap(), enumerate_threshold(&scores, &labels));
        }
    }
}
