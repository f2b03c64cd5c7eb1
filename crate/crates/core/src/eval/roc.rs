use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    /// Scores `>= threshold` are called positive. The first point uses +inf.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// Highest TPR among operating points whose FPR does not exceed `max_fpr`.
    pub fn tpr_at_fpr(&self, max_fpr: f64) -> f64 {
        self.operating_point(max_fpr).map_or(0.0, |p| p.tpr)
    }

    /// The point with the largest FPR `<= max_fpr`, best TPR on ties.
    pub fn operating_point(&self, max_fpr: f64) -> Option<RocPoint> {
        self.points
            .iter()
            .filter(|p| p.fpr <= max_fpr)
            .copied()
            .max_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)))
    }
}

/// Sweeps one threshold per distinct score, highest first. Equal scores cross
/// together, so a tie between classes produces a diagonal segment.
pub fn roc_curve(scores: &[f64], truths: &[bool]) -> Result<RocCurve> {
    if scores.len() != truths.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), actual: truths.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let n_pos = truths.iter().filter(|&&t| t).count();
    let n_neg = truths.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateTruth);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truths[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { threshold: s, fpr: fp as f64 / n_neg as f64, tpr: tp as f64 / n_pos as f64 });
    }
    let auc = points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum();
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Counts at a score threshold: predicted positive iff `score >= tau`.
pub fn confusion_at(predicted: &[u8], truths: &[bool], tau: u8) -> Result<Confusion> {
    if predicted.len() != truths.len() {
        return Err(Error::DimensionMismatch { expected: predicted.len(), actual: truths.len() });
    }
    if tau > 4 {
        return Err(Error::InvalidParameter(format!("tau {tau} outside 0..=4")));
    }
    let mut c = Confusion::default();
    for (&p, &t) in predicted.iter().zip(truths) {
        match (p >= tau, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `# auc=<value>` then `threshold,fpr,tpr` rows.
pub fn write_roc_csv<W: Write>(mut out: W, curve: &RocCurve) -> Result<()> {
    writeln!(out, "# auc={}", curve.auc)?;
    writeln!(out, "threshold,fpr,tpr")?;
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    /// Every threshold midway between adjacent distinct scores, plus both ends.
    fn brute_force(scores: &[f64], truths: &[bool]) -> BTreeSet<(u64, u64)> {
        let mut distinct: Vec<f64> = scores.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let mut cuts = vec![f64::NEG_INFINITY, f64::INFINITY];
        cuts.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        let n_pos = truths.iter().filter(|&&t| t).count() as f64;
        let n_neg = truths.len() as f64 - n_pos;
        cuts.iter()
            .map(|&c| {
                let tp = scores.iter().zip(truths).filter(|(s, t)| **s > c && **t).count() as f64;
                let fp = scores.iter().zip(truths).filter(|(s, t)| **s > c && !**t).count() as f64;
                ((fp / n_neg).to_bits(), (tp / n_pos).to_bits())
            })
            .collect()
    }

    #[test]
    fn matches_exhaustive_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n = rng.random_range(2..=20);
            // coarse scores so ties are common
            let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 / 2.0).collect();
            let mut truths: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            truths[0] = true;
            truths[1] = false;
            let curve = roc_curve(&scores, &truths).unwrap();
            let ours: BTreeSet<_> = curve.points.iter().map(|p| (p.fpr.to_bits(), p.tpr.to_bits())).collect();
            assert_eq!(ours, brute_force(&scores, &truths));
        }
    }

    #[test]
    fn perfect_inverted_constant() {
        let s = [0.9, 0.8, 0.4, 0.2];
        let perfect = roc_curve(&s, &[true, true, false, false]).unwrap();
        assert_eq!(perfect.auc, 1.0);
        assert!(perfect.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        assert_eq!(roc_curve(&s, &[false, false, true, true]).unwrap().auc, 0.0);
        let flat = roc_curve(&[0.3; 6], &[true, false, true, false, false, true]).unwrap();
        assert_eq!(flat.auc, 0.5);
        assert_eq!(flat.points.len(), 2);
    }

    #[test]
    fn degenerate_truth() {
        assert!(matches!(roc_curve(&[1.0, 2.0], &[true, true]), Err(Error::DegenerateTruth)));
        assert!(matches!(roc_curve(&[], &[]), Err(Error::DegenerateTruth)));
    }

    #[test]
    fn operating_point_lookup() {
        let c = roc_curve(&[5.0, 4.0, 3.0, 2.0, 1.0], &[true, false, true, false, true]).unwrap();
        assert_eq!(c.tpr_at_fpr(0.0), 1.0 / 3.0);
        assert_eq!(c.tpr_at_fpr(0.5), 2.0 / 3.0);
        assert_eq!(c.tpr_at_fpr(1.0), 1.0);
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion_at(&[4, 4, 4], &[true; 3], 4).unwrap(), Confusion { tp: 3, ..Default::default() });
        let c = confusion_at(&[0, 1, 2, 3], &[true, false, true, false], 0).unwrap();
        assert_eq!(c.fn_, 0);
        assert_eq!(c.tn, 0);
        assert!(confusion_at(&[1], &[true], 5).is_err());
    }

    #[test]
    fn csv_has_auc_line() {
        let c = roc_curve(&[1.0, 0.0], &[true, false]).unwrap();
        let mut buf = Vec::new();
        write_roc_csv(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# auc=1\nthreshold,fpr,tpr\ninf,0,0\n"));
    }

    proptest! {
        #[test]
        fn curve_is_monotone(pairs in proptest::collection::vec((0u8..10, any::<bool>()), 2..40)) {
            let scores: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let truths: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(truths.iter().any(|&t| t) && truths.iter().any(|&t| !t));
            let c = roc_curve(&scores, &truths).unwrap();
            prop_assert_eq!((c.points[0].fpr, c.points[0].tpr), (0.0, 0.0));
            let last = c.points.last().unwrap();
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
            for w in c.points.windows(2) {
                prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
            }
            prop_assert!((0.0..=1.0).contains(&c.auc));
        }

        #[test]
        fn confusion_partitions(pairs in proptest::collection::vec((0u8..5, any::<bool>()), 0..50), tau in 0u8..5) {
            let p: Vec<u8> = pairs.iter().map(|x| x.0).collect();
            let t: Vec<bool> = pairs.iter().map(|x| x.1).collect();
            prop_assert_eq!(confusion_at(&p, &t, tau).unwrap().total(), pairs.len());
        }
    }
}
