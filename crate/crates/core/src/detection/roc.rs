use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One operating point. A sample is accepted as genuine when its score is at
/// or above `threshold`; `tpr` is the accepted share of genuine samples and
/// `fpr` the accepted share of fakes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Ordered by increasing threshold; the last point has threshold `+∞`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Sweeps the threshold over every distinct score and integrates the curve
/// with the trapezoidal rule. Higher scores mean "more genuine".
pub fn roc_curve(genuine_scores: &[f64], fake_scores: &[f64]) -> Result<RocCurve> {
    if genuine_scores.is_empty() || fake_scores.is_empty() {
        return Err(Error::invalid("ROC needs at least one genuine and one fake score"));
    }
    if genuine_scores.iter().chain(fake_scores).any(|s| s.is_nan()) {
        return Err(Error::invalid("ROC scores must not be NaN"));
    }
    let mut g = genuine_scores.to_vec();
    let mut f = fake_scores.to_vec();
    g.sort_by(f64::total_cmp);
    f.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = g.iter().chain(&f).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);

    let rate_at_or_above = |sorted: &[f64], t: f64| {
        let below = sorted.partition_point(|&s| s < t);
        (sorted.len() - below) as f64 / sorted.len() as f64
    };
    let points: Vec<RocPoint> = thresholds
        .iter()
        .map(|&t| RocPoint {
            threshold: t,
            tpr: rate_at_or_above(&g, t),
            fpr: rate_at_or_above(&f, t),
        })
        .collect();

    // points run from (1, 1) down to (0, 0); integrate in that order
    let auc = points
        .windows(2)
        .map(|w| (w[0].fpr - w[1].fpr) * 0.5 * (w[0].tpr + w[1].tpr))
        .sum::<f64>()
        .clamp(0.0, 1.0);
    Ok(RocCurve { points, auc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Mann-Whitney pair count: P(genuine > fake) + ½ P(tie).
    fn pair_auc(g: &[f64], f: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &x in g {
            for &y in f {
                acc += if x > y {
                    1.0
                } else if x == y {
                    0.5
                } else {
                    0.0
                };
            }
        }
        acc / (g.len() * f.len()) as f64
    }

    #[test]
    fn separated_scores_give_unit_auc() {
        let roc = roc_curve(&[0.9, 0.95, 0.99], &[0.1, 0.3, -0.2]).unwrap();
        assert_eq!(roc.auc, 1.0);
        let inverted = roc_curve(&[0.1, 0.3], &[0.9, 0.95]).unwrap();
        assert_eq!(inverted.auc, 0.0);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(roc_curve(&[], &[0.1]).is_err());
        assert!(roc_curve(&[0.1], &[]).is_err());
    }

    #[test]
    fn identical_distributions_give_half() {
        use rand::Rng;
        let mut rng = crate::seed::rng_for(1, &[]);
        let g: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let f: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let auc = roc_curve(&g, &f).unwrap().auc;
        assert!((auc - 0.5).abs() < 0.05, "auc {auc}");
    }

    proptest! {
        #[test]
        fn auc_matches_pair_count_and_rates_are_monotone(
            g in prop::collection::vec(-3i32..3, 1..30),
            f in prop::collection::vec(-3i32..3, 1..30),
        ) {
            let g: Vec<f64> = g.into_iter().map(f64::from).collect();
            let f: Vec<f64> = f.into_iter().map(f64::from).collect();
            let roc = roc_curve(&g, &f).unwrap();
            prop_assert!((roc.auc - pair_auc(&g, &f)).abs() < 1e-12);
            for w in roc.points.windows(2) {
                prop_assert!(w[1].threshold > w[0].threshold);
                prop_assert!(w[1].tpr <= w[0].tpr);
                prop_assert!(w[1].fpr <= w[0].fpr);
            }
        }
    }
}
