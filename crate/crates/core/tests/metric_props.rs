mod support;

use catnet::kdd::AttackCategory;
use catnet::metrics::{confusion, ConfusionMatrix};
use proptest::prelude::*;

#[test]
fn rates_match_direct_counting_on_random_labelings() {
    assert_eq!(support::metric_oracle(1000, 99), Ok(1000));
}

fn matrix() -> impl Strategy<Value = [[u64; 5]; 5]> {
    prop::array::uniform5(prop::array::uniform5(prop_oneof![Just(0u64), 0u64..40]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matrix_rates_match_expanded_labels(counts in matrix()) {
        let cm = ConfusionMatrix::new(counts);
        let mut truths = Vec::new();
        let mut preds = Vec::new();
        for t in AttackCategory::ALL {
            for p in AttackCategory::ALL {
                for _ in 0..counts[t.index()][p.index()] {
                    truths.push(t);
                    preds.push(p);
                }
            }
        }
        if truths.is_empty() {
            prop_assert!(cm.average_accuracy().is_err());
            return Ok(());
        }
        prop_assert_eq!(confusion(&preds, &truths).unwrap(), cm);
        let n = truths.len();
        let correct = (0..n).filter(|&i| truths[i] == preds[i]).count();
        prop_assert_eq!(cm.average_accuracy().unwrap(), correct as f64 / n as f64);
        for c in AttackCategory::ALL {
            let pos = truths.iter().filter(|&&t| t == c).count();
            let hit = (0..n).filter(|&i| truths[i] == c && preds[i] == c).count();
            let false_alarm = (0..n).filter(|&i| truths[i] != c && preds[i] == c).count();
            prop_assert_eq!(cm.tp_rate(c).ok(), (pos > 0).then(|| hit as f64 / pos as f64));
            prop_assert_eq!(cm.fp_rate(c).ok(), (n > pos).then(|| false_alarm as f64 / (n - pos) as f64));
            let tp = cm.tp_rate(c).unwrap_or(0.0);
            let fp = cm.fp_rate(c).unwrap_or(0.0);
            prop_assert!((0.0..=1.0).contains(&tp) && (0.0..=1.0).contains(&fp));
        }
    }
}
