//! Reference results of the ten default learners on a 49,596-record KDD99
//! training sample, as fractions and seconds.

use std::collections::BTreeMap;

use crate::classifiers::ClassifierSpec;
use crate::kdd::AttackCategory;
use crate::metrics::{CategoryMetrics, EvalRow, PerformanceTable, TableMetadata, TableRow};

/// `(name, TP per attack category, FP per attack category, AA, TT seconds)`.
type RefRow = (&'static str, [f64; 4], [f64; 4], f64, f64);

const ROWS: [RefRow; 10] = [
    ("BayesNet", [0.946, 0.838, 0.303, 0.052], [0.002, 0.0013, 0.003, 0.006], 0.9062, 6.28),
    ("NaiveBayes", [0.792, 0.948, 0.122, 0.001], [0.017, 0.133, 0.009, 0.003], 0.7832, 5.57),
    ("J48", [0.968, 0.752, 0.122, 0.001], [0.01, 0.002, 0.001, 0.005], 0.9206, 15.85),
    ("NBTree", [0.974, 0.733, 0.012, 0.001], [0.012, 0.011, 0.001, 0.005], 0.9228, 295.88),
    ("DecisionTable", [0.97, 0.576, 0.328, 0.003], [0.107, 0.004, 0.003, 0.001], 0.9166, 66.24),
    ("JRip", [0.974, 0.838, 0.128, 0.001], [0.003, 0.001, 0.001, 0.004], 0.923, 207.47),
    ("OneR", [0.942, 0.129, 0.107, 0.107], [0.068, 0.001, 0.02, 0.001], 0.8931, 3.75),
    ("MLP", [0.969, 0.743, 0.201, 0.003], [0.014, 0.001, 0.001, 0.005], 0.9203, 350.15),
    ("SMO", [0.964, 0.743, 0.133, 0.001], [0.008, 0.003, 0.001, 0.004], 0.9165, 192.16),
    ("LBk", [0.967, 0.724, 0.223, 0.078], [0.008, 0.002, 0.001, 0.006], 0.9222, 10.63),
];

/// Detection rates of the KDD Cup 1999 winning entry on the official test
/// set, per attack category. Kept apart from [`reference_table`] because
/// the test data differ.
pub const KDD_CUP_WINNER: [(AttackCategory, f64, f64); 4] = [
    (AttackCategory::DoS, 0.971, 0.006),
    (AttackCategory::Probe, 0.833, 0.003),
    (AttackCategory::U2R, 0.132, 0.0003),
    (AttackCategory::R2L, 0.084, 0.0005),
];

pub fn reference_table() -> PerformanceTable {
    let rows = ROWS
        .iter()
        .map(|&(name, tp, fp, aa, tt)| {
            TableRow::Ok(EvalRow {
                spec: ClassifierSpec::default_for(name).expect("reference names are known"),
                per_category: AttackCategory::ATTACKS
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (c, CategoryMetrics::new(tp[i], fp[i])))
                    .collect(),
                aa,
                tt_s: tt,
                confusion: None,
            })
        })
        .collect();
    let metadata = TableMetadata {
        dataset: BTreeMap::from([
            ("source".to_string(), "reference results, KDD99 10% training sample".to_string()),
            ("train_records".to_string(), "49596".to_string()),
            ("test_records".to_string(), "15437".to_string()),
        ]),
        ..TableMetadata::default()
    };
    PerformanceTable::new(rows, metadata).expect("reference table is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_all_ten_defaults() {
        let t = reference_table();
        let ids: Vec<String> = t.rows.iter().map(|r| r.id()).collect();
        let mut names: Vec<&str> = ClassifierSpec::NAMES.to_vec();
        names.sort();
        let mut got: Vec<&str> = ids.iter().map(String::as_str).collect();
        got.sort();
        assert_eq!(got, names);
    }
}
