mod support;

use catnet::ensemble::{Classifier, EnsembleModel, DEFAULT_PRIORITY};
use catnet::kdd::{AttackCategory, Connection};
use catnet::selection::Assignment;
use catnet::Result;
use proptest::prelude::*;
use support::*;

#[test]
fn flag_rates_equal_standalone_member_rates() {
    let (train_set, test) = split(&mini(), 0.75, 21);
    let checked = flag_identity(&train_set, &test, 6, 4).unwrap();
    assert_eq!(checked.len(), 6);
}

#[derive(Debug)]
struct Says(AttackCategory);

impl Classifier for Says {
    fn classify(&self, _: &Connection) -> Result<AttackCategory> {
        Ok(self.0)
    }
}

fn category() -> impl Strategy<Value = AttackCategory> {
    (0usize..5).prop_map(|i| AttackCategory::ALL[i])
}

fn record() -> Connection {
    let line = "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal.";
    catnet::kdd::parse_record(line, 1, &catnet::kdd::FeatureSchema::kdd99()).unwrap()
}

proptest! {
    #[test]
    fn flags_follow_members_and_priority_resolves(
        preds in prop::array::uniform4(category()),
        order in Just(DEFAULT_PRIORITY.to_vec()).prop_shuffle(),
    ) {
        let assignment = Assignment::manual([
            (AttackCategory::DoS, spec("J48")),
            (AttackCategory::Probe, spec("JRip")),
            (AttackCategory::U2R, spec("OneR")),
            (AttackCategory::R2L, spec("NaiveBayes")),
        ]).unwrap();
        let ens = EnsembleModel::from_members(&assignment, preds.map(Says)).unwrap().with_priority(&order).unwrap();
        let r = ens.detect(&record()).unwrap();
        for (i, c) in AttackCategory::ATTACKS.into_iter().enumerate() {
            prop_assert_eq!(r.flags.contains(&c), preds[i] == c);
        }
        let expected = order.iter().copied().find(|c| r.flags.contains(c)).unwrap_or(AttackCategory::Normal);
        prop_assert_eq!(r.resolved, expected);
    }
}
