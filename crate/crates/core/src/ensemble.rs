//! Parallel detector: one selected classifier per attack category.
//!
//! The member for category `c` raises flag `c` when its multi-class
//! prediction is `c`. A single resolved label is the highest-priority
//! flagged category, or Normal when nothing fires. Scoring each category on
//! its own flag makes the ensemble's per-category TP/FP equal the member's
//! standalone rates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{check_header, train, ClassifierSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::kdd::{parse_record, AttackCategory, Connection, Dataset, FeatureSchema};
use crate::metrics::{CategoryMetrics, ConfusionMatrix};
use crate::selection::Assignment;

/// Anything that maps a connection to one of the five categories.
pub trait Classifier: Send + Sync {
    fn classify(&self, record: &Connection) -> Result<AttackCategory>;
}

impl Classifier for TrainedModel {
    fn classify(&self, record: &Connection) -> Result<AttackCategory> {
        self.predict(record).map(|p| p.category)
    }
}

pub const DEFAULT_PRIORITY: [AttackCategory; 4] = [
    AttackCategory::U2R,
    AttackCategory::R2L,
    AttackCategory::Probe,
    AttackCategory::DoS,
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub flags: BTreeSet<AttackCategory>,
    pub resolved: AttackCategory,
    /// Raw prediction of the member serving each attack category.
    pub per_member_prediction: BTreeMap<AttackCategory, AttackCategory>,
}

impl DetectionResult {
    /// `<index>,<resolved>,<flags joined by '|'>`
    pub fn line(&self, index: usize) -> String {
        let flags: Vec<&str> = self.flags.iter().map(|c| c.name()).collect();
        format!("{index},{},{}", self.resolved, flags.join("|"))
    }
}

#[derive(Clone, Debug)]
pub struct EnsembleModel<M = TrainedModel> {
    /// Distinct trained models; several categories may share one.
    models: Vec<M>,
    model_ids: Vec<String>,
    members: BTreeMap<AttackCategory, usize>,
    priority: Vec<AttackCategory>,
    assignment: Assignment,
}

pub fn build_ensemble(assignment: &Assignment, train_set: &Dataset) -> Result<EnsembleModel> {
    build_ensemble_with(assignment, train_set, train)
}

/// Trains each distinct spec of the assignment once with `trainer`.
pub fn build_ensemble_with<M, F>(assignment: &Assignment, train_set: &Dataset, mut trainer: F) -> Result<EnsembleModel<M>>
where
    F: FnMut(&ClassifierSpec, &Dataset) -> Result<M>,
{
    assignment.validate()?;
    let mut models = Vec::new();
    let mut model_ids: Vec<String> = Vec::new();
    let mut members = BTreeMap::new();
    for (&c, m) in &assignment.members {
        let slot = match model_ids.iter().position(|id| *id == m.id) {
            Some(i) => i,
            None => {
                let model = trainer(&m.spec, train_set).map_err(|e| Error::Member {
                    category: c,
                    source: Box::new(e),
                })?;
                models.push(model);
                model_ids.push(m.id.clone());
                models.len() - 1
            }
        };
        members.insert(c, slot);
    }
    Ok(EnsembleModel {
        models,
        model_ids,
        members,
        priority: DEFAULT_PRIORITY.to_vec(),
        assignment: assignment.clone(),
    })
}

pub fn evaluate_ensemble<M: Classifier>(ensemble: &EnsembleModel<M>, test: &Dataset) -> Result<EnsembleReport> {
    ensemble.evaluate(test)
}

fn resolve(flags: &BTreeSet<AttackCategory>, priority: &[AttackCategory]) -> AttackCategory {
    priority
        .iter()
        .copied()
        .find(|c| flags.contains(c))
        .unwrap_or(AttackCategory::Normal)
}

impl<M: Classifier> EnsembleModel<M> {
    /// Builds an ensemble from already trained models, one per attack
    /// category in `ATTACKS` order.
    pub fn from_members(assignment: &Assignment, members: [M; 4]) -> Result<Self> {
        assignment.validate()?;
        let model_ids = AttackCategory::ATTACKS.iter().map(|&c| assignment.id(c).unwrap().to_string()).collect();
        Ok(EnsembleModel {
            models: members.into_iter().collect(),
            model_ids,
            members: AttackCategory::ATTACKS.iter().enumerate().map(|(i, &c)| (c, i)).collect(),
            priority: DEFAULT_PRIORITY.to_vec(),
            assignment: assignment.clone(),
        })
    }

    /// Replaces the conflict-resolution order; must be a permutation of the
    /// four attack categories.
    pub fn with_priority(mut self, priority: &[AttackCategory]) -> Result<Self> {
        let mut sorted = priority.to_vec();
        sorted.sort();
        if sorted != AttackCategory::ATTACKS {
            return Err(Error::Format(format!("priority {priority:?} is not a permutation of the attack categories")));
        }
        self.priority = priority.to_vec();
        Ok(self)
    }

    pub fn priority(&self) -> &[AttackCategory] {
        &self.priority
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Number of distinct trained models.
    pub fn distinct_models(&self) -> usize {
        self.models.len()
    }

    pub fn member(&self, c: AttackCategory) -> &M {
        &self.models[self.members[&c]]
    }

    pub fn member_id(&self, c: AttackCategory) -> &str {
        &self.model_ids[self.members[&c]]
    }

    fn merge(&self, predictions: &[AttackCategory]) -> DetectionResult {
        let per_member_prediction: BTreeMap<_, _> = self.members.iter().map(|(&c, &m)| (c, predictions[m])).collect();
        let flags: BTreeSet<_> = per_member_prediction.iter().filter(|(c, p)| c == p).map(|(&c, _)| c).collect();
        DetectionResult {
            resolved: resolve(&flags, &self.priority),
            flags,
            per_member_prediction,
        }
    }

    /// Runs the members concurrently.
    pub fn detect(&self, record: &Connection) -> Result<DetectionResult> {
        self.detect_with(record, true)
    }

    pub fn detect_with(&self, record: &Connection, parallel: bool) -> Result<DetectionResult> {
        let predictions: Vec<AttackCategory> = if parallel && self.models.len() > 1 {
            self.models.par_iter().map(|m| m.classify(record)).collect::<Result<_>>()?
        } else {
            self.models.iter().map(|m| m.classify(record)).collect::<Result<_>>()?
        };
        Ok(self.merge(&predictions))
    }

    /// Detection over a whole dataset, records in parallel when asked.
    pub fn detect_batch(&self, data: &Dataset, parallel: bool) -> Result<Vec<DetectionResult>> {
        if parallel {
            data.records().par_iter().map(|r| self.detect_with(r, false)).collect()
        } else {
            data.records().iter().map(|r| self.detect_with(r, false)).collect()
        }
    }

    /// Per-category TP/FP on flags, plus the resolved-label confusion matrix.
    pub fn evaluate(&self, test: &Dataset) -> Result<EnsembleReport> {
        let truths = test.labeled_categories()?;
        if truths.is_empty() {
            return Err(Error::Empty);
        }
        let results = self.detect_batch(test, true)?;
        let mut resolved = ConfusionMatrix::default();
        // one-vs-rest tallies per category: [flagged c | true c, true c, flagged c | not c, not c]
        let mut tally = [[0u64; 4]; 4];
        for (r, &t) in results.iter().zip(&truths) {
            resolved.add(t, r.resolved);
            for (k, &c) in AttackCategory::ATTACKS.iter().enumerate() {
                let flagged = r.flags.contains(&c) as u64;
                if t == c {
                    tally[k][0] += flagged;
                    tally[k][1] += 1;
                } else {
                    tally[k][2] += flagged;
                    tally[k][3] += 1;
                }
            }
        }
        let ratio = |a: u64, b: u64| if b == 0 { None } else { Some(a as f64 / b as f64) };
        let per_category = AttackCategory::ATTACKS
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let t = tally[k];
                (
                    c,
                    CategoryMetrics {
                        tp_rate: ratio(t[0], t[1]),
                        fp_rate: ratio(t[2], t[3]),
                    },
                )
            })
            .collect();
        Ok(EnsembleReport {
            members: self.members.keys().map(|&c| (c, self.member_id(c).to_string())).collect(),
            per_category,
            resolved_aa: resolved.average_accuracy()?,
            resolved_confusion: resolved,
        })
    }

    /// Member predictions for one record with each member's elapsed time.
    fn classify_timed(&self, record: &Connection, parallel: bool) -> Result<(Vec<AttackCategory>, Vec<f64>)> {
        let timed = |m: &M| {
            let t = Instant::now();
            let p = m.classify(record);
            (p, t.elapsed().as_secs_f64())
        };
        let outcomes: Vec<(Result<AttackCategory>, f64)> = if parallel && self.models.len() > 1 {
            self.models.par_iter().map(timed).collect()
        } else {
            self.models.iter().map(timed).collect()
        };
        let mut predictions = Vec::with_capacity(outcomes.len());
        let mut times = Vec::with_capacity(outcomes.len());
        for (p, dt) in outcomes {
            predictions.push(p?);
            times.push(dt);
        }
        Ok((predictions, times))
    }

    /// Reads KDD-format lines one at a time, writes one result line per
    /// well-formed record in arrival order and counts the rest as malformed.
    /// Members of each record run concurrently when `parallel_members` is set.
    pub fn stream_detect(
        &self,
        schema: &FeatureSchema,
        source: impl BufRead,
        mut sink: impl Write,
        parallel_members: bool,
    ) -> Result<StreamSummary> {
        let start = Instant::now();
        let mut tally = Tally::new(self.models.len());
        for (index, line) in source.lines().enumerate() {
            let line = line?;
            let outcome = parse_record(&line, index + 1, schema)
                .and_then(|r| self.classify_timed(&r, parallel_members));
            match outcome {
                Ok((predictions, times)) => {
                    let result = self.merge(&predictions);
                    writeln!(sink, "{}", result.line(index))?;
                    tally.record(&result, &times);
                }
                Err(_) => tally.malformed += 1,
            }
        }
        sink.flush()?;
        Ok(tally.finish(&self.model_ids, start.elapsed().as_secs_f64()))
    }

    /// Reads the whole source, then parses and classifies records in
    /// parallel. Output is identical to [`EnsembleModel::stream_detect`].
    pub fn batch_detect(&self, schema: &FeatureSchema, source: impl BufRead, mut sink: impl Write) -> Result<StreamSummary> {
        let start = Instant::now();
        let lines = source.lines().collect::<std::io::Result<Vec<String>>>()?;
        let outcomes: Vec<Option<(DetectionResult, Vec<f64>)>> = lines
            .par_iter()
            .enumerate()
            .map(|(index, line)| {
                let record = parse_record(line, index + 1, schema).ok()?;
                let (predictions, times) = self.classify_timed(&record, false).ok()?;
                Some((self.merge(&predictions), times))
            })
            .collect();
        let mut tally = Tally::new(self.models.len());
        for (index, outcome) in outcomes.iter().enumerate() {
            match outcome {
                Some((result, times)) => {
                    writeln!(sink, "{}", result.line(index))?;
                    tally.record(result, times);
                }
                None => tally.malformed += 1,
            }
        }
        sink.flush()?;
        Ok(tally.finish(&self.model_ids, start.elapsed().as_secs_f64()))
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "members ({} distinct models):", self.models.len());
        for (&c, &slot) in &self.members {
            let shared: Vec<String> = self
                .members
                .iter()
                .filter(|(&o, &s)| s == slot && o != c)
                .map(|(o, _)| o.to_string())
                .collect();
            let note = if shared.is_empty() {
                String::new()
            } else {
                format!(" (shared with {})", shared.join(", "))
            };
            let _ = writeln!(out, "  {c}: {}{note}", self.model_ids[slot]);
        }
        let p: Vec<&str> = self.priority.iter().map(|c| c.name()).collect();
        let _ = writeln!(out, "priority: {}", p.join(" > "));
        out
    }
}

/// Flag-based scores of an ensemble on a labeled test set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub members: BTreeMap<AttackCategory, String>,
    pub per_category: BTreeMap<AttackCategory, CategoryMetrics>,
    pub resolved_aa: f64,
    pub resolved_confusion: ConfusionMatrix,
}

impl EnsembleReport {
    pub fn render(&self) -> String {
        let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}", x * 100.0));
        let mut out = String::from("      ");
        for c in AttackCategory::ATTACKS {
            let _ = write!(out, "{:>8}", c.name());
        }
        out.push_str("\nmember");
        for c in AttackCategory::ATTACKS {
            let _ = write!(out, "{:>8}", self.members.get(&c).map_or("", String::as_str));
        }
        for (label, tp) in [("TP", true), ("FP", false)] {
            let _ = write!(out, "\n{label:6}");
            for c in AttackCategory::ATTACKS {
                let m = self.per_category.get(&c).copied().unwrap_or_default();
                let _ = write!(out, "{:>8}", pct(if tp { m.tp_rate } else { m.fp_rate }));
            }
        }
        let _ = writeln!(out, "\nresolved-label accuracy {}%", pct(Some(self.resolved_aa)));
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub records: usize,
    pub malformed: usize,
    pub elapsed_s: f64,
    pub records_per_s: f64,
    /// Mean per-record prediction time of each distinct member, by spec id.
    pub mean_latency_s: BTreeMap<String, f64>,
    pub flag_counts: BTreeMap<AttackCategory, usize>,
    pub resolved_counts: BTreeMap<AttackCategory, usize>,
}

impl StreamSummary {
    /// Zeroes the wall-clock fields so two runs can be compared byte for byte.
    pub fn redact_timings(&mut self) {
        self.elapsed_s = 0.0;
        self.records_per_s = 0.0;
        self.mean_latency_s.values_mut().for_each(|v| *v = 0.0);
    }
}

struct Tally {
    records: usize,
    malformed: usize,
    member_time: Vec<f64>,
    flag_counts: BTreeMap<AttackCategory, usize>,
    resolved_counts: BTreeMap<AttackCategory, usize>,
}

impl Tally {
    fn new(members: usize) -> Self {
        Tally {
            records: 0,
            malformed: 0,
            member_time: vec![0.0; members],
            flag_counts: BTreeMap::new(),
            resolved_counts: BTreeMap::new(),
        }
    }

    fn record(&mut self, result: &DetectionResult, times: &[f64]) {
        self.records += 1;
        for (acc, dt) in self.member_time.iter_mut().zip(times) {
            *acc += dt;
        }
        for &c in &result.flags {
            *self.flag_counts.entry(c).or_default() += 1;
        }
        *self.resolved_counts.entry(result.resolved).or_default() += 1;
    }

    fn finish(self, model_ids: &[String], elapsed_s: f64) -> StreamSummary {
        let n = self.records;
        StreamSummary {
            records: n,
            malformed: self.malformed,
            elapsed_s,
            records_per_s: if elapsed_s > 0.0 { n as f64 / elapsed_s } else { 0.0 },
            mean_latency_s: if n == 0 {
                BTreeMap::new()
            } else {
                model_ids.iter().zip(&self.member_time).map(|(id, t)| (id.clone(), t / n as f64)).collect()
            },
            flag_counts: self.flag_counts,
            resolved_counts: self.resolved_counts,
        }
    }
}

const MAGIC: &[u8; 8] = b"CATNETEN";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Stored {
    assignment_json: String,
    priority: Vec<AttackCategory>,
    members: Vec<(AttackCategory, usize)>,
    model_ids: Vec<String>,
    models: Vec<Vec<u8>>,
}

impl EnsembleModel<TrainedModel> {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let stored = Stored {
            assignment_json: serde_json::to_string(&self.assignment)?,
            priority: self.priority.clone(),
            members: self.members.iter().map(|(&c, &s)| (c, s)).collect(),
            model_ids: self.model_ids.clone(),
            models: self.models.iter().map(TrainedModel::to_bytes).collect::<Result<_>>()?,
        };
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend(bincode::serialize(&stored)?);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let payload = check_header(bytes, MAGIC, FORMAT_VERSION)?;
        let s: Stored = bincode::deserialize(payload)?;
        let assignment: Assignment = serde_json::from_str(&s.assignment_json)?;
        assignment.validate()?;
        let models: Vec<TrainedModel> = s.models.iter().map(|b| TrainedModel::from_bytes(b)).collect::<Result<_>>()?;
        if s.model_ids.len() != models.len() || s.members.iter().any(|&(_, i)| i >= models.len()) {
            return Err(Error::Format("ensemble member table is inconsistent".into()));
        }
        let ens = EnsembleModel {
            models,
            model_ids: s.model_ids,
            members: s.members.into_iter().collect(),
            priority: DEFAULT_PRIORITY.to_vec(),
            assignment,
        };
        ens.with_priority(&s.priority)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::Assignment;
    use AttackCategory::*;

    /// Always answers the same category.
    #[derive(Debug)]
    struct Fixed(AttackCategory);

    impl Classifier for Fixed {
        fn classify(&self, _: &Connection) -> Result<AttackCategory> {
            Ok(self.0)
        }
    }

    fn assignment() -> Assignment {
        let s = |n: &str| ClassifierSpec::default_for(n).unwrap();
        Assignment::manual([(DoS, s("J48")), (Probe, s("BayesNet")), (U2R, s("DecisionTable")), (R2L, s("OneR"))]).unwrap()
    }

    fn record() -> Connection {
        crate::synth::SyntheticCorpus::new(1).generate_labels(&[("normal", 1)]).record(0).clone()
    }

    #[test]
    fn quiet_members_resolve_to_normal() {
        let e = EnsembleModel::from_members(&assignment(), [Fixed(Normal), Fixed(Normal), Fixed(Normal), Fixed(DoS)]).unwrap();
        let r = e.detect(&record()).unwrap();
        assert!(r.flags.is_empty());
        assert_eq!(r.resolved, Normal);
    }

    #[test]
    fn priority_resolves_conflicts() {
        let e = EnsembleModel::from_members(&assignment(), [Fixed(DoS), Fixed(Normal), Fixed(U2R), Fixed(Normal)]).unwrap();
        let r = e.detect(&record()).unwrap();
        assert_eq!(r.flags, BTreeSet::from([DoS, U2R]));
        assert_eq!(r.resolved, U2R);
        assert_eq!(r.line(7), "7,U2R,DoS|U2R");
        let e = e.with_priority(&[DoS, Probe, U2R, R2L]).unwrap();
        assert_eq!(e.detect(&record()).unwrap().resolved, DoS);
        assert!(e.with_priority(&[DoS, DoS, U2R, R2L]).is_err());
    }

    #[test]
    fn merge_enumeration() {
        // every combination of member outputs over the five categories
        let e = EnsembleModel::from_members(&assignment(), [Fixed(Normal), Fixed(Normal), Fixed(Normal), Fixed(Normal)]).unwrap();
        for code in 0..5usize.pow(4) {
            let preds: Vec<AttackCategory> = (0..4).map(|k| AttackCategory::ALL[(code / 5usize.pow(k)) % 5]).collect();
            let r = e.merge(&preds);
            for (k, &c) in AttackCategory::ATTACKS.iter().enumerate() {
                assert_eq!(r.flags.contains(&c), preds[k] == c);
            }
            assert_eq!(r.resolved == Normal, r.flags.is_empty());
            let expected = DEFAULT_PRIORITY.iter().copied().find(|c| r.flags.contains(c)).unwrap_or(Normal);
            assert_eq!(r.resolved, expected);
        }
    }

    #[test]
    fn shared_specs_train_once() {
        let s = |n: &str| ClassifierSpec::default_for(n).unwrap();
        let a = Assignment::manual([(DoS, s("JRip")), (Probe, s("JRip")), (U2R, s("DecisionTable")), (R2L, s("OneR"))]).unwrap();
        let data = crate::synth::SyntheticCorpus::new(2).generate_labels(&[("normal", 5), ("smurf", 5)]);
        let mut calls = Vec::new();
        let e = build_ensemble_with(&a, &data, |spec, _| {
            calls.push(spec.id());
            Ok(Fixed(Normal))
        })
        .unwrap();
        assert_eq!(calls, ["JRip", "DecisionTable", "OneR"]);
        assert_eq!(e.distinct_models(), 3);
        assert!(e.summary().contains("DoS: JRip (shared with Probe)"));
    }

    #[test]
    fn member_errors_name_the_category() {
        let data = crate::synth::SyntheticCorpus::new(2).generate_labels(&[("normal", 5)]);
        let err = build_ensemble_with::<Fixed, _>(&assignment(), &data, |spec, _| {
            if spec.name() == "BayesNet" {
                Err(Error::EmptyTrainingSet)
            } else {
                Ok(Fixed(Normal))
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Member { category: Probe, .. }));
    }

    #[test]
    fn empty_stream() {
        let e = EnsembleModel::from_members(&assignment(), [Fixed(DoS), Fixed(Normal), Fixed(Normal), Fixed(Normal)]).unwrap();
        let mut out = Vec::new();
        let s = e.stream_detect(&FeatureSchema::kdd99(), &b""[..], &mut out, true).unwrap();
        assert!(out.is_empty());
        assert_eq!((s.records, s.malformed), (0, 0));
    }

    #[test]
    fn stream_skips_malformed_lines() {
        let e = EnsembleModel::from_members(&assignment(), [Fixed(DoS), Fixed(Normal), Fixed(Normal), Fixed(Normal)]).unwrap();
        let good = record().to_line();
        let input = format!("{good}\nnot,a,record\n{good}\n");
        let mut out = Vec::new();
        let s = e.stream_detect(&FeatureSchema::kdd99(), input.as_bytes(), &mut out, false).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0,DoS,DoS\n2,DoS,DoS\n");
        assert_eq!((s.records, s.malformed), (2, 1));
        assert_eq!(s.flag_counts[&DoS], 2);
        assert!(s.mean_latency_s.values().all(|v| v.is_finite() && *v >= 0.0));
        let mut batch = Vec::new();
        let b = e.batch_detect(&FeatureSchema::kdd99(), input.as_bytes(), &mut batch).unwrap();
        assert_eq!(String::from_utf8(batch).unwrap(), "0,DoS,DoS\n2,DoS,DoS\n");
        assert_eq!((b.records, b.malformed, b.flag_counts), (s.records, s.malformed, s.flag_counts));
    }
}
