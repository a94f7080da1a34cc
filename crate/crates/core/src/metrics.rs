//! Per-category TP/FP rates, average accuracy and training time, collected
//! into performance tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec, TrainedModel};
use crate::error::{Error, Result};
use crate::kdd::{AttackCategory, CategoryCounts, Dataset};

/// Counts indexed by `(true category, predicted category)` in canonical order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 5]; 5],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; 5]; 5]) -> Self {
        ConfusionMatrix { counts }
    }

    pub fn add(&mut self, truth: AttackCategory, predicted: AttackCategory) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn count(&self, truth: AttackCategory, predicted: AttackCategory) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn row_total(&self, truth: AttackCategory) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn column_total(&self, predicted: AttackCategory) -> u64 {
        self.counts.iter().map(|r| r[predicted.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..5).map(|i| self.counts[i][i]).sum()
    }

    /// One-vs-rest recall of `c`.
    pub fn tp_rate(&self, c: AttackCategory) -> Result<f64> {
        let n = self.row_total(c);
        if n == 0 {
            return Err(Error::UndefinedRate(c));
        }
        Ok(self.count(c, c) as f64 / n as f64)
    }

    /// Fraction of instances outside `c` that were predicted as `c`.
    pub fn fp_rate(&self, c: AttackCategory) -> Result<f64> {
        let others = self.total() - self.row_total(c);
        if others == 0 {
            return Err(Error::UndefinedRate(c));
        }
        let false_alarms = self.column_total(c) - self.count(c, c);
        Ok(false_alarms as f64 / others as f64)
    }

    pub fn average_accuracy(&self) -> Result<f64> {
        let n = self.total();
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(self.correct() as f64 / n as f64)
    }
}

pub fn confusion(predictions: &[AttackCategory], truths: &[AttackCategory]) -> Result<ConfusionMatrix> {
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            truths: truths.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::Empty);
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        cm.add(t, p);
    }
    Ok(cm)
}

pub fn tp_rate(cm: &ConfusionMatrix, c: AttackCategory) -> Result<f64> {
    cm.tp_rate(c)
}

pub fn fp_rate(cm: &ConfusionMatrix, c: AttackCategory) -> Result<f64> {
    cm.fp_rate(c)
}

pub fn average_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    cm.average_accuracy()
}

/// TP and FP rates of one category; `None` when the rate is undefined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryMetrics {
    pub tp_rate: Option<f64>,
    pub fp_rate: Option<f64>,
}

impl CategoryMetrics {
    pub fn new(tp_rate: f64, fp_rate: f64) -> Self {
        CategoryMetrics {
            tp_rate: Some(tp_rate),
            fp_rate: Some(fp_rate),
        }
    }

    pub fn from_confusion(cm: &ConfusionMatrix, c: AttackCategory) -> Self {
        CategoryMetrics {
            tp_rate: cm.tp_rate(c).ok(),
            fp_rate: cm.fp_rate(c).ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub spec: ClassifierSpec,
    /// Keyed by the four attack categories.
    pub per_category: BTreeMap<AttackCategory, CategoryMetrics>,
    pub aa: f64,
    pub tt_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
}

impl EvalRow {
    pub fn from_confusion(spec: ClassifierSpec, cm: ConfusionMatrix, tt_s: f64) -> Result<Self> {
        let per_category = AttackCategory::ATTACKS
            .iter()
            .map(|&c| (c, CategoryMetrics::from_confusion(&cm, c)))
            .collect();
        Ok(EvalRow {
            spec,
            per_category,
            aa: cm.average_accuracy()?,
            tt_s,
            confusion: Some(cm),
        })
    }

    pub fn id(&self) -> String {
        self.spec.id()
    }

    pub fn metrics(&self, c: AttackCategory) -> CategoryMetrics {
        self.per_category.get(&c).copied().unwrap_or_default()
    }
}

/// Scores an already trained model on a labeled test set.
pub fn evaluate_model(model: &TrainedModel, test: &Dataset) -> Result<EvalRow> {
    let truths = test.labeled_categories()?;
    let predictions: Vec<AttackCategory> = model.predict_batch(test)?.into_iter().map(|p| p.category).collect();
    let cm = confusion(&predictions, &truths)?;
    EvalRow::from_confusion(model.spec().clone(), cm, model.training_time_s())
}

pub fn evaluate(spec: &ClassifierSpec, train_set: &Dataset, test: &Dataset) -> Result<EvalRow> {
    if test.is_empty() {
        return Err(Error::Empty);
    }
    let model = train(spec, train_set)?;
    evaluate_model(&model, test)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TableRow {
    Ok(EvalRow),
    Failed { spec: ClassifierSpec, error: String },
}

impl TableRow {
    pub fn spec(&self) -> &ClassifierSpec {
        match self {
            TableRow::Ok(r) => &r.spec,
            TableRow::Failed { spec, .. } => spec,
        }
    }

    pub fn id(&self) -> String {
        self.spec().id()
    }
}

/// Where a table's numbers came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    /// Free-form provenance such as source paths and checksums.
    pub dataset: BTreeMap<String, String>,
    pub seeds: BTreeMap<String, u64>,
    /// Preprocessing recipe per spec id.
    pub recipes: BTreeMap<String, String>,
    pub train_counts: Option<CategoryCounts>,
    pub test_counts: Option<CategoryCounts>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerformanceTable {
    pub metadata: TableMetadata,
    pub rows: Vec<TableRow>,
}

const CSV_HEADER: [&str; 6] = ["classifier", "category", "tp", "fp", "aa", "tt_s"];
const NA: &str = "NA";

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == NA {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| Error::Format(format!("bad number {s:?}")))
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}", x * 100.0))
}

impl PerformanceTable {
    pub fn new(rows: Vec<TableRow>, metadata: TableMetadata) -> Result<Self> {
        let t = PerformanceTable { metadata, rows };
        t.validate()?;
        Ok(t)
    }

    /// Spec ids must be unique and every rate a fraction.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for row in &self.rows {
            let id = row.id();
            if !seen.insert(id.clone()) {
                return Err(Error::Format(format!("duplicate classifier {id}")));
            }
            if let TableRow::Ok(r) = row {
                let unit = |x: f64| (0.0..=1.0).contains(&x);
                let rates_ok = r
                    .per_category
                    .values()
                    .flat_map(|m| [m.tp_rate, m.fp_rate])
                    .flatten()
                    .all(unit);
                if !unit(r.aa) || !rates_ok || !(r.tt_s >= 0.0) {
                    return Err(Error::Format(format!("{id}: metric out of range")));
                }
            }
        }
        Ok(())
    }

    pub fn evaluated(&self) -> impl Iterator<Item = &EvalRow> {
        self.rows.iter().filter_map(|r| match r {
            TableRow::Ok(e) => Some(e),
            TableRow::Failed { .. } => None,
        })
    }

    pub fn failures(&self) -> impl Iterator<Item = (&ClassifierSpec, &str)> {
        self.rows.iter().filter_map(|r| match r {
            TableRow::Failed { spec, error } => Some((spec, error.as_str())),
            TableRow::Ok(_) => None,
        })
    }

    pub fn get(&self, id: &str) -> Option<&EvalRow> {
        self.evaluated().find(|r| r.id() == id)
    }

    /// Copy without metadata or confusion matrices, which the CSV form
    /// does not carry.
    pub fn summary(&self) -> PerformanceTable {
        let rows = self
            .rows
            .iter()
            .map(|r| match r {
                TableRow::Ok(e) => TableRow::Ok(EvalRow {
                    confusion: None,
                    ..e.clone()
                }),
                TableRow::Failed { spec, .. } => TableRow::Failed {
                    spec: spec.clone(),
                    error: "failed".into(),
                },
            })
            .collect();
        PerformanceTable {
            metadata: TableMetadata::default(),
            rows,
        }
    }

    /// Long form: four lines per evaluated classifier, one `error` line per
    /// failed one. Rates are fractions at full precision, `NA` when undefined.
    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            match row {
                TableRow::Ok(r) => {
                    let id = r.id();
                    for c in AttackCategory::ATTACKS {
                        let m = r.metrics(c);
                        w.write_record([
                            id.as_str(),
                            c.name(),
                            &fmt_opt(m.tp_rate),
                            &fmt_opt(m.fp_rate),
                            &r.aa.to_string(),
                            &r.tt_s.to_string(),
                        ])?;
                    }
                }
                TableRow::Failed { spec, .. } => {
                    w.write_record([spec.id().as_str(), "error", "", "", "", ""])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != CSV_HEADER {
            return Err(Error::Format(format!("unexpected CSV header {header:?}")));
        }
        let mut rows: Vec<TableRow> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for rec in r.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let id = field(0).to_string();
            let spec: ClassifierSpec = id.parse()?;
            if field(1) == "error" {
                index.insert(id, rows.len());
                rows.push(TableRow::Failed {
                    spec,
                    error: "failed".into(),
                });
                continue;
            }
            let c: AttackCategory = field(1).parse()?;
            let m = CategoryMetrics {
                tp_rate: parse_opt(field(2))?,
                fp_rate: parse_opt(field(3))?,
            };
            let aa = parse_opt(field(4))?.ok_or_else(|| Error::Format(format!("{id}: missing aa")))?;
            let tt_s = parse_opt(field(5))?.ok_or_else(|| Error::Format(format!("{id}: missing tt_s")))?;
            match index.get(&id) {
                Some(&i) => match &mut rows[i] {
                    TableRow::Ok(row) => {
                        row.per_category.insert(c, m);
                    }
                    TableRow::Failed { .. } => {
                        return Err(Error::Format(format!("{id}: both failed and evaluated")));
                    }
                },
                None => {
                    index.insert(id, rows.len());
                    rows.push(TableRow::Ok(EvalRow {
                        spec,
                        per_category: BTreeMap::from([(c, m)]),
                        aa,
                        tt_s,
                        confusion: None,
                    }));
                }
            }
        }
        Self::new(rows, TableMetadata::default())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: PerformanceTable = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    /// Loads either format, chosen by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::read_csv(text.as_bytes())
        }
    }

    /// Text table with rates and AA in percent (two decimals) and TT in seconds.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.id().len()).max().unwrap_or(0).max(10);
        let mut out = String::new();
        let _ = write!(out, "{:width$}  {:6}", "Classifier", "");
        for c in AttackCategory::ATTACKS {
            let _ = write!(out, "{:>8}", c.name());
        }
        out.push('\n');
        for row in &self.rows {
            let id = row.id();
            match row {
                TableRow::Ok(r) => {
                    let _ = write!(out, "{id:width$}  {:6}", "TP");
                    for c in AttackCategory::ATTACKS {
                        let _ = write!(out, "{:>8}", pct(r.metrics(c).tp_rate));
                    }
                    let _ = write!(out, "\n{:width$}  {:6}", "", "FP");
                    for c in AttackCategory::ATTACKS {
                        let _ = write!(out, "{:>8}", pct(r.metrics(c).fp_rate));
                    }
                    let _ = writeln!(out, "\n{:width$}  {:6}{:>8}", "", "AA", pct(Some(r.aa)));
                    let _ = writeln!(out, "{:width$}  {:6}{:>8.2}", "", "TT", r.tt_s);
                }
                TableRow::Failed { error, .. } => {
                    let _ = writeln!(out, "{id:width$}  failed: {error}");
                }
            }
        }
        out.push_str("TP, FP and AA in %, TT in seconds.\n");
        out
    }
}

/// Evaluates every spec on the same split. Specs run one after another by
/// default so that measured training times do not compete for cores.
pub fn benchmark(specs: &[ClassifierSpec], train_set: &Dataset, test: &Dataset) -> Result<PerformanceTable> {
    benchmark_with(specs, train_set, test, false)
}

pub fn benchmark_with(
    specs: &[ClassifierSpec],
    train_set: &Dataset,
    test: &Dataset,
    parallel: bool,
) -> Result<PerformanceTable> {
    if specs.is_empty() {
        return Err(Error::InvalidSpec("no classifiers to benchmark".into()));
    }
    let run = |spec: &ClassifierSpec| match evaluate(spec, train_set, test) {
        Ok(r) => TableRow::Ok(r),
        Err(e) => TableRow::Failed {
            spec: spec.clone(),
            error: e.to_string(),
        },
    };
    let rows: Vec<TableRow> = if parallel {
        specs.par_iter().map(run).collect()
    } else {
        specs.iter().map(run).collect()
    };
    let metadata = TableMetadata {
        recipes: specs.iter().map(|s| (s.id(), s.recipe().to_string())).collect(),
        train_counts: Some(train_set.category_counts()),
        test_counts: Some(test.category_counts()),
        ..TableMetadata::default()
    };
    PerformanceTable::new(rows, metadata)
}
