use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::record::{Connection, Symbol, Value};
use super::schema::{FeatureDescriptor, FeatureKind, FeatureSchema};

/// Min-max ranges fitted on a training set. `ranges[i]` is `None` for
/// symbolic features and for continuous features never observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<Option<(f64, f64)>>,
}

impl NormalizationParams {
    pub fn fit(dataset: &Dataset) -> Self {
        let ranges = column_ranges(dataset);
        NormalizationParams { ranges }
    }

    pub fn is_identity(&self) -> bool {
        self.ranges.iter().all(Option::is_none)
    }

    pub fn scale(&self, feature: usize, v: f64) -> f64 {
        match self.ranges.get(feature).copied().flatten() {
            Some((lo, hi)) if hi > lo => (v - lo) / (hi - lo),
            Some(_) => 0.0,
            None => v,
        }
    }

    pub fn apply(&self, record: &Connection) -> Connection {
        let features = record
            .features()
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Continuous(x) => Value::Continuous(self.scale(i, *x)),
                other => *other,
            })
            .collect();
        record.with_features(features)
    }

    pub fn transform(&self, dataset: &Dataset) -> Dataset {
        let records = dataset.records().iter().map(|r| self.apply(r)).collect();
        dataset.with_records(dataset.schema().clone(), records)
    }
}

fn column_ranges(dataset: &Dataset) -> Vec<Option<(f64, f64)>> {
    let schema = dataset.schema();
    let mut ranges: Vec<Option<(f64, f64)>> = vec![None; schema.len()];
    for r in dataset.records() {
        for i in schema.continuous_indices() {
            if let Value::Continuous(x) = r.feature(i) {
                let e = ranges[i].get_or_insert((*x, *x));
                e.0 = e.0.min(*x);
                e.1 = e.1.max(*x);
            }
        }
    }
    ranges
}

/// Min-max scales every continuous feature to [0, 1] using the dataset's own
/// ranges; constant features map to 0.
pub fn normalize_continuous(dataset: &Dataset) -> (Dataset, NormalizationParams) {
    let params = NormalizationParams::fit(dataset);
    (params.transform(dataset), params)
}

/// Equal-width cut points per continuous feature. A value falls in bin
/// `k` where `k` is the number of cut points `<= value`, so values outside
/// the fitted range clamp to the edge bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationParams {
    pub bins: usize,
    pub cut_points: Vec<Option<Vec<f64>>>,
}

impl DiscretizationParams {
    pub fn fit(dataset: &Dataset, bins: usize) -> Self {
        let bins = bins.max(1);
        let cut_points = column_ranges(dataset)
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                if dataset.schema().descriptor(i).kind != FeatureKind::Continuous {
                    return None;
                }
                let (lo, hi) = r.unwrap_or((0.0, 0.0));
                let width = (hi - lo) / bins as f64;
                let cuts = if width > 0.0 {
                    (1..bins).map(|k| lo + width * k as f64).collect()
                } else {
                    Vec::new()
                };
                Some(cuts)
            })
            .collect();
        DiscretizationParams { bins, cut_points }
    }

    pub fn bin_of(&self, feature: usize, v: f64) -> usize {
        match &self.cut_points[feature] {
            Some(cuts) => cuts.partition_point(|&c| c <= v),
            None => 0,
        }
    }

    pub fn bin_symbol(bin: usize) -> Symbol {
        Symbol::intern(&format!("bin{bin}"))
    }

    pub fn schema(&self, input: &FeatureSchema) -> FeatureSchema {
        let labels: Vec<String> = (0..self.bins).map(|b| format!("bin{b}")).collect();
        let mut schema = input.clone();
        for (i, cuts) in self.cut_points.iter().enumerate() {
            if cuts.is_some() {
                let d = input.descriptor(i);
                schema = schema.with_descriptor(FeatureDescriptor {
                    name: d.name.clone(),
                    kind: FeatureKind::Symbolic,
                    index: i,
                    domain: Some(labels.clone()),
                });
            }
        }
        schema
    }

    pub fn apply(&self, record: &Connection) -> Connection {
        let features = record
            .features()
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Continuous(x) if self.cut_points[i].is_some() => {
                    Value::Symbolic(Self::bin_symbol(self.bin_of(i, *x)))
                }
                other => *other,
            })
            .collect();
        record.with_features(features)
    }

    pub fn transform(&self, dataset: &Dataset) -> Dataset {
        let records = dataset.records().iter().map(|r| self.apply(r)).collect();
        dataset.with_records(self.schema(dataset.schema()), records)
    }
}

/// Replaces continuous features with equal-width bin labels (`bin0`, `bin1`,
/// ...). Bin boundaries are returned for reuse on test data.
pub fn discretize_continuous(dataset: &Dataset, bins: usize) -> (Dataset, DiscretizationParams) {
    let params = DiscretizationParams::fit(dataset, bins);
    (params.transform(dataset), params)
}
