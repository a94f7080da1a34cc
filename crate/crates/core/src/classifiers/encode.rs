use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdd::{
    AttackCategory, Connection, Dataset, DiscretizationParams, FeatureKind, NormalizationParams,
    Symbol, Value,
};

/// Encoded value of a nominal attribute never seen during training.
pub const UNSEEN: f64 = -1.0;

/// Input transformation applied before a learner sees the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recipe {
    Raw,
    Discretized { bins: usize },
    /// Min-max scaled continuous features; symbolic features stay nominal.
    Normalized,
    /// Min-max scaled continuous features; symbolic features one-hot encoded.
    NormalizedOneHot,
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Recipe::Raw => f.write_str("raw"),
            Recipe::Discretized { bins } => write!(f, "discretized({bins} bins)"),
            Recipe::Normalized => f.write_str("normalized"),
            Recipe::NormalizedOneHot => f.write_str("normalized+one-hot"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NominalDomain {
    values: Vec<Symbol>,
    #[serde(skip)]
    lookup: OnceLock<HashMap<Symbol, u32>>,
}

impl NominalDomain {
    fn new(values: BTreeSet<Symbol>) -> Self {
        NominalDomain {
            values: values.into_iter().collect(),
            lookup: OnceLock::new(),
        }
    }

    pub fn values(&self) -> &[Symbol] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, s: Symbol) -> Option<usize> {
        self.lookup
            .get_or_init(|| {
                self.values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (*v, i as u32))
                    .collect()
            })
            .get(&s)
            .map(|&i| i as usize)
    }

    pub fn label(&self, index: usize) -> &'static str {
        self.values[index].as_str()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum AttrKind {
    Numeric,
    Nominal(NominalDomain),
}

/// One column of the encoded matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    /// Index of the raw feature this column derives from.
    pub source: usize,
    pub kind: AttrKind,
}

impl Attribute {
    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttrKind::Numeric)
    }

    pub fn nominal(&self) -> Option<&NominalDomain> {
        match &self.kind {
            AttrKind::Nominal(d) => Some(d),
            AttrKind::Numeric => None,
        }
    }

    /// Number of nominal values, 0 for numeric columns.
    pub fn arity(&self) -> usize {
        self.nominal().map_or(0, NominalDomain::len)
    }

    /// Renders an encoded value for model dumps.
    pub fn show(&self, v: f64) -> String {
        match &self.kind {
            AttrKind::Numeric => format!("{v}"),
            AttrKind::Nominal(d) if v >= 0.0 => d.label(v as usize).to_string(),
            AttrKind::Nominal(_) => "?".to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
enum Column {
    Numeric { feature: usize },
    Nominal { feature: usize },
    OneHot { feature: usize, value: Symbol },
}

/// Fitted transformation from raw connection records to a dense f64 row.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Preprocessing {
    recipe: Recipe,
    input_kinds: Vec<FeatureKind>,
    normalization: Option<NormalizationParams>,
    discretization: Option<DiscretizationParams>,
    attributes: Vec<Attribute>,
    columns: Vec<Column>,
}

impl Preprocessing {
    pub fn fit(recipe: Recipe, data: &Dataset) -> Self {
        let schema = data.schema();
        let input_kinds = schema.kinds();
        let normalization = match recipe {
            Recipe::Normalized | Recipe::NormalizedOneHot => Some(NormalizationParams::fit(data)),
            _ => None,
        };
        let (discretization, view) = match recipe {
            Recipe::Discretized { bins } => {
                let p = DiscretizationParams::fit(data, bins);
                let view = p.transform(data);
                (Some(p), view)
            }
            _ => (None, data.clone()),
        };
        let mut attributes = Vec::new();
        let mut columns = Vec::new();
        for (i, desc) in view.schema().descriptors().iter().enumerate() {
            match desc.kind {
                FeatureKind::Continuous => {
                    attributes.push(Attribute {
                        name: desc.name.clone(),
                        source: i,
                        kind: AttrKind::Numeric,
                    });
                    columns.push(Column::Numeric { feature: i });
                }
                FeatureKind::Symbolic => {
                    let mut values: BTreeSet<Symbol> = desc
                        .domain
                        .iter()
                        .flatten()
                        .map(|s| Symbol::intern(s))
                        .collect();
                    values.extend(view.records().iter().filter_map(|r| r.feature(i).as_symbol()));
                    if recipe == Recipe::NormalizedOneHot {
                        for v in values {
                            attributes.push(Attribute {
                                name: format!("{}={}", desc.name, v),
                                source: i,
                                kind: AttrKind::Numeric,
                            });
                            columns.push(Column::OneHot { feature: i, value: v });
                        }
                    } else {
                        attributes.push(Attribute {
                            name: desc.name.clone(),
                            source: i,
                            kind: AttrKind::Nominal(NominalDomain::new(values)),
                        });
                        columns.push(Column::Nominal { feature: i });
                    }
                }
            }
        }
        Preprocessing {
            recipe,
            input_kinds,
            normalization,
            discretization,
            attributes,
            columns,
        }
    }

    pub fn recipe(&self) -> Recipe {
        self.recipe
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn input_kinds(&self) -> &[FeatureKind] {
        &self.input_kinds
    }

    pub fn check(&self, record: &Connection) -> Result<()> {
        let f = record.features();
        if f.len() != self.input_kinds.len() {
            return Err(Error::SchemaMismatch(format!(
                "record has {} features, model expects {}",
                f.len(),
                self.input_kinds.len()
            )));
        }
        for (i, (v, k)) in f.iter().zip(&self.input_kinds).enumerate() {
            if v.kind() != *k {
                return Err(Error::SchemaMismatch(format!(
                    "feature {i} is {:?}, model expects {k:?}",
                    v.kind()
                )));
            }
        }
        Ok(())
    }

    /// Appends the encoded row for `record` to `out`.
    pub fn encode_into(&self, record: &Connection, out: &mut Vec<f64>) -> Result<()> {
        self.check(record)?;
        for (col, attr) in self.columns.iter().zip(&self.attributes) {
            let v = match *col {
                Column::Numeric { feature } => {
                    let x = record.feature(feature).as_f64().unwrap_or(0.0);
                    match &self.normalization {
                        Some(n) => n.scale(feature, x),
                        None => x,
                    }
                }
                Column::Nominal { feature } => {
                    let s = self.symbol(record, feature);
                    match attr.nominal().and_then(|d| d.index_of(s)) {
                        Some(i) => i as f64,
                        None => UNSEEN,
                    }
                }
                Column::OneHot { feature, value } => {
                    f64::from(u8::from(self.symbol(record, feature) == value))
                }
            };
            out.push(v);
        }
        Ok(())
    }

    pub fn encode(&self, record: &Connection) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.attributes.len());
        self.encode_into(record, &mut out)?;
        Ok(out)
    }

    fn symbol(&self, record: &Connection, feature: usize) -> Symbol {
        match record.feature(feature) {
            Value::Symbolic(s) => *s,
            Value::Continuous(x) => match &self.discretization {
                Some(d) => DiscretizationParams::bin_symbol(d.bin_of(feature, *x)),
                None => Symbol::intern(&x.to_string()),
            },
        }
    }

    /// Encodes a labeled dataset. Class indices refer to `classes`.
    pub fn encode_dataset(&self, data: &Dataset, classes: &[AttackCategory]) -> Result<Instances> {
        let mut x = Vec::with_capacity(data.len() * self.attributes.len());
        let mut y = Vec::with_capacity(data.len());
        for (i, r) in data.records().iter().enumerate() {
            self.encode_into(r, &mut x)?;
            let c = data.category(i).ok_or(Error::MissingLabel(i))?;
            let ci = classes
                .iter()
                .position(|k| *k == c)
                .ok_or_else(|| Error::SchemaMismatch(format!("class {c} not in class list")))?;
            y.push(ci);
        }
        Ok(Instances {
            attributes: self.attributes.clone(),
            x,
            y,
            n_classes: classes.len(),
        })
    }
}

/// Dense row-major design matrix with class indices.
#[derive(Clone, Debug)]
pub struct Instances {
    pub attributes: Vec<Attribute>,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl Instances {
    pub fn new(attributes: Vec<Attribute>, x: Vec<f64>, y: Vec<usize>, n_classes: usize) -> Self {
        assert_eq!(x.len(), y.len() * attributes.len());
        Instances {
            attributes,
            x,
            y,
            n_classes,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.attributes.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.x[i * d..(i + 1) * d]
    }

    pub fn value(&self, i: usize, a: usize) -> f64 {
        self.x[i * self.dim() + a]
    }

    pub fn class_counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.n_classes];
        for &i in idx {
            c[self.y[i]] += 1.0;
        }
        c
    }

    pub fn subset(&self, idx: &[usize]) -> Instances {
        let mut x = Vec::with_capacity(idx.len() * self.dim());
        for &i in idx {
            x.extend_from_slice(self.row(i));
        }
        Instances {
            attributes: self.attributes.clone(),
            x,
            y: idx.iter().map(|&i| self.y[i]).collect(),
            n_classes: self.n_classes,
        }
    }
}

/// Index of the first maximum; ties go to the lowest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdd::CategoryCounts;
    use crate::synth::SyntheticCorpus;

    #[test]
    fn recipes_shape_columns() {
        let ds = SyntheticCorpus::new(3).generate_counts(CategoryCounts::new(40, 40, 10, 2, 8));
        let raw = Preprocessing::fit(Recipe::Raw, &ds);
        assert_eq!(raw.attributes().len(), 41);
        assert_eq!(raw.attributes().iter().filter(|a| !a.is_numeric()).count(), 7);
        let disc = Preprocessing::fit(Recipe::Discretized { bins: 4 }, &ds);
        assert!(disc.attributes().iter().all(|a| !a.is_numeric()));
        let oh = Preprocessing::fit(Recipe::NormalizedOneHot, &ds);
        assert!(oh.attributes().len() > 41);
        assert!(oh.attributes().iter().all(Attribute::is_numeric));
        let row = oh.encode(ds.record(0)).unwrap();
        assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn unseen_symbol_encodes_as_sentinel() {
        let ds = SyntheticCorpus::new(3).generate_counts(CategoryCounts::new(20, 0, 0, 0, 0));
        let p = Preprocessing::fit(Recipe::Raw, &ds);
        let mut f = ds.record(0).features().to_vec();
        f[2] = Value::Symbolic(Symbol::intern("never_seen_service"));
        let r = Connection::new(f, None).unwrap();
        assert_eq!(p.encode(&r).unwrap()[2], UNSEEN);
    }

    #[test]
    fn kind_mismatch_is_schema_error() {
        let ds = SyntheticCorpus::new(3).generate_counts(CategoryCounts::new(20, 0, 0, 0, 0));
        let p = Preprocessing::fit(Recipe::Raw, &ds);
        let mut f = ds.record(0).features().to_vec();
        f[1] = Value::Continuous(1.0);
        let r = Connection::new(f, None).unwrap();
        assert!(matches!(p.encode(&r), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn argmax_prefers_lowest_on_ties() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        assert_eq!(argmax(&[1.0]), 0);
    }
}
