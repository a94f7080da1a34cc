use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::category::normalize_label;
use super::schema::{FeatureKind, FeatureSchema, FEATURE_COUNT};
use crate::error::{Error, Result};

#[derive(Default)]
struct Interner {
    ids: HashMap<&'static str, u32>,
    strings: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

/// An interned symbolic value. Symbols compare by their text, so orderings
/// never depend on interning order.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(u32);

impl Symbol {
    pub fn intern(text: &str) -> Symbol {
        if let Some(&id) = interner().read().unwrap().ids.get(text) {
            return Symbol(id);
        }
        let mut table = interner().write().unwrap();
        if let Some(&id) = table.ids.get(text) {
            return Symbol(id);
        }
        // Vocabularies are small (services, flags, labels), so leaking is bounded.
        let leaked: &'static str = Box::leak(text.to_owned().into_boxed_str());
        let id = table.strings.len() as u32;
        table.strings.push(leaked);
        table.ids.insert(leaked, id);
        Symbol(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().read().unwrap().strings[self.0 as usize]
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.0 == other.0 {
            Ordering::Equal
        } else {
            self.as_str().cmp(other.as_str())
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Symbol::intern(&s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Continuous(f64),
    Symbolic(Symbol),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Continuous(v) => Some(*v),
            Value::Symbolic(_) => None,
        }
    }

    pub fn as_symbol(&self) -> Option<Symbol> {
        match self {
            Value::Symbolic(s) => Some(*s),
            Value::Continuous(_) => None,
        }
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            Value::Continuous(_) => FeatureKind::Continuous,
            Value::Symbolic(_) => FeatureKind::Symbolic,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Continuous(v) => write!(f, "{v}"),
            Value::Symbolic(s) => f.write_str(s.as_str()),
        }
    }
}

/// One featurized connection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    features: Box<[Value]>,
    label: Option<Symbol>,
}

impl Connection {
    /// Builds a connection, checking the feature count and that continuous
    /// values are finite.
    pub fn new(features: Vec<Value>, label: Option<&str>) -> Result<Self> {
        if features.len() != FEATURE_COUNT {
            return Err(Error::SchemaMismatch(format!(
                "{} features, expected {FEATURE_COUNT}",
                features.len()
            )));
        }
        if let Some(i) = features
            .iter()
            .position(|v| matches!(v, Value::Continuous(x) if !x.is_finite()))
        {
            return Err(Error::SchemaMismatch(format!(
                "feature {i} is not a finite number"
            )));
        }
        Ok(Connection {
            features: features.into_boxed_slice(),
            label: label.map(|l| Symbol::intern(&normalize_label(l))),
        })
    }

    pub(crate) fn from_parts(features: Box<[Value]>, label: Option<Symbol>) -> Self {
        Connection { features, label }
    }

    pub fn features(&self) -> &[Value] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &Value {
        &self.features[index]
    }

    pub fn label(&self) -> Option<&'static str> {
        self.label.map(Symbol::as_str)
    }

    pub fn label_symbol(&self) -> Option<Symbol> {
        self.label
    }

    pub fn with_label(&self, label: Option<&str>) -> Connection {
        Connection {
            features: self.features.clone(),
            label: label.map(|l| Symbol::intern(&normalize_label(l))),
        }
    }

    pub fn with_features(&self, features: Box<[Value]>) -> Connection {
        Connection {
            features,
            label: self.label,
        }
    }

    /// Checks feature count and per-position kinds against `schema`.
    pub fn conforms_to(&self, schema: &FeatureSchema) -> Result<()> {
        if self.features.len() != schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} features, schema has {}",
                self.features.len(),
                schema.len()
            )));
        }
        for (v, d) in self.features.iter().zip(schema.descriptors()) {
            if v.kind() != d.kind {
                return Err(Error::SchemaMismatch(format!(
                    "feature {} ({}) should be {:?}",
                    d.index, d.name, d.kind
                )));
            }
        }
        Ok(())
    }

    /// Serializes in KDD99 text form, label with the trailing period.
    pub fn to_line(&self) -> String {
        let mut out = String::with_capacity(128);
        for (i, v) in self.features.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&v.to_string());
        }
        if let Some(l) = self.label {
            out.push(',');
            out.push_str(l.as_str());
            out.push('.');
        }
        out
    }
}

/// Parses one comma-separated KDD99 line. `line_no` is reported in errors
/// (1-based by convention of the callers).
pub fn parse_record(line: &str, line_no: usize, schema: &FeatureSchema) -> Result<Connection> {
    let line = line.trim_end_matches(['\r', '\n']);
    let fields: Vec<&str> = line.split(',').collect();
    let n = schema.len();
    if fields.len() != n && fields.len() != n + 1 {
        return Err(Error::FieldCount {
            line: line_no,
            found: fields.len(),
        });
    }
    let mut features = Vec::with_capacity(n);
    for (i, (text, d)) in fields.iter().zip(schema.descriptors()).enumerate() {
        let text = text.trim();
        let value = match d.kind {
            FeatureKind::Continuous => {
                let v: f64 = text.parse().map_err(|_| Error::FieldType {
                    line: line_no,
                    field: i,
                    text: text.to_string(),
                    reason: "not a number",
                })?;
                if !v.is_finite() {
                    return Err(Error::FieldType {
                        line: line_no,
                        field: i,
                        text: text.to_string(),
                        reason: "not finite",
                    });
                }
                Value::Continuous(v)
            }
            FeatureKind::Symbolic => Value::Symbolic(Symbol::intern(text)),
        };
        features.push(value);
    }
    let label = fields
        .get(n)
        .map(|raw| Symbol::intern(&normalize_label(raw)));
    Ok(Connection::from_parts(features.into_boxed_slice(), label))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const NORMAL_LINE: &str = "0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,normal.";

    #[test]
    fn parses_labeled_line() {
        let schema = FeatureSchema::kdd99();
        let c = parse_record(NORMAL_LINE, 1, &schema).unwrap();
        assert_eq!(c.label(), Some("normal"));
        assert_eq!(c.features().len(), 41);
        assert_eq!(c.feature(4), &Value::Continuous(181.0));
        assert_eq!(c.feature(2).as_symbol().unwrap().as_str(), "http");
        assert!(c.conforms_to(&schema).is_ok());
    }

    #[test]
    fn parses_unlabeled_line() {
        let schema = FeatureSchema::kdd99();
        let line = NORMAL_LINE.rsplit_once(',').unwrap().0;
        let c = parse_record(line, 1, &schema).unwrap();
        assert_eq!(c.label(), None);
    }

    #[test]
    fn field_count_error() {
        let schema = FeatureSchema::kdd99();
        let fields: Vec<&str> = NORMAL_LINE.split(',').take(40).collect();
        let err = parse_record(&fields.join(","), 7, &schema).unwrap_err();
        assert!(matches!(err, Error::FieldCount { line: 7, found: 40 }));
    }

    #[test]
    fn type_error_names_line_and_field() {
        let schema = FeatureSchema::kdd99();
        let bad = NORMAL_LINE.replacen("181", "abc", 1);
        let err = parse_record(&bad, 3, &schema).unwrap_err();
        assert!(matches!(err, Error::FieldType { line: 3, field: 4, .. }));
        let inf = NORMAL_LINE.replacen("181", "inf", 1);
        assert!(matches!(
            parse_record(&inf, 3, &schema),
            Err(Error::FieldType { field: 4, .. })
        ));
    }

    #[test]
    fn symbols_compare_by_text() {
        let b = Symbol::intern("zzz-second");
        let a = Symbol::intern("aaa-first");
        assert!(a < b);
        assert_eq!(Symbol::intern("aaa-first"), a);
    }

    #[test]
    fn connection_rejects_nonfinite() {
        let mut f = vec![Value::Continuous(0.0); 41];
        f[3] = Value::Continuous(f64::NAN);
        assert!(Connection::new(f, None).is_err());
        assert!(Connection::new(vec![Value::Continuous(0.0); 40], None).is_err());
    }
}
