use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use super::category::{AttackCategory, CategoryCounts, CategoryMap};
use super::record::{parse_record, Connection};
use super::schema::FeatureSchema;
use crate::error::{Error, Result};

/// An immutable, cheaply clonable collection of connection records.
///
/// Categories are resolved through the category map once, at construction,
/// so an unknown label fails early instead of corrupting metrics later.
#[derive(Clone, Debug)]
pub struct Dataset {
    schema: Arc<FeatureSchema>,
    records: Arc<Vec<Connection>>,
    categories: Arc<Vec<Option<AttackCategory>>>,
    category_map: Arc<CategoryMap>,
}

impl Dataset {
    pub fn new(
        schema: FeatureSchema,
        records: Vec<Connection>,
        category_map: CategoryMap,
    ) -> Result<Self> {
        Self::from_shared(Arc::new(schema), records, Arc::new(category_map))
    }

    pub(crate) fn from_shared(
        schema: Arc<FeatureSchema>,
        records: Vec<Connection>,
        category_map: Arc<CategoryMap>,
    ) -> Result<Self> {
        let categories = records
            .iter()
            .map(|r| {
                r.conforms_to(&schema)?;
                r.label().map(|l| category_map.category(l)).transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset {
            schema,
            records: Arc::new(records),
            categories: Arc::new(categories),
            category_map,
        })
    }

    pub fn empty(schema: FeatureSchema, category_map: CategoryMap) -> Self {
        Dataset {
            schema: Arc::new(schema),
            records: Arc::new(Vec::new()),
            categories: Arc::new(Vec::new()),
            category_map: Arc::new(category_map),
        }
    }

    /// Parses KDD99 text. Lines are parsed in parallel; the first malformed
    /// line (lowest line number) is reported.
    pub fn from_reader(
        reader: impl BufRead,
        schema: FeatureSchema,
        category_map: CategoryMap,
    ) -> Result<Self> {
        let lines = reader
            .lines()
            .collect::<std::io::Result<Vec<String>>>()?;
        let records = lines
            .par_iter()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| parse_record(l, i + 1, &schema))
            .collect::<Result<Vec<_>>>()?;
        Self::new(schema, records, category_map)
    }

    pub fn load(
        path: impl AsRef<Path>,
        schema: FeatureSchema,
        category_map: CategoryMap,
    ) -> Result<Self> {
        let file = File::open(path)?;
        Self::from_reader(BufReader::new(file), schema, category_map)
    }

    pub fn write_to(&self, mut writer: impl Write) -> Result<()> {
        for r in self.records.iter() {
            writeln!(writer, "{}", r.to_line())?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn category_map(&self) -> &CategoryMap {
        &self.category_map
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Connection] {
        &self.records
    }

    pub fn record(&self, index: usize) -> &Connection {
        &self.records[index]
    }

    pub fn category(&self, index: usize) -> Option<AttackCategory> {
        self.categories[index]
    }

    pub fn categories(&self) -> &[Option<AttackCategory>] {
        &self.categories
    }

    /// Categories of every record, failing on the first unlabeled one.
    pub fn labeled_categories(&self) -> Result<Vec<AttackCategory>> {
        self.categories
            .iter()
            .enumerate()
            .map(|(i, c)| c.ok_or(Error::MissingLabel(i)))
            .collect()
    }

    /// Counts of labeled records per category; unlabeled records are not counted.
    pub fn category_counts(&self) -> CategoryCounts {
        let mut counts = CategoryCounts::default();
        for c in self.categories.iter().flatten() {
            counts[*c] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            records: Arc::new(indices.iter().map(|&i| self.records[i].clone()).collect()),
            categories: Arc::new(indices.iter().map(|&i| self.categories[i]).collect()),
            category_map: self.category_map.clone(),
        }
    }

    /// Same records and labels under a new schema (used by preprocessing).
    pub(crate) fn with_records(&self, schema: FeatureSchema, records: Vec<Connection>) -> Dataset {
        Dataset {
            schema: Arc::new(schema),
            records: Arc::new(records),
            categories: self.categories.clone(),
            category_map: self.category_map.clone(),
        }
    }
}

/// Streams a KDD99 file and tallies categories without keeping the records.
pub fn count_categories(
    reader: impl BufRead,
    schema: &FeatureSchema,
    category_map: &CategoryMap,
) -> Result<CategoryCounts> {
    let mut counts = CategoryCounts::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(&line, i + 1, schema)?;
        let label = record.label().ok_or(Error::MissingLabel(i))?;
        counts[category_map.category(label)?] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdd::record::Value;

    fn line(label: &str) -> String {
        format!("0,tcp,http,SF,181,5450,0,0,0,0,0,1,0,0,0,0,0,0,0,0,0,0,8,8,0.00,0.00,0.00,0.00,1.00,0.00,0.00,9,9,1.00,0.00,0.11,0.00,0.00,0.00,0.00,0.00,{label}.")
    }

    #[test]
    fn reads_and_counts() {
        let text = [line("normal"), line("smurf"), line("smurf"), String::new(), line("perl")].join("\n");
        let ds = Dataset::from_reader(text.as_bytes(), FeatureSchema::kdd99(), CategoryMap::kdd99()).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.category_counts(), CategoryCounts::new(1, 2, 0, 1, 0));
        let streamed = count_categories(text.as_bytes(), &FeatureSchema::kdd99(), &CategoryMap::kdd99()).unwrap();
        assert_eq!(streamed, ds.category_counts());
    }

    #[test]
    fn unknown_label_fails_load() {
        let text = line("mailbomb");
        let err = Dataset::from_reader(text.as_bytes(), FeatureSchema::kdd99(), CategoryMap::kdd99()).unwrap_err();
        assert!(matches!(err, Error::UnknownLabel(_)));
    }

    #[test]
    fn reports_first_bad_line() {
        let text = [line("normal"), "1,2,3".to_string(), "a,b".to_string()].join("\n");
        let err = Dataset::from_reader(text.as_bytes(), FeatureSchema::kdd99(), CategoryMap::kdd99()).unwrap_err();
        assert!(matches!(err, Error::FieldCount { line: 2, found: 3 }));
    }

    #[test]
    fn write_then_read_preserves_values() {
        let text = [line("normal"), line("back")].join("\n");
        let ds = Dataset::from_reader(text.as_bytes(), FeatureSchema::kdd99(), CategoryMap::kdd99()).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        let again = Dataset::from_reader(buf.as_slice(), FeatureSchema::kdd99(), CategoryMap::kdd99()).unwrap();
        assert_eq!(ds.records(), again.records());
        assert_eq!(again.record(0).feature(24), &Value::Continuous(0.0));
    }
}
