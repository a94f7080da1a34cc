use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::ops::{Index, IndexMut};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coarse connection class. The canonical order (`Normal, DoS, Probe, U2R,
/// R2L`) indexes confusion matrices and breaks ties between classes.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum AttackCategory {
    Normal,
    DoS,
    Probe,
    U2R,
    R2L,
}

impl AttackCategory {
    pub const ALL: [AttackCategory; 5] = [
        AttackCategory::Normal,
        AttackCategory::DoS,
        AttackCategory::Probe,
        AttackCategory::U2R,
        AttackCategory::R2L,
    ];

    /// The four categories that receive a dedicated classifier.
    pub const ATTACKS: [AttackCategory; 4] = [
        AttackCategory::DoS,
        AttackCategory::Probe,
        AttackCategory::U2R,
        AttackCategory::R2L,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AttackCategory::Normal => "Normal",
            AttackCategory::DoS => "DoS",
            AttackCategory::Probe => "Probe",
            AttackCategory::U2R => "U2R",
            AttackCategory::R2L => "R2L",
        }
    }

    pub fn is_attack(self) -> bool {
        self != AttackCategory::Normal
    }
}

impl fmt::Display for AttackCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for AttackCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "normal" => Ok(AttackCategory::Normal),
            "dos" => Ok(AttackCategory::DoS),
            "probe" => Ok(AttackCategory::Probe),
            "u2r" => Ok(AttackCategory::U2R),
            "r2l" => Ok(AttackCategory::R2L),
            other => Err(Error::Format(format!("unknown category {other:?}"))),
        }
    }
}

/// Per-category record counts in canonical order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts(pub [usize; 5]);

impl CategoryCounts {
    /// Category counts of the official `kddcup.data_10_percent` file.
    pub const KDD99_10_PERCENT: CategoryCounts = CategoryCounts([97_277, 391_458, 4_107, 52, 1_126]);

    pub fn new(normal: usize, dos: usize, probe: usize, u2r: usize, r2l: usize) -> Self {
        CategoryCounts([normal, dos, probe, u2r, r2l])
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttackCategory, usize)> + '_ {
        AttackCategory::ALL.iter().map(move |&c| (c, self.0[c.index()]))
    }
}

impl Index<AttackCategory> for CategoryCounts {
    type Output = usize;
    fn index(&self, c: AttackCategory) -> &usize {
        &self.0[c.index()]
    }
}

impl IndexMut<AttackCategory> for CategoryCounts {
    fn index_mut(&mut self, c: AttackCategory) -> &mut usize {
        &mut self.0[c.index()]
    }
}

impl fmt::Display for CategoryCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(c, n)| format!("{c} {n}")).collect();
        write!(f, "{} (total {})", parts.join(" / "), self.total())
    }
}

// Attack labels present in the KDD99 training data.
const KDD99_LABELS: &[(&str, AttackCategory)] = &[
    ("normal", AttackCategory::Normal),
    ("back", AttackCategory::DoS),
    ("land", AttackCategory::DoS),
    ("neptune", AttackCategory::DoS),
    ("pod", AttackCategory::DoS),
    ("smurf", AttackCategory::DoS),
    ("teardrop", AttackCategory::DoS),
    ("ipsweep", AttackCategory::Probe),
    ("nmap", AttackCategory::Probe),
    ("portsweep", AttackCategory::Probe),
    ("satan", AttackCategory::Probe),
    ("buffer_overflow", AttackCategory::U2R),
    ("loadmodule", AttackCategory::U2R),
    ("perl", AttackCategory::U2R),
    ("rootkit", AttackCategory::U2R),
    ("ftp_write", AttackCategory::R2L),
    ("guess_passwd", AttackCategory::R2L),
    ("imap", AttackCategory::R2L),
    ("multihop", AttackCategory::R2L),
    ("phf", AttackCategory::R2L),
    ("spy", AttackCategory::R2L),
    ("warezclient", AttackCategory::R2L),
    ("warezmaster", AttackCategory::R2L),
];

/// Raw label to category lookup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryMap {
    entries: BTreeMap<String, AttackCategory>,
}

impl CategoryMap {
    pub fn empty() -> Self {
        CategoryMap {
            entries: BTreeMap::new(),
        }
    }

    /// `normal` plus every attack label that occurs in the KDD99 training files.
    pub fn kdd99() -> Self {
        CategoryMap {
            entries: KDD99_LABELS
                .iter()
                .map(|(l, c)| (l.to_string(), *c))
                .collect(),
        }
    }

    /// Reads `label<TAB>category` lines. Blank lines and `#` comments are skipped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut map = CategoryMap::empty();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, category) = line.split_once('\t').ok_or_else(|| {
                Error::Format(format!(
                    "category map line {}: expected label<TAB>category",
                    n + 1
                ))
            })?;
            map.insert(label, category.parse()?);
        }
        Ok(map)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn insert(&mut self, label: &str, category: AttackCategory) {
        self.entries.insert(normalize_label(label), category);
    }

    /// Adds (or overrides) every entry of `other`.
    pub fn extend(&mut self, other: &CategoryMap) {
        for (l, c) in &other.entries {
            self.entries.insert(l.clone(), *c);
        }
    }

    pub fn category(&self, label: &str) -> Result<AttackCategory> {
        self.entries
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, AttackCategory)> {
        self.entries.iter().map(|(l, c)| (l.as_str(), *c))
    }

    pub fn to_tsv(&self) -> String {
        self.iter().map(|(l, c)| format!("{l}\t{c}\n")).collect()
    }
}

impl Default for CategoryMap {
    fn default() -> Self {
        Self::kdd99()
    }
}

/// Lowercases and strips the trailing period used by the KDD99 files.
pub fn normalize_label(raw: &str) -> String {
    let t = raw.trim();
    t.strip_suffix('.').unwrap_or(t).to_ascii_lowercase()
}

/// Looks up the category of an already normalized label.
pub fn map_category(label: &str, map: &CategoryMap) -> Result<AttackCategory> {
    map.category(label)
}
