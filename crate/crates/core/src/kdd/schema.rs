use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of features in a KDD99 connection record.
pub const FEATURE_COUNT: usize = 41;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    Continuous,
    Symbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub name: String,
    pub kind: FeatureKind,
    pub index: usize,
    /// Known values of a symbolic feature. `None` means the domain is open.
    /// Always `None` for continuous features.
    pub domain: Option<Vec<String>>,
}

impl FeatureDescriptor {
    pub fn continuous(name: &str, index: usize) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            kind: FeatureKind::Continuous,
            index,
            domain: None,
        }
    }

    pub fn symbolic(name: &str, index: usize, domain: Option<&[&str]>) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            kind: FeatureKind::Symbolic,
            index,
            domain: domain.map(|d| d.iter().map(|s| s.to_string()).collect()),
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == FeatureKind::Continuous
    }
}

/// Ordered list of the 41 feature descriptors of a connection record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    descriptors: Vec<FeatureDescriptor>,
}

const BINARY: &[&str] = &["0", "1"];
const PROTOCOLS: &[&str] = &["icmp", "tcp", "udp"];
const FLAGS: &[&str] = &[
    "OTH", "REJ", "RSTO", "RSTOS0", "RSTR", "S0", "S1", "S2", "S3", "SF", "SH",
];

// (name, symbolic domain). Continuous features have no entry in the second slot.
const KDD99_FEATURES: [(&str, Option<Option<&[&str]>>); FEATURE_COUNT] = [
    ("duration", None),
    ("protocol_type", Some(Some(PROTOCOLS))),
    ("service", Some(None)),
    ("flag", Some(Some(FLAGS))),
    ("src_bytes", None),
    ("dst_bytes", None),
    ("land", Some(Some(BINARY))),
    ("wrong_fragment", None),
    ("urgent", None),
    ("hot", None),
    ("num_failed_logins", None),
    ("logged_in", Some(Some(BINARY))),
    ("num_compromised", None),
    ("root_shell", None),
    ("su_attempted", None),
    ("num_root", None),
    ("num_file_creations", None),
    ("num_shells", None),
    ("num_access_files", None),
    ("num_outbound_cmds", None),
    ("is_host_login", Some(Some(BINARY))),
    ("is_guest_login", Some(Some(BINARY))),
    ("count", None),
    ("srv_count", None),
    ("serror_rate", None),
    ("srv_serror_rate", None),
    ("rerror_rate", None),
    ("srv_rerror_rate", None),
    ("same_srv_rate", None),
    ("diff_srv_rate", None),
    ("srv_diff_host_rate", None),
    ("dst_host_count", None),
    ("dst_host_srv_count", None),
    ("dst_host_same_srv_rate", None),
    ("dst_host_diff_srv_rate", None),
    ("dst_host_same_src_port_rate", None),
    ("dst_host_srv_diff_host_rate", None),
    ("dst_host_serror_rate", None),
    ("dst_host_srv_serror_rate", None),
    ("dst_host_rerror_rate", None),
    ("dst_host_srv_rerror_rate", None),
];

impl FeatureSchema {
    /// Validates and wraps a descriptor list.
    pub fn new(descriptors: Vec<FeatureDescriptor>) -> Result<Self> {
        if descriptors.len() != FEATURE_COUNT {
            return Err(Error::SchemaMismatch(format!(
                "schema has {} descriptors, expected {FEATURE_COUNT}",
                descriptors.len()
            )));
        }
        for (position, d) in descriptors.iter().enumerate() {
            if d.index != position {
                return Err(Error::SchemaMismatch(format!(
                    "descriptor {:?} has index {} at position {position}",
                    d.name, d.index
                )));
            }
            if d.kind == FeatureKind::Continuous && d.domain.is_some() {
                return Err(Error::SchemaMismatch(format!(
                    "continuous feature {:?} carries a value domain",
                    d.name
                )));
            }
        }
        Ok(FeatureSchema { descriptors })
    }

    /// The standard KDD99 feature list with its continuous/symbolic kinds.
    pub fn kdd99() -> Self {
        let descriptors = KDD99_FEATURES
            .iter()
            .enumerate()
            .map(|(i, (name, sym))| match sym {
                None => FeatureDescriptor::continuous(name, i),
                Some(domain) => FeatureDescriptor::symbolic(name, i, *domain),
            })
            .collect();
        FeatureSchema { descriptors }
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn descriptor(&self, index: usize) -> &FeatureDescriptor {
        &self.descriptors[index]
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.descriptors.iter().map(|d| d.kind).collect()
    }

    pub fn continuous_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.descriptors
            .iter()
            .filter(|d| d.is_continuous())
            .map(|d| d.index)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.name == name)
    }

    pub(crate) fn with_descriptor(&self, descriptor: FeatureDescriptor) -> Self {
        let mut descriptors = self.descriptors.clone();
        let index = descriptor.index;
        descriptors[index] = descriptor;
        FeatureSchema { descriptors }
    }
}

impl Default for FeatureSchema {
    fn default() -> Self {
        Self::kdd99()
    }
}
