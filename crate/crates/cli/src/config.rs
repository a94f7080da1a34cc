//! Optional TOML configuration. Command-line flags take precedence over
//! values read here.
//!
//! ```toml
//! seed = 7
//! data_dir = "/data/kdd"
//!
//! [sample]
//! source = "kddcup.data_10_percent"
//! counts = [9841, 39092, 437, 13, 213]
//! test_total = 15437
//! out = "run"
//!
//! [bench]
//! train = "run/train.txt"
//! test = "run/test.txt"
//! specs = ["J48", "OneR"]
//!
//! [select]
//! table = "run/table.csv"
//! aa_min = 0.85
//! tt_budget = 20.0
//!
//! [detect]
//! assignment = "run/assignment.json"
//! train = "run/train.txt"
//! input = "run/test.txt"
//! priority = ["U2R", "R2L", "Probe", "DoS"]
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub data_dir: Option<PathBuf>,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub select: SelectSection,
    #[serde(default)]
    pub detect: DetectSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub source: Option<PathBuf>,
    pub counts: Option<[usize; 5]>,
    pub test_total: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSection {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub specs: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub parallel: Option<bool>,
    pub redact_timings: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectSection {
    pub table: Option<PathBuf>,
    pub aa_min: Option<f64>,
    pub tt_budget: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectSection {
    pub assignment: Option<PathBuf>,
    pub train: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub stream: Option<bool>,
    pub priority: Option<Vec<String>>,
    pub redact_timings: Option<bool>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let doc = include_str!("config.rs");
        let example: String = doc
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start_matches(' '))
            .collect::<Vec<_>>()
            .join("\n");
        let c: Config = toml::from_str(&example).unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.sample.counts, Some([9841, 39092, 437, 13, 213]));
        assert_eq!(c.select.tt_budget, Some(20.0));
        assert_eq!(c.detect.priority.unwrap().len(), 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[bench]\nspeed = 1\n").is_err());
    }
}
