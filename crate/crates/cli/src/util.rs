use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use catnet::kdd::{AttackCategory, CategoryCounts, CategoryMap, Dataset, FeatureSchema};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let mut file = fs::File::open(path).map_err(|e| missing(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Final path component; reports carry names, not absolute paths, so that
/// reruns in different directories stay byte-identical.
pub fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn missing(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| missing(path, e))
}

pub fn load_dataset(path: &Path) -> CliResult<Dataset> {
    if !path.exists() {
        return Err(CliError::Data(format!("{}: no such file", path.display())));
    }
    Dataset::load(path, FeatureSchema::kdd99(), CategoryMap::kdd99())
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn out_dir(path: Option<PathBuf>, default: &str) -> CliResult<PathBuf> {
    let dir = path.unwrap_or_else(|| PathBuf::from(default));
    fs::create_dir_all(&dir).map_err(|e| missing(&dir, e))?;
    Ok(dir)
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| missing(path, e))
}

pub fn counts_map(counts: CategoryCounts) -> BTreeMap<AttackCategory, usize> {
    counts.iter().collect()
}

pub fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag} (flag or config file)")))
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}
