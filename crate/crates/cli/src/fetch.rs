use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use catnet::kdd::{count_categories, CategoryCounts, CategoryMap, FeatureSchema};
use clap::Args;
use flate2::read::GzDecoder;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::util;
use crate::Context;

pub const DEFAULT_URL: &str = "http://kdd.ics.uci.edu/databases/kddcup99/kddcup.data_10_percent.gz";
const FILE_NAME: &str = "kddcup.data_10_percent";

#[derive(Args, Debug)]
pub struct FetchArgs {
    /// Download location of the gzipped 10% training file.
    #[arg(long, default_value = DEFAULT_URL)]
    url: String,

    /// Destination directory [default: the data directory].
    #[arg(long)]
    dir: Option<PathBuf>,

    /// Expected SHA-256 of the decompressed file. Without it the first
    /// download records its hash next to the file and later runs compare
    /// against that record.
    #[arg(long)]
    sha256: Option<String>,

    /// Verify an existing file instead of downloading.
    #[arg(long)]
    check: Option<PathBuf>,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".sha256");
    PathBuf::from(name)
}

fn download(url: &str, dest: &Path) -> CliResult<String> {
    let response = ureq::get(url).call().map_err(|e| CliError::Data(format!("download {url}: {e}")))?;
    let body = response.into_reader();
    let mut reader: Box<dyn Read> = if url.ends_with(".gz") { Box::new(GzDecoder::new(body)) } else { body };
    let tmp = dest.with_extension("part");
    let mut out = BufWriter::new(File::create(&tmp)?);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf).map_err(|e| CliError::Data(format!("download {url}: {e}")))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        out.write_all(&buf[..n])?;
    }
    out.flush()?;
    drop(out);
    fs::rename(&tmp, dest)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Checks the hash against `expected` or the sidecar, then the category
/// counts against the published totals.
fn verify(path: &Path, hash: &str, expected: Option<&str>) -> CliResult<CategoryCounts> {
    let side = sidecar(path);
    match expected {
        Some(want) if !want.eq_ignore_ascii_case(hash) => {
            return Err(CliError::Data(format!("{}: sha256 {hash}, expected {want}", path.display())));
        }
        Some(_) => {}
        None if side.exists() => {
            let recorded = util::read_text(&side)?;
            let recorded = recorded.split_whitespace().next().unwrap_or("");
            if recorded != hash {
                return Err(CliError::Data(format!(
                    "{}: sha256 {hash} differs from recorded {recorded}",
                    path.display()
                )));
            }
        }
        None => {}
    }
    let file = File::open(path)?;
    let counts = count_categories(BufReader::new(file), &FeatureSchema::kdd99(), &CategoryMap::kdd99())?;
    if counts != CategoryCounts::KDD99_10_PERCENT {
        return Err(CliError::Data(format!(
            "{}: category counts {counts}, expected {}",
            path.display(),
            CategoryCounts::KDD99_10_PERCENT
        )));
    }
    if !side.exists() {
        util::write(&side, format!("{hash}  {}\n", util::file_name(path)))?;
    }
    Ok(counts)
}

pub fn run(ctx: &Context, args: FetchArgs) -> CliResult<()> {
    let (path, hash) = match args.check {
        Some(p) => {
            let h = util::sha256_file(&p)?;
            (p, h)
        }
        None => {
            let dir = util::out_dir(args.dir.or_else(|| Some(ctx.data_dir.clone())), "data")?;
            let dest = dir.join(FILE_NAME);
            let h = download(&args.url, &dest)?;
            (dest, h)
        }
    };
    let counts = verify(&path, &hash, args.sha256.as_deref())?;
    println!("{}: {} records ({counts}), sha256 {hash}", path.display(), counts.total());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrong_counts_and_hashes_are_data_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mini.txt");
        let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/kdd_mini_2000.txt");
        fs::copy(fixture, &path).unwrap();
        let hash = util::sha256_file(&path).unwrap();
        let e = verify(&path, &hash, Some("00")).unwrap_err();
        assert!(e.to_string().contains("expected 00"));
        let e = verify(&path, &hash, None).unwrap_err();
        assert!(e.to_string().contains("category counts"));
        // nothing is recorded for a file that failed verification
        assert!(!sidecar(&path).exists());

        util::write(&sidecar(&path), "abc  mini.txt\n").unwrap();
        let e = verify(&path, &hash, None).unwrap_err();
        assert!(e.to_string().contains("differs from recorded abc"));
    }
}
