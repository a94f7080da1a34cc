use std::path::PathBuf;

use catnet::classifiers::ClassifierSpec;
use catnet::metrics::{benchmark_with, TableRow};
use clap::Args;

use crate::error::{CliError, CliResult};
use crate::util;
use crate::Context;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Training set in KDD99 format.
    #[arg(long)]
    train: Option<PathBuf>,

    /// Test set in KDD99 format.
    #[arg(long)]
    test: Option<PathBuf>,

    /// Classifier to run, `Name` or `Name:key=value;...` (repeatable) [default: all ten].
    #[arg(long = "spec")]
    specs: Vec<String>,

    /// Output directory [default: bench].
    #[arg(long)]
    out: Option<PathBuf>,

    /// Train classifiers concurrently (timings then include contention).
    #[arg(long)]
    parallel: bool,

    /// Write zero training times so reruns compare byte for byte.
    #[arg(long)]
    redact_timings: bool,
}

pub fn run(ctx: &Context, args: BenchArgs) -> CliResult<()> {
    let cfg = &ctx.config.bench;
    let train_path = util::required(args.train.or_else(|| cfg.train.clone()), "train")?;
    let test_path = util::required(args.test.or_else(|| cfg.test.clone()), "test")?;
    let names = if args.specs.is_empty() { cfg.specs.clone().unwrap_or_default() } else { args.specs };
    let specs: Vec<ClassifierSpec> = if names.is_empty() {
        ClassifierSpec::all_defaults()
    } else {
        names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    };
    let parallel = args.parallel || cfg.parallel.unwrap_or(false);
    let redact = args.redact_timings || cfg.redact_timings.unwrap_or(false);
    let out = util::out_dir(args.out.or_else(|| cfg.out.clone()), "bench")?;

    let train = util::load_dataset(&train_path)?;
    let test = util::load_dataset(&test_path)?;
    let mut table = benchmark_with(&specs, &train, &test, parallel)?;

    let meta = &mut table.metadata;
    meta.dataset.insert("train".into(), util::file_name(&train_path));
    meta.dataset.insert("train_sha256".into(), util::sha256_file(&train_path)?);
    meta.dataset.insert("test".into(), util::file_name(&test_path));
    meta.dataset.insert("test_sha256".into(), util::sha256_file(&test_path)?);
    meta.seeds.insert("seed".into(), ctx.seed);
    if redact {
        for row in &mut table.rows {
            if let TableRow::Ok(r) = row {
                r.tt_s = 0.0;
            }
        }
    }

    util::write(&out.join("table.csv"), table.to_csv())?;
    util::write(&out.join("table.json"), table.to_json())?;
    let rendered = table.render();
    util::write(&out.join("table.txt"), &rendered)?;
    print!("{rendered}");
    for (spec, error) in table.failures() {
        eprintln!("{}: failed: {error}", spec.id());
    }
    if table.evaluated().next().is_none() {
        return Err(CliError::Data("every classifier failed".into()));
    }
    Ok(())
}
