use std::collections::BTreeMap;
use std::path::PathBuf;

use catnet::kdd::{holdout_indices, stratified_indices, AttackCategory, CategoryCounts, Dataset, SampleSpec, KDD_TEST_TOTAL};
use clap::Args;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::util;
use crate::Context;

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// KDD99 file to sample from [default: <data-dir>/kddcup.data_10_percent].
    #[arg(long)]
    source: Option<PathBuf>,

    /// Training counts as normal,dos,probe,u2r,r2l [default: 9841,39092,437,13,213].
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,

    /// Size of the holdout test set drawn from the remaining records.
    #[arg(long)]
    test_total: Option<usize>,

    /// Output directory [default: sample].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Part {
    file: String,
    records: usize,
    counts: BTreeMap<AttackCategory, usize>,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    source: String,
    source_sha256: String,
    source_counts: BTreeMap<AttackCategory, usize>,
    seed: u64,
    test_seed: u64,
    train: Part,
    test: Part,
}

/// Draws the training sample, then a category-proportional test set from
/// the records left over. The test draw uses `seed + 1`.
pub fn draw(source: &Dataset, counts: CategoryCounts, test_total: usize, seed: u64) -> CliResult<(Dataset, Dataset)> {
    let train_idx = stratified_indices(source, counts, seed)?;
    let mut taken = vec![false; source.len()];
    for &i in &train_idx {
        taken[i] = true;
    }
    let rest_idx: Vec<usize> = (0..source.len()).filter(|&i| !taken[i]).collect();
    let rest = source.subset(&rest_idx);
    let (_, test_idx) = holdout_indices(&rest, test_total, seed.wrapping_add(1))?;
    Ok((source.subset(&train_idx), rest.subset(&test_idx)))
}

pub fn run(ctx: &Context, args: SampleArgs) -> CliResult<()> {
    let cfg = &ctx.config.sample;
    let source = args
        .source
        .or_else(|| cfg.source.clone())
        .map(|p| if p.is_relative() && !p.exists() { ctx.data_dir.join(p) } else { p })
        .unwrap_or_else(|| ctx.data_dir.join("kddcup.data_10_percent"));
    let counts = match args.counts {
        Some(v) => {
            let a: [usize; 5] = v.try_into().map_err(|_| CliError::Usage("--counts needs five values".into()))?;
            CategoryCounts(a)
        }
        None => cfg.counts.map(CategoryCounts).unwrap_or(SampleSpec::kdd_training(0).per_category),
    };
    let test_total = args.test_total.or(cfg.test_total).unwrap_or(KDD_TEST_TOTAL);
    let out = util::out_dir(args.out.or_else(|| cfg.out.clone()), "sample")?;

    let data = util::load_dataset(&source)?;
    let (train, test) = draw(&data, counts, test_total, ctx.seed)?;

    let mut parts = Vec::new();
    for (name, ds) in [("train.txt", &train), ("test.txt", &test)] {
        let path = out.join(name);
        ds.save(&path)?;
        parts.push(Part {
            file: name.to_string(),
            records: ds.len(),
            counts: util::counts_map(ds.category_counts()),
            sha256: util::sha256_file(&path)?,
        });
    }
    let test_part = parts.pop().unwrap();
    let train_part = parts.pop().unwrap();
    let manifest = Manifest {
        source: util::file_name(&source),
        source_sha256: util::sha256_file(&source)?,
        source_counts: util::counts_map(data.category_counts()),
        seed: ctx.seed,
        test_seed: ctx.seed.wrapping_add(1),
        train: train_part,
        test: test_part,
    };
    util::write(&out.join("sample.json"), util::to_json(&manifest))?;
    println!(
        "train {} records ({}), test {} records ({}) -> {}",
        train.len(),
        train.category_counts(),
        test.len(),
        test.category_counts(),
        out.display()
    );
    Ok(())
}
