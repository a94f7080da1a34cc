use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::category::{AttackCategory, CategoryCounts};
use super::dataset::Dataset;
use crate::error::{Error, Result};

/// Size of the holdout test set drawn alongside the 49,596-record training
/// sample.
pub const KDD_TEST_TOTAL: usize = 15_437;

/// Requested per-category counts for a seeded stratified sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub total: usize,
    pub per_category: CategoryCounts,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(per_category: CategoryCounts, seed: u64) -> Self {
        SampleSpec {
            total: per_category.total(),
            per_category,
            seed,
        }
    }

    /// The 49,596-record training mix: 9,841 normal, 39,092 DoS, 437 Probe,
    /// 13 U2R and 213 R2L.
    pub fn kdd_training(seed: u64) -> Self {
        Self::new(CategoryCounts::new(9_841, 39_092, 437, 13, 213), seed)
    }

    /// A sample of `total` records whose category mix follows `weights`.
    pub fn proportional(total: usize, weights: CategoryCounts, seed: u64) -> Self {
        Self::new(apportion(total, weights), seed)
    }

    pub fn validate(&self) -> Result<()> {
        let sum = self.per_category.total();
        if sum != self.total {
            return Err(Error::SampleTotal {
                sum,
                total: self.total,
            });
        }
        Ok(())
    }
}

/// Largest-remainder apportionment of `total` across categories in
/// proportion to `weights`. Remainder ties go to the lower category index.
/// When `total <= weights.total()` no category receives more than its weight.
pub fn apportion(total: usize, weights: CategoryCounts) -> CategoryCounts {
    let w_total = weights.total() as u128;
    let mut out = CategoryCounts::default();
    if w_total == 0 {
        return out;
    }
    let mut remainders = Vec::with_capacity(5);
    let mut assigned = 0usize;
    for (c, w) in weights.iter() {
        let scaled = total as u128 * w as u128;
        let q = (scaled / w_total) as usize;
        out[c] = q;
        assigned += q;
        remainders.push((scaled % w_total, c));
    }
    // Largest remainder first; stable sort keeps canonical order on ties.
    remainders.sort_by(|a, b| b.0.cmp(&a.0));
    for (_, c) in remainders.into_iter().take(total - assigned) {
        out[c] += 1;
    }
    out
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Chooses `k` of `pool` uniformly (partial Fisher-Yates).
fn choose(pool: &mut [usize], k: usize, rng: &mut ChaCha8Rng) {
    let n = pool.len();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
}

fn indices_by_category(dataset: &Dataset) -> [Vec<usize>; 5] {
    let mut pools: [Vec<usize>; 5] = Default::default();
    for (i, c) in dataset.categories().iter().enumerate() {
        if let Some(c) = c {
            pools[c.index()].push(i);
        }
    }
    pools
}

/// Per-category uniform selection of exactly `counts` records, returned as
/// sorted source indices. Categories draw from one seeded stream in
/// canonical order.
pub fn stratified_indices(dataset: &Dataset, counts: CategoryCounts, seed: u64) -> Result<Vec<usize>> {
    let mut pools = indices_by_category(dataset);
    for c in AttackCategory::ALL {
        let available = pools[c.index()].len();
        if counts[c] > available {
            return Err(Error::InsufficientRecords {
                category: c,
                requested: counts[c],
                available,
            });
        }
    }
    let mut rng = rng(seed);
    let mut picked = Vec::with_capacity(counts.total());
    for c in AttackCategory::ALL {
        let pool = &mut pools[c.index()];
        choose(pool, counts[c], &mut rng);
        picked.extend_from_slice(&pool[..counts[c]]);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Seeded stratified sample with exact per-category counts. Output keeps
/// the source order of the chosen records.
pub fn stratified_sample(dataset: &Dataset, spec: &SampleSpec) -> Result<Dataset> {
    spec.validate()?;
    let idx = stratified_indices(dataset, spec.per_category, spec.seed)?;
    Ok(dataset.subset(&idx))
}

/// Splits off a category-proportional test set of `test_total` records.
/// Returns `(train, test)`; both keep source order and together partition
/// the input.
pub fn split_holdout(dataset: &Dataset, test_total: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = holdout_indices(dataset, test_total, seed)?;
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

/// Index form of [`split_holdout`].
pub fn holdout_indices(dataset: &Dataset, test_total: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    dataset.labeled_categories()?;
    if test_total > dataset.len() {
        return Err(Error::HoldoutTooLarge {
            requested: test_total,
            available: dataset.len(),
        });
    }
    let counts = apportion(test_total, dataset.category_counts());
    let test = stratified_indices(dataset, counts, seed)?;
    let mut in_test = vec![false; dataset.len()];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..dataset.len()).filter(|&i| !in_test[i]).collect();
    Ok((train, test))
}
