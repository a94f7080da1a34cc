//! KDD99 connection records: schema, parsing, label taxonomy, sampling and
//! preprocessing.

mod category;
mod dataset;
mod preprocess;
mod record;
mod sample;
mod schema;

pub use category::{map_category, normalize_label, AttackCategory, CategoryCounts, CategoryMap};
pub use dataset::{count_categories, Dataset};
pub use preprocess::{
    discretize_continuous, normalize_continuous, DiscretizationParams, NormalizationParams,
};
pub use record::{parse_record, Connection, Symbol, Value};
pub use sample::{
    apportion, holdout_indices, split_holdout, stratified_indices, stratified_sample, SampleSpec,
    KDD_TEST_TOTAL,
};
pub use schema::{FeatureDescriptor, FeatureKind, FeatureSchema, FEATURE_COUNT};
