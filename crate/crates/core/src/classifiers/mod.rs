//! The ten learners behind one train/predict contract.
//!
//! Every learner trains on an encoded view of the data chosen by its
//! [`Recipe`]: raw values for trees and rules, discretized values for the
//! Bayes network and decision table, min-max scaled values for the
//! instance-based learner, and scaled one-hot values for the perceptron and
//! the support vector machine.

pub mod bayes_net;
pub mod c45;
pub mod decision_table;
mod encode;
pub mod lbk;
pub mod mlp;
pub mod naive_bayes;
pub mod nbtree;
pub mod one_r;
pub mod ripper;
pub mod smo;
mod spec;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use encode::{argmax, AttrKind, Attribute, Instances, NominalDomain, Preprocessing, Recipe, UNSEEN};
pub use spec::*;

use crate::error::{Error, Result};
use crate::kdd::{AttackCategory, Connection, Dataset};

/// Learner-specific fitted parameters.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum FittedState {
    /// Training data held a single class.
    Constant,
    BayesNet(bayes_net::BayesNet),
    NaiveBayes(naive_bayes::NaiveBayes),
    J48(c45::J48),
    NBTree(nbtree::NbTree),
    DecisionTable(decision_table::DecisionTable),
    JRip(ripper::JRip),
    OneR(one_r::OneR),
    Mlp(mlp::Mlp),
    Smo(smo::Smo),
    Lbk(lbk::Lbk),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub category: AttackCategory,
    /// Class posteriors or confidences, when the learner produces them.
    pub scores: Option<BTreeMap<AttackCategory, f64>>,
}

/// A fitted classifier. Immutable after training.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    preprocessing: Preprocessing,
    state: FittedState,
    class_list: Vec<AttackCategory>,
    training_time_s: f64,
    training_size: usize,
}

/// Fits `spec` on a labeled dataset. Training time covers preprocessing and
/// fitting only.
pub fn train(spec: &ClassifierSpec, data: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let labels = data.labeled_categories()?;
    let start = Instant::now();
    let mut class_list = labels;
    class_list.sort_unstable();
    class_list.dedup();
    let preprocessing = Preprocessing::fit(spec.recipe(), data);
    let state = if class_list.len() == 1 {
        if matches!(spec, ClassifierSpec::SMO(_)) {
            return Err(Error::SingleClass(class_list[0]));
        }
        FittedState::Constant
    } else {
        let inst = preprocessing.encode_dataset(data, &class_list)?;
        fit_state(spec, &inst)
    };
    let training_time_s = start.elapsed().as_secs_f64();
    Ok(TrainedModel {
        spec: spec.clone(),
        preprocessing,
        state,
        class_list,
        training_time_s,
        training_size: data.len(),
    })
}

fn fit_state(spec: &ClassifierSpec, inst: &Instances) -> FittedState {
    use ClassifierSpec as S;
    match spec {
        S::BayesNet(p) => FittedState::BayesNet(bayes_net::BayesNet::fit(inst, p.max_parents, p.alpha)),
        S::NaiveBayes(_) => FittedState::NaiveBayes(naive_bayes::NaiveBayes::fit(inst)),
        S::J48(p) => FittedState::J48(c45::J48::fit(inst, p.confidence_factor, p.unpruned, p.min_num_obj)),
        S::NBTree(p) => FittedState::NBTree(nbtree::NbTree::fit(inst, p)),
        S::DecisionTable(p) => FittedState::DecisionTable(decision_table::DecisionTable::fit(inst, p)),
        S::JRip(p) => FittedState::JRip(ripper::JRip::fit(inst, p)),
        S::OneR(p) => FittedState::OneR(one_r::OneR::fit(inst, p.min_bucket_size)),
        S::MLP(p) => FittedState::Mlp(mlp::Mlp::fit(inst, p)),
        S::SMO(p) => FittedState::Smo(smo::Smo::fit(inst, p)),
        S::LBk(p) => FittedState::Lbk(lbk::Lbk::fit(inst, p.k, p.window_size, p.cross_validate)),
    }
}

const MAGIC: &[u8; 8] = b"CATNET01";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Stored {
    spec_json: String,
    preprocessing: Preprocessing,
    state: FittedState,
    class_list: Vec<AttackCategory>,
    training_time_s: f64,
    training_size: usize,
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn class_list(&self) -> &[AttackCategory] {
        &self.class_list
    }

    pub fn training_time_s(&self) -> f64 {
        self.training_time_s
    }

    pub fn training_size(&self) -> usize {
        self.training_size
    }

    pub fn recipe(&self) -> Recipe {
        self.preprocessing.recipe()
    }

    pub fn preprocessing(&self) -> &Preprocessing {
        &self.preprocessing
    }

    pub fn state(&self) -> &FittedState {
        &self.state
    }

    /// True when training saw a single class and the model always predicts it.
    pub fn is_constant(&self) -> bool {
        matches!(self.state, FittedState::Constant)
    }

    /// Class index and optional scores for an already encoded row.
    pub fn predict_encoded(&self, x: &[f64]) -> (usize, Option<Vec<f64>>) {
        match &self.state {
            FittedState::Constant => (0, None),
            FittedState::BayesNet(m) => with_scores(m.posterior(x)),
            FittedState::NaiveBayes(m) => with_scores(m.posterior(x)),
            FittedState::J48(m) => {
                let (c, d) = m.distribution(x);
                (c, Some(d))
            }
            FittedState::NBTree(m) => with_scores(m.posterior(x)),
            FittedState::DecisionTable(m) => (m.predict(x), None),
            FittedState::JRip(m) => (m.predict(x), None),
            FittedState::OneR(m) => (m.predict(x), None),
            FittedState::Mlp(m) => {
                let mut out = m.output(x);
                let c = argmax(&out);
                encode::normalize(&mut out);
                (c, Some(out))
            }
            FittedState::Smo(m) => (m.predict(x), None),
            FittedState::Lbk(m) => (m.predict(x), None),
        }
    }

    pub fn predict(&self, record: &Connection) -> Result<Prediction> {
        let x = self.preprocessing.encode(record)?;
        let (c, scores) = self.predict_encoded(&x);
        Ok(Prediction {
            category: self.class_list[c],
            scores: scores.map(|s| self.class_list.iter().copied().zip(s).collect()),
        })
    }

    /// Predicts every record of `data`, in parallel.
    pub fn predict_batch(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        self.predict_batch_with(data, true)
    }

    pub fn predict_batch_with(&self, data: &Dataset, parallel: bool) -> Result<Vec<Prediction>> {
        if parallel {
            data.records().par_iter().map(|r| self.predict(r)).collect()
        } else {
            data.records().iter().map(|r| self.predict(r)).collect()
        }
    }

    /// Human-readable dump of the fitted model.
    pub fn describe(&self) -> String {
        let classes: Vec<String> = self.class_list.iter().map(|c| c.to_string()).collect();
        let attrs = self.preprocessing.attributes();
        let mut out = String::new();
        out.push_str(&format!("Classifier: {}\n", self.spec.id()));
        out.push_str(&format!("Recipe: {}\n", self.recipe()));
        out.push_str(&format!("Classes: {}\n", classes.join(", ")));
        out.push_str(&format!("Training instances: {}\n\n", self.training_size));
        match &self.state {
            FittedState::Constant => out.push_str(&format!("Constant predictor: {}\n", classes[0])),
            FittedState::BayesNet(m) => m.describe(attrs, &classes, &mut out),
            FittedState::NaiveBayes(m) => m.describe(attrs, &classes, &mut out),
            FittedState::J48(m) => m.describe(attrs, &classes, &mut out),
            FittedState::NBTree(m) => m.describe(attrs, &mut out),
            FittedState::DecisionTable(m) => m.describe(attrs, &classes, &mut out),
            FittedState::JRip(m) => m.describe(attrs, &classes, &mut out),
            FittedState::OneR(m) => m.describe(attrs, &classes, self.training_size, &mut out),
            FittedState::Mlp(m) => m.describe(&mut out),
            FittedState::Smo(m) => m.describe(&classes, &mut out),
            FittedState::Lbk(m) => m.describe(&mut out),
        }
        out
    }

    /// Serializes into the versioned `CATNET01` container.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let stored = Stored {
            spec_json: serde_json::to_string(&self.spec)?,
            preprocessing: self.preprocessing.clone(),
            state: self.state.clone(),
            class_list: self.class_list.clone(),
            training_time_s: self.training_time_s,
            training_size: self.training_size,
        };
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend(bincode::serialize(&stored)?);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let payload = check_header(bytes, MAGIC, FORMAT_VERSION)?;
        let s: Stored = bincode::deserialize(payload)?;
        Ok(TrainedModel {
            spec: serde_json::from_str(&s.spec_json)?,
            preprocessing: s.preprocessing,
            state: s.state,
            class_list: s.class_list,
            training_time_s: s.training_time_s,
            training_size: s.training_size,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

/// Validates a magic-plus-version header and returns the payload.
pub(crate) fn check_header<'a>(bytes: &'a [u8], magic: &[u8; 8], version: u32) -> Result<&'a [u8]> {
    if bytes.len() < 12 || &bytes[..8] != magic {
        return Err(Error::Format(format!(
            "missing {} header",
            String::from_utf8_lossy(magic)
        )));
    }
    let found = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if found != version {
        return Err(Error::Format(format!(
            "container version {found} is not supported (expected {version})"
        )));
    }
    Ok(&bytes[12..])
}

fn with_scores(p: Vec<f64>) -> (usize, Option<Vec<f64>>) {
    (argmax(&p), Some(p))
}
