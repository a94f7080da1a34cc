use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};

use super::encode::Recipe;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    Simple,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StructureSearch {
    K2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuousHandling {
    Gaussian,
    Discretized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubsetSearch {
    BestFirst,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    Polynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeighbourSearch {
    LinearScan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BayesNetParams {
    pub estimator: Estimator,
    /// Pseudo-count added to every CPT cell.
    pub alpha: f64,
    pub search: StructureSearch,
    /// Parent limit per attribute node, the class node included.
    pub max_parents: usize,
    pub use_adtree: bool,
    pub bins: usize,
}

impl Default for BayesNetParams {
    fn default() -> Self {
        BayesNetParams {
            estimator: Estimator::Simple,
            alpha: 1.0,
            search: StructureSearch::K2,
            max_parents: 2,
            use_adtree: false,
            bins: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NaiveBayesParams {
    pub continuous_handling: ContinuousHandling,
    /// Only used with `ContinuousHandling::Discretized`.
    pub bins: usize,
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            continuous_handling: ContinuousHandling::Gaussian,
            bins: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct J48Params {
    pub confidence_factor: f64,
    pub num_folds: usize,
    pub seed: u64,
    pub unpruned: bool,
    pub min_num_obj: usize,
}

impl Default for J48Params {
    fn default() -> Self {
        J48Params {
            confidence_factor: 0.25,
            num_folds: 3,
            seed: 1,
            unpruned: false,
            min_num_obj: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NbTreeParams {
    pub cv_folds: usize,
    /// Nodes with fewer instances always become leaves.
    pub min_instances: usize,
    /// Minimum relative reduction of cross-validated error needed to split.
    pub min_relative_gain: f64,
    pub seed: u64,
}

impl Default for NbTreeParams {
    fn default() -> Self {
        NbTreeParams {
            cv_folds: 5,
            min_instances: 30,
            min_relative_gain: 0.05,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecisionTableParams {
    /// 1 means leave-one-out.
    pub cross_val: usize,
    pub search: SubsetSearch,
    pub use_ibk: bool,
    /// Non-improving expansions tolerated before best-first search stops.
    pub search_termination: usize,
    pub bins: usize,
}

impl Default for DecisionTableParams {
    fn default() -> Self {
        DecisionTableParams {
            cross_val: 1,
            search: SubsetSearch::BestFirst,
            use_ibk: false,
            search_termination: 5,
            bins: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JRipParams {
    pub folds: usize,
    pub min_no: f64,
    pub optimizations: usize,
    pub seed: u64,
    pub use_pruning: bool,
}

impl Default for JRipParams {
    fn default() -> Self {
        JRipParams {
            folds: 3,
            min_no: 2.0,
            optimizations: 2,
            seed: 1,
            use_pruning: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OneRParams {
    pub min_bucket_size: usize,
}

impl Default for OneRParams {
    fn default() -> Self {
        OneRParams { min_bucket_size: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpParams {
    pub learning_rate: f64,
    pub momentum: f64,
    pub random_seed: u64,
    pub validation_threshold: usize,
    pub hidden_layers: usize,
    /// Units per hidden layer; 0 means `ceil((inputs + classes) / 2)`.
    pub hidden_width: usize,
    pub max_epochs: usize,
    pub validation_fraction: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            learning_rate: 0.3,
            momentum: 0.2,
            random_seed: 0,
            validation_threshold: 20,
            hidden_layers: 1,
            hidden_width: 0,
            max_epochs: 500,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelKind,
    pub degree: u32,
    pub num_folds: i32,
    pub random_seed: u64,
    /// KKT violation tolerated at convergence.
    pub tolerance: f64,
}

impl Default for SmoParams {
    fn default() -> Self {
        SmoParams {
            c: 1.0,
            epsilon: 1.0e-12,
            kernel: KernelKind::Polynomial,
            degree: 1,
            num_folds: -1,
            random_seed: 1,
            tolerance: 1.0e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbkParams {
    pub k: usize,
    pub cross_validate: bool,
    pub search: NeighbourSearch,
    /// Keep only the most recent training instances; 0 keeps all.
    pub window_size: usize,
}

impl Default for LbkParams {
    fn default() -> Self {
        LbkParams {
            k: 1,
            cross_validate: false,
            search: NeighbourSearch::LinearScan,
            window_size: 0,
        }
    }
}

/// One of the ten learners together with its hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm")]
pub enum ClassifierSpec {
    BayesNet(BayesNetParams),
    NaiveBayes(NaiveBayesParams),
    J48(J48Params),
    NBTree(NbTreeParams),
    DecisionTable(DecisionTableParams),
    JRip(JRipParams),
    OneR(OneRParams),
    MLP(MlpParams),
    SMO(SmoParams),
    LBk(LbkParams),
}

impl ClassifierSpec {
    pub const NAMES: [&'static str; 10] = [
        "BayesNet",
        "NaiveBayes",
        "J48",
        "NBTree",
        "DecisionTable",
        "JRip",
        "OneR",
        "MLP",
        "SMO",
        "LBk",
    ];

    /// All ten learners with default parameters, in benchmark order.
    pub fn all_defaults() -> Vec<ClassifierSpec> {
        Self::NAMES
            .iter()
            .map(|n| Self::default_for(n).unwrap())
            .collect()
    }

    pub fn default_for(name: &str) -> Option<ClassifierSpec> {
        use ClassifierSpec::*;
        let spec = match name.to_ascii_lowercase().as_str() {
            "bayesnet" => BayesNet(Default::default()),
            "naivebayes" => NaiveBayes(Default::default()),
            "j48" => J48(Default::default()),
            "nbtree" => NBTree(Default::default()),
            "decisiontable" => DecisionTable(Default::default()),
            "jrip" => JRip(Default::default()),
            "oner" => OneR(Default::default()),
            "mlp" => MLP(Default::default()),
            "smo" => SMO(Default::default()),
            "lbk" | "ibk" => LBk(Default::default()),
            _ => return None,
        };
        Some(spec)
    }

    pub fn name(&self) -> &'static str {
        use ClassifierSpec::*;
        match self {
            BayesNet(_) => "BayesNet",
            NaiveBayes(_) => "NaiveBayes",
            J48(_) => "J48",
            NBTree(_) => "NBTree",
            DecisionTable(_) => "DecisionTable",
            JRip(_) => "JRip",
            OneR(_) => "OneR",
            MLP(_) => "MLP",
            SMO(_) => "SMO",
            LBk(_) => "LBk",
        }
    }

    /// Which input transformation the learner trains on.
    pub fn recipe(&self) -> Recipe {
        use ClassifierSpec::*;
        match self {
            BayesNet(p) => Recipe::Discretized { bins: p.bins },
            NaiveBayes(p) => match p.continuous_handling {
                ContinuousHandling::Gaussian => Recipe::Raw,
                ContinuousHandling::Discretized => Recipe::Discretized { bins: p.bins },
            },
            J48(_) | NBTree(_) | JRip(_) | OneR(_) => Recipe::Raw,
            DecisionTable(p) => Recipe::Discretized { bins: p.bins },
            MLP(_) | SMO(_) => Recipe::NormalizedOneHot,
            LBk(_) => Recipe::Normalized,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use ClassifierSpec::*;
        let bad = |msg: String| Err(Error::InvalidSpec(format!("{}: {msg}", self.name())));
        match self {
            BayesNet(p) => {
                if !(p.alpha > 0.0) {
                    return bad(format!("alpha must be > 0, got {}", p.alpha));
                }
                if p.max_parents == 0 || p.bins == 0 {
                    return bad("max_parents and bins must be >= 1".into());
                }
            }
            NaiveBayes(p) => {
                if p.bins == 0 {
                    return bad("bins must be >= 1".into());
                }
            }
            J48(p) => {
                if !(p.confidence_factor > 0.0 && p.confidence_factor <= 1.0) {
                    return bad(format!(
                        "confidence_factor must be in (0, 1], got {}",
                        p.confidence_factor
                    ));
                }
                if p.num_folds < 2 || p.min_num_obj == 0 {
                    return bad("num_folds must be >= 2 and min_num_obj >= 1".into());
                }
            }
            NBTree(p) => {
                if p.cv_folds < 2 || p.min_instances < 2 {
                    return bad("cv_folds and min_instances must be >= 2".into());
                }
                if !(0.0..1.0).contains(&p.min_relative_gain) {
                    return bad("min_relative_gain must be in [0, 1)".into());
                }
            }
            DecisionTable(p) => {
                if p.cross_val == 0 || p.search_termination == 0 || p.bins == 0 {
                    return bad("cross_val, search_termination and bins must be >= 1".into());
                }
            }
            JRip(p) => {
                if p.folds < 2 {
                    return bad("folds must be >= 2".into());
                }
                if !(p.min_no > 0.0) {
                    return bad("min_no must be > 0".into());
                }
            }
            OneR(p) => {
                if p.min_bucket_size == 0 {
                    return bad("min_bucket_size must be >= 1".into());
                }
            }
            MLP(p) => {
                if !(p.learning_rate > 0.0) {
                    return bad("learning_rate must be > 0".into());
                }
                if !(0.0..1.0).contains(&p.momentum) {
                    return bad("momentum must be in [0, 1)".into());
                }
                if p.validation_threshold == 0 || p.hidden_layers == 0 || p.max_epochs == 0 {
                    return bad(
                        "validation_threshold, hidden_layers and max_epochs must be >= 1".into(),
                    );
                }
                if !(0.0..1.0).contains(&p.validation_fraction) {
                    return bad("validation_fraction must be in [0, 1)".into());
                }
            }
            SMO(p) => {
                if !(p.c > 0.0) {
                    return bad(format!("c must be > 0, got {}", p.c));
                }
                if !(p.epsilon > 0.0 && p.tolerance > 0.0) {
                    return bad("epsilon and tolerance must be > 0".into());
                }
                if p.degree == 0 {
                    return bad("degree must be >= 1".into());
                }
                if p.num_folds != -1 && p.num_folds < 2 {
                    return bad("num_folds must be -1 or >= 2".into());
                }
            }
            LBk(p) => {
                if p.k == 0 {
                    return bad("k must be >= 1".into());
                }
            }
        }
        Ok(())
    }

    fn params_json(&self) -> Map<String, Json> {
        match serde_json::to_value(self).expect("spec serializes") {
            Json::Object(mut m) => {
                m.remove("algorithm");
                m
            }
            _ => unreachable!("specs serialize as objects"),
        }
    }

    /// Stable identifier: the algorithm name, followed by `:key=value;...`
    /// for every parameter that differs from its default.
    pub fn id(&self) -> String {
        let defaults = Self::default_for(self.name()).unwrap().params_json();
        let overrides: Vec<String> = self
            .params_json()
            .into_iter()
            .filter(|(k, v)| defaults.get(k) != Some(v))
            .map(|(k, v)| match v {
                Json::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        if overrides.is_empty() {
            self.name().to_string()
        } else {
            format!("{}:{}", self.name(), overrides.join(";"))
        }
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for ClassifierSpec {
    type Err = Error;

    /// Parses `Name` or `Name:key=value;key=value`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p),
            None => (s.trim(), ""),
        };
        let base = Self::default_for(name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown classifier {name:?}")))?;
        let mut json = match serde_json::to_value(&base)? {
            Json::Object(m) => m,
            _ => unreachable!(),
        };
        for kv in params.split(';').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got {kv:?}")))?;
            let k = k.trim();
            if k == "algorithm" || !json.contains_key(k) {
                return Err(Error::InvalidSpec(format!(
                    "{} has no parameter {k:?}",
                    base.name()
                )));
            }
            let v = v.trim();
            let value = serde_json::from_str::<Json>(v).unwrap_or_else(|_| Json::String(v.into()));
            json.insert(k.to_string(), value);
        }
        let spec: ClassifierSpec = serde_json::from_value(Json::Object(json))
            .map_err(|e| Error::InvalidSpec(format!("{s:?}: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_carry_published_parameters() {
        match ClassifierSpec::default_for("J48").unwrap() {
            ClassifierSpec::J48(p) => {
                assert_eq!(p.confidence_factor, 0.25);
                assert_eq!(p.num_folds, 3);
                assert_eq!(p.seed, 1);
                assert!(!p.unpruned);
            }
            _ => unreachable!(),
        }
        match ClassifierSpec::default_for("JRip").unwrap() {
            ClassifierSpec::JRip(p) => {
                assert_eq!((p.folds, p.min_no, p.optimizations, p.seed, p.use_pruning), (3, 2.0, 2, 1, true));
            }
            _ => unreachable!(),
        }
        match ClassifierSpec::default_for("MLP").unwrap() {
            ClassifierSpec::MLP(p) => {
                assert_eq!((p.learning_rate, p.momentum, p.random_seed, p.validation_threshold), (0.3, 0.2, 0, 20));
            }
            _ => unreachable!(),
        }
        match ClassifierSpec::default_for("SMO").unwrap() {
            ClassifierSpec::SMO(p) => {
                assert_eq!((p.c, p.epsilon, p.num_folds, p.random_seed, p.degree), (1.0, 1e-12, -1, 1, 1));
            }
            _ => unreachable!(),
        }
        match ClassifierSpec::default_for("LBk").unwrap() {
            ClassifierSpec::LBk(p) => {
                assert_eq!((p.k, p.cross_validate, p.window_size), (1, false, 0));
            }
            _ => unreachable!(),
        }
        match ClassifierSpec::default_for("DecisionTable").unwrap() {
            ClassifierSpec::DecisionTable(p) => {
                assert_eq!((p.cross_val, p.search, p.use_ibk), (1, SubsetSearch::BestFirst, false));
            }
            _ => unreachable!(),
        }
        for s in ClassifierSpec::all_defaults() {
            s.validate().unwrap();
            assert_eq!(s.id(), s.name());
        }
    }

    #[test]
    fn id_round_trips() {
        let s: ClassifierSpec = "J48:confidence_factor=0.1;unpruned=true".parse().unwrap();
        assert_eq!(s.id(), "J48:confidence_factor=0.1;unpruned=true");
        assert_eq!(s.id().parse::<ClassifierSpec>().unwrap(), s);
        let k: ClassifierSpec = "lbk:k=3".parse().unwrap();
        assert_eq!(k.id(), "LBk:k=3");
        let nb: ClassifierSpec = "NaiveBayes:continuous_handling=Discretized".parse().unwrap();
        assert_eq!(nb.recipe(), Recipe::Discretized { bins: 10 });
    }

    #[test]
    fn invalid_specs_rejected() {
        for bad in [
            "J48:confidence_factor=0",
            "J48:confidence_factor=1.5",
            "LBk:k=0",
            "SMO:c=-1",
            "MLP:momentum=1.0",
            "JRip:nonsense=1",
            "Bogus",
            "JRip:folds",
        ] {
            assert!(bad.parse::<ClassifierSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn json_round_trip() {
        for s in ClassifierSpec::all_defaults() {
            let j = serde_json::to_string(&s).unwrap();
            assert!(j.contains(&format!("\"algorithm\":\"{}\"", s.name())));
            assert_eq!(serde_json::from_str::<ClassifierSpec>(&j).unwrap(), s);
        }
    }
}
