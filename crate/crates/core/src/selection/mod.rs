//! Picks one classifier per attack category from a performance table.
//!
//! Rows whose average accuracy falls below `aa_min`, or whose training time
//! exceeds the optional budget, are disqualified. Among the rest, each
//! category is decided by an ordered chain of tie-break criteria that ends
//! in the spec id, so the outcome never depends on row order.

pub mod reference;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::ClassifierSpec;
use crate::error::{Error, Result};
use crate::kdd::AttackCategory;
use crate::metrics::{EvalRow, PerformanceTable, TableRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    MaxTp,
    MinFp,
    MinTt,
    MaxAa,
    SpecName,
}

impl TieBreak {
    pub fn name(self) -> &'static str {
        match self {
            TieBreak::MaxTp => "max TP",
            TieBreak::MinFp => "min FP",
            TieBreak::MinTt => "min TT",
            TieBreak::MaxAa => "max AA",
            TieBreak::SpecName => "spec name",
        }
    }

    /// `Less` means `a` is preferred. Undefined rates rank last.
    fn compare(self, a: &EvalRow, b: &EvalRow, c: AttackCategory) -> Ordering {
        let (ma, mb) = (a.metrics(c), b.metrics(c));
        let lo = f64::NEG_INFINITY;
        let hi = f64::INFINITY;
        match self {
            TieBreak::MaxTp => mb.tp_rate.unwrap_or(lo).total_cmp(&ma.tp_rate.unwrap_or(lo)),
            TieBreak::MinFp => ma.fp_rate.unwrap_or(hi).total_cmp(&mb.fp_rate.unwrap_or(hi)),
            TieBreak::MinTt => a.tt_s.total_cmp(&b.tt_s),
            TieBreak::MaxAa => b.aa.total_cmp(&a.aa),
            TieBreak::SpecName => a.id().cmp(&b.id()),
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub aa_min: f64,
    /// Training-time budget in seconds; `None` means unconstrained.
    pub tt_budget_s: Option<f64>,
    pub tie_break: Vec<TieBreak>,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy {
            aa_min: 0.85,
            tt_budget_s: None,
            tie_break: vec![TieBreak::MaxTp, TieBreak::MinFp, TieBreak::MinTt, TieBreak::SpecName],
        }
    }
}

impl SelectionPolicy {
    /// Accuracy-first policy.
    pub fn accuracy_first(aa_min: f64) -> Self {
        SelectionPolicy {
            aa_min,
            ..Self::default()
        }
    }

    /// Accuracy threshold plus a training-time budget.
    pub fn real_time(aa_min: f64, tt_budget_s: f64) -> Self {
        SelectionPolicy {
            aa_min,
            tt_budget_s: Some(tt_budget_s),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.aa_min) {
            return Err(Error::InvalidSpec(format!("aa_min {} outside [0, 1]", self.aa_min)));
        }
        if let Some(b) = self.tt_budget_s {
            if !(b > 0.0) {
                return Err(Error::InvalidSpec(format!("tt_budget_s {b} must be positive")));
            }
        }
        Ok(())
    }

    /// The tie-break chain with `SpecName` appended when missing.
    fn chain(&self) -> Vec<TieBreak> {
        let mut chain = self.tie_break.clone();
        if !chain.contains(&TieBreak::SpecName) {
            chain.push(TieBreak::SpecName);
        }
        chain
    }

    fn budget_label(&self) -> String {
        self.tt_budget_s.map_or_else(|| "none".to_string(), |b| format!("{}s", trim(b)))
    }
}

fn trim(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn percent(x: f64) -> String {
    trim(x * 100.0) + "%"
}

/// Why a row was excluded before tie-breaking.
fn disqualification(row: &TableRow, policy: &SelectionPolicy) -> Option<String> {
    match row {
        TableRow::Failed { error, .. } => Some(format!("training failed: {error}")),
        TableRow::Ok(r) => {
            if r.aa < policy.aa_min {
                Some(format!("aa {:.2}% < {}", r.aa * 100.0, percent(policy.aa_min)))
            } else {
                match policy.tt_budget_s {
                    Some(b) if r.tt_s > b => Some(format!("tt {:.2}s > {}s", r.tt_s, trim(b))),
                    _ => None,
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignedMember {
    pub id: String,
    pub spec: ClassifierSpec,
}

/// One classifier per attack category, with the policy and the table it
/// came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub members: BTreeMap<AttackCategory, AssignedMember>,
    pub policy: SelectionPolicy,
    /// SHA-256 of the source table in CSV form.
    pub table_fingerprint: String,
}

impl Assignment {
    /// An assignment built by hand rather than selected from a table.
    pub fn manual(specs: [(AttackCategory, ClassifierSpec); 4]) -> Result<Self> {
        let members: BTreeMap<_, _> = specs
            .into_iter()
            .map(|(c, spec)| (c, AssignedMember { id: spec.id(), spec }))
            .collect();
        let a = Assignment {
            members,
            policy: SelectionPolicy::accuracy_first(0.0),
            table_fingerprint: String::new(),
        };
        a.validate()?;
        Ok(a)
    }

    pub fn id(&self, c: AttackCategory) -> Option<&str> {
        self.members.get(&c).map(|m| m.id.as_str())
    }

    pub fn spec(&self, c: AttackCategory) -> Option<&ClassifierSpec> {
        self.members.get(&c).map(|m| &m.spec)
    }

    /// Every attack category, and nothing else, has a member.
    pub fn validate(&self) -> Result<()> {
        let keys: Vec<AttackCategory> = self.members.keys().copied().collect();
        if keys != AttackCategory::ATTACKS {
            return Err(Error::Format(format!("assignment must cover exactly DoS, Probe, U2R, R2L; got {keys:?}")));
        }
        for (c, m) in &self.members {
            m.spec.validate()?;
            if m.spec.id() != m.id {
                return Err(Error::Format(format!("{c}: id {} does not match spec {}", m.id, m.spec.id())));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("assignments serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Assignment = serde_json::from_str(text)?;
        a.validate()?;
        Ok(a)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.members.iter().map(|(c, m)| format!("{c}: {}", m.id)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieBreakStep {
    pub criterion: TieBreak,
    /// Candidates still tied after this criterion.
    pub survivors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryTrace {
    pub category: AttackCategory,
    pub disqualified: Vec<(String, String)>,
    pub candidates: Vec<String>,
    pub steps: Vec<TieBreakStep>,
    pub winner: String,
}

impl CategoryTrace {
    /// The criterion that reduced the candidates to one, if any was needed.
    pub fn decided_by(&self) -> Option<TieBreak> {
        self.steps.last().map(|s| s.criterion)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub categories: Vec<CategoryTrace>,
    pub assignment: Assignment,
}

impl SelectionTrace {
    pub fn category(&self, c: AttackCategory) -> &CategoryTrace {
        self.categories.iter().find(|t| t.category == c).expect("trace covers every attack category")
    }

    pub fn render(&self) -> String {
        let p = &self.assignment.policy;
        let mut out = String::new();
        let chain: Vec<&str> = p.chain().iter().map(|t| t.name()).collect();
        let _ = writeln!(
            out,
            "policy: aa_min {}, tt budget {}, tie-break {}",
            percent(p.aa_min),
            p.budget_label(),
            chain.join(" > ")
        );
        for t in &self.categories {
            let _ = writeln!(out, "{}:", t.category);
            for (id, why) in &t.disqualified {
                let _ = writeln!(out, "  disqualified {id}: {why}");
            }
            let _ = writeln!(out, "  candidates: {}", t.candidates.join(", "));
            for s in &t.steps {
                let _ = writeln!(out, "  by {}: {}", s.criterion, s.survivors.join(", "));
            }
            let _ = writeln!(out, "  selected: {}", t.winner);
        }
        out
    }
}

/// SHA-256 of the table's CSV form, which excludes metadata.
pub fn fingerprint(table: &PerformanceTable) -> String {
    hex::encode(Sha256::digest(table.to_csv().as_bytes()))
}

pub fn select(table: &PerformanceTable, policy: &SelectionPolicy) -> Result<Assignment> {
    explain(table, policy).map(|t| t.assignment)
}

pub fn explain(table: &PerformanceTable, policy: &SelectionPolicy) -> Result<SelectionTrace> {
    policy.validate()?;
    if table.rows.is_empty() {
        return Err(Error::Format("performance table has no rows".into()));
    }
    let chain = policy.chain();
    // row order must not matter: work on rows sorted by id
    let mut rows: Vec<&TableRow> = table.rows.iter().collect();
    rows.sort_by_key(|r| r.id());
    let mut disqualified = Vec::new();
    let mut qualified: Vec<&EvalRow> = Vec::new();
    for row in rows {
        match (disqualification(row, policy), row) {
            (Some(why), _) => disqualified.push((row.id(), why)),
            (None, TableRow::Ok(r)) => qualified.push(r),
            (None, TableRow::Failed { .. }) => unreachable!("failed rows are always disqualified"),
        }
    }

    let mut categories = Vec::new();
    let mut members = BTreeMap::new();
    for c in AttackCategory::ATTACKS {
        if qualified.is_empty() {
            return Err(Error::NoQualifiedClassifier {
                category: c,
                aa_min: policy.aa_min,
                tt_budget: policy.budget_label(),
            });
        }
        let mut survivors = qualified.clone();
        let mut steps = Vec::new();
        for &criterion in &chain {
            if survivors.len() <= 1 {
                break;
            }
            let best = survivors
                .iter()
                .copied()
                .min_by(|a, b| criterion.compare(a, b, c))
                .expect("nonempty");
            survivors.retain(|r| criterion.compare(r, best, c) == Ordering::Equal);
            steps.push(TieBreakStep {
                criterion,
                survivors: survivors.iter().map(|r| r.id()).collect(),
            });
        }
        let winner = survivors[0];
        members.insert(
            c,
            AssignedMember {
                id: winner.id(),
                spec: winner.spec.clone(),
            },
        );
        categories.push(CategoryTrace {
            category: c,
            disqualified: disqualified.clone(),
            candidates: qualified.iter().map(|r| r.id()).collect(),
            steps,
            winner: winner.id(),
        });
    }
    Ok(SelectionTrace {
        categories,
        assignment: Assignment {
            members,
            policy: policy.clone(),
            table_fingerprint: fingerprint(table),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{CategoryMetrics, TableMetadata};
    use AttackCategory::*;

    fn reference() -> PerformanceTable {
        reference::reference_table()
    }

    fn ids(a: &Assignment) -> Vec<&str> {
        AttackCategory::ATTACKS.iter().map(|&c| a.id(c).unwrap()).collect()
    }

    #[test]
    fn accuracy_first_selection() {
        let a = select(&reference(), &SelectionPolicy::accuracy_first(0.85)).unwrap();
        assert_eq!(ids(&a), ["JRip", "JRip", "DecisionTable", "OneR"]);
    }

    #[test]
    fn real_time_selection() {
        let a = select(&reference(), &SelectionPolicy::real_time(0.85, 20.0)).unwrap();
        assert_eq!(ids(&a), ["J48", "BayesNet", "BayesNet", "OneR"]);
    }

    #[test]
    fn trace_explains_probe() {
        let t = explain(&reference(), &SelectionPolicy::accuracy_first(0.85)).unwrap();
        let probe = t.category(Probe);
        assert!(probe
            .disqualified
            .contains(&("NaiveBayes".to_string(), "aa 78.32% < 85%".to_string())));
        assert_eq!(probe.steps[0].survivors, ["BayesNet", "JRip"]);
        assert_eq!(probe.decided_by(), Some(TieBreak::MinFp));
        let dos = t.category(DoS);
        assert_eq!(dos.steps[0].survivors, ["JRip", "NBTree"]);
        assert_eq!(dos.winner, "JRip");
        assert!(t.render().contains("disqualified NaiveBayes: aa 78.32% < 85%"));
    }

    #[test]
    fn single_row_takes_every_category() {
        let mut t = reference();
        t.rows.retain(|r| r.id() == "J48");
        let trace = explain(&t, &SelectionPolicy::accuracy_first(0.85)).unwrap();
        assert_eq!(ids(&trace.assignment), ["J48"; 4]);
        assert!(trace.categories.iter().all(|c| c.steps.is_empty()));
    }

    #[test]
    fn impossible_threshold() {
        let err = select(&reference(), &SelectionPolicy::accuracy_first(1.0)).unwrap_err();
        assert!(matches!(err, Error::NoQualifiedClassifier { category: DoS, .. }));
        assert!(SelectionPolicy::accuracy_first(1.01).validate().is_err());
        assert!(SelectionPolicy::real_time(0.5, 0.0).validate().is_err());
    }

    #[test]
    fn undefined_tp_ranks_last() {
        let spec = |n: &str| ClassifierSpec::default_for(n).unwrap();
        let row = |n: &str, tp: Option<f64>| {
            TableRow::Ok(EvalRow {
                spec: spec(n),
                per_category: AttackCategory::ATTACKS
                    .iter()
                    .map(|&c| (c, CategoryMetrics { tp_rate: tp, fp_rate: Some(0.0) }))
                    .collect(),
                aa: 0.9,
                tt_s: 1.0,
                confusion: None,
            })
        };
        let t = PerformanceTable::new(vec![row("J48", None), row("OneR", Some(0.0))], TableMetadata::default()).unwrap();
        let a = select(&t, &SelectionPolicy::accuracy_first(0.0)).unwrap();
        assert_eq!(a.id(U2R), Some("OneR"));
    }

    #[test]
    fn assignment_json_round_trip() {
        let a = select(&reference(), &SelectionPolicy::real_time(0.85, 20.0)).unwrap();
        assert_eq!(a.table_fingerprint.len(), 64);
        assert_eq!(Assignment::from_json(&a.to_json()).unwrap(), a);
        let mut bad = a.clone();
        bad.members.remove(&R2L);
        assert!(Assignment::from_json(&bad.to_json()).is_err());
    }
}
