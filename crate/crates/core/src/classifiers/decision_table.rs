use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::encode::{argmax, Attribute, Instances};
use super::spec::DecisionTableParams;

/// Majority-class lookup table over a selected feature subset.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecisionTable {
    pub features: Vec<usize>,
    pub table: BTreeMap<Vec<i64>, Vec<f64>>,
    pub default_class: usize,
    pub use_ibk: bool,
    /// Cross-validated accuracy of the selected subset on the training set.
    pub accuracy: f64,
}

fn keys_for(data: &Instances, features: &[usize]) -> (Vec<u32>, usize) {
    let mut ids: HashMap<Vec<i64>, u32> = HashMap::new();
    let keys = (0..data.len())
        .map(|i| {
            let k: Vec<i64> = features.iter().map(|&a| data.value(i, a) as i64).collect();
            let next = ids.len() as u32;
            *ids.entry(k).or_insert(next)
        })
        .collect();
    (keys, ids.len())
}

/// Correct predictions of the table under `folds`-fold cross-validation
/// (1 means leave-one-out).
fn cv_correct(data: &Instances, keys: &[u32], n_keys: usize, folds: usize) -> usize {
    let k = data.n_classes;
    let mut counts = vec![0.0; n_keys * k];
    let mut global = vec![0.0; k];
    for (i, &key) in keys.iter().enumerate() {
        counts[key as usize * k + data.y[i]] += 1.0;
        global[data.y[i]] += 1.0;
    }
    let predict = |cell: &[f64], fallback: &[f64]| {
        if cell.iter().sum::<f64>() > 0.0 {
            argmax(cell)
        } else {
            argmax(fallback)
        }
    };
    let mut correct = 0;
    if folds <= 1 {
        let mut cell = vec![0.0; k];
        let mut g = global.clone();
        for (i, &key) in keys.iter().enumerate() {
            let y = data.y[i];
            cell.copy_from_slice(&counts[key as usize * k..(key as usize + 1) * k]);
            cell[y] -= 1.0;
            g[y] -= 1.0;
            if predict(&cell, &g) == y {
                correct += 1;
            }
            g[y] += 1.0;
        }
        return correct;
    }
    for f in 0..folds {
        let mut held = vec![0.0; n_keys * k];
        let mut held_global = vec![0.0; k];
        for i in (f..keys.len()).step_by(folds) {
            held[keys[i] as usize * k + data.y[i]] += 1.0;
            held_global[data.y[i]] += 1.0;
        }
        let g: Vec<f64> = global.iter().zip(&held_global).map(|(a, b)| a - b).collect();
        for i in (f..keys.len()).step_by(folds) {
            let key = keys[i] as usize;
            let cell: Vec<f64> = (0..k).map(|c| counts[key * k + c] - held[key * k + c]).collect();
            if predict(&cell, &g) == data.y[i] {
                correct += 1;
            }
        }
    }
    correct
}

impl DecisionTable {
    pub fn fit(data: &Instances, params: &DecisionTableParams) -> Self {
        let n = data.len().max(1) as f64;
        let score = |s: &[usize]| {
            let (keys, n_keys) = keys_for(data, s);
            cv_correct(data, &keys, n_keys, params.cross_val) as f64 / n
        };
        let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut open: Vec<(f64, Vec<usize>)> = vec![(score(&[]), Vec::new())];
        visited.insert(Vec::new());
        let mut best = open[0].clone();
        let mut stale = 0;
        while !open.is_empty() {
            // best score first; ties prefer smaller, then lexicographically lower subsets
            let pos = (0..open.len())
                .reduce(|a, b| {
                    let (sa, fa) = &open[a];
                    let (sb, fb) = &open[b];
                    if sb > sa || (sb == sa && (fb.len(), fb) < (fa.len(), fa)) {
                        b
                    } else {
                        a
                    }
                })
                .unwrap();
            let (_, subset) = open.swap_remove(pos);
            let mut improved = false;
            for a in 0..data.dim() {
                if subset.contains(&a) {
                    continue;
                }
                let mut next = subset.clone();
                next.push(a);
                next.sort_unstable();
                if !visited.insert(next.clone()) {
                    continue;
                }
                let s = score(&next);
                if s > best.0 + 1e-12 {
                    best = (s, next.clone());
                    improved = true;
                }
                open.push((s, next));
            }
            if improved {
                stale = 0;
            } else {
                stale += 1;
                if stale >= params.search_termination {
                    break;
                }
            }
        }
        let (accuracy, features) = best;
        let mut table: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
        for i in 0..data.len() {
            let key: Vec<i64> = features.iter().map(|&a| data.value(i, a) as i64).collect();
            table.entry(key).or_insert_with(|| vec![0.0; data.n_classes])[data.y[i]] += 1.0;
        }
        let default_class = argmax(&data.class_counts(&(0..data.len()).collect::<Vec<_>>()));
        DecisionTable {
            features,
            table,
            default_class,
            use_ibk: params.use_ibk,
            accuracy,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let key: Vec<i64> = self.features.iter().map(|&a| x[a] as i64).collect();
        if let Some(c) = self.table.get(&key) {
            return argmax(c);
        }
        if self.use_ibk && !self.table.is_empty() {
            let mut best: Option<(usize, &Vec<f64>)> = None;
            for (k, c) in &self.table {
                let d = k.iter().zip(&key).filter(|(a, b)| a != b).count();
                if best.map_or(true, |(bd, _)| d < bd) {
                    best = Some((d, c));
                }
            }
            return argmax(best.unwrap().1);
        }
        self.default_class
    }

    pub fn describe(&self, attrs: &[Attribute], classes: &[String], out: &mut String) {
        let names: Vec<&str> = self.features.iter().map(|&a| attrs[a].name.as_str()).collect();
        let _ = writeln!(out, "Decision Table");
        let _ = writeln!(out, "Feature set: {{{}}}", names.join(", "));
        let _ = writeln!(out, "Cross-validated accuracy: {:.4}", self.accuracy);
        let _ = writeln!(out, "Rules: {}", self.table.len());
        for (key, counts) in &self.table {
            let conds: Vec<String> = self
                .features
                .iter()
                .zip(key)
                .map(|(&a, &v)| format!("{}={}", attrs[a].name, attrs[a].show(v as f64)))
                .collect();
            let n: f64 = counts.iter().sum();
            let _ = writeln!(out, "  {} => {} ({n})", conds.join(" AND "), classes[argmax(counts)]);
        }
        let _ = writeln!(out, "  otherwise => {}", classes[self.default_class]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::encode::{AttrKind, Preprocessing, Recipe};
    use crate::kdd::CategoryCounts;
    use crate::synth::SyntheticCorpus;

    #[test]
    fn leave_one_out_by_hand() {
        // keys: a a a b ; classes: 0 0 1 1
        let data = Instances::new(vec![], vec![], vec![0, 0, 1, 1], 2);
        let keys = [0, 0, 0, 1];
        // i0: cell [1,1] -> 0 ok; i1 ok; i2: cell [2,0] -> 0 wrong; i3: cell empty, global minus self [2,1] -> 0 wrong
        assert_eq!(cv_correct(&data, &keys, 2, 1), 2);
    }

    #[test]
    fn selects_informative_feature() {
        let ds = SyntheticCorpus::new(9).generate_counts(CategoryCounts::new(120, 120, 30, 0, 0));
        let p = Preprocessing::fit(Recipe::Discretized { bins: 10 }, &ds);
        let data = p.encode_dataset(&ds, &crate::kdd::AttackCategory::ALL[..3]).unwrap();
        assert!(data.attributes.iter().all(|a| matches!(a.kind, AttrKind::Nominal(_))));
        let dt = DecisionTable::fit(&data, &DecisionTableParams::default());
        assert!(!dt.features.is_empty());
        assert!(dt.accuracy > 0.5);
    }
}
