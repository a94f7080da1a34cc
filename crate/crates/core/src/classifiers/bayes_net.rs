use std::fmt::Write;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::encode::{Attribute, Instances};
use super::naive_bayes::softmax;

/// A node's parents, in K2 order. The class node is implicit: every
/// attribute has it as its first parent.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Node {
    pub parents: Vec<usize>,
    /// Cardinality of each slot (values plus one unseen slot).
    pub slots: usize,
    /// `cpt[config][value]`, config in mixed radix over (class, parents...).
    pub cpt: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BayesNet {
    pub log_prior: Vec<f64>,
    pub nodes: Vec<Node>,
}

fn slot(v: f64, slots: usize) -> usize {
    if v < 0.0 || v as usize >= slots - 1 {
        slots - 1
    } else {
        v as usize
    }
}

fn config(data_row: &[f64], class: usize, n_classes: usize, parents: &[usize], slots: &[usize]) -> usize {
    let mut c = class;
    let mut radix = n_classes;
    for &p in parents {
        c += radix * slot(data_row[p], slots[p]);
        radix *= slots[p];
    }
    c
}

fn n_configs(n_classes: usize, parents: &[usize], slots: &[usize]) -> usize {
    parents.iter().fold(n_classes, |acc, &p| acc * slots[p])
}

/// Cooper-Herskovits log score of one node given its parent set.
fn k2_score(data: &Instances, node: usize, parents: &[usize], slots: &[usize]) -> f64 {
    let r = slots[node] - 1;
    let q = n_configs(data.n_classes, parents, slots);
    let mut counts = vec![0u32; q * r];
    for i in 0..data.len() {
        let row = data.row(i);
        let cfg = config(row, data.y[i], data.n_classes, parents, slots);
        let v = row[node];
        if v >= 0.0 && (v as usize) < r {
            counts[cfg * r + v as usize] += 1;
        }
    }
    let lg_r = ln_gamma(r as f64);
    let mut score = 0.0;
    for cfg in counts.chunks(r) {
        let nij: u32 = cfg.iter().sum();
        if nij == 0 {
            continue;
        }
        score += lg_r - ln_gamma(nij as f64 + r as f64);
        score += cfg.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
    }
    score
}

impl BayesNet {
    /// K2 structure search over nominal attributes followed by smoothed CPTs.
    pub fn fit(data: &Instances, max_parents: usize, alpha: f64) -> Self {
        let k = data.n_classes;
        let slots: Vec<usize> = data.attributes.iter().map(|a| a.arity().max(1) + 1).collect();
        let mut nodes = Vec::with_capacity(slots.len());
        for a in 0..slots.len() {
            let mut parents: Vec<usize> = Vec::new();
            let mut best = k2_score(data, a, &parents, &slots);
            while parents.len() + 1 < max_parents {
                let mut pick: Option<(usize, f64)> = None;
                for cand in (0..a).filter(|c| !parents.contains(c)) {
                    let mut trial = parents.clone();
                    trial.push(cand);
                    let s = k2_score(data, a, &trial, &slots);
                    if s > best && pick.map_or(true, |(_, ps)| s > ps) {
                        pick = Some((cand, s));
                    }
                }
                match pick {
                    Some((c, s)) => {
                        parents.push(c);
                        best = s;
                    }
                    None => break,
                }
            }
            let q = n_configs(k, &parents, &slots);
            let mut cpt = vec![vec![alpha; slots[a]]; q];
            for i in 0..data.len() {
                let row = data.row(i);
                let cfg = config(row, data.y[i], k, &parents, &slots);
                cpt[cfg][slot(row[a], slots[a])] += 1.0;
            }
            for row in &mut cpt {
                let t: f64 = row.iter().sum();
                row.iter_mut().for_each(|p| *p /= t);
            }
            nodes.push(Node {
                parents,
                slots: slots[a],
                cpt,
            });
        }
        let counts = data.class_counts(&(0..data.len()).collect::<Vec<_>>());
        let n = data.len() as f64;
        let log_prior = counts
            .iter()
            .map(|c| ((c + alpha) / (n + alpha * k as f64)).ln())
            .collect();
        BayesNet { log_prior, nodes }
    }

    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let k = self.log_prior.len();
        let slots: Vec<usize> = self.nodes.iter().map(|n| n.slots).collect();
        let mut lp = self.log_prior.clone();
        for (a, node) in self.nodes.iter().enumerate() {
            let s = slot(x[a], node.slots);
            for (c, l) in lp.iter_mut().enumerate() {
                let cfg = config(x, c, k, &node.parents, &slots);
                *l += node.cpt[cfg][s].ln();
            }
        }
        softmax(&lp)
    }

    pub fn describe(&self, attrs: &[Attribute], classes: &[String], out: &mut String) {
        let _ = writeln!(out, "Bayes network (K2, class parent of every attribute)");
        for (c, lp) in classes.iter().zip(&self.log_prior) {
            let _ = writeln!(out, "  P(class={c}) = {:.6}", lp.exp());
        }
        for (attr, node) in attrs.iter().zip(&self.nodes) {
            let parents: Vec<&str> = std::iter::once("class")
                .chain(node.parents.iter().map(|&p| attrs[p].name.as_str()))
                .collect();
            let _ = writeln!(
                out,
                "  {} | {}: {} configurations x {} values",
                attr.name,
                parents.join(", "),
                node.cpt.len(),
                node.slots
            );
            for (cfg, row) in node.cpt.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|p| format!("{p:.4}")).collect();
                let _ = writeln!(out, "    [{cfg}] {}", cells.join(" "));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::encode::{AttrKind, Preprocessing, Recipe};
    use crate::kdd::{AttackCategory, CategoryCounts};
    use crate::synth::SyntheticCorpus;

    #[test]
    fn k2_matches_hand_count() {
        // one binary attribute, two classes, counts: class0 -> [3,1], class1 -> [0,2]
        let dom = {
            let ds = SyntheticCorpus::new(1).generate_counts(CategoryCounts::new(4, 0, 0, 0, 0));
            let p = Preprocessing::fit(Recipe::Raw, &ds);
            p.attributes()[6].clone() // land: {0,1}
        };
        assert!(matches!(dom.kind, AttrKind::Nominal(_)));
        let data = Instances::new(vec![dom], vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], vec![0, 0, 0, 0, 1, 1], 2);
        let slots = [3];
        let lf = |n: f64| ln_gamma(n + 1.0);
        // r = 2: log((r-1)!/(N+r-1)!) + sum log(Nk!)
        let expect = (lf(1.0) - lf(5.0) + lf(3.0) + lf(1.0)) + (lf(1.0) - lf(3.0) + lf(0.0) + lf(2.0));
        assert!((k2_score(&data, 0, &[], &slots) - expect).abs() < 1e-9);
    }

    #[test]
    fn graph_respects_order_and_posteriors_sum() {
        let ds = SyntheticCorpus::new(5).generate_counts(CategoryCounts::new(200, 200, 40, 5, 30));
        let p = Preprocessing::fit(Recipe::Discretized { bins: 10 }, &ds);
        let data = p.encode_dataset(&ds, &AttackCategory::ALL).unwrap();
        let net = BayesNet::fit(&data, 2, 1.0);
        for (a, n) in net.nodes.iter().enumerate() {
            assert!(n.parents.len() <= 1);
            assert!(n.parents.iter().all(|&q| q < a));
        }
        for i in 0..data.len() {
            let post = net.posterior(data.row(i));
            assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
