use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encode::{argmax, Attribute, Instances};
use super::spec::JRipParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Condition {
    Eq { attr: usize, value: f64 },
    Le { attr: usize, threshold: f64 },
    Gt { attr: usize, threshold: f64 },
}

impl Condition {
    pub fn covers(&self, x: &[f64]) -> bool {
        match *self {
            Condition::Eq { attr, value } => x[attr] == value,
            Condition::Le { attr, threshold } => x[attr] <= threshold,
            Condition::Gt { attr, threshold } => x[attr] > threshold,
        }
    }

    fn attr(&self) -> usize {
        match *self {
            Condition::Eq { attr, .. } | Condition::Le { attr, .. } | Condition::Gt { attr, .. } => attr,
        }
    }

    fn show(&self, attrs: &[Attribute]) -> String {
        match *self {
            Condition::Eq { attr, value } => format!("({} = {})", attrs[attr].name, attrs[attr].show(value)),
            Condition::Le { attr, threshold } => format!("({} <= {threshold})", attrs[attr].name),
            Condition::Gt { attr, threshold } => format!("({} > {threshold})", attrs[attr].name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: usize,
}

impl Rule {
    pub fn covers(&self, x: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.covers(x))
    }
}

/// Ordered rule list ending in a default rule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JRip {
    pub rules: Vec<Rule>,
    pub default_class: usize,
    /// `(covered, errors)` on the training set for each rule in list order,
    /// the default rule last.
    pub coverage: Vec<(usize, usize)>,
}

const MAX_DL_SURPLUS: f64 = 64.0;

fn subset_dl(t: f64, k: f64, p: f64) -> f64 {
    let mut r = 0.0;
    if p > 0.0 && k > 0.0 {
        r -= k * p.log2();
    }
    if p < 1.0 && t - k > 0.0 {
        r -= (t - k) * (1.0 - p).log2();
    }
    r
}

fn theory_dl(rule: &Rule, all_conds: f64) -> f64 {
    let k = rule.conditions.len() as f64;
    if k == 0.0 {
        return 0.0;
    }
    let mut bits = k.log2();
    if k > 1.0 {
        bits += 2.0 * bits.log2();
    }
    0.5 * (bits + subset_dl(all_conds, k, k / all_conds))
}

fn data_dl(exp_fp_over_err: f64, cover: f64, uncover: f64, fp: f64, fn_: f64) -> f64 {
    let total_bits = (cover + uncover + 1.0).log2();
    let (cover_bits, uncover_bits);
    if cover > uncover {
        let exp_err = exp_fp_over_err * (fp + fn_);
        cover_bits = subset_dl(cover, fp, exp_err / cover);
        uncover_bits = if uncover > 0.0 { subset_dl(uncover, fn_, fn_ / uncover) } else { 0.0 };
    } else {
        let exp_err = (1.0 - exp_fp_over_err) * (fp + fn_);
        cover_bits = if cover > 0.0 { subset_dl(cover, fp, fp / cover) } else { 0.0 };
        uncover_bits = subset_dl(uncover, fn_, exp_err / uncover);
    }
    total_bits + cover_bits + uncover_bits
}

struct ClassLearner<'a> {
    data: &'a Instances,
    class: usize,
    params: &'a JRipParams,
    /// Instances this class's rule set is learned and scored on.
    scope: Vec<usize>,
    exp_fp_rate: f64,
    all_conds: f64,
}

impl<'a> ClassLearner<'a> {
    fn new(data: &'a Instances, class: usize, params: &'a JRipParams, scope: Vec<usize>) -> Self {
        let pos = scope.iter().filter(|&&i| data.y[i] == class).count() as f64;
        let exp_fp_rate = pos / scope.len() as f64;
        let all_conds = (0..data.dim())
            .map(|a| {
                if data.attributes[a].is_numeric() {
                    let mut v: Vec<f64> = scope.iter().map(|&i| data.value(i, a)).collect();
                    v.sort_by(f64::total_cmp);
                    v.dedup();
                    2.0 * v.len() as f64
                } else {
                    data.attributes[a].arity() as f64
                }
            })
            .sum::<f64>()
            .max(1.0);
        ClassLearner {
            data,
            class,
            params,
            scope,
            exp_fp_rate,
            all_conds,
        }
    }

    fn is_pos(&self, i: usize) -> bool {
        self.data.y[i] == self.class
    }

    fn covered_by(&self, rules: &[Rule], i: usize) -> bool {
        rules.iter().any(|r| r.covers(self.data.row(i)))
    }

    fn total_dl(&self, rules: &[Rule]) -> f64 {
        let theory: f64 = rules.iter().map(|r| theory_dl(r, self.all_conds)).sum();
        let (mut cover, mut fp, mut fn_) = (0.0, 0.0, 0.0);
        for &i in &self.scope {
            let c = self.covered_by(rules, i);
            if c {
                cover += 1.0;
                if !self.is_pos(i) {
                    fp += 1.0;
                }
            } else if self.is_pos(i) {
                fn_ += 1.0;
            }
        }
        let uncover = self.scope.len() as f64 - cover;
        theory + data_dl(self.exp_fp_rate, cover, uncover, fp, fn_)
    }

    /// Stratified grow/prune split of `idx`; the prune part is 1/folds.
    fn split(&self, idx: &[usize], rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
        if !self.params.use_pruning {
            return (idx.to_vec(), Vec::new());
        }
        let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.is_pos(i));
        pos.shuffle(rng);
        neg.shuffle(rng);
        let folds = self.params.folds;
        let mut grow = Vec::new();
        let mut prune = Vec::new();
        for part in [pos, neg] {
            let cut = part.len() / folds;
            prune.extend_from_slice(&part[..cut]);
            grow.extend_from_slice(&part[cut..]);
        }
        (grow, prune)
    }

    /// Adds conditions greedily by FOIL information gain.
    fn grow(&self, grow: &[usize], start: Vec<Condition>) -> Vec<Condition> {
        let data = self.data;
        let mut conds = start;
        let mut covered: Vec<usize> = grow
            .iter()
            .copied()
            .filter(|&i| conds.iter().all(|c| c.covers(data.row(i))))
            .collect();
        let mut used: Vec<bool> = vec![false; data.dim()];
        for c in &conds {
            if let Condition::Eq { attr, .. } = c {
                used[*attr] = true;
            }
        }
        let min_no = self.params.min_no;
        loop {
            let t = covered.len() as f64;
            let p = covered.iter().filter(|&&i| self.is_pos(i)).count() as f64;
            if t == 0.0 || p == t {
                break;
            }
            let def_ac = (p + 1.0) / (t + 1.0);
            let gain = |p: f64, t: f64| p * (((p + 1.0) / (t + 1.0)).log2() - def_ac.log2());
            let mut best: Option<(f64, Condition)> = None;
            let mut consider = |g: f64, c: Condition| {
                if g > best.as_ref().map_or(0.0, |b| b.0) {
                    best = Some((g, c));
                }
            };
            for attr in 0..data.dim() {
                if data.attributes[attr].is_numeric() {
                    let mut vals: Vec<(f64, bool)> =
                        covered.iter().map(|&i| (data.value(i, attr), self.is_pos(i))).collect();
                    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let min_split = (0.1 * t / data.n_classes as f64).clamp(min_no, 25.0f64.max(min_no));
                    let (mut lp, mut lt) = (0.0, 0.0);
                    for j in 0..vals.len() - 1 {
                        lt += 1.0;
                        if vals[j].1 {
                            lp += 1.0;
                        }
                        if vals[j].0 >= vals[j + 1].0 {
                            continue;
                        }
                        let thr = (vals[j].0 + vals[j + 1].0) / 2.0;
                        if lt >= min_split {
                            consider(gain(lp, lt), Condition::Le { attr, threshold: thr });
                        }
                        if t - lt >= min_split {
                            consider(gain(p - lp, t - lt), Condition::Gt { attr, threshold: thr });
                        }
                    }
                } else if !used[attr] {
                    let arity = data.attributes[attr].arity();
                    let mut vp = vec![0.0; arity];
                    let mut vt = vec![0.0; arity];
                    for &i in &covered {
                        let v = data.value(i, attr);
                        if v >= 0.0 {
                            vt[v as usize] += 1.0;
                            if self.is_pos(i) {
                                vp[v as usize] += 1.0;
                            }
                        }
                    }
                    for v in 0..arity {
                        if vt[v] >= min_no {
                            consider(gain(vp[v], vt[v]), Condition::Eq { attr, value: v as f64 });
                        }
                    }
                }
            }
            let Some((_, cond)) = best else { break };
            if let Condition::Eq { attr, .. } = cond {
                used[attr] = true;
            }
            covered.retain(|&i| cond.covers(data.row(i)));
            conds.push(cond);
        }
        conds
    }

    /// Keeps the prefix maximizing `(p + 1) / (p + n + 2)` on the prune set.
    fn prune(&self, conds: &mut Vec<Condition>, prune: &[usize]) {
        if prune.is_empty() || conds.len() <= 1 {
            return;
        }
        let mut live: Vec<usize> = prune.to_vec();
        let mut best = (f64::NEG_INFINITY, conds.len());
        for (l, c) in conds.iter().enumerate() {
            live.retain(|&i| c.covers(self.data.row(i)));
            let p = live.iter().filter(|&&i| self.is_pos(i)).count() as f64;
            let n = live.len() as f64 - p;
            let worth = (p + 1.0) / (p + n + 2.0);
            if worth > best.0 + 1e-12 {
                best = (worth, l + 1);
            }
        }
        conds.truncate(best.1);
    }

    /// Pruning used during optimization: accuracy of the whole rule set on
    /// the prune data, with `later` rules still in place.
    fn prune_whole(&self, conds: &mut Vec<Condition>, prune: &[usize], later: &[Rule]) {
        if prune.is_empty() || conds.len() <= 1 {
            return;
        }
        let by_later: Vec<bool> = prune.iter().map(|&i| self.covered_by(later, i)).collect();
        let mut live: Vec<bool> = vec![true; prune.len()];
        let mut best = (f64::NEG_INFINITY, conds.len());
        for (l, c) in conds.iter().enumerate() {
            let mut correct = 0.0;
            for (j, &i) in prune.iter().enumerate() {
                live[j] = live[j] && c.covers(self.data.row(i));
                if (live[j] || by_later[j]) == self.is_pos(i) {
                    correct += 1.0;
                }
            }
            let worth = correct / prune.len() as f64;
            if worth > best.0 + 1e-12 {
                best = (worth, l + 1);
            }
        }
        conds.truncate(best.1);
    }

    fn coverage(&self, rule: &Rule, idx: &[usize]) -> (f64, f64) {
        let (mut p, mut n) = (0.0, 0.0);
        for &i in idx {
            if rule.covers(self.data.row(i)) {
                if self.is_pos(i) {
                    p += 1.0;
                } else {
                    n += 1.0;
                }
            }
        }
        (p, n)
    }

    /// Adds rules until positives run out or the description length grows
    /// too far past its minimum.
    fn cover(&self, rules: &mut Vec<Rule>, rng: &mut ChaCha8Rng) {
        let mut min_dl = self.total_dl(rules);
        let mut uncovered: Vec<usize> = self
            .scope
            .iter()
            .copied()
            .filter(|&i| !self.covered_by(rules, i))
            .collect();
        while uncovered.iter().any(|&i| self.is_pos(i)) {
            let (grow, prune) = self.split(&uncovered, rng);
            let mut conds = self.grow(&grow, Vec::new());
            self.prune(&mut conds, &prune);
            if conds.is_empty() {
                break;
            }
            let rule = Rule {
                conditions: conds,
                class: self.class,
            };
            let (p, n) = self.coverage(&rule, &uncovered);
            rules.push(rule);
            let dl = self.total_dl(rules);
            if dl > min_dl + MAX_DL_SURPLUS || p == 0.0 || n / (p + n) >= 0.5 {
                rules.pop();
                break;
            }
            min_dl = min_dl.min(dl);
            let last = rules.last().unwrap();
            uncovered.retain(|&i| !last.covers(self.data.row(i)));
        }
    }

    fn optimize(&self, rules: &mut [Rule], rng: &mut ChaCha8Rng) {
        for i in 0..rules.len() {
            let before: Vec<usize> = self
                .scope
                .iter()
                .copied()
                .filter(|&j| !self.covered_by(&rules[..i], j))
                .collect();
            let (grow, prune) = self.split(&before, rng);
            let later = rules[i + 1..].to_vec();
            let mut replacement = self.grow(&grow, Vec::new());
            self.prune_whole(&mut replacement, &prune, &later);
            let mut revision = self.grow(&grow, rules[i].conditions.clone());
            self.prune_whole(&mut revision, &prune, &later);
            let original = rules[i].clone();
            let mut best = (self.total_dl(rules), original.conditions.clone());
            for cand in [replacement, revision] {
                if cand.is_empty() || cand == original.conditions {
                    continue;
                }
                rules[i].conditions = cand.clone();
                let dl = self.total_dl(rules);
                if dl < best.0 - 1e-9 {
                    best = (dl, cand);
                }
            }
            rules[i].conditions = best.1;
        }
    }

    /// Drops rules, last first, whenever that shortens the description.
    fn reduce_dl(&self, rules: &mut Vec<Rule>) {
        let mut i = rules.len();
        while i > 0 {
            i -= 1;
            let with = self.total_dl(rules);
            let removed = rules.remove(i);
            if self.total_dl(rules) >= with {
                rules.insert(i, removed);
            }
        }
    }

    fn learn(&self, rng: &mut ChaCha8Rng) -> Vec<Rule> {
        let mut rules = Vec::new();
        self.cover(&mut rules, rng);
        for _ in 0..self.params.optimizations {
            if rules.is_empty() {
                break;
            }
            self.optimize(&mut rules, rng);
            self.cover(&mut rules, rng);
        }
        self.reduce_dl(&mut rules);
        rules
    }
}

impl JRip {
    pub fn fit(data: &Instances, params: &JRipParams) -> Self {
        let all: Vec<usize> = (0..data.len()).collect();
        let counts = data.class_counts(&all);
        let mut order: Vec<usize> = (0..data.n_classes).filter(|&c| counts[c] > 0.0).collect();
        order.sort_by(|&a, &b| counts[a].total_cmp(&counts[b]).then(a.cmp(&b)));
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut remaining = all.clone();
        let mut rules = Vec::new();
        for &class in order.iter().take(order.len().saturating_sub(1)) {
            if !remaining.iter().any(|&i| data.y[i] == class) {
                continue;
            }
            let learner = ClassLearner::new(data, class, params, remaining.clone());
            let learned = learner.learn(&mut rng);
            remaining.retain(|&i| !learned.iter().any(|r| r.covers(data.row(i))));
            rules.extend(learned);
        }
        // keep only rules that still cover min_no instances in list order
        let mut kept: Vec<Rule> = Vec::new();
        let mut coverage = Vec::new();
        let mut uncovered = all;
        for r in rules {
            let (hit, miss): (Vec<usize>, Vec<usize>) =
                uncovered.iter().partition(|&&i| r.covers(data.row(i)));
            if hit.len() as f64 >= params.min_no {
                let err = hit.iter().filter(|&&i| data.y[i] != r.class).count();
                coverage.push((hit.len(), err));
                kept.push(r);
                uncovered = miss;
            }
        }
        let default_class = if uncovered.is_empty() {
            argmax(&counts)
        } else {
            argmax(&data.class_counts(&uncovered))
        };
        let err = uncovered.iter().filter(|&&i| data.y[i] != default_class).count();
        coverage.push((uncovered.len(), err));
        JRip {
            rules: kept,
            default_class,
            coverage,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        self.rules
            .iter()
            .find(|r| r.covers(x))
            .map_or(self.default_class, |r| r.class)
    }

    pub fn describe(&self, attrs: &[Attribute], classes: &[String], out: &mut String) {
        let _ = writeln!(out, "JRIP rules:\n===========\n");
        for (r, (n, err)) in self.rules.iter().zip(&self.coverage) {
            let conds: Vec<String> = r.conditions.iter().map(|c| c.show(attrs)).collect();
            let _ = writeln!(out, "{} => class={} ({n}/{err})", conds.join(" and "), classes[r.class]);
        }
        let (n, err) = self.coverage.last().copied().unwrap_or_default();
        let _ = writeln!(out, " => class={} ({n}/{err})", classes[self.default_class]);
        let _ = writeln!(out, "\nNumber of Rules : {}", self.rules.len() + 1);
    }

    /// Attributes tested anywhere in the rule list.
    pub fn attributes_used(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.rules.iter().flat_map(|r| r.conditions.iter().map(Condition::attr)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}
