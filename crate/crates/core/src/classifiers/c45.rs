use std::fmt::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::encode::{argmax, Attribute, Instances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Test {
    /// One child per domain value.
    Nominal { attr: usize },
    /// Child 0 takes `value <= threshold`, child 1 the rest.
    Numeric { attr: usize, threshold: f64 },
}

impl Test {
    pub fn attr(&self) -> usize {
        match self {
            Test::Nominal { attr } | Test::Numeric { attr, .. } => *attr,
        }
    }

    /// Child index for an encoded value, `None` for a nominal value outside
    /// the training domain.
    pub fn branch(&self, x: &[f64]) -> Option<usize> {
        match *self {
            Test::Nominal { attr } => {
                let v = x[attr];
                (v >= 0.0).then_some(v as usize)
            }
            Test::Numeric { attr, threshold } => Some(usize::from(x[attr] > threshold)),
        }
    }

    pub(crate) fn label(&self, attrs: &[Attribute], child: usize) -> String {
        match *self {
            Test::Nominal { attr } => {
                let a = &attrs[attr];
                format!("{} = {}", a.name, a.show(child as f64))
            }
            Test::Numeric { attr, threshold } => {
                let op = if child == 0 { "<=" } else { ">" };
                format!("{} {op} {threshold}", attrs[attr].name)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        counts: Vec<f64>,
        class: usize,
    },
    Split {
        test: Test,
        counts: Vec<f64>,
        children: Vec<Node>,
        /// Child with the most training instances; takes unseen values.
        majority_child: usize,
    },
}

impl Node {
    pub fn counts(&self) -> &[f64] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => counts,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => 1 + children.iter().map(Node::size).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { children, .. } => children.iter().map(Node::leaves).sum(),
        }
    }

    pub fn leaf_for(&self, x: &[f64]) -> &Node {
        let mut node = self;
        while let Node::Split {
            test,
            children,
            majority_child,
            ..
        } = node
        {
            let b = test
                .branch(x)
                .filter(|&b| b < children.len())
                .unwrap_or(*majority_child);
            node = &children[b];
        }
        node
    }

    fn majority(&self) -> usize {
        argmax(self.counts())
    }

    fn training_errors(&self) -> f64 {
        match self {
            Node::Leaf { counts, class } => counts.iter().sum::<f64>() - counts[*class],
            Node::Split { children, .. } => children.iter().map(Node::training_errors).sum(),
        }
    }

    fn make_leaf(&mut self) {
        let counts = self.counts().to_vec();
        let class = argmax(&counts);
        *self = Node::Leaf { counts, class };
    }
}

pub(crate) fn entropy(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    if n <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Clone, Debug)]
pub(crate) struct Candidate {
    pub test: Test,
    pub gain: f64,
    pub gain_ratio: f64,
}

fn split_entropy(counts: &[Vec<f64>], total: f64) -> (f64, f64) {
    let mut after = 0.0;
    let sizes: Vec<f64> = counts.iter().map(|c| c.iter().sum()).collect();
    for (c, s) in counts.iter().zip(&sizes) {
        after += s / total * entropy(c);
    }
    (after, entropy(&sizes))
}

pub(crate) fn nominal_candidate(data: &Instances, idx: &[usize], attr: usize, min_obj: usize) -> Option<Candidate> {
    let arity = data.attributes[attr].arity();
    let mut counts = vec![vec![0.0; data.n_classes]; arity];
    for &i in idx {
        let v = data.value(i, attr);
        if v >= 0.0 {
            counts[v as usize][data.y[i]] += 1.0;
        }
    }
    let big = counts
        .iter()
        .filter(|c| c.iter().sum::<f64>() >= min_obj as f64)
        .count();
    if big < 2 {
        return None;
    }
    let n = idx.len() as f64;
    let parent = data.class_counts(idx);
    let (after, split_info) = split_entropy(&counts, n);
    let gain = entropy(&parent) - after;
    Some(Candidate {
        test: Test::Nominal { attr },
        gain,
        gain_ratio: if split_info > 0.0 { gain / split_info } else { 0.0 },
    })
}

/// Best binary threshold by information gain, with the C4.5 MDL correction
/// for the number of candidate thresholds.
pub(crate) fn numeric_candidate(data: &Instances, idx: &[usize], attr: usize, min_obj: usize) -> Option<Candidate> {
    let k = data.n_classes;
    let n = idx.len();
    let mut order: Vec<(f64, usize)> = idx.iter().map(|&i| (data.value(i, attr), data.y[i])).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let min_split = (0.1 * n as f64 / k as f64).clamp(min_obj as f64, 25.0);
    let total = data.class_counts(idx);
    let parent_ent = entropy(&total);
    let mut left = vec![0.0; k];
    let mut right = total.clone();
    let mut best: Option<(f64, usize)> = None;
    let mut candidates = 0usize;
    for i in 0..n - 1 {
        left[order[i].1] += 1.0;
        right[order[i].1] -= 1.0;
        if order[i].0 >= order[i + 1].0 {
            continue;
        }
        let nl = (i + 1) as f64;
        if nl < min_split || (n as f64 - nl) < min_split {
            continue;
        }
        candidates += 1;
        let after = (nl * entropy(&left) + (n as f64 - nl) * entropy(&right)) / n as f64;
        let gain = parent_ent - after;
        if best.map_or(true, |(g, _)| gain > g) {
            best = Some((gain, i));
        }
    }
    let (gain, at) = best?;
    let gain = gain - (candidates as f64).log2() / n as f64;
    if gain <= 0.0 {
        return None;
    }
    let nl = (at + 1) as f64;
    let split_info = entropy(&[nl, n as f64 - nl]);
    Some(Candidate {
        test: Test::Numeric {
            attr,
            threshold: (order[at].0 + order[at + 1].0) / 2.0,
        },
        gain,
        gain_ratio: if split_info > 0.0 { gain / split_info } else { 0.0 },
    })
}

/// Gain-ratio selection restricted to attributes whose gain reaches the
/// average gain of all valid splits. Ties keep the lowest attribute index.
pub(crate) fn select_split(data: &Instances, idx: &[usize], min_obj: usize) -> Option<Test> {
    let cands: Vec<Candidate> = (0..data.dim())
        .filter_map(|a| {
            if data.attributes[a].is_numeric() {
                numeric_candidate(data, idx, a, min_obj)
            } else {
                nominal_candidate(data, idx, a, min_obj)
            }
        })
        .collect();
    if cands.is_empty() {
        return None;
    }
    let avg = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
    let mut best: Option<&Candidate> = None;
    for c in &cands {
        if c.gain >= avg - 1e-3 && c.gain_ratio > best.map_or(0.0, |b| b.gain_ratio) {
            best = Some(c);
        }
    }
    best.map(|c| c.test.clone())
}

pub(crate) fn partition(data: &Instances, idx: &[usize], test: &Test) -> Vec<Vec<usize>> {
    let arity = match test {
        Test::Nominal { attr } => data.attributes[*attr].arity(),
        Test::Numeric { .. } => 2,
    };
    let mut parts = vec![Vec::new(); arity];
    for &i in idx {
        if let Some(b) = test.branch(data.row(i)) {
            parts[b].push(i);
        }
    }
    parts
}

/// Upper confidence bound on extra errors at a leaf (C4.5's pessimistic
/// estimate).
pub fn add_errs(n: f64, e: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (add_errs(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(1.0 - cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    (r * n - e).max(0.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct J48 {
    pub root: Node,
    pub pruned: bool,
}

impl J48 {
    pub fn fit(data: &Instances, confidence: f64, unpruned: bool, min_obj: usize) -> Self {
        let idx: Vec<usize> = (0..data.len()).collect();
        let mut root = grow(data, idx, min_obj, 0);
        collapse(&mut root);
        if !unpruned {
            prune(&mut root, confidence);
        }
        J48 {
            root,
            pruned: !unpruned,
        }
    }

    pub fn distribution(&self, x: &[f64]) -> (usize, Vec<f64>) {
        leaf_distribution(self.root.leaf_for(x))
    }

    pub fn describe(&self, attrs: &[Attribute], classes: &[String], out: &mut String) {
        let title = if self.pruned { "J48 pruned tree" } else { "J48 unpruned tree" };
        let _ = writeln!(out, "{title}\n------------------\n");
        dump(&self.root, attrs, classes, 0, out);
        let _ = writeln!(out, "\nNumber of Leaves  : {}", self.root.leaves());
        let _ = writeln!(out, "Size of the tree : {}", self.root.size());
    }
}

pub(crate) fn leaf_distribution(leaf: &Node) -> (usize, Vec<f64>) {
    match leaf {
        Node::Leaf { counts, class } => {
            let n: f64 = counts.iter().sum();
            let dist = if n > 0.0 {
                counts.iter().map(|c| c / n).collect()
            } else {
                let mut d = vec![0.0; counts.len()];
                d[*class] = 1.0;
                d
            };
            (*class, dist)
        }
        Node::Split { .. } => unreachable!("leaf_for returns leaves"),
    }
}

fn grow(data: &Instances, idx: Vec<usize>, min_obj: usize, parent_class: usize) -> Node {
    let counts = data.class_counts(&idx);
    if idx.is_empty() {
        return Node::Leaf {
            counts,
            class: parent_class,
        };
    }
    let class = argmax(&counts);
    let n = idx.len() as f64;
    if counts[class] == n || n < 2.0 * min_obj as f64 {
        return Node::Leaf { counts, class };
    }
    let Some(test) = select_split(data, &idx, min_obj) else {
        return Node::Leaf { counts, class };
    };
    let parts = partition(data, &idx, &test);
    let majority_child = argmax(&parts.iter().map(|p| p.len() as f64).collect::<Vec<_>>());
    let children = parts
        .into_iter()
        .map(|p| grow(data, p, min_obj, class))
        .collect();
    Node::Split {
        test,
        counts,
        children,
        majority_child,
    }
}

fn collapse(node: &mut Node) {
    let Node::Split { counts, .. } = node else {
        return;
    };
    let here = counts.iter().sum::<f64>() - counts[argmax(counts)];
    if node.training_errors() >= here - 1e-3 {
        node.make_leaf();
    } else if let Node::Split { children, .. } = node {
        children.iter_mut().for_each(collapse);
    }
}

fn estimated_errors(node: &Node, cf: f64) -> f64 {
    match node {
        Node::Leaf { .. } => leaf_estimate(node.counts(), cf),
        Node::Split { children, .. } => children.iter().map(|c| estimated_errors(c, cf)).sum(),
    }
}

fn leaf_estimate(counts: &[f64], cf: f64) -> f64 {
    let n: f64 = counts.iter().sum();
    if n == 0.0 {
        return 0.0;
    }
    let e = n - counts[argmax(counts)];
    e + add_errs(n, e, cf)
}

fn prune(node: &mut Node, cf: f64) {
    if let Node::Split { children, .. } = node {
        children.iter_mut().for_each(|c| prune(c, cf));
        let as_leaf = leaf_estimate(node.counts(), cf);
        if as_leaf <= estimated_errors(node, cf) + 0.1 {
            let class = node.majority();
            let counts = node.counts().to_vec();
            *node = Node::Leaf { counts, class };
        }
    }
}

pub(crate) fn dump(node: &Node, attrs: &[Attribute], classes: &[String], depth: usize, out: &mut String) {
    let Node::Split { test, children, .. } = node else {
        let _ = writeln!(out, ": {}", leaf_text(node, classes));
        return;
    };
    for (b, child) in children.iter().enumerate() {
        let _ = write!(out, "{}{}", "|   ".repeat(depth), test.label(attrs, b));
        match child {
            Node::Leaf { .. } => {
                let _ = writeln!(out, ": {}", leaf_text(child, classes));
            }
            Node::Split { .. } => {
                out.push('\n');
                dump(child, attrs, classes, depth + 1, out);
            }
        }
    }
}

fn leaf_text(node: &Node, classes: &[String]) -> String {
    let Node::Leaf { counts, class } = node else {
        unreachable!()
    };
    let n: f64 = counts.iter().sum();
    let e = n - counts[*class];
    if e > 0.0 {
        format!("{} ({n:.1}/{e:.1})", classes[*class])
    } else {
        format!("{} ({n:.1})", classes[*class])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_errs_reference_values() {
        // e = 0: n * (1 - cf^(1/n))
        assert!((add_errs(6.0, 0.0, 0.25) - 6.0 * (1.0 - 0.25f64.powf(1.0 / 6.0))).abs() < 1e-12);
        // z(0.75) = 0.6744897501960817
        let z: f64 = 0.6744897501960817;
        let (n, e) = (14.0, 5.0);
        let f = (e + 0.5) / n;
        let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
        assert!((add_errs(n, e, 0.25) - (r * n - e)).abs() < 1e-9);
        assert_eq!(add_errs(3.0, 3.0, 0.25), 0.0);
    }

    #[test]
    fn entropy_basics() {
        assert_eq!(entropy(&[4.0, 0.0]), 0.0);
        assert!((entropy(&[2.0, 2.0]) - 1.0).abs() < 1e-12);
    }
}
