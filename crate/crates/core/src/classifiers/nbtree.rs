use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::c45::{numeric_candidate, partition, Test};
use super::encode::{argmax, Attribute, Instances};
use super::naive_bayes::{precision, NaiveBayes};
use super::spec::NbTreeParams;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum NbNode {
    Leaf {
        nb: NaiveBayes,
        n: usize,
    },
    Split {
        test: Test,
        n: usize,
        children: Vec<NbNode>,
        majority_child: usize,
    },
}

impl NbNode {
    pub fn size(&self) -> usize {
        match self {
            NbNode::Leaf { .. } => 1,
            NbNode::Split { children, .. } => 1 + children.iter().map(NbNode::size).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            NbNode::Leaf { .. } => 1,
            NbNode::Split { children, .. } => children.iter().map(NbNode::leaves).sum(),
        }
    }
}

/// Decision tree with naive Bayes leaves.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NbTree {
    pub root: NbNode,
}

struct Ctx<'a> {
    data: &'a Instances,
    precisions: Vec<f64>,
    params: &'a NbTreeParams,
}

impl Ctx<'_> {
    /// Misclassifications of naive Bayes under k-fold cross-validation.
    fn cv_errors(&self, idx: &[usize]) -> usize {
        let n = idx.len();
        if n < 2 {
            return n;
        }
        let folds = self.params.cv_folds.min(n);
        let mut order = idx.to_vec();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.params.seed));
        let mut errors = 0;
        for f in 0..folds {
            let (test, train): (Vec<(usize, usize)>, Vec<(usize, usize)>) =
                order.iter().copied().enumerate().partition(|(p, _)| p % folds == f);
            let train: Vec<usize> = train.into_iter().map(|(_, i)| i).collect();
            let nb = NaiveBayes::fit_with_precision(self.data, &train, &self.precisions);
            errors += test
                .iter()
                .filter(|(_, i)| argmax(&nb.log_joint(self.data.row(*i))) != self.data.y[*i])
                .count();
        }
        errors
    }

    fn leaf(&self, idx: &[usize]) -> NbNode {
        NbNode::Leaf {
            nb: NaiveBayes::fit_with_precision(self.data, idx, &self.precisions),
            n: idx.len(),
        }
    }

    fn candidate(&self, idx: &[usize], attr: usize) -> Option<Test> {
        if self.data.attributes[attr].is_numeric() {
            numeric_candidate(self.data, idx, attr, 2).map(|c| c.test)
        } else {
            Some(Test::Nominal { attr })
        }
    }

    fn grow(&self, idx: Vec<usize>) -> NbNode {
        let counts = self.data.class_counts(&idx);
        let n = idx.len();
        if n < self.params.min_instances || counts.iter().filter(|&&c| c > 0.0).count() < 2 {
            return self.leaf(&idx);
        }
        let here = self.cv_errors(&idx);
        if here == 0 {
            return self.leaf(&idx);
        }
        let mut best: Option<(usize, Test, Vec<Vec<usize>>)> = None;
        for attr in 0..self.data.dim() {
            let Some(test) = self.candidate(&idx, attr) else {
                continue;
            };
            let parts = partition(self.data, &idx, &test);
            if parts.iter().filter(|p| !p.is_empty()).count() < 2 {
                continue;
            }
            let errors: usize = parts.iter().map(|p| self.cv_errors(p)).sum();
            if best.as_ref().map_or(true, |(e, _, _)| errors < *e) {
                best = Some((errors, test, parts));
            }
        }
        match best {
            Some((errors, test, parts))
                if (here as f64 - errors as f64) / here as f64 >= self.params.min_relative_gain
                    && errors < here =>
            {
                let majority_child = argmax(&parts.iter().map(|p| p.len() as f64).collect::<Vec<_>>());
                let children = parts
                    .into_iter()
                    .map(|p| if p.is_empty() { self.leaf(&idx) } else { self.grow(p) })
                    .collect();
                NbNode::Split {
                    test,
                    n,
                    children,
                    majority_child,
                }
            }
            _ => self.leaf(&idx),
        }
    }
}

impl NbTree {
    pub fn fit(data: &Instances, params: &NbTreeParams) -> Self {
        let idx: Vec<usize> = (0..data.len()).collect();
        let ctx = Ctx {
            data,
            precisions: (0..data.dim()).map(|a| precision(data, &idx, a)).collect(),
            params,
        };
        NbTree { root: ctx.grow(idx) }
    }

    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        let mut node = &self.root;
        loop {
            match node {
                NbNode::Leaf { nb, .. } => return nb.posterior(x),
                NbNode::Split {
                    test,
                    children,
                    majority_child,
                    ..
                } => {
                    let b = test
                        .branch(x)
                        .filter(|&b| b < children.len())
                        .unwrap_or(*majority_child);
                    node = &children[b];
                }
            }
        }
    }

    pub fn describe(&self, attrs: &[Attribute], out: &mut String) {
        let _ = writeln!(out, "NBTree\n------------------\n");
        let mut leaf_no = 0;
        dump(&self.root, attrs, 0, &mut leaf_no, out);
        let _ = writeln!(out, "\nNumber of Leaves  : {}", self.root.leaves());
        let _ = writeln!(out, "Size of the tree : {}", self.root.size());
    }
}

fn dump(node: &NbNode, attrs: &[Attribute], depth: usize, leaf_no: &mut usize, out: &mut String) {
    match node {
        NbNode::Leaf { n, .. } => {
            *leaf_no += 1;
            let _ = writeln!(out, "{}: NB{} ({n})", "|   ".repeat(depth), leaf_no);
        }
        NbNode::Split { test, children, .. } => {
            for (b, child) in children.iter().enumerate() {
                let _ = write!(out, "{}{}", "|   ".repeat(depth), test.label(attrs, b));
                if let NbNode::Leaf { n, .. } = child {
                    *leaf_no += 1;
                    let _ = writeln!(out, ": NB{} ({n})", leaf_no);
                } else {
                    out.push('\n');
                    dump(child, attrs, depth + 1, leaf_no, out);
                }
            }
        }
    }
}
