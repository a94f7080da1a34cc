use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::encode::{argmax, Instances};

/// Instance-based learner over stored, normalized training rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Lbk {
    pub k: usize,
    pub dim: usize,
    pub nominal: Vec<bool>,
    pub x: Vec<f64>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

/// Squared distance: numeric differences squared, nominal mismatches 1.
pub fn distance(a: &[f64], b: &[f64], nominal: &[bool]) -> f64 {
    let mut d = 0.0;
    for ((x, z), &nom) in a.iter().zip(b).zip(nominal) {
        if nom {
            if x != z || *x < 0.0 {
                d += 1.0;
            }
        } else {
            let t = x - z;
            d += t * t;
        }
    }
    d
}

impl Lbk {
    pub fn fit(data: &Instances, k: usize, window: usize, cross_validate: bool) -> Self {
        let start = if window > 0 && data.len() > window { data.len() - window } else { 0 };
        let idx: Vec<usize> = (start..data.len()).collect();
        let kept = data.subset(&idx);
        let mut model = Lbk {
            k,
            dim: data.dim(),
            nominal: data.attributes.iter().map(|a| !a.is_numeric()).collect(),
            x: kept.x,
            y: kept.y,
            n_classes: data.n_classes,
        };
        if cross_validate && k > 1 {
            model.k = model.best_k_loo(k);
        }
        model
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    /// Distances to every stored row, sorted ascending (ties by row index).
    fn ranked(&self, x: &[f64], skip: Option<usize>) -> Vec<(f64, usize)> {
        let mut d: Vec<(f64, usize)> = (0..self.len())
            .filter(|&i| Some(i) != skip)
            .map(|i| (distance(x, self.row(i), &self.nominal), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d
    }

    /// Majority vote over every row within the k-th smallest distance.
    fn vote(&self, ranked: &[(f64, usize)], k: usize) -> usize {
        if ranked.is_empty() {
            return 0;
        }
        let cutoff = ranked[k.min(ranked.len()) - 1].0;
        let mut votes = vec![0.0; self.n_classes];
        for &(_, i) in ranked.iter().take_while(|(d, _)| *d <= cutoff) {
            votes[self.y[i]] += 1.0;
        }
        argmax(&votes)
    }

    fn best_k_loo(&self, max_k: usize) -> usize {
        let mut correct = vec![0usize; max_k + 1];
        for i in 0..self.len() {
            let r = self.ranked(self.row(i), Some(i));
            for (k, c) in correct.iter_mut().enumerate().skip(1) {
                if self.vote(&r, k) == self.y[i] {
                    *c += 1;
                }
            }
        }
        (1..=max_k).fold(1, |best, k| if correct[k] > correct[best] { k } else { best })
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        if self.k == 1 {
            // single pass: collect the rows tied at the minimum distance
            let mut best = f64::INFINITY;
            let mut votes = vec![0.0; self.n_classes];
            for i in 0..self.len() {
                let d = distance(x, self.row(i), &self.nominal);
                if d < best {
                    best = d;
                    votes.iter_mut().for_each(|v| *v = 0.0);
                }
                if d == best {
                    votes[self.y[i]] += 1.0;
                }
            }
            return argmax(&votes);
        }
        self.vote(&self.ranked(x, None), self.k)
    }

    pub fn describe(&self, out: &mut String) {
        let _ = writeln!(out, "LBk instance-based learner");
        let _ = writeln!(out, "  k = {}", self.k);
        let _ = writeln!(out, "  stored instances: {}", self.len());
        let _ = writeln!(out, "  attributes: {} ({} nominal)", self.dim, self.nominal.iter().filter(|&&n| n).count());
    }
}
