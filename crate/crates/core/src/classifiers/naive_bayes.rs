use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::encode::{normalize, Attribute, Instances};

/// Per-attribute class-conditional estimator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Estimator {
    /// Mean and standard deviation per class.
    Gaussian { mean: Vec<f64>, std: Vec<f64> },
    /// Add-one smoothed value probabilities per class; the last slot of each
    /// row is reserved for values unseen in training.
    Discrete { probs: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub log_prior: Vec<f64>,
    pub estimators: Vec<Estimator>,
}

const DEFAULT_PRECISION: f64 = 0.01;

/// Spacing of distinct values; the Gaussian standard deviation never drops
/// below a sixth of it.
pub(crate) fn precision(data: &Instances, idx: &[usize], a: usize) -> f64 {
    let mut v: Vec<f64> = idx.iter().map(|&i| data.value(i, a)).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() < 2 {
        DEFAULT_PRECISION
    } else {
        (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64
    }
}

impl NaiveBayes {
    pub fn fit(data: &Instances) -> Self {
        let idx: Vec<usize> = (0..data.len()).collect();
        Self::fit_subset(data, &idx)
    }

    pub fn fit_subset(data: &Instances, idx: &[usize]) -> Self {
        let precisions: Vec<f64> = (0..data.dim()).map(|a| precision(data, idx, a)).collect();
        Self::fit_with_precision(data, idx, &precisions)
    }

    /// As [`fit_subset`](Self::fit_subset) with precomputed value spacings.
    pub(crate) fn fit_with_precision(data: &Instances, idx: &[usize], precisions: &[f64]) -> Self {
        let k = data.n_classes;
        let counts = data.class_counts(idx);
        let n = idx.len() as f64;
        let log_prior = counts
            .iter()
            .map(|c| ((c + 1.0) / (n + k as f64)).ln())
            .collect();
        let estimators = data
            .attributes
            .iter()
            .enumerate()
            .map(|(a, attr)| match attr.nominal() {
                None => {
                    let floor = precisions[a] / 6.0;
                    let mut mean = vec![0.0; k];
                    for &i in idx {
                        mean[data.y[i]] += data.value(i, a);
                    }
                    for c in 0..k {
                        if counts[c] > 0.0 {
                            mean[c] /= counts[c];
                        }
                    }
                    let mut sq = vec![0.0; k];
                    for &i in idx {
                        let d = data.value(i, a) - mean[data.y[i]];
                        sq[data.y[i]] += d * d;
                    }
                    let std = (0..k)
                        .map(|c| {
                            if counts[c] > 0.0 {
                                (sq[c] / counts[c]).sqrt().max(floor)
                            } else {
                                floor
                            }
                        })
                        .collect();
                    Estimator::Gaussian { mean, std }
                }
                Some(dom) => {
                    let slots = dom.len() + 1;
                    let mut probs = vec![vec![1.0; slots]; k];
                    for &i in idx {
                        let v = data.value(i, a);
                        let s = if v < 0.0 { slots - 1 } else { v as usize };
                        probs[data.y[i]][s] += 1.0;
                    }
                    for row in &mut probs {
                        let t: f64 = row.iter().sum();
                        row.iter_mut().for_each(|p| *p /= t);
                    }
                    Estimator::Discrete { probs }
                }
            })
            .collect();
        NaiveBayes {
            log_prior,
            estimators,
        }
    }

    /// Unnormalized log joint per class.
    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        let mut lp = self.log_prior.clone();
        for (e, &v) in self.estimators.iter().zip(x) {
            match e {
                Estimator::Gaussian { mean, std } => {
                    for c in 0..lp.len() {
                        lp[c] += log_normal_pdf(v, mean[c], std[c]);
                    }
                }
                Estimator::Discrete { probs } => {
                    for c in 0..lp.len() {
                        let row = &probs[c];
                        let s = if v < 0.0 || v as usize >= row.len() - 1 {
                            row.len() - 1
                        } else {
                            v as usize
                        };
                        lp[c] += row[s].ln();
                    }
                }
            }
        }
        lp
    }

    pub fn posterior(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.log_joint(x))
    }

    pub fn describe(&self, attrs: &[Attribute], classes: &[String], out: &mut String) {
        let _ = writeln!(out, "Naive Bayes");
        for (c, lp) in classes.iter().zip(&self.log_prior) {
            let _ = writeln!(out, "  prior {c}: {:.6}", lp.exp());
        }
        for (attr, e) in attrs.iter().zip(&self.estimators) {
            match e {
                Estimator::Gaussian { mean, std } => {
                    let _ = writeln!(out, "  {} (gaussian)", attr.name);
                    for (c, name) in classes.iter().enumerate() {
                        let _ = writeln!(out, "    {name}: mean {:.6} std {:.6}", mean[c], std[c]);
                    }
                }
                Estimator::Discrete { probs } => {
                    let _ = writeln!(out, "  {} (discrete, {} values)", attr.name, probs[0].len() - 1);
                }
            }
        }
    }
}

pub(crate) fn log_normal_pdf(x: f64, mean: f64, std: f64) -> f64 {
    let z = (x - mean) / std;
    -0.5 * z * z - std.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub(crate) fn softmax(log: &[f64]) -> Vec<f64> {
    let m = log.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log.iter().map(|l| (l - m).exp()).collect();
    normalize(&mut p);
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::encode::AttrKind;

    fn toy() -> Instances {
        let attrs = vec![Attribute {
            name: "x".into(),
            source: 0,
            kind: AttrKind::Numeric,
        }];
        Instances::new(attrs, vec![0.0, 0.0, 2.0, 8.0, 10.0, 12.0], vec![0, 0, 0, 1, 1, 1], 2)
    }

    #[test]
    fn closed_form_gaussian() {
        let nb = NaiveBayes::fit(&toy());
        // class 0: mean 2/3, population variance 8/9; class 1: mean 10, variance 8/3
        let pdf = |x: f64, m: f64, v: f64| (-(x - m).powi(2) / (2.0 * v)).exp() / (2.0 * std::f64::consts::PI * v).sqrt();
        for x in [1.0, 9.0] {
            let a = 0.5 * pdf(x, 2.0 / 3.0, 8.0 / 9.0);
            let b = 0.5 * pdf(x, 10.0, 8.0 / 3.0);
            let p = nb.posterior(&[x]);
            assert!((p[0] - a / (a + b)).abs() < 1e-9, "{p:?}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(nb.posterior(&[1.0])[0] > 0.5);
        assert!(nb.posterior(&[9.0])[1] > 0.5);
    }

    #[test]
    fn extreme_inputs_stay_finite() {
        let nb = NaiveBayes::fit(&toy());
        let p = nb.posterior(&[1e12]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
