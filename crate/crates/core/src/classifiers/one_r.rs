use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::encode::{argmax, Attribute, Instances};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OneRRule {
    /// Class per nominal value; `fallback` covers values unseen in training.
    Nominal { classes: Vec<usize>, fallback: usize },
    /// Bucket `b` holds values above `breakpoints[b - 1]` and at most
    /// `breakpoints[b]`.
    Numeric { breakpoints: Vec<f64>, classes: Vec<usize> },
}

impl OneRRule {
    pub fn predict(&self, v: f64) -> usize {
        match self {
            OneRRule::Nominal { classes, fallback } => {
                if v >= 0.0 && (v as usize) < classes.len() {
                    classes[v as usize]
                } else {
                    *fallback
                }
            }
            OneRRule::Numeric { breakpoints, classes } => {
                classes[breakpoints.partition_point(|b| *b < v)]
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OneR {
    pub attr: usize,
    pub rule: OneRRule,
    /// Training errors of the best rule for every attribute.
    pub errors: Vec<f64>,
    pub rules: Vec<OneRRule>,
}

fn nominal_rule(data: &Instances, attr: usize, majority: usize) -> (OneRRule, f64) {
    let arity = data.attributes[attr].arity();
    let mut counts = vec![vec![0.0; data.n_classes]; arity];
    for i in 0..data.len() {
        let v = data.value(i, attr);
        if v >= 0.0 {
            counts[v as usize][data.y[i]] += 1.0;
        }
    }
    let mut errors = 0.0;
    let classes = counts
        .iter()
        .map(|c| {
            let n: f64 = c.iter().sum();
            if n == 0.0 {
                return majority;
            }
            let best = argmax(c);
            errors += n - c[best];
            best
        })
        .collect();
    (
        OneRRule::Nominal {
            classes,
            fallback: majority,
        },
        errors,
    )
}

fn numeric_rule(data: &Instances, attr: usize, min_bucket: usize) -> (OneRRule, f64) {
    let k = data.n_classes;
    let mut order: Vec<(f64, usize)> = (0..data.len()).map(|i| (data.value(i, attr), data.y[i])).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let n = order.len();
    let mut buckets: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut breakpoints = Vec::new();
    let mut i = 0;
    let add_group = |i: &mut usize, counts: &mut [f64]| {
        let v = order[*i].0;
        while *i < n && order[*i].0 == v {
            counts[order[*i].1] += 1.0;
            *i += 1;
        }
    };
    while i < n {
        let mut counts = vec![0.0; k];
        let mut maj;
        loop {
            add_group(&mut i, &mut counts);
            maj = argmax(&counts);
            if i >= n || counts[maj] >= min_bucket as f64 {
                break;
            }
        }
        // extend by whole value groups whose own majority is the bucket class
        while i < n && group_majority(&order, i, k) == maj {
            add_group(&mut i, &mut counts);
            maj = argmax(&counts);
        }
        if i < n {
            breakpoints.push((order[i - 1].0 + order[i].0) / 2.0);
        }
        buckets.push((counts, maj));
    }
    // merge neighbours predicting the same class
    let mut merged_bp = Vec::new();
    let mut classes = Vec::new();
    let mut errors = 0.0;
    let mut acc: Option<(Vec<f64>, usize)> = None;
    for (b, (counts, cls)) in buckets.into_iter().enumerate() {
        match &mut acc {
            Some((c, ac)) if *ac == cls => {
                c.iter_mut().zip(&counts).for_each(|(a, x)| *a += x);
            }
            _ => {
                if let Some((c, ac)) = acc.take() {
                    errors += c.iter().sum::<f64>() - c[ac];
                    classes.push(ac);
                    merged_bp.push(breakpoints[b - 1]);
                }
                acc = Some((counts, cls));
            }
        }
    }
    if let Some((c, ac)) = acc {
        errors += c.iter().sum::<f64>() - c[ac];
        classes.push(ac);
    }
    if classes.is_empty() {
        classes.push(0);
    }
    (
        OneRRule::Numeric {
            breakpoints: merged_bp,
            classes,
        },
        errors,
    )
}

fn group_majority(order: &[(f64, usize)], start: usize, k: usize) -> usize {
    let v = order[start].0;
    let mut counts = vec![0.0; k];
    for &(_, c) in order[start..].iter().take_while(|(x, _)| *x == v) {
        counts[c] += 1.0;
    }
    argmax(&counts)
}

impl OneR {
    pub fn fit(data: &Instances, min_bucket: usize) -> Self {
        let majority = argmax(&data.class_counts(&(0..data.len()).collect::<Vec<_>>()));
        let (rules, errors): (Vec<OneRRule>, Vec<f64>) = (0..data.dim())
            .map(|a| {
                if data.attributes[a].is_numeric() {
                    numeric_rule(data, a, min_bucket)
                } else {
                    nominal_rule(data, a, majority)
                }
            })
            .unzip();
        let attr = argmin(&errors);
        OneR {
            attr,
            rule: rules[attr].clone(),
            errors,
            rules,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        self.rule.predict(x[self.attr])
    }

    pub fn describe(&self, attrs: &[Attribute], classes: &[String], n: usize, out: &mut String) {
        let attr = &attrs[self.attr];
        let _ = writeln!(out, "{}:", attr.name);
        match &self.rule {
            OneRRule::Nominal { classes: cls, .. } => {
                for (v, c) in cls.iter().enumerate() {
                    let _ = writeln!(out, "\t{}\t-> {}", attr.show(v as f64), classes[*c]);
                }
            }
            OneRRule::Numeric { breakpoints, classes: cls } => {
                for (b, c) in cls.iter().enumerate() {
                    let cond = match breakpoints.get(b) {
                        Some(bp) => format!("<= {bp}"),
                        None if b > 0 => format!("> {}", breakpoints[b - 1]),
                        None => "any".to_string(),
                    };
                    let _ = writeln!(out, "\t{cond}\t-> {}", classes[*c]);
                }
            }
        }
        let correct = n as f64 - self.errors[self.attr];
        let _ = writeln!(out, "({correct}/{n} instances correct)");
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}
