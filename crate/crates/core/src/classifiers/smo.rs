use std::fmt::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::encode::Instances;
use super::spec::SmoParams;

/// Rows of the kernel matrix kept in memory at once (in f64 cells).
const CACHE_CELLS: usize = 20_000_000;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn kernel(a: &[f64], b: &[f64], degree: u32) -> f64 {
    dot(a, b).powi(degree as i32)
}

struct KernelRows<'a> {
    rows: &'a [&'a [f64]],
    degree: u32,
    slots: Vec<Option<Arc<Vec<f64>>>>,
    resident: std::collections::VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(rows: &'a [&'a [f64]], degree: u32) -> Self {
        let n = rows.len().max(1);
        KernelRows {
            rows,
            degree,
            slots: vec![None; rows.len()],
            resident: Default::default(),
            capacity: (CACHE_CELLS / n).clamp(2, n),
        }
    }

    fn row(&mut self, i: usize) -> Arc<Vec<f64>> {
        if let Some(r) = &self.slots[i] {
            return r.clone();
        }
        if self.resident.len() >= self.capacity {
            if let Some(old) = self.resident.pop_front() {
                self.slots[old] = None;
            }
        }
        let xi = self.rows[i];
        let r = Arc::new(self.rows.iter().map(|xj| kernel(xi, xj, self.degree)).collect::<Vec<f64>>());
        self.slots[i] = Some(r.clone());
        self.resident.push_back(i);
        r
    }
}

/// One binary subproblem of the one-vs-one decomposition. Class `classes.0`
/// is the positive side.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairModel {
    pub classes: (usize, usize),
    /// Training rows of this subproblem.
    pub indices: Vec<usize>,
    pub y: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Decision value is `sum(alpha_i y_i K(x_i, x)) - rho`.
    pub rho: f64,
    pub iterations: usize,
    /// Primal weights, kept for the linear kernel.
    pub weights: Option<Vec<f64>>,
    /// `(alpha_i * y_i, x_i)` for support vectors of non-linear kernels.
    pub support: Vec<(f64, Vec<f64>)>,
    pub degree: u32,
}

impl PairModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        match &self.weights {
            Some(w) => dot(w, x) - self.rho,
            None => {
                self.support
                    .iter()
                    .map(|(c, sv)| c * kernel(sv, x, self.degree))
                    .sum::<f64>()
                    - self.rho
            }
        }
    }

    pub fn support_vectors(&self, eps: f64) -> usize {
        self.alpha.iter().filter(|&&a| a > eps).count()
    }
}

/// Dual coordinate ascent on the two-variable subproblem picked by the
/// maximal violating pair rule. Returns `(alpha, rho, iterations)`.
pub fn solve(rows: &[&[f64]], y: &[f64], c: f64, tol: f64, degree: u32, eps: f64) -> (Vec<f64>, f64, usize) {
    let n = rows.len();
    let mut alpha = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let diag: Vec<f64> = rows.iter().map(|x| kernel(x, x, degree)).collect();
    let mut cache = KernelRows::new(rows, degree);
    let max_iter = (100 * n).max(10_000_000);
    let mut iter = 0;
    while iter < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * g[t];
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
            if up && v > gmax {
                gmax = v;
                i = t;
            }
            if low && v < gmin {
                gmin = v;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            break;
        }
        iter += 1;
        let ki = cache.row(i);
        let kj = cache.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] - 2.0 * ki[j]).max(eps);
            let delta = (-g[i] - g[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * ki[j]).max(eps);
            let delta = (g[i] - g[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for t in 0..n {
            g[t] += y[t] * (ki[t] * di + kj[t] * dj);
        }
    }
    // bias from free vectors, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * g[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    };
    (alpha, rho, iter)
}

/// Pairwise support vector machines with majority voting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Smo {
    pub pairs: Vec<PairModel>,
    pub n_classes: usize,
    pub c: f64,
    pub epsilon: f64,
}

impl Smo {
    pub fn fit(data: &Instances, params: &SmoParams) -> Self {
        let k = data.n_classes;
        let mut pairs = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                let indices: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == a || data.y[i] == b).collect();
                if !indices.iter().any(|&i| data.y[i] == a) || !indices.iter().any(|&i| data.y[i] == b) {
                    continue;
                }
                let rows: Vec<&[f64]> = indices.iter().map(|&i| data.row(i)).collect();
                let y: Vec<f64> = indices.iter().map(|&i| if data.y[i] == a { 1.0 } else { -1.0 }).collect();
                let (alpha, rho, iterations) = solve(&rows, &y, params.c, params.tolerance, params.degree, params.epsilon);
                let (weights, support) = if params.degree == 1 {
                    let mut w = vec![0.0; data.dim()];
                    for (t, x) in rows.iter().enumerate() {
                        if alpha[t] > 0.0 {
                            w.iter_mut().zip(x.iter()).for_each(|(wi, xi)| *wi += alpha[t] * y[t] * xi);
                        }
                    }
                    (Some(w), Vec::new())
                } else {
                    let sv = rows
                        .iter()
                        .enumerate()
                        .filter(|(t, _)| alpha[*t] > 0.0)
                        .map(|(t, x)| (alpha[t] * y[t], x.to_vec()))
                        .collect();
                    (None, sv)
                };
                pairs.push(PairModel {
                    classes: (a, b),
                    indices,
                    y,
                    alpha,
                    rho,
                    iterations,
                    weights,
                    support,
                    degree: params.degree,
                });
            }
        }
        Smo {
            pairs,
            n_classes: k,
            c: params.c,
            epsilon: params.epsilon,
        }
    }

    /// Votes per class, ties broken by the summed margin of the winning
    /// pairwise decisions, then by class order.
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        let mut margin = vec![0.0; self.n_classes];
        for p in &self.pairs {
            let f = p.decision(x);
            let w = if f >= 0.0 { p.classes.0 } else { p.classes.1 };
            votes[w] += 1;
            margin[w] += f.abs();
        }
        let mut best = 0;
        for c in 1..self.n_classes {
            if votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best]) {
                best = c;
            }
        }
        best
    }

    pub fn describe(&self, classes: &[String], out: &mut String) {
        let degree = self.pairs.first().map_or(1, |p| p.degree);
        let _ = writeln!(out, "SMO (one-vs-one, polynomial kernel degree {degree}, C = {})", self.c);
        for p in &self.pairs {
            let bounded = p.alpha.iter().filter(|&&a| a >= self.c).count();
            let _ = writeln!(
                out,
                "  {} vs {}: {} support vectors ({bounded} at bound), {} iterations, rho {:.6}",
                classes[p.classes.0],
                classes[p.classes.1],
                p.support_vectors(self.epsilon),
                p.iterations,
                p.rho
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair_has_unit_margins() {
        let xs = [[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]];
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let y = [-1.0, -1.0, 1.0, 1.0];
        let (alpha, rho, _) = solve(&rows, &y, 10.0, 1e-6, 1, 1e-12);
        let f = |x: &[f64]| -> f64 { (0..4).map(|t| alpha[t] * y[t] * dot(&xs[t], x)).sum::<f64>() - rho };
        // maximal margin: w = (1, 0), b = -1
        for (t, x) in xs.iter().enumerate() {
            assert!((y[t] * f(x) - 1.0).abs() < 1e-4, "{t}: {}", f(x));
        }
        let s: f64 = alpha.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(s.abs() < 1e-9);
    }
}
