use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encode::Instances;
use super::spec::MlpParams;

/// Fully connected sigmoid layer. `w` is row-major `[n_out][n_in + 1]`
/// with the bias in the last column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
}

impl Layer {
    fn forward(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let stride = self.n_in + 1;
        for o in 0..self.n_out {
            let row = &self.w[o * stride..(o + 1) * stride];
            let z: f64 = row[..self.n_in].iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + row[self.n_in];
            out.push(sigmoid(z));
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Layer>,
    pub epochs: usize,
}

impl Mlp {
    /// Random weights uniform in [-0.05, 0.05].
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|p| Layer {
                n_in: p[0],
                n_out: p[1],
                w: (0..(p[0] + 1) * p[1]).map(|_| rng.gen_range(-0.05..=0.05)).collect(),
            })
            .collect();
        Mlp { layers, epochs: 0 }
    }

    fn activations(&self, x: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.resize(self.layers.len() + 1, Vec::new());
        acts[0].clear();
        acts[0].extend_from_slice(x);
        for (l, layer) in self.layers.iter().enumerate() {
            let (head, tail) = acts.split_at_mut(l + 1);
            layer.forward(&head[l], &mut tail[0]);
        }
    }

    pub fn output(&self, x: &[f64]) -> Vec<f64> {
        let mut acts = Vec::new();
        self.activations(x, &mut acts);
        acts.pop().unwrap()
    }

    /// Error terms (dE/dz) per layer for one example; activations must be current.
    fn deltas(&self, acts: &[Vec<f64>], target: usize, deltas: &mut Vec<Vec<f64>>) {
        let n = self.layers.len();
        deltas.resize(n, Vec::new());
        let out = &acts[n];
        deltas[n - 1].clear();
        deltas[n - 1].extend(out.iter().enumerate().map(|(k, &o)| {
            let t = if k == target { 1.0 } else { 0.0 };
            (o - t) * o * (1.0 - o)
        }));
        for l in (0..n - 1).rev() {
            let next = &self.layers[l + 1];
            let stride = next.n_in + 1;
            let a = &acts[l + 1];
            let d: Vec<f64> = (0..next.n_in)
                .map(|h| {
                    let s: f64 = (0..next.n_out).map(|k| next.w[k * stride + h] * deltas[l + 1][k]).sum();
                    s * a[h] * (1.0 - a[h])
                })
                .collect();
            deltas[l] = d;
        }
    }

    /// Sum over examples of `0.5 * ||output - onehot(target)||^2`.
    pub fn loss(&self, rows: &[&[f64]], targets: &[usize]) -> f64 {
        rows.iter()
            .zip(targets)
            .map(|(x, &t)| {
                self.output(x)
                    .iter()
                    .enumerate()
                    .map(|(k, o)| {
                        let d = o - if k == t { 1.0 } else { 0.0 };
                        0.5 * d * d
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Loss and its gradient with respect to every layer's weights.
    pub fn loss_and_gradient(&self, rows: &[&[f64]], targets: &[usize]) -> (f64, Vec<Vec<f64>>) {
        let mut grad: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect();
        let mut acts = Vec::new();
        let mut deltas = Vec::new();
        for (x, &t) in rows.iter().zip(targets) {
            self.activations(x, &mut acts);
            self.deltas(&acts, t, &mut deltas);
            for (l, layer) in self.layers.iter().enumerate() {
                let stride = layer.n_in + 1;
                for o in 0..layer.n_out {
                    let g = &mut grad[l][o * stride..(o + 1) * stride];
                    for (i, a) in acts[l].iter().enumerate() {
                        g[i] += deltas[l][o] * a;
                    }
                    g[layer.n_in] += deltas[l][o];
                }
            }
        }
        (self.loss(rows, targets), grad)
    }

    /// Online backpropagation with momentum and early stopping on a
    /// held-out validation split.
    pub fn fit(data: &Instances, params: &MlpParams) -> Self {
        let d = data.dim();
        let k = data.n_classes;
        let width = if params.hidden_width > 0 {
            params.hidden_width
        } else {
            (d + k).div_ceil(2)
        };
        let mut sizes = vec![d];
        sizes.extend(std::iter::repeat(width).take(params.hidden_layers));
        sizes.push(k);
        let mut net = Mlp::new(&sizes, params.random_seed);
        let mut rng = ChaCha8Rng::seed_from_u64(params.random_seed.wrapping_add(1));
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut rng);
        let n_val = (data.len() as f64 * params.validation_fraction).round() as usize;
        let n_val = if n_val >= data.len() { 0 } else { n_val };
        let (val, train) = order.split_at(n_val);
        let val_rows: Vec<&[f64]> = val.iter().map(|&i| data.row(i)).collect();
        let val_y: Vec<usize> = val.iter().map(|&i| data.y[i]).collect();
        let mut train = train.to_vec();

        let mut velocity: Vec<Vec<f64>> = net.layers.iter().map(|l| vec![0.0; l.w.len()]).collect();
        let mut acts = Vec::new();
        let mut deltas = Vec::new();
        let mut best = (f64::INFINITY, net.layers.clone(), 0);
        let mut since_best = 0;
        for epoch in 1..=params.max_epochs {
            train.shuffle(&mut rng);
            for &i in &train {
                net.activations(data.row(i), &mut acts);
                net.deltas(&acts, data.y[i], &mut deltas);
                for (l, layer) in net.layers.iter_mut().enumerate() {
                    let stride = layer.n_in + 1;
                    let v = &mut velocity[l];
                    for o in 0..layer.n_out {
                        let dl = deltas[l][o];
                        for j in 0..stride {
                            let a = if j < layer.n_in { acts[l][j] } else { 1.0 };
                            let step = -params.learning_rate * dl * a + params.momentum * v[o * stride + j];
                            v[o * stride + j] = step;
                            layer.w[o * stride + j] += step;
                        }
                    }
                }
            }
            net.epochs = epoch;
            if val_rows.is_empty() {
                continue;
            }
            let err = net.loss(&val_rows, &val_y);
            if err < best.0 {
                best = (err, net.layers.clone(), epoch);
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= params.validation_threshold {
                    break;
                }
            }
        }
        if !val_rows.is_empty() {
            net.layers = best.1;
            net.epochs = best.2;
        }
        net
    }

    pub fn describe(&self, out: &mut String) {
        let _ = writeln!(out, "Multilayer perceptron (sigmoid units)");
        for (l, layer) in self.layers.iter().enumerate() {
            let norm = layer.w.iter().map(|w| w * w).sum::<f64>().sqrt();
            let max = layer.w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            let _ = writeln!(
                out,
                "  layer {}: {} -> {} units, {} weights, |w| {norm:.4}, max |w| {max:.4}",
                l + 1,
                layer.n_in,
                layer.n_out,
                layer.w.len()
            );
        }
        let _ = writeln!(out, "  epochs (best weights): {}", self.epochs);
    }
}
