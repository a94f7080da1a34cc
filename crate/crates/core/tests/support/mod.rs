//! Independent reference computations for the learners and metrics. Shared
//! by the integration tests and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use catnet::classifiers::{
    bayes_net::BayesNet, c45::Node, nbtree::NbNode, train, ClassifierSpec, FittedState, Instances, TrainedModel,
};
use catnet::ensemble::build_ensemble;
use catnet::kdd::{apportion, stratified_indices, AttackCategory, CategoryMap, Dataset, FeatureSchema};
use catnet::metrics::{confusion, evaluate_model};
use catnet::selection::Assignment;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn mini() -> Dataset {
    Dataset::load(fixture_path("kdd_mini_2000.txt"), FeatureSchema::kdd99(), CategoryMap::kdd99()).unwrap()
}

/// Seeded stratified subset of `n` records.
pub fn stratified(data: &Dataset, n: usize, seed: u64) -> Dataset {
    let counts = apportion(n, data.category_counts());
    data.subset(&stratified_indices(data, counts, seed).unwrap())
}

/// Seeded stratified split into `(train, test)` with `train_frac` of each
/// category in the training part.
pub fn split(data: &Dataset, train_frac: f64, seed: u64) -> (Dataset, Dataset) {
    let n = (data.len() as f64 * train_frac).round() as usize;
    let counts = apportion(n, data.category_counts());
    let train_idx = stratified_indices(data, counts, seed).unwrap();
    let mut in_train = vec![false; data.len()];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let test_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_train[i]).collect();
    (data.subset(&train_idx), data.subset(&test_idx))
}

pub fn spec(s: &str) -> ClassifierSpec {
    s.parse().unwrap()
}

fn encoded(model: &TrainedModel, data: &Dataset) -> Instances {
    model.preprocessing().encode_dataset(data, model.class_list()).unwrap()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

/// OneR: every per-attribute rule's recorded training error equals a
/// brute-force count, nominal rules predict each value's majority class,
/// and the chosen attribute has the fewest errors (first on ties).
pub fn one_r(data: &Dataset) -> Result<(), String> {
    let model = train(&spec("OneR"), data).map_err(|e| e.to_string())?;
    let FittedState::OneR(m) = model.state() else { return Err("not a OneR state".into()) };
    let inst = encoded(&model, data);
    let k = inst.n_classes;
    let mut brute = Vec::new();
    for (a, rule) in m.rules.iter().enumerate() {
        let errors = (0..inst.len()).filter(|&i| rule.predict(inst.value(i, a)) != inst.y[i]).count();
        if errors as f64 != m.errors[a] {
            return Err(format!("attribute {a}: recorded {} errors, counted {errors}", m.errors[a]));
        }
        if let Some(dom) = inst.attributes[a].nominal() {
            for v in 0..dom.len() {
                let mut counts = vec![0.0; k];
                for i in (0..inst.len()).filter(|&i| inst.value(i, a) == v as f64) {
                    counts[inst.y[i]] += 1.0;
                }
                if counts.iter().sum::<f64>() > 0.0 && rule.predict(v as f64) != argmax(&counts) {
                    return Err(format!("attribute {a} value {v}: not the majority class"));
                }
            }
        }
        brute.push(errors);
    }
    let best = (0..brute.len()).fold(0, |b, a| if brute[a] < brute[b] { a } else { b });
    if m.attr != best {
        return Err(format!("chose attribute {} ({} errors), best is {best} ({})", m.attr, brute[m.attr], brute[best]));
    }
    for i in 0..inst.len() {
        if model.predict_encoded(inst.row(i)).0 != m.rules[best].predict(inst.value(i, best)) {
            return Err(format!("record {i}: prediction does not follow the chosen rule"));
        }
    }
    Ok(())
}

/// Fraction of `queries` on which LBk(k=1) agrees with a brute-force
/// nearest-neighbour search (ties vote, lowest class index wins).
pub fn lbk_agreement(train_set: &Dataset, queries: &Dataset) -> f64 {
    let model = train(&spec("LBk:k=1"), train_set).unwrap();
    let inst = encoded(&model, train_set);
    let nominal: Vec<bool> = inst.attributes.iter().map(|a| !a.is_numeric()).collect();
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter()
            .zip(b)
            .zip(&nominal)
            .map(|((x, z), &nom)| if nom { f64::from(x != z || *x < 0.0) } else { (x - z) * (x - z) })
            .sum()
    };
    let mut agree = 0;
    for r in queries.records() {
        let q = model.preprocessing().encode(r).unwrap();
        let d: Vec<f64> = (0..inst.len()).map(|i| dist(&q, inst.row(i))).collect();
        let best = d.iter().copied().fold(f64::INFINITY, f64::min);
        let mut votes = vec![0.0; inst.n_classes];
        for i in (0..inst.len()).filter(|&i| d[i] == best) {
            votes[inst.y[i]] += 1.0;
        }
        if model.predict_encoded(&q).0 == argmax(&votes) {
            agree += 1;
        }
    }
    agree as f64 / queries.len() as f64
}

/// Largest deviations of NaiveBayes posteriors from a direct computation
/// (class priors with add-one smoothing, Gaussian densities with a floored
/// standard deviation, add-one value frequencies), and of their sums from 1.
pub fn naive_bayes(train_set: &Dataset, queries: &Dataset) -> (f64, f64) {
    let model = train(&spec("NaiveBayes"), train_set).unwrap();
    let inst = encoded(&model, train_set);
    let (n, k) = (inst.len(), inst.n_classes);
    let mut class_n = vec![0.0; k];
    for &y in &inst.y {
        class_n[y] += 1.0;
    }
    let prior: Vec<f64> = class_n.iter().map(|c| (c + 1.0) / (n as f64 + k as f64)).collect();
    let col = |a: usize| -> Vec<f64> { (0..n).map(|i| inst.value(i, a)).collect() };

    let mut max_err: f64 = 0.0;
    let mut max_sum_err: f64 = 0.0;
    for r in queries.records() {
        let x = model.preprocessing().encode(r).unwrap();
        let mut log_joint: Vec<f64> = prior.iter().map(|p| p.ln()).collect();
        for (a, attr) in inst.attributes.iter().enumerate() {
            let v = col(a);
            match attr.nominal() {
                None => {
                    let mut distinct = v.clone();
                    distinct.sort_by(f64::total_cmp);
                    distinct.dedup();
                    let precision = if distinct.len() < 2 {
                        0.01
                    } else {
                        (distinct[distinct.len() - 1] - distinct[0]) / (distinct.len() - 1) as f64
                    };
                    for c in 0..k {
                        let xs: Vec<f64> = (0..n).filter(|&i| inst.y[i] == c).map(|i| v[i]).collect();
                        let (mean, sd) = if xs.is_empty() {
                            (0.0, precision / 6.0)
                        } else {
                            let m = xs.iter().sum::<f64>() / xs.len() as f64;
                            let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
                            (m, var.sqrt().max(precision / 6.0))
                        };
                        let z = (x[a] - mean) / sd;
                        log_joint[c] += -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
                    }
                }
                Some(dom) => {
                    let slots = dom.len() + 1;
                    let s = |val: f64| if val < 0.0 || val as usize >= dom.len() { slots - 1 } else { val as usize };
                    for c in 0..k {
                        let in_class = (0..n).filter(|&i| inst.y[i] == c);
                        let hits = in_class.clone().filter(|&i| s(v[i]) == s(x[a])).count() as f64;
                        let total = in_class.count() as f64;
                        log_joint[c] += ((hits + 1.0) / (total + slots as f64)).ln();
                    }
                }
            }
        }
        let top = log_joint.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_joint.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let (_, scores) = model.predict_encoded(&x);
        let scores = scores.unwrap();
        for c in 0..k {
            max_err = max_err.max((scores[c] - w[c] / z).abs());
        }
        max_sum_err = max_sum_err.max((scores.iter().sum::<f64>() - 1.0).abs());
    }
    (max_err, max_sum_err)
}

/// Largest relative error between the MLP's backpropagated gradient and
/// central differences, on the network fitted to `data`.
pub fn mlp_gradient(data: &Dataset) -> f64 {
    let model = train(&spec("MLP:max_epochs=50"), data).unwrap();
    let FittedState::Mlp(m) = model.state() else { panic!("not an MLP state") };
    let inst = encoded(&model, data);
    let rows: Vec<&[f64]> = (0..inst.len().min(25)).map(|i| inst.row(i)).collect();
    let ys = &inst.y[..rows.len()];
    let mut net = m.clone();
    let (_, grad) = net.loss_and_gradient(&rows, ys);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for l in 0..net.layers.len() {
        for i in (0..net.layers[l].w.len()).step_by(7) {
            let orig = net.layers[l].w[i];
            net.layers[l].w[i] = orig + h;
            let up = net.loss(&rows, ys);
            net.layers[l].w[i] = orig - h;
            let down = net.loss(&rows, ys);
            net.layers[l].w[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let scale = numeric.abs().max(grad[l][i].abs());
            // entries this small are dominated by rounding in the difference
            if scale > 1e-6 {
                worst = worst.max((numeric - grad[l][i]).abs() / scale);
            }
        }
    }
    worst
}

/// Largest KKT residual over every pairwise SMO subproblem, and whether all
/// multipliers lie in `[0, C]`.
pub fn smo_kkt(data: &Dataset) -> (f64, bool) {
    let model = train(&spec("SMO"), data).unwrap();
    let FittedState::Smo(m) = model.state() else { panic!("not an SMO state") };
    let inst = encoded(&model, data);
    let c = m.c;
    let bound = 1e-9 * c.max(1.0);
    let mut worst: f64 = 0.0;
    let mut in_box = true;
    for p in &m.pairs {
        for (t, &i) in p.indices.iter().enumerate() {
            let a = p.alpha[t];
            in_box &= (0.0..=c).contains(&a);
            let yf = p.y[t] * p.decision(inst.row(i));
            let r = if a <= bound {
                (1.0 - yf).max(0.0)
            } else if a >= c - bound {
                (yf - 1.0).max(0.0)
            } else {
                (yf - 1.0).abs()
            };
            worst = worst.max(r);
        }
    }
    (worst, in_box)
}

/// Smallest number of training instances covered by a learned JRip rule,
/// checked by replaying the rule list in order.
pub fn jrip_min_coverage(data: &Dataset) -> usize {
    let model = train(&spec("JRip"), data).unwrap();
    let FittedState::JRip(m) = model.state() else { panic!("not a JRip state") };
    let inst = encoded(&model, data);
    let mut uncovered: Vec<usize> = (0..inst.len()).collect();
    let mut min = usize::MAX;
    for r in &m.rules {
        let (hit, miss): (Vec<usize>, Vec<usize>) = uncovered.iter().partition(|&&i| r.covers(inst.row(i)));
        min = min.min(hit.len());
        uncovered = miss;
    }
    min
}

fn j48_leaf_total(node: &Node) -> f64 {
    match node {
        Node::Leaf { counts, .. } => counts.iter().sum(),
        Node::Split { children, .. } => children.iter().map(j48_leaf_total).sum(),
    }
}

fn nbtree_leaf_total(node: &NbNode) -> Result<usize, String> {
    match node {
        NbNode::Leaf { n, .. } => Ok(*n),
        NbNode::Split { n, children, .. } => {
            let s = children.iter().map(nbtree_leaf_total).sum::<Result<usize, String>>()?;
            if s != *n {
                return Err(format!("split of {n} instances has children summing to {s}"));
            }
            Ok(s)
        }
    }
}

/// J48 and NBTree leaf instance counts both sum to the training size.
pub fn tree_leaf_sums(data: &Dataset) -> Result<(), String> {
    let n = data.len();
    let j48 = train(&spec("J48"), data).map_err(|e| e.to_string())?;
    let FittedState::J48(t) = j48.state() else { return Err("not a J48 state".into()) };
    let total = j48_leaf_total(&t.root);
    if (total - n as f64).abs() > 1e-6 {
        return Err(format!("J48 leaves hold {total} instances, trained on {n}"));
    }
    let nbt = train(&spec("NBTree"), data).map_err(|e| e.to_string())?;
    let FittedState::NBTree(t) = nbt.state() else { return Err("not an NBTree state".into()) };
    let total = nbtree_leaf_total(&t.root)?;
    if total != n {
        return Err(format!("NBTree leaves hold {total} instances, trained on {n}"));
    }
    Ok(())
}

/// Walks the J48 tree by hand for every record and checks the reached
/// leaf's class matches the model's prediction.
pub fn j48_walk(data: &Dataset) -> Result<(), String> {
    let model = train(&spec("J48"), data).map_err(|e| e.to_string())?;
    let FittedState::J48(t) = model.state() else { return Err("not a J48 state".into()) };
    let inst = encoded(&model, data);
    for i in 0..inst.len() {
        let x = inst.row(i);
        let mut node = &t.root;
        while let Node::Split { test, children, majority_child, .. } = node {
            let b = test.branch(x).filter(|&b| b < children.len()).unwrap_or(*majority_child);
            node = &children[b];
        }
        let Node::Leaf { class, .. } = node else { unreachable!() };
        if *class != model.predict_encoded(x).0 {
            return Err(format!("record {i}: leaf class {class} differs from prediction"));
        }
    }
    Ok(())
}

/// True when the attribute-parent graph learned by K2 has no cycle.
pub fn bayes_net_acyclic(net: &BayesNet) -> bool {
    let n = net.nodes.len();
    // 0 unvisited, 1 on stack, 2 done
    fn visit(v: usize, net: &BayesNet, state: &mut [u8]) -> bool {
        match state[v] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        state[v] = 1;
        for &p in &net.nodes[v].parents {
            if p >= net.nodes.len() || !visit(p, net, state) {
                return false;
            }
        }
        state[v] = 2;
        true
    }
    let mut state = vec![0u8; n];
    (0..n).all(|v| visit(v, net, &mut state))
}

pub fn bayes_net_graph_ok(data: &Dataset) -> bool {
    let model = train(&spec("BayesNet"), data).unwrap();
    let FittedState::BayesNet(net) = model.state() else { panic!("not a BayesNet state") };
    bayes_net_acyclic(net)
}

/// Checks rates and accuracy against direct counting on `cases` random
/// label sequences. Returns the number of matrices checked.
pub fn metric_oracle(cases: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.gen_range(1..400);
        // skew toward a few categories so undefined rates occur
        let live: Vec<AttackCategory> =
            AttackCategory::ALL.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        let pool = if live.is_empty() { vec![AttackCategory::Normal] } else { live };
        let truths: Vec<AttackCategory> = (0..n).map(|_| *pool.choose(&mut rng).unwrap()).collect();
        let preds: Vec<AttackCategory> = (0..n)
            .map(|i| if rng.gen_bool(0.6) { truths[i] } else { AttackCategory::ALL[rng.gen_range(0..5)] })
            .collect();
        let cm = confusion(&preds, &truths).map_err(|e| e.to_string())?;
        let correct = (0..n).filter(|&i| preds[i] == truths[i]).count();
        if cm.average_accuracy().ok() != Some(correct as f64 / n as f64) {
            return Err(format!("case {case}: AA differs"));
        }
        for c in AttackCategory::ALL {
            let pos = (0..n).filter(|&i| truths[i] == c).count();
            let tp = (0..n).filter(|&i| truths[i] == c && preds[i] == c).count();
            let neg = n - pos;
            let fp = (0..n).filter(|&i| truths[i] != c && preds[i] == c).count();
            let want_tp = (pos > 0).then(|| tp as f64 / pos as f64);
            let want_fp = (neg > 0).then(|| fp as f64 / neg as f64);
            if cm.tp_rate(c).ok() != want_tp || cm.fp_rate(c).ok() != want_fp {
                return Err(format!("case {case}, {c}: rates differ from direct counts"));
            }
        }
    }
    Ok(cases)
}

/// Specs cheap enough to train repeatedly on the fixture.
pub const FAST_SPECS: [&str; 8] = ["BayesNet", "NaiveBayes", "J48", "NBTree", "DecisionTable", "JRip", "OneR", "LBk"];

/// Builds `count` random ensembles and checks each flag TP/FP equals the
/// assigned member's standalone value exactly. Returns the assignments.
pub fn flag_identity(train_set: &Dataset, test: &Dataset, count: usize, seed: u64) -> Result<Vec<Assignment>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut standalone = BTreeMap::new();
    let mut checked = Vec::new();
    for _ in 0..count {
        let picks: Vec<ClassifierSpec> = (0..4).map(|_| spec(FAST_SPECS.choose(&mut rng).unwrap())).collect();
        let assignment = Assignment::manual([
            (AttackCategory::DoS, picks[0].clone()),
            (AttackCategory::Probe, picks[1].clone()),
            (AttackCategory::U2R, picks[2].clone()),
            (AttackCategory::R2L, picks[3].clone()),
        ])
        .map_err(|e| e.to_string())?;
        let ensemble = build_ensemble(&assignment, train_set).map_err(|e| e.to_string())?;
        let report = ensemble.evaluate(test).map_err(|e| e.to_string())?;
        for (i, c) in AttackCategory::ATTACKS.into_iter().enumerate() {
            let id = picks[i].id();
            if !standalone.contains_key(&id) {
                let model = train(&picks[i], train_set).map_err(|e| e.to_string())?;
                standalone.insert(id.clone(), evaluate_model(&model, test).map_err(|e| e.to_string())?);
            }
            let want = standalone[&id].metrics(c);
            let got = report.per_category[&c];
            if got != want {
                return Err(format!("{assignment}: {c} flag metrics {got:?}, standalone {id} {want:?}"));
            }
        }
        checked.push(assignment);
    }
    Ok(checked)
}
