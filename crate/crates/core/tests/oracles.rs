mod support;

use catnet::classifiers::bayes_net::{BayesNet, Node};
use support::*;

#[test]
fn one_r_matches_exhaustive_rule_search() {
    one_r(&stratified(&mini(), 800, 3)).unwrap();
}

#[test]
fn lbk_agrees_with_brute_force_nearest_neighbour() {
    let data = mini();
    let fixture = stratified(&data, 500, 11);
    assert_eq!(lbk_agreement(&fixture, &data), 1.0);
}

#[test]
fn naive_bayes_matches_closed_form() {
    let (train, test) = split(&mini(), 0.5, 5);
    let (err, sum_err) = naive_bayes(&train, &test);
    assert!(err <= 1e-9, "posterior error {err}");
    assert!(sum_err <= 1e-9, "sum error {sum_err}");
}

#[test]
fn mlp_gradient_matches_central_differences() {
    let worst = mlp_gradient(&stratified(&mini(), 300, 2));
    assert!(worst <= 1e-4, "relative error {worst}");
}

#[test]
fn smo_satisfies_kkt() {
    let (residual, in_box) = smo_kkt(&stratified(&mini(), 600, 4));
    assert!(in_box);
    assert!(residual <= 1e-3, "KKT residual {residual}");
}

#[test]
fn jrip_rules_cover_two_instances() {
    assert!(jrip_min_coverage(&mini()) >= 2);
}

#[test]
fn tree_leaves_account_for_every_instance() {
    tree_leaf_sums(&mini()).unwrap();
}

#[test]
fn j48_prediction_follows_tree() {
    j48_walk(&mini()).unwrap();
}

#[test]
fn bayes_net_graph_is_acyclic() {
    assert!(bayes_net_graph_ok(&mini()));
}

#[test]
fn cycle_detector_sees_cycles() {
    let node = |parents: Vec<usize>| Node { parents, slots: 2, cpt: Vec::new() };
    let net = |nodes| BayesNet { log_prior: vec![0.0; 2], nodes };
    assert!(bayes_net_acyclic(&net(vec![node(vec![]), node(vec![0]), node(vec![0, 1])])));
    assert!(!bayes_net_acyclic(&net(vec![node(vec![2]), node(vec![0]), node(vec![1])])));
    assert!(!bayes_net_acyclic(&net(vec![node(vec![0])])));
}
