mod common;

use rand::seq::SliceRandom;
use rand::Rng;

use sbm_vips::pairing::{block_views, random_pairing};
use sbm_vips::sbm::{generate_sbm, logit_constants, Backend, SbmConfig};
use sbm_vips::vips::{
    pair_diagonal_term, run_vips, update_parameters, update_theta01, update_theta10,
    update_theta11, InitMode, VipsCheckpoint, VipsConfig, VipsRun, VipsState,
};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn joint_logit_is_sum_of_single_logits_plus_twice_the_pair_term() {
    let (_, _, blocks, p, q) = common::small_instance(40, 3);
    let c = logit_constants(p, q).unwrap();
    let mut r = common::rng(1);
    let mut s = VipsState::uniform(20);
    s.phi = (0..20).map(|_| r.gen()).collect();
    s.xi = (0..20).map(|_| r.gen()).collect();
    let t10 = update_theta10(&s, &blocks, c).unwrap();
    let t01 = update_theta01(&s, &blocks, c).unwrap();
    let t11 = update_theta11(&s, &blocks, c).unwrap();
    let pair = pair_diagonal_term(&blocks, c);
    for k in 0..20 {
        assert!((t11[k] - (t10[k] + t01[k] + 2.0 * pair[k])).abs() < 1e-12);
    }
}

#[test]
fn refresh_is_a_softmax_over_four_cells() {
    let mut s = VipsState::uniform(1);
    s.theta10 = vec![1.0];
    s.theta01 = vec![-2.0];
    s.theta11 = vec![0.5];
    s.refresh().unwrap();
    let z = 1.0 + 1f64.exp() + (-2f64).exp() + 0.5f64.exp();
    assert!((s.psi00[0] - 1.0 / z).abs() < 1e-15);
    assert!((s.psi10[0] - 1f64.exp() / z).abs() < 1e-15);
    assert!((s.phi[0] - (1f64.exp() + 0.5f64.exp()) / z).abs() < 1e-15);
    assert!((s.xi[0] - ((-2f64).exp() + 0.5f64.exp()) / z).abs() < 1e-15);
}

#[test]
fn checkpoint_resume_matches_uninterrupted_run() {
    let graph = generate_sbm(&SbmConfig::two_class(300, 0.15, 0.05), 4).unwrap();
    let pairing = random_pairing(300, 5).unwrap();
    let config = VipsConfig::new(0.12, 0.06).with_param_updates(3);
    let (full_state, full_record) = run_vips(&graph, &pairing, &config, 6).unwrap();

    let mut run = VipsRun::new(&graph, &pairing, &config, 6).unwrap();
    for _ in 0..4 {
        run.step().unwrap();
    }
    let json = run.checkpoint().to_json().unwrap();
    let ckpt = VipsCheckpoint::from_json(&json).unwrap();
    assert_eq!(ckpt, run.checkpoint());
    let (resumed_state, resumed_record) = VipsRun::from_checkpoint(&graph, ckpt).unwrap().run().unwrap();
    assert_eq!(resumed_state, full_state);
    assert_eq!(resumed_record.iterations, full_record.iterations);
    assert_eq!(resumed_record.final_l1(), full_record.final_l1());
    assert_eq!(resumed_record.p_hat.last(), full_record.p_hat.last());
}

#[test]
fn dense_and_sparse_backends_agree() {
    let config = SbmConfig::two_class(200, 0.2, 0.05);
    let dense = generate_sbm(&config.clone().with_backend(Backend::Dense), 7).unwrap();
    let sparse = dense.with_backend(Backend::Sparse);
    let pairing = random_pairing(200, 8).unwrap();
    let vc = VipsConfig::new(0.2, 0.05);
    let (a, _) = run_vips(&dense, &pairing, &vc, 9).unwrap();
    let (b, _) = run_vips(&sparse, &pairing, &vc, 9).unwrap();
    assert!(max_diff(&a.u(), &b.u()) < 1e-12);
}

#[test]
fn node_relabeling_is_equivariant() {
    let graph = generate_sbm(&SbmConfig::two_class(120, 0.25, 0.05), 10).unwrap();
    let pairing = random_pairing(120, 11).unwrap();
    let mut perm: Vec<usize> = (0..120).collect();
    perm.shuffle(&mut common::rng(12));
    let g2 = graph.permuted(&perm).unwrap();
    let p2 = pairing.permuted(&perm).unwrap();

    let u0 = InitMode::Uniform.draw(120, 13).unwrap();
    let mut u0_perm = vec![0.0; 120];
    for (i, &x) in u0.iter().enumerate() {
        u0_perm[perm[i]] = x;
    }
    let (s1, r1) = run_vips(&graph, &pairing, &VipsConfig::new(0.25, 0.05).with_init(InitMode::Explicit(u0)), 0).unwrap();
    let (s2, r2) = run_vips(&g2, &p2, &VipsConfig::new(0.25, 0.05).with_init(InitMode::Explicit(u0_perm)), 0).unwrap();
    // pair k holds the same two nodes under both numberings
    assert!(max_diff(&s1.u(), &s2.u()) < 1e-12);
    assert!((r1.final_l1() - r2.final_l1()).abs() < 1e-9);
}

/// The re-estimate summed directly over unordered node pairs: every dyad
/// is weighted by the product of its endpoint marginals, and each linked
/// pair enters a second time with its ψ weight.
fn brute_force_params(
    graph: &sbm_vips::sbm::Graph,
    pairing: &sbm_vips::pairing::Pairing,
    s: &VipsState,
) -> (f64, f64) {
    let n = graph.n();
    let u = pairing.to_node_order(&s.u());
    let mut partner = vec![usize::MAX; n];
    let mut split = vec![0.0; n];
    for k in 0..pairing.m() {
        let (i, j) = (pairing.p1()[k], pairing.p2()[k]);
        partner[i] = j;
        partner[j] = i;
        split[i] = s.psi10[k] + s.psi01[k];
        split[j] = split[i];
    }
    let (mut pn, mut pd, mut qn, mut qd) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let a = if graph.has_edge(i, j) { 1.0 } else { 0.0 };
            let mut same = u[i] * u[j] + (1.0 - u[i]) * (1.0 - u[j]);
            let mut diff = 1.0 - same;
            if partner[i] == j {
                same += 1.0 - split[i];
                diff += split[i];
            }
            pn += same * a;
            pd += same;
            qn += diff * a;
            qd += diff;
        }
    }
    (pn / pd, qn / qd)
}

#[test]
fn parameter_update_matches_dyad_sum() {
    for seed in 0..5 {
        let (graph, pairing, blocks, _, _) = common::small_instance(30, 40 + seed);
        let mut r = common::rng(seed);
        let mut s = VipsState::uniform(15);
        s.theta10 = (0..15).map(|_| r.gen_range(-3.0..3.0)).collect();
        s.theta01 = (0..15).map(|_| r.gen_range(-3.0..3.0)).collect();
        s.theta11 = (0..15).map(|_| r.gen_range(-3.0..3.0)).collect();
        s.refresh().unwrap();
        let (p, q) = update_parameters(&s, &blocks).unwrap();
        let (bp, bq) = brute_force_params(&graph, &pairing, &s);
        assert!((p - bp).abs() < 1e-12 && (q - bq).abs() < 1e-12, "{p} {bp} {q} {bq}");
    }
}

#[test]
fn parameter_update_at_the_truth_gives_empirical_rates() {
    let graph = generate_sbm(&SbmConfig::two_class(400, 0.2, 0.1), 21).unwrap();
    let pairing = random_pairing(400, 22).unwrap();
    let blocks = block_views(&graph, &pairing).unwrap();
    let truth: Vec<f64> = graph.labels().iter().map(|&l| l as f64).collect();
    // a one-hot ψ that agrees with the truth
    let mut s = VipsState::from_marginals(&pairing.to_pairing_order(&truth)).unwrap();
    for k in 0..pairing.m() {
        let (a, b) = (s.phi[k], s.xi[k]);
        s.psi00[k] = (1.0 - a) * (1.0 - b);
        s.psi01[k] = (1.0 - a) * b;
        s.psi10[k] = a * (1.0 - b);
        s.psi11[k] = a * b;
    }
    let (p, q) = update_parameters(&s, &blocks).unwrap();
    let labels = graph.labels();
    let linked: std::collections::HashSet<(usize, usize)> =
        pairing.p1().iter().zip(pairing.p2()).map(|(&a, &b)| (a.min(b), a.max(b))).collect();
    let (mut within, mut across, mut within_dyads, mut across_dyads) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..400 {
        for j in i + 1..400 {
            let weight = if linked.contains(&(i, j)) { 2.0 } else { 1.0 };
            let a = if graph.has_edge(i, j) { weight } else { 0.0 };
            if labels[i] == labels[j] {
                within += a;
                within_dyads += weight;
            } else {
                across += a;
                across_dyads += weight;
            }
        }
    }
    assert!((p - within / within_dyads).abs() < 1e-12);
    assert!((q - across / across_dyads).abs() < 1e-12);
    // the double-counted pairs move the estimate by O(1/n) only
    assert!((p - 0.2).abs() < 0.02 && (q - 0.1).abs() < 0.02);
}

#[test]
fn parameter_update_at_half_is_the_overall_density() {
    let graph = generate_sbm(&SbmConfig::two_class(300, 0.2, 0.1), 23).unwrap();
    let pairing = random_pairing(300, 24).unwrap();
    let blocks = block_views(&graph, &pairing).unwrap();
    let mut s = VipsState::uniform(150);
    s.refresh().unwrap();
    let (p, q) = update_parameters(&s, &blocks).unwrap();
    let density = graph.density();
    assert!((p - q).abs() < 1e-3, "{p} {q}");
    assert!((p - density).abs() < 1e-3 && (q - density).abs() < 1e-3);
}
