//! Independent oracles shared by the oracle and acceptance test targets.
//!
//! Each check returns the worst observed discrepancy together with the
//! tolerance it is held to, so the acceptance target can print a verdict
//! while the oracle target asserts.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbm_vips::metrics::{l1_to_truth, signal_projection};
use sbm_vips::pairing::{block_views, random_pairing, BlockViews, Pairing};
use sbm_vips::sbm::{generate_sbm, logit_constants, Backend, Graph, LogitConstants, SbmConfig};
use sbm_vips::vips::{
    elbo_from_psi, elbo_grad_psi_at, meta_iteration, meta_iteration_general, update_theta01, update_theta10,
    update_theta11, GeneralVipsState, VipsState,
};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub cases: usize,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.worst.is_finite() && self.worst <= self.tol
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:<28} worst {:.3e} (tol {:.0e}, {} cases)", self.name, self.worst, self.tol, self.cases)
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A small balanced two-class graph with random `p > q`.
pub fn small_instance(n: usize, seed: u64) -> (Graph, Pairing, BlockViews, f64, f64) {
    let mut r = rng(seed);
    let q = r.gen_range(0.05..0.4);
    let p = r.gen_range(q + 0.1..0.95);
    let graph = generate_sbm(&SbmConfig::two_class(n, p, q).with_backend(Backend::Dense), seed).unwrap();
    let pairing = random_pairing(n, seed ^ 0x5eed).unwrap();
    let blocks = block_views(&graph, &pairing).unwrap();
    (graph, pairing, blocks, p, q)
}

/// Per-pair ψ cells `[ψ⁰⁰, ψ⁰¹, ψ¹⁰, ψ¹¹]` bounded away from the simplex
/// boundary.
pub fn interior_psi(m: usize, r: &mut ChaCha8Rng) -> [Vec<f64>; 4] {
    let mut cells = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for k in 0..m {
        let raw: Vec<f64> = (0..4).map(|_| r.gen_range(0.1..1.0)).collect();
        let z: f64 = raw.iter().sum();
        for c in 0..4 {
            cells[c][k] = raw[c] / z;
        }
    }
    cells
}

fn edge_term(a: bool, b: f64) -> f64 {
    if a {
        b.ln()
    } else {
        (1.0 - b).ln()
    }
}

/// `E_Q[log P(A, z)] − E_Q[log Q]` by summing over all `2ⁿ` labelings.
pub fn enumerated_elbo(graph: &Graph, pairing: &Pairing, psi: &[Vec<f64>; 4], p: f64, q: f64, pi: f64) -> f64 {
    let n = graph.n();
    let m = pairing.m();
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let z = |i: usize| (mask >> i) & 1;
        let mut log_q = 0.0;
        for k in 0..m {
            let cell = 2 * z(pairing.p1()[k]) + z(pairing.p2()[k]);
            // cell index: 0 → 00, 1 → 01, 2 → 10, 3 → 11 with the P1 label first
            log_q += psi[cell as usize][k].ln();
        }
        let weight = log_q.exp();
        let mut log_joint = 0.0;
        for i in 0..n {
            log_joint += if z(i) == 1 { pi.ln() } else { (1.0 - pi).ln() };
            for j in i + 1..n {
                let b = if z(i) == z(j) { p } else { q };
                log_joint += edge_term(graph.has_edge(i, j), b);
            }
        }
        total += weight * (log_joint - log_q);
    }
    total
}

/// ELBO closed form against exhaustive enumeration at `m = 3`.
pub fn elbo_enumeration(states: usize) -> Check {
    let mut worst = 0f64;
    let mut r = rng(11);
    for s in 0..states {
        let (graph, pairing, blocks, p, q) = small_instance(6, 100 + s as u64);
        let psi = interior_psi(3, &mut r);
        let pi = if s % 2 == 0 { 0.5 } else { r.gen_range(0.2..0.8) };
        let closed = elbo_from_psi([&psi[0], &psi[1], &psi[2], &psi[3]], &blocks, p, q, pi).unwrap();
        let brute = enumerated_elbo(&graph, &pairing, &psi, p, q, pi);
        worst = worst.max((closed - brute).abs());
    }
    Check { name: "elbo vs enumeration", worst, tol: 1e-9, cases: states }
}

fn elbo_at(psi: &[Vec<f64>; 4], blocks: &BlockViews, p: f64, q: f64, pi: f64) -> f64 {
    elbo_from_psi([&psi[0], &psi[1], &psi[2], &psi[3]], blocks, p, q, pi).unwrap()
}

/// Analytic ψ-gradients against central differences. `ψ⁰⁰` absorbs every
/// perturbation. Relative error is taken against `max(|g|, 1)`.
pub fn gradient_finite_differences(states: usize) -> Check {
    let h = 1e-6;
    let mut worst = 0f64;
    let mut r = rng(12);
    for s in 0..states {
        let m = if s % 2 == 0 { 3 } else { 5 };
        let (_, _, blocks, p, q) = small_instance(2 * m, 200 + s as u64);
        let psi = interior_psi(m, &mut r);
        let pi = r.gen_range(0.2..0.8);
        let phi: Vec<f64> = (0..m).map(|k| psi[2][k] + psi[3][k]).collect();
        let xi: Vec<f64> = (0..m).map(|k| psi[1][k] + psi[3][k]).collect();
        let g = elbo_grad_psi_at([&psi[0], &psi[1], &psi[2], &psi[3]], &phi, &xi, &blocks, p, q, pi).unwrap();
        for k in 0..m {
            for (cell, analytic) in [(2, g.d10[k]), (1, g.d01[k]), (3, g.d11[k])] {
                let shifted = |delta: f64| {
                    let mut x = psi.clone();
                    x[cell][k] += delta;
                    x[0][k] -= delta;
                    elbo_at(&x, &blocks, p, q, pi)
                };
                let numeric = (shifted(h) - shifted(-h)) / (2.0 * h);
                worst = worst.max((analytic - numeric).abs() / analytic.abs().max(1.0));
            }
        }
    }
    Check { name: "psi gradient vs differences", worst, tol: 1e-5, cases: states }
}

/// `4t Σ_j w_kj (x_j − ½)` written directly over node pairs of the graph.
fn scalar_side_field(
    graph: &Graph,
    own: &[usize],
    cross: &[usize],
    own_marg: &[f64],
    cross_marg: &[f64],
    k: usize,
    c: LogitConstants,
) -> f64 {
    let m = own.len();
    let mut acc = 0.0;
    for j in 0..m {
        if j != k {
            let a = if graph.has_edge(own[k], own[j]) { 1.0 } else { 0.0 };
            acc += (a - c.lambda) * (own_marg[j] - 0.5);
            let a = if graph.has_edge(own[k], cross[j]) { 1.0 } else { 0.0 };
            acc += (a - c.lambda) * (cross_marg[j] - 0.5);
        }
    }
    4.0 * c.t * acc
}

/// Vectorized logit updates against a per-entry loop over the graph.
pub fn theta_scalar_loop(cases: usize) -> Check {
    let mut worst = 0f64;
    let mut r = rng(13);
    for s in 0..cases {
        let m = 1 + s % 10;
        let (graph, pairing, blocks, p, q) = small_instance(2 * m, 300 + s as u64);
        let c = logit_constants(p, q).unwrap();
        let mut state = VipsState::uniform(m);
        state.phi = (0..m).map(|_| r.gen()).collect();
        state.xi = (0..m).map(|_| r.gen()).collect();
        let t10 = update_theta10(&state, &blocks, c).unwrap();
        let t01 = update_theta01(&state, &blocks, c).unwrap();
        let t11 = update_theta11(&state, &blocks, c).unwrap();
        let (p1, p2) = (pairing.p1(), pairing.p2());
        for k in 0..m {
            let d = if graph.has_edge(p1[k], p2[k]) { 1.0 } else { 0.0 };
            let s_k = 2.0 * c.t * (d - c.lambda);
            let xz = scalar_side_field(&graph, p1, p2, &state.phi, &state.xi, k, c);
            let xy = scalar_side_field(&graph, p2, p1, &state.xi, &state.phi, k, c);
            worst = worst
                .max((t10[k] - (xz - s_k)).abs())
                .max((t01[k] - (xy - s_k)).abs())
                .max((t11[k] - (xz + xy)).abs());
        }
    }
    Check { name: "theta vs scalar loop", worst, tol: 1e-12, cases }
}

/// The `K`-class engine at `K = 2` against the two-class engine, snapshot
/// by snapshot.
pub fn general_matches_binary(meta_iters: usize) -> Check {
    let mut worst = 0f64;
    let mut cases = 0;
    for (seed, pi) in [(1u64, 0.5), (2, 0.3), (3, 0.5)] {
        let n = 200;
        let graph = generate_sbm(&SbmConfig::two_class(n, 0.15, 0.05), seed).unwrap();
        let pairing = random_pairing(n, seed + 10).unwrap();
        let blocks = block_views(&graph, &pairing).unwrap();
        let c = logit_constants(0.15, 0.05).unwrap();
        let mut r = rng(seed + 20);
        let u0: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        let mut binary = VipsState::from_marginals(&u0).unwrap();
        let rows: Vec<Vec<f64>> = u0.iter().map(|&u| vec![1.0 - u, u]).collect();
        let mut general = GeneralVipsState::from_marginals(&rows, 2).unwrap();
        for _ in 0..meta_iters {
            let a = meta_iteration(&mut binary, &blocks, c, pi).unwrap();
            let b = meta_iteration_general(&mut general, &blocks, c, &[1.0 - pi, pi]).unwrap();
            for (ua, rb) in a.iter().zip(&b) {
                for (x, row) in ua.iter().zip(rb) {
                    worst = worst.max((x - row[1]).abs());
                }
            }
            cases += 1;
        }
    }
    Check { name: "K=2 general vs binary", worst, tol: 1e-12, cases }
}

/// Simplex and marginal-consistency violations after every refresh of a
/// two-class run and after every meta iteration of a three-class run.
pub fn refresh_invariants(meta_iters: usize) -> Check {
    let mut worst = 0f64;
    let n = 400;
    let graph = generate_sbm(&SbmConfig::two_class(n, 0.2, 0.02), 5).unwrap();
    let pairing = random_pairing(n, 6).unwrap();
    let blocks = block_views(&graph, &pairing).unwrap();
    let c = logit_constants(0.2, 0.02).unwrap();
    let mut r = rng(7);
    let u0: Vec<f64> = (0..n).map(|_| r.gen()).collect();
    let mut state = VipsState::from_marginals(&u0).unwrap();
    for _ in 0..meta_iters {
        state.theta10 = update_theta10(&state, &blocks, c).unwrap();
        state.refresh().unwrap();
        worst = worst.max(state.invariant_violation());
        state.theta01 = update_theta01(&state, &blocks, c).unwrap();
        state.refresh().unwrap();
        worst = worst.max(state.invariant_violation());
        state.theta11 = update_theta11(&state, &blocks, c).unwrap();
        state.refresh().unwrap();
        worst = worst.max(state.invariant_violation());
    }

    let graph3 = generate_sbm(&SbmConfig::planted(300, 3, 0.3, 0.02), 8).unwrap();
    let pairing3 = random_pairing(300, 9).unwrap();
    let blocks3 = block_views(&graph3, &pairing3).unwrap();
    let c3 = logit_constants(0.3, 0.02).unwrap();
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let raw: Vec<f64> = (0..3).map(|_| r.gen_range(0.01..1.0)).collect();
            let z: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / z).collect()
        })
        .collect();
    let mut general = GeneralVipsState::from_marginals(&rows, 3).unwrap();
    for _ in 0..meta_iters {
        meta_iteration_general(&mut general, &blocks3, c3, &[1.0 / 3.0; 3]).unwrap();
        worst = worst.max(general.invariant_violation());
    }
    Check { name: "refresh invariants", worst, tol: 1e-12, cases: 2 * meta_iters }
}

/// `q < λ < (p + q)/2` for sampled `p > q` with `p + q < 1`. The reported
/// value is the number of violations.
pub fn lambda_bounds(samples: usize) -> Check {
    let mut r = rng(14);
    let mut bad = 0usize;
    let mut drawn = 0;
    while drawn < samples {
        let (a, b): (f64, f64) = (r.gen(), r.gen());
        let (p, q) = if a > b { (a, b) } else { (b, a) };
        if !(p + q < 1.0) || p == q {
            continue;
        }
        drawn += 1;
        let lambda = logit_constants(p, q).unwrap().lambda;
        if !(q < lambda && lambda < (p + q) / 2.0) {
            bad += 1;
        }
    }
    Check { name: "lambda bounds", worst: bad as f64, tol: 0.0, cases: samples }
}

/// `min-perm ℓ1 = m − |⟨u, v₂⟩|` for binary `u` on balanced labels.
pub fn projection_identity(samples: usize) -> Check {
    let mut r = rng(15);
    let mut worst = 0f64;
    for s in 0..samples {
        let n = 2 * r.gen_range(1..=60);
        let graph = generate_sbm(&SbmConfig::two_class(n, 0.1, 0.05), s as u64).unwrap();
        let pairing = random_pairing(n, s as u64 + 1000).unwrap();
        let u: Vec<f64> = (0..n).map(|_| if r.gen::<bool>() { 1.0 } else { 0.0 }).collect();
        let l1 = l1_to_truth(&pairing.to_node_order(&u), graph.labels()).unwrap();
        let (proj, _) = signal_projection(&u, graph.labels(), &pairing).unwrap();
        worst = worst.max((l1 - (pairing.m() as f64 - proj.abs())).abs());
    }
    Check { name: "projection identity", worst, tol: 0.0, cases: samples }
}

/// Every suite at its specified size.
pub fn all_checks() -> Vec<Check> {
    vec![
        elbo_enumeration(50),
        gradient_finite_differences(20),
        theta_scalar_loop(40),
        general_matches_binary(30),
        refresh_invariants(50),
        lambda_bounds(1000),
        projection_identity(100),
    ]
}
