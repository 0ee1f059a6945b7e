//! Agreement measures between estimated memberships and ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::pairing::Pairing;

/// Largest community count for which `l1_to_truth_general` enumerates label
/// permutations.
pub const MAX_PERMUTATION_K: usize = 6;

/// `min(‖u − z*‖₁, ‖u − (1 − z*)‖₁)` for a two-class membership vector.
pub fn l1_to_truth(u: &[f64], z_star: &[usize]) -> Result<f64> {
    check_len(z_star.len(), u.len())?;
    let (mut direct, mut flipped) = (0.0, 0.0);
    for (&ui, &zi) in u.iter().zip(z_star) {
        let z = if zi == 1 { 1.0 } else { 0.0 };
        direct += (ui - z).abs();
        flipped += (ui - (1.0 - z)).abs();
    }
    Ok(direct.min(flipped))
}

pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for sub in permutations(k - 1) {
        for pos in 0..=sub.len() {
            let mut p = sub.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

/// `min_σ Σᵢ (1 − u[i][σ(z*ᵢ)])` over all label permutations. `u` holds one
/// probability row per node.
pub fn l1_to_truth_general(u: &[Vec<f64>], z_star: &[usize], k: usize) -> Result<f64> {
    check_len(z_star.len(), u.len())?;
    if k > MAX_PERMUTATION_K {
        return Err(Error::InvalidInput(format!("K = {k} exceeds the permutation limit {MAX_PERMUTATION_K}")));
    }
    // mass[a][b]: total probability that truth-class-a nodes put on class b
    let mut mass = vec![vec![0.0; k]; k];
    for (row, &z) in u.iter().zip(z_star) {
        check_len(k, row.len())?;
        for (b, &x) in row.iter().enumerate() {
            mass[z][b] += x;
        }
    }
    let n = u.len() as f64;
    let best = permutations(k)
        .into_iter()
        .map(|sigma| (0..k).map(|a| mass[a][sigma[a]]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(n - best)
}

/// Thresholds at ½; exactly ½ goes to class 1.
pub fn hard_labels(u: &[f64]) -> Vec<usize> {
    u.iter().map(|&x| usize::from(x >= 0.5)).collect()
}

/// Row-wise argmax, ties to the lowest class.
pub fn hard_labels_general(u: &[Vec<f64>]) -> Vec<usize> {
    u.iter()
        .map(|row| {
            let mut best = 0;
            for (a, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = a;
                }
            }
            best
        })
        .collect()
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with geometric-mean normalization,
/// `I(a; b) / sqrt(H(a) H(b))`.
///
/// If either partition has zero entropy the result is 0, unless both are
/// the single-cluster partition, which scores 1.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    check_len(a.len(), b.len())?;
    if a.is_empty() {
        return Err(Error::InvalidInput("nmi of empty partitions".into()));
    }
    let n = a.len() as f64;
    // ordered maps keep every summation order fixed, so the result is
    // bit-for-bit reproducible
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut ca: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cb: BTreeMap<usize, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
    }
    let (ha, hb) = (entropy(ca.values().copied(), n), entropy(cb.values().copied(), n));
    if ha == 0.0 || hb == 0.0 {
        return Ok(if ca.len() == 1 && cb.len() == 1 { 1.0 } else { 0.0 });
    }
    let mi: f64 = joint
        .into_iter()
        .map(|((x, y), c)| {
            let pxy = c as f64 / n;
            let px = ca[&x] as f64 / n;
            let py = cb[&y] as f64 / n;
            pxy * (pxy / (px * py)).ln()
        })
        .sum();
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// `⟨u, v₂⟩` and the drift `⟨u, 1⟩ − m` for `u` in `(P1, P2)` order, where
/// `v₂ = (1_{C1} − 1_{C2}, 1_{C1'} − 1_{C2'})`.
pub fn signal_projection(u: &[f64], z_star: &[usize], pairing: &Pairing) -> Result<(f64, f64)> {
    check_len(pairing.n(), u.len())?;
    check_len(pairing.n(), z_star.len())?;
    let order = pairing.node_order();
    let mut proj = 0.0;
    let mut total = 0.0;
    for (pos, &node) in order.iter().enumerate() {
        let v = if z_star[node] == 1 { 1.0 } else { -1.0 };
        proj += u[pos] * v;
        total += u[pos];
    }
    Ok((proj, total - pairing.m() as f64))
}

/// The same projection for `u` in node order; `v₂` is then `2z* − 1`.
pub fn signal_projection_node_order(u: &[f64], z_star: &[usize]) -> f64 {
    u.iter().zip(z_star).map(|(&x, &z)| if z == 1 { x } else { -x }).sum()
}

/// Per-iteration trace of one inference run.
///
/// Every array has one entry per recorded tick; tick 0 is the
/// initialization. Entries that do not apply to an algorithm are NaN.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub algorithm: String,
    pub ticks: Vec<usize>,
    pub l1_error: Vec<f64>,
    pub nmi: Vec<f64>,
    pub elbo: Vec<f64>,
    pub signal_projection: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub q_hat: Vec<f64>,
    pub converged: bool,
    /// Meta iterations for VIPS, sweeps for the baselines.
    pub iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub config: serde_json::Value,
    #[serde(default)]
    pub wall_time_secs: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl TrialRecord {
    pub fn new(algorithm: &str, seed: u64, config: serde_json::Value) -> Self {
        TrialRecord { algorithm: algorithm.to_string(), seed, config, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Records one tick from a two-class membership vector in node order.
    pub fn push_binary(&mut self, tick: usize, u: &[f64], truth: &[usize], elbo: f64, pq: (f64, f64)) {
        let l1 = l1_to_truth(u, truth).expect("lengths checked by caller");
        let score = nmi(&hard_labels(u), truth).expect("non-empty");
        self.push_raw(tick, l1, score, elbo, signal_projection_node_order(u, truth), pq);
    }

    /// Records one tick from per-node class probabilities.
    pub fn push_general(&mut self, tick: usize, u: &[Vec<f64>], truth: &[usize], k: usize, elbo: f64, pq: (f64, f64)) {
        let l1 = l1_to_truth_general(u, truth, k).unwrap_or(f64::NAN);
        let score = nmi(&hard_labels_general(u), truth).expect("non-empty");
        self.push_raw(tick, l1, score, elbo, f64::NAN, pq);
    }

    pub fn push_raw(&mut self, tick: usize, l1: f64, nmi: f64, elbo: f64, signal: f64, (p, q): (f64, f64)) {
        self.ticks.push(tick);
        self.l1_error.push(l1);
        self.nmi.push(nmi);
        self.elbo.push(elbo);
        self.signal_projection.push(signal);
        self.p_hat.push(p);
        self.q_hat.push(q);
    }

    pub fn final_l1(&self) -> f64 {
        *self.l1_error.last().unwrap_or(&f64::NAN)
    }

    pub fn final_nmi(&self) -> f64 {
        *self.nmi.last().unwrap_or(&f64::NAN)
    }

    /// ℓ1 error at the given tick, carrying the last value forward if the
    /// run stopped earlier.
    pub fn l1_at(&self, tick: usize) -> f64 {
        match self.ticks.iter().rposition(|&t| t <= tick) {
            Some(pos) => self.l1_error[pos],
            None => f64::NAN,
        }
    }

    /// Extends every trace to `tick` by repeating the final entry.
    pub fn pad_to(&mut self, tick: usize) {
        let Some(&last) = self.ticks.last() else { return };
        let i = self.ticks.len() - 1;
        for t in last + 1..=tick {
            self.ticks.push(t);
            self.l1_error.push(self.l1_error[i]);
            self.nmi.push(self.nmi[i]);
            self.elbo.push(self.elbo[i]);
            self.signal_projection.push(self.signal_projection[i]);
            self.p_hat.push(self.p_hat[i]);
            self.q_hat.push(self.q_hat[i]);
        }
    }
}
