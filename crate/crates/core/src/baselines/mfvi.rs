//! Mean-field batch coordinate ascent (BCAVI).
//!
//! The two-class update is the pairing-free specialization of the VIPS
//! `θ¹⁰` update, applied to all nodes at once:
//! `u ← σ(4t[A − λ(J − I)](u − ½1) + logit(π))`. The `K`-class update is
//! the row softmax of `2t[A − λ(J − I)]u_a + log π_a`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::metrics::TrialRecord;
use crate::sbm::{BinaryMatrix, Graph, LogitConstants};
use crate::vips::general::GeneralInit;
use crate::vips::params::update_parameters_mean_field;
use crate::vips::state::InitMode;
use crate::vips::updates::prior_logit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MfviConfig {
    pub p_hat: f64,
    pub q_hat: f64,
    pub pi: f64,
    pub update_params: bool,
    /// First sweep (1-based) after which `(p̂, q̂)` are re-estimated.
    pub param_update_start: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub init: InitMode,
}

impl MfviConfig {
    /// Defaults sized to match VIPS: 300 sweeps is 100 meta iterations on
    /// the shared tick axis, and parameter updates start at sweep 9.
    pub fn new(p_hat: f64, q_hat: f64) -> Self {
        MfviConfig {
            p_hat,
            q_hat,
            pi: 0.5,
            update_params: false,
            param_update_start: 9,
            max_iters: 300,
            tol: 1e-6,
            init: InitMode::Bernoulli(0.5),
        }
    }

    pub fn with_init(mut self, init: InitMode) -> Self {
        self.init = init;
        self
    }

    pub fn with_param_updates(mut self, start: usize) -> Self {
        self.update_params = true;
        self.param_update_start = start;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_hat", self.p_hat), ("q_hat", self.q_hat)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        prior_logit(self.pi)?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        Ok(())
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `[A − λ(J − I)] x`.
fn shifted_matvec(a: &BinaryMatrix, lambda: f64, x: &[f64]) -> Vec<f64> {
    let sum: f64 = x.iter().sum();
    let mut y = a.mul_vec(x);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= lambda * (sum - xi);
    }
    y
}

/// One batch sweep of the two-class update.
pub fn mfvi_sweep(adjacency: &BinaryMatrix, u: &[f64], consts: LogitConstants, pi: f64) -> Result<Vec<f64>> {
    check_len(adjacency.rows(), u.len())?;
    let shift = prior_logit(pi)?;
    let centered: Vec<f64> = u.iter().map(|x| x - 0.5).collect();
    let field = shifted_matvec(adjacency, consts.lambda, &centered);
    Ok(field.into_iter().map(|f| logistic(4.0 * consts.t * f + shift)).collect())
}

fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len().max(1) as f64
}

/// Two-class MFVI; one sweep is one tick. Returns the final `u` (node
/// order).
pub fn run_mfvi(graph: &Graph, config: &MfviConfig, seed: u64) -> Result<(Vec<f64>, TrialRecord)> {
    config.validate()?;
    let start = Instant::now();
    let adjacency = graph.adjacency();
    let truth = graph.labels();
    let mut u = config.init.draw(graph.n(), seed)?;
    let (mut p_hat, mut q_hat) = (config.p_hat, config.q_hat);
    let mut record = TrialRecord::new("mfvi", seed, serde_json::to_value(config)?);
    if p_hat <= q_hat {
        record.warnings.push(format!("initial p_hat {p_hat} <= q_hat {q_hat}"));
    }
    record.push_binary(0, &u, truth, f64::NAN, (p_hat, q_hat));

    let mut last_update: Option<(f64, f64)> = None;
    let mut iters = 0;
    let mut converged = false;
    while !converged && iters < config.max_iters {
        let consts = LogitConstants::with_limit(p_hat, q_hat)?;
        let next = mfvi_sweep(adjacency, &u, consts, config.pi)?;
        let du = mean_abs_diff(&u, &next);
        u = next;
        iters += 1;

        let mut params_settled = !config.update_params;
        if config.update_params && iters >= config.param_update_start {
            let (p, q) = update_parameters_mean_field(adjacency, &u)?;
            if p <= q {
                record.warnings.push(format!("sweep {iters}: p_hat {p} <= q_hat {q}"));
            }
            if let Some((p0, q0)) = last_update {
                params_settled = (p - p0).abs() < config.tol && (q - q0).abs() < config.tol;
            }
            last_update = Some((p, q));
            p_hat = p;
            q_hat = q;
        }
        record.push_binary(iters, &u, truth, f64::NAN, (p_hat, q_hat));
        converged = du < config.tol && params_settled;
    }
    record.converged = converged;
    record.iterations = iters;
    record.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((u, record))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralMfviConfig {
    pub k: usize,
    /// Class prior; uniform when empty.
    #[serde(default)]
    pub pi: Vec<f64>,
    pub p_hat: f64,
    pub q_hat: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub init: GeneralInit,
}

impl GeneralMfviConfig {
    pub fn new(k: usize, p_hat: f64, q_hat: f64) -> Self {
        GeneralMfviConfig {
            k,
            pi: Vec::new(),
            p_hat,
            q_hat,
            max_iters: 300,
            tol: 1e-6,
            init: GeneralInit::Dirichlet(vec![1.0; k]),
        }
    }

    fn prior(&self) -> Result<Vec<f64>> {
        if self.pi.is_empty() {
            return Ok(vec![1.0 / self.k as f64; self.k]);
        }
        check_len(self.k, self.pi.len())?;
        if self.pi.iter().any(|&x| !(x > 0.0)) || (self.pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("class prior {:?} is not a positive probability vector", self.pi)));
        }
        Ok(self.pi.clone())
    }
}

/// One batch sweep of the `K`-class update on rows `u` (node order).
pub fn mfvi_sweep_general(
    adjacency: &BinaryMatrix,
    u: &[Vec<f64>],
    consts: LogitConstants,
    pi: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n = u.len();
    check_len(adjacency.rows(), n)?;
    let k = pi.len();
    let fields: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            let col: Vec<f64> = u.iter().map(|row| row[a]).collect();
            shifted_matvec(adjacency, consts.lambda, &col)
        })
        .collect();
    let log_pi: Vec<f64> = pi.iter().map(|p| p.ln()).collect();
    Ok((0..n)
        .map(|i| {
            let logits: Vec<f64> = (0..k).map(|a| 2.0 * consts.t * fields[a][i] + log_pi[a]).collect();
            let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = logits.iter().map(|l| (l - mx).exp()).collect();
            let z: f64 = e.iter().sum();
            e.into_iter().map(|x| x / z).collect()
        })
        .collect())
}

/// `K`-class MFVI with fixed parameters.
pub fn run_mfvi_general(graph: &Graph, config: &GeneralMfviConfig, seed: u64) -> Result<(Vec<Vec<f64>>, TrialRecord)> {
    if config.k < 2 {
        return Err(Error::InvalidConfig(format!("K = {} must be at least 2", config.k)));
    }
    let start = Instant::now();
    let k = config.k;
    let pi = config.prior()?;
    let consts = LogitConstants::with_limit(config.p_hat, config.q_hat)?;
    let truth = graph.labels();
    let pq = (config.p_hat, config.q_hat);
    let mut u = config.init.draw(graph.n(), k, seed)?;
    let mut record = TrialRecord::new("mfvi", seed, serde_json::to_value(config)?);
    record.push_general(0, &u, truth, k, f64::NAN, pq);

    let mut iters = 0;
    let mut converged = false;
    while !converged && iters < config.max_iters {
        let next = mfvi_sweep_general(graph.adjacency(), &u, consts, &pi)?;
        let du = u
            .iter()
            .zip(&next)
            .map(|(x, y)| x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .sum::<f64>()
            / u.len().max(1) as f64;
        u = next;
        iters += 1;
        record.push_general(iters, &u, truth, k, f64::NAN, pq);
        converged = du < config.tol;
    }
    record.converged = converged;
    record.iterations = iters;
    record.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((u, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{generate_sbm, SbmConfig};

    #[test]
    fn ones_is_a_fixed_point() {
        let g = generate_sbm(&SbmConfig::two_class(600, 0.2, 0.01), 4).unwrap();
        let consts = LogitConstants::with_limit(0.2, 0.01).unwrap();
        for c in [0.0, 1.0] {
            let u = vec![c; 600];
            let next = mfvi_sweep(g.adjacency(), &u, consts, 0.5).unwrap();
            assert!(mean_abs_diff(&u, &next) < 1e-6);
        }
    }

    #[test]
    fn general_sweep_matches_binary_at_k2() {
        let g = generate_sbm(&SbmConfig::two_class(60, 0.3, 0.05), 1).unwrap();
        let consts = LogitConstants::with_limit(0.3, 0.05).unwrap();
        let u = InitMode::Uniform.draw(60, 3).unwrap();
        let rows: Vec<Vec<f64>> = u.iter().map(|&x| vec![1.0 - x, x]).collect();
        let a = mfvi_sweep(g.adjacency(), &u, consts, 0.5).unwrap();
        let b = mfvi_sweep_general(g.adjacency(), &rows, consts, &[0.5, 0.5]).unwrap();
        for (x, row) in a.iter().zip(&b) {
            assert!((x - row[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn prior_shift_is_single_logit() {
        // empty graph: the field vanishes up to λ terms at u = ½
        let g = Graph::from_edges(4, 2, &[], vec![0, 0, 1, 1], crate::sbm::Backend::Dense).unwrap();
        let consts = LogitConstants { t: 1.0, lambda: 0.1 };
        let u = mfvi_sweep(g.adjacency(), &[0.5; 4], consts, 0.3).unwrap();
        assert!((u[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn recovers_easy_instance() {
        let g = generate_sbm(&SbmConfig::two_class(400, 0.3, 0.02), 2).unwrap();
        let cfg = MfviConfig::new(0.3, 0.02).with_init(InitMode::Uniform);
        let (_, rec) = run_mfvi(&g, &cfg, 11).unwrap();
        assert!(rec.converged);
        assert_eq!(rec.len(), rec.iterations + 1);
    }
}
