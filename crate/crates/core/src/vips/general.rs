//! The pairwise family for `K ≥ 2` planted-partition models,
//! `B = (p − q)I + qJ`.
//!
//! Each pair carries a `K × K` categorical `ψ^{ab}` with `θ^{00} ≡ 0` as the
//! reference cell. With per-class side fields
//!
//! ```text
//! X^z_a = 2t{[A^{zz} − λ(J−I)](φ_a − φ_0) + [A^{zy} − λ(J−I) − diag(d)](ξ_a − ξ_0)}
//! X^y_b = 2t{[A^{yy} − λ(J−I)](ξ_b − ξ_0) + [A^{yz} − λ(J−I) − diag(d)](φ_b − φ_0)}
//! ```
//!
//! and `s = 2t(d − λ1)`, the logits are `θ^{a0} = X^z_a − s`,
//! `θ^{0b} = X^y_b − s` and, for `a, b ≥ 1`, `θ^{ab} = X^z_a + X^y_b − [a ≠ b]s`,
//! each plus the prior term `log(π_a/π_0) + log(π_b/π_0)`. A meta iteration
//! updates all `θ^{a0}`, refreshes, all `θ^{0b}`, refreshes, then all
//! `θ^{ab}` and refreshes. At `K = 2` this is exactly the two-class engine.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::metrics::TrialRecord;
use crate::pairing::{block_views, BlockViews, Pairing};
use crate::sbm::{BinaryMatrix, Graph, LogitConstants};
use crate::vips::engine::TICKS_PER_META;
use crate::vips::state::{shifted_exp, InitMode};

/// How the initial class-probability rows are drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum GeneralInit {
    /// Each node's row drawn i.i.d. from Dirichlet(α).
    Dirichlet(Vec<f64>),
    /// Two-class initializations lifted to rows `(1 − u, u)`; `K = 2` only.
    Binary(InitMode),
    /// Explicit rows in node order.
    Explicit(Vec<Vec<f64>>),
}

impl GeneralInit {
    /// Draws `n` rows of length `k` in node order.
    pub fn draw(&self, n: usize, k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let rows = match self {
            GeneralInit::Dirichlet(alpha) => {
                check_len(k, alpha.len())?;
                let dist = Dirichlet::new(alpha)
                    .map_err(|e| Error::InvalidConfig(format!("dirichlet parameters: {e}")))?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n).map(|_| dist.sample(&mut rng)).collect()
            }
            GeneralInit::Binary(mode) => {
                if k != 2 {
                    return Err(Error::InvalidConfig(format!("binary init needs K = 2, got {k}")));
                }
                mode.draw(n, seed)?.into_iter().map(|u| vec![1.0 - u, u]).collect()
            }
            GeneralInit::Explicit(rows) => {
                check_len(n, rows.len())?;
                rows.clone()
            }
        };
        for row in &rows {
            check_len(k, row.len())?;
            let s: f64 = row.iter().sum();
            if row.iter().any(|x| !(0.0..=1.0).contains(x)) || (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput("init rows must be probability vectors".into()));
            }
        }
        Ok(rows)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralVipsConfig {
    pub k: usize,
    /// Class prior; uniform when empty.
    #[serde(default)]
    pub pi: Vec<f64>,
    pub p_hat: f64,
    pub q_hat: f64,
    pub max_meta_iters: usize,
    pub tol: f64,
    pub init: GeneralInit,
}

impl GeneralVipsConfig {
    pub fn new(k: usize, p_hat: f64, q_hat: f64) -> Self {
        GeneralVipsConfig {
            k,
            pi: Vec::new(),
            p_hat,
            q_hat,
            max_meta_iters: 100,
            tol: 1e-6,
            init: GeneralInit::Dirichlet(vec![1.0; k]),
        }
    }

    pub fn prior(&self) -> Result<Vec<f64>> {
        if self.pi.is_empty() {
            return Ok(vec![1.0 / self.k as f64; self.k]);
        }
        check_len(self.k, self.pi.len())?;
        if self.pi.iter().any(|&x| !(x > 0.0)) || (self.pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("class prior {:?} is not a positive probability vector", self.pi)));
        }
        Ok(self.pi.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!("K = {} must be at least 2", self.k)));
        }
        for (name, v) in [("p_hat", self.p_hat), ("q_hat", self.q_hat)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidConfig(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        self.prior().map(|_| ())
    }
}

/// Pairwise variational parameters for `K` classes. Tensors are flattened
/// as `[pair][a][b]`, marginals as `[pair][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralVipsState {
    pub k: usize,
    pub m: usize,
    pub theta: Vec<f64>,
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
}

impl GeneralVipsState {
    /// All logits zero, marginals overwritten by `u0` given as rows in
    /// `(P1, P2)` order.
    pub fn from_marginals(u0: &[Vec<f64>], k: usize) -> Result<Self> {
        if !u0.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("membership matrix has an odd row count {}", u0.len())));
        }
        let m = u0.len() / 2;
        let mut s = GeneralVipsState::uniform(m, k);
        for (i, row) in u0.iter().enumerate() {
            check_len(k, row.len())?;
            let dst = if i < m { &mut s.phi[i * k..(i + 1) * k] } else { &mut s.xi[(i - m) * k..(i - m + 1) * k] };
            dst.copy_from_slice(row);
        }
        Ok(s)
    }

    pub fn uniform(m: usize, k: usize) -> Self {
        GeneralVipsState {
            k,
            m,
            theta: vec![0.0; m * k * k],
            psi: vec![1.0 / (k * k) as f64; m * k * k],
            phi: vec![1.0 / k as f64; m * k],
            xi: vec![1.0 / k as f64; m * k],
        }
    }

    #[inline]
    fn cell(&self, pair: usize, a: usize, b: usize) -> usize {
        (pair * self.k + a) * self.k + b
    }

    pub fn theta_at(&self, pair: usize, a: usize, b: usize) -> f64 {
        self.theta[self.cell(pair, a, b)]
    }

    pub fn psi_at(&self, pair: usize, a: usize, b: usize) -> f64 {
        self.psi[self.cell(pair, a, b)]
    }

    /// Column `a` of φ (one entry per pair).
    pub fn phi_class(&self, a: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.phi[i * self.k + a]).collect()
    }

    pub fn xi_class(&self, a: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.xi[i * self.k + a]).collect()
    }

    /// Class-probability rows in `(P1, P2)` order.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.phi.chunks(self.k).chain(self.xi.chunks(self.k)).map(|r| r.to_vec()).collect()
    }

    pub fn rows_node_order(&self, pairing: &Pairing) -> Vec<Vec<f64>> {
        rows_to_node_order(&self.rows(), pairing)
    }

    /// Softmax over the `K²` cells of each pair, then marginals.
    pub fn refresh(&mut self) -> Result<()> {
        let kk = self.k * self.k;
        for i in 0..self.m {
            let th = &self.theta[i * kk..(i + 1) * kk];
            if th.iter().any(|x| !x.is_finite()) {
                return Err(Error::Numeric("theta"));
            }
            let mx = th.iter().skip(1).fold(0f64, |acc, &x| acc.max(x));
            let mut z = 0.0;
            for c in 0..kk {
                let logit = if c == 0 { 0.0 } else { th[c] };
                let e = shifted_exp(logit, mx);
                self.psi[i * kk + c] = e;
                z += e;
            }
            for c in 0..kk {
                self.psi[i * kk + c] /= z;
            }
            for a in 0..self.k {
                let mut row = 0.0;
                let mut col = 0.0;
                for b in 0..self.k {
                    row += self.psi[i * kk + a * self.k + b];
                    col += self.psi[i * kk + b * self.k + a];
                }
                self.phi[i * self.k + a] = row;
                self.xi[i * self.k + a] = col;
            }
        }
        #[cfg(debug_assertions)]
        {
            let v = self.invariant_violation();
            debug_assert!(v <= 1e-12, "state invariants violated by {v}");
        }
        Ok(())
    }

    pub fn invariant_violation(&self) -> f64 {
        let (k, kk) = (self.k, self.k * self.k);
        let mut worst = 0f64;
        for i in 0..self.m {
            let cells = &self.psi[i * kk..(i + 1) * kk];
            worst = worst.max((cells.iter().sum::<f64>() - 1.0).abs());
            worst = cells.iter().fold(worst, |w, &p| w.max(-p));
            for a in 0..k {
                let row: f64 = (0..k).map(|b| cells[a * k + b]).sum();
                let col: f64 = (0..k).map(|b| cells[b * k + a]).sum();
                worst = worst.max((self.phi[i * k + a] - row).abs());
                worst = worst.max((self.xi[i * k + a] - col).abs());
            }
        }
        worst
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

/// `2t{[own − λ(J−I)] Δown + [cross − λ(J−I) − diag(d)] Δcross}`.
fn class_field(
    own: &BinaryMatrix,
    cross: &BinaryMatrix,
    diag: &[f64],
    consts: LogitConstants,
    own_diff: &[f64],
    cross_diff: &[f64],
) -> Vec<f64> {
    let a = shifted_matvec(own, consts.lambda, own_diff);
    let b = shifted_matvec(cross, consts.lambda, cross_diff);
    let two_t = 2.0 * consts.t;
    a.iter()
        .zip(&b)
        .zip(diag.iter().zip(cross_diff))
        .map(|((ai, bi), (di, ci))| two_t * (ai + (bi - di * ci)))
        .collect()
}

fn diff(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// `X^z_a` for `a = 1..K` (index 0 unused and left empty).
fn fields_z(state: &GeneralVipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<Vec<f64>> {
    let (phi0, xi0) = (state.phi_class(0), state.xi_class(0));
    let mut out = vec![Vec::new()];
    for a in 1..state.k {
        let dphi = diff(&state.phi_class(a), &phi0);
        let dxi = diff(&state.xi_class(a), &xi0);
        out.push(class_field(&blocks.a_zz, &blocks.a_zy, &blocks.a_zy_diag, consts, &dphi, &dxi));
    }
    out
}

fn fields_y(state: &GeneralVipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<Vec<f64>> {
    let (phi0, xi0) = (state.phi_class(0), state.xi_class(0));
    let mut out = vec![Vec::new()];
    for b in 1..state.k {
        let dxi = diff(&state.xi_class(b), &xi0);
        let dphi = diff(&state.phi_class(b), &phi0);
        out.push(class_field(&blocks.a_yy, &blocks.a_yz, &blocks.a_zy_diag, consts, &dxi, &dphi));
    }
    out
}

/// `log(π_a/π_0) + log(π_b/π_0)`.
fn prior_term(log_ratio: &[f64], a: usize, b: usize) -> f64 {
    log_ratio[a] + log_ratio[b]
}

/// One meta iteration of the `K`-class engine. Returns the rows (pairing
/// order) after each of the three refreshes.
pub fn meta_iteration_general(
    state: &mut GeneralVipsState,
    blocks: &BlockViews,
    consts: LogitConstants,
    pi: &[f64],
) -> Result<[Vec<Vec<f64>>; 3]> {
    check_len(blocks.m(), state.m)?;
    check_len(state.k, pi.len())?;
    let k = state.k;
    let log_ratio: Vec<f64> = pi.iter().map(|p| (p / pi[0]).ln()).collect();
    let s: Vec<f64> = blocks.a_zy_diag.iter().map(|d| 2.0 * consts.t * (d - consts.lambda)).collect();

    let xz = fields_z(state, blocks, consts);
    for a in 1..k {
        for i in 0..state.m {
            let c = state.cell(i, a, 0);
            state.theta[c] = xz[a][i] - s[i] + prior_term(&log_ratio, a, 0);
        }
    }
    state.refresh()?;
    let r1 = state.rows();

    let xy = fields_y(state, blocks, consts);
    for b in 1..k {
        for i in 0..state.m {
            let c = state.cell(i, 0, b);
            state.theta[c] = xy[b][i] - s[i] + prior_term(&log_ratio, 0, b);
        }
    }
    state.refresh()?;
    let r2 = state.rows();

    let xz = fields_z(state, blocks, consts);
    let xy = fields_y(state, blocks, consts);
    for a in 1..k {
        for b in 1..k {
            for i in 0..state.m {
                let split = if a != b { s[i] } else { 0.0 };
                let c = state.cell(i, a, b);
                state.theta[c] = xz[a][i] + xy[b][i] - split + prior_term(&log_ratio, a, b);
            }
        }
    }
    state.refresh()?;
    let r3 = state.rows();

    Ok([r1, r2, r3])
}

fn rows_to_node_order(rows: &[Vec<f64>], pairing: &Pairing) -> Vec<Vec<f64>> {
    let m = pairing.m();
    let mut out = vec![Vec::new(); pairing.n()];
    for (i, row) in rows.iter().enumerate() {
        let node = if i < m { pairing.p1()[i] } else { pairing.p2()[i - m] };
        out[node] = row.clone();
    }
    out
}

fn rows_to_pairing_order(rows: &[Vec<f64>], pairing: &Pairing) -> Vec<Vec<f64>> {
    pairing.p1().iter().chain(pairing.p2()).map(|&node| rows[node].clone()).collect()
}

fn mean_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a.len().max(1) as f64;
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum::<f64>())
        .sum::<f64>()
        / n
}

/// Runs the `K`-class engine to convergence (same rule as the two-class
/// engine, with `|Δu|` summed over classes).
pub fn run_vips_general(
    graph: &Graph,
    pairing: &Pairing,
    config: &GeneralVipsConfig,
    seed: u64,
) -> Result<(GeneralVipsState, TrialRecord)> {
    config.validate()?;
    let start = Instant::now();
    let k = config.k;
    let pi = config.prior()?;
    let blocks = block_views(graph, pairing)?;
    let consts = LogitConstants::with_limit(config.p_hat, config.q_hat)?;
    let u0 = config.init.draw(graph.n(), k, seed)?;
    let mut state = GeneralVipsState::from_marginals(&rows_to_pairing_order(&u0, pairing), k)?;

    let pq = (config.p_hat, config.q_hat);
    let mut record = TrialRecord::new("vips", seed, serde_json::to_value(config)?);
    if config.p_hat <= config.q_hat {
        record.warnings.push(format!("p_hat {} <= q_hat {}", config.p_hat, config.q_hat));
    }
    let truth = graph.labels();
    record.push_general(0, &u0, truth, k, f64::NAN, pq);

    let mut meta = 0;
    let mut converged = false;
    while !converged && meta < config.max_meta_iters {
        let before = state.rows();
        let snaps = meta_iteration_general(&mut state, &blocks, consts, &pi)?;
        meta += 1;
        for (j, rows) in snaps.iter().enumerate() {
            let tick = (meta - 1) * TICKS_PER_META + j + 1;
            record.push_general(tick, &rows_to_node_order(rows, pairing), truth, k, f64::NAN, pq);
        }
        converged = mean_abs_diff(&before, &snaps[2]) < config.tol;
    }
    record.converged = converged;
    record.iterations = meta;
    record.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((state, record))
}
