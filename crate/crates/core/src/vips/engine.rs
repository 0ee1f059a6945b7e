use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::metrics::TrialRecord;
use crate::pairing::{block_views, BlockViews, Pairing};
use crate::sbm::{clamp_probability, Graph, LogitConstants};
use crate::vips::elbo::elbo;
use crate::vips::params::update_parameters;
use crate::vips::state::{InitMode, VipsState};
use crate::vips::updates::{prior_logit, theta01_raw, theta10_raw, theta11_raw};

/// Inner iterations per meta iteration; one tick per inner iteration.
pub const TICKS_PER_META: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VipsConfig {
    pub p_hat: f64,
    pub q_hat: f64,
    /// Prior probability of class 1.
    pub pi: f64,
    pub update_params: bool,
    /// First meta iteration (1-based) after which `(p̂, q̂)` are re-estimated.
    pub param_update_start: usize,
    pub max_meta_iters: usize,
    /// Stop once the mean absolute change of `u` over a meta iteration is
    /// below this.
    pub tol: f64,
    pub init: InitMode,
    #[serde(default = "default_true")]
    pub record_elbo: bool,
}

fn default_true() -> bool {
    true
}

impl VipsConfig {
    pub fn new(p_hat: f64, q_hat: f64) -> Self {
        VipsConfig {
            p_hat,
            q_hat,
            pi: 0.5,
            update_params: false,
            param_update_start: 3,
            max_meta_iters: 100,
            tol: 1e-6,
            init: InitMode::Bernoulli(0.5),
            record_elbo: true,
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

/// Draws `u⁰` (node order) and places it in pairing order with all logits
/// zero.
pub fn init_state(pairing: &Pairing, init: &InitMode, seed: u64) -> Result<VipsState> {
    let u0 = init.draw(pairing.n(), seed)?;
    VipsState::from_marginals(&pairing.to_pairing_order(&u0))
}

/// One meta iteration: `θ¹⁰ → u → θ⁰¹ → u → θ¹¹ → u`. Returns `u` (pairing
/// order) after each of the three refreshes.
pub fn meta_iteration(
    state: &mut VipsState,
    blocks: &BlockViews,
    consts: LogitConstants,
    pi: f64,
) -> Result<[Vec<f64>; 3]> {
    check_len(blocks.m(), state.m())?;
    let shift = prior_logit(pi)?;

    state.theta10 = theta10_raw(state, blocks, consts).into_iter().map(|x| x + shift).collect();
    state.refresh()?;
    let u1 = state.u();

    state.theta01 = theta01_raw(state, blocks, consts).into_iter().map(|x| x + shift).collect();
    state.refresh()?;
    let u2 = state.u();

    state.theta11 = theta11_raw(state, blocks, consts)
        .into_iter()
        .map(|x| x + 2.0 * shift)
        .collect();
    state.refresh()?;
    let u3 = state.u();

    Ok([u1, u2, u3])
}

fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len().max(1) as f64
}

/// Everything needed to resume a run exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VipsCheckpoint {
    pub config: VipsConfig,
    pub state: VipsState,
    pub pairing: Pairing,
    pub meta_iter: usize,
    pub p_hat: f64,
    pub q_hat: f64,
    #[serde(default)]
    pub last_param_update: Option<(f64, f64)>,
    pub converged: bool,
    /// Seed of the initial draw; the pairing seed is recorded by the
    /// pairing itself.
    pub init_seed: u64,
}

impl VipsCheckpoint {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A VIPS run in progress over one graph and pairing.
pub struct VipsRun<'g> {
    graph: &'g Graph,
    pairing: Pairing,
    blocks: BlockViews,
    config: VipsConfig,
    state: VipsState,
    p_hat: f64,
    q_hat: f64,
    meta_iter: usize,
    last_param_update: Option<(f64, f64)>,
    converged: bool,
    init_seed: u64,
    record: TrialRecord,
}

impl<'g> VipsRun<'g> {
    pub fn new(graph: &'g Graph, pairing: &Pairing, config: &VipsConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let blocks = block_views(graph, pairing)?;
        let state = init_state(pairing, &config.init, seed)?;
        let mut run = VipsRun {
            graph,
            pairing: pairing.clone(),
            blocks,
            config: config.clone(),
            state,
            p_hat: config.p_hat,
            q_hat: config.q_hat,
            meta_iter: 0,
            last_param_update: None,
            converged: false,
            init_seed: seed,
            record: TrialRecord::new("vips", seed, serde_json::to_value(config)?),
        };
        if run.p_hat <= run.q_hat {
            run.record.warnings.push(format!("initial p_hat {} <= q_hat {}", run.p_hat, run.q_hat));
        }
        run.record_tick(0, false)?;
        Ok(run)
    }

    pub fn from_checkpoint(graph: &'g Graph, ckpt: VipsCheckpoint) -> Result<Self> {
        ckpt.config.validate()?;
        let blocks = block_views(graph, &ckpt.pairing)?;
        check_len(blocks.m(), ckpt.state.m())?;
        Ok(VipsRun {
            graph,
            blocks,
            record: TrialRecord::new("vips", ckpt.init_seed, serde_json::to_value(&ckpt.config)?),
            pairing: ckpt.pairing,
            config: ckpt.config,
            state: ckpt.state,
            p_hat: ckpt.p_hat,
            q_hat: ckpt.q_hat,
            meta_iter: ckpt.meta_iter,
            last_param_update: ckpt.last_param_update,
            converged: ckpt.converged,
            init_seed: ckpt.init_seed,
        })
    }

    pub fn checkpoint(&self) -> VipsCheckpoint {
        VipsCheckpoint {
            config: self.config.clone(),
            state: self.state.clone(),
            pairing: self.pairing.clone(),
            meta_iter: self.meta_iter,
            p_hat: self.p_hat,
            q_hat: self.q_hat,
            last_param_update: self.last_param_update,
            converged: self.converged,
            init_seed: self.init_seed,
        }
    }

    pub fn state(&self) -> &VipsState {
        &self.state
    }

    pub fn blocks(&self) -> &BlockViews {
        &self.blocks
    }

    pub fn params(&self) -> (f64, f64) {
        (self.p_hat, self.q_hat)
    }

    pub fn meta_iter(&self) -> usize {
        self.meta_iter
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn record(&self) -> &TrialRecord {
        &self.record
    }

    fn record_tick(&mut self, tick: usize, with_elbo: bool) -> Result<()> {
        let u = self.state.u_node_order(&self.pairing);
        let e = if with_elbo && self.config.record_elbo {
            elbo(&self.state, &self.blocks, clamp_probability(self.p_hat), clamp_probability(self.q_hat), self.config.pi)?
        } else {
            f64::NAN
        };
        self.record.push_binary(tick, &u, self.graph.labels(), e, (self.p_hat, self.q_hat));
        Ok(())
    }

    /// Runs one meta iteration (plus the parameter update, when due) and
    /// records three ticks. Returns the mean absolute change of `u`.
    pub fn step(&mut self) -> Result<f64> {
        let consts = LogitConstants::with_limit(self.p_hat, self.q_hat)?;
        let before = self.state.u();
        let snapshots = meta_iteration(&mut self.state, &self.blocks, consts, self.config.pi)?;
        self.meta_iter += 1;
        let base = (self.meta_iter - 1) * TICKS_PER_META;
        // ELBO is only evaluated at the end of a meta iteration
        for (j, snap) in snapshots[..TICKS_PER_META - 1].iter().enumerate() {
            let u = self.pairing.to_node_order(snap);
            self.record.push_binary(base + j + 1, &u, self.graph.labels(), f64::NAN, (self.p_hat, self.q_hat));
        }
        self.record_tick(base + TICKS_PER_META, true)?;
        let du = mean_abs_diff(&before, &snapshots[2]);

        let mut params_settled = !self.config.update_params;
        if self.config.update_params && self.meta_iter >= self.config.param_update_start {
            let (p, q) = update_parameters(&self.state, &self.blocks)?;
            if p <= q {
                self.record
                    .warnings
                    .push(format!("meta iteration {}: p_hat {p} <= q_hat {q}", self.meta_iter));
            }
            if let Some((p0, q0)) = self.last_param_update {
                params_settled = (p - p0).abs() < self.config.tol && (q - q0).abs() < self.config.tol;
            }
            self.last_param_update = Some((p, q));
            self.p_hat = p;
            self.q_hat = q;
            // the recorded estimate at the end of this meta iteration
            *self.record.p_hat.last_mut().unwrap() = p;
            *self.record.q_hat.last_mut().unwrap() = q;
        }
        self.converged = du < self.config.tol && params_settled;
        Ok(du)
    }

    /// Steps until convergence or the meta-iteration cap.
    pub fn run(mut self) -> Result<(VipsState, TrialRecord)> {
        let start = Instant::now();
        while !self.converged && self.meta_iter < self.config.max_meta_iters {
            self.step()?;
        }
        self.record.converged = self.converged;
        self.record.iterations = self.meta_iter;
        self.record.wall_time_secs = start.elapsed().as_secs_f64();
        Ok((self.state, self.record))
    }
}

/// Full VIPS: initialize, iterate meta iterations until `u` stops moving
/// (or the cap), optionally re-estimating `(p̂, q̂)` along the way.
pub fn run_vips(graph: &Graph, pairing: &Pairing, config: &VipsConfig, seed: u64) -> Result<(VipsState, TrialRecord)> {
    VipsRun::new(graph, pairing, config, seed)?.run()
}
