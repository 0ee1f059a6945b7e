//! Experiment drivers.
//!
//! Each driver fans trials out over a worker pool. A job regenerates its
//! graph from the trial seed, so results depend only on the master seed,
//! never on scheduling; jobs are collected by index and finally sorted by
//! (setting, algorithm, trial).

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::baselines::{run_bp, run_mfvi, run_mfvi_general, run_spectral, GeneralMfviConfig, MfviConfig, SpectralConfig};
use crate::error::{Error, Result};
use crate::harness::config::{multiclass_n, planted_pq, pq_for_degree, Algorithm, ExperimentConfig, ExperimentKind};
use crate::harness::seeds::{sub_seed, trial_seed};
use crate::metrics::{hard_labels_general, permutations, TrialRecord};
use crate::pairing::{random_pairing, Pairing};
use crate::sbm::{generate_sbm, Backend, Graph, SbmConfig};
use crate::vips::{run_vips, run_vips_general, GeneralInit, GeneralVipsConfig, InitMode, VipsConfig, TICKS_PER_META};

/// One algorithm run on one trial of one setting.
#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    /// Sweep point, e.g. `mu=0.5` or `r=3`.
    pub setting: String,
    pub algorithm: String,
    pub trial: usize,
    pub record: TrialRecord,
    /// Final hard labels, relabeled to best match the truth and listed
    /// class by class. Only kept for the membership raster.
    #[serde(skip)]
    pub raster_row: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    /// `convergence`, `heatmap`, ..., used as the CSV experiment prefix.
    pub name: String,
    pub config: ExperimentConfig,
    /// Settings in sweep order.
    pub settings: Vec<String>,
    /// Algorithm labels in display order.
    pub algorithms: Vec<String>,
    pub results: Vec<TrialResult>,
    /// `Some(ticks)` for experiments reported as ℓ1 trajectories.
    pub trajectory_ticks: Option<usize>,
    pub wall_time_secs: f64,
}

impl ExperimentOutput {
    /// Results of one (setting, algorithm) group, in trial order.
    pub fn group(&self, setting: &str, algorithm: &str) -> Vec<&TrialResult> {
        self.results.iter().filter(|r| r.setting == setting && r.algorithm == algorithm).collect()
    }
}

/// Dispatches on `config.kind`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    match config.kind {
        ExperimentKind::Convergence => convergence(config),
        ExperimentKind::Heatmap => heatmap(config),
        ExperimentKind::SnrSweep | ExperimentKind::DegreeSweep => sweep(config),
        ExperimentKind::GeneralK => general(config),
        ExperimentKind::ParamUpdateAblation => ablation(config),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))
}

/// Runs `job(0..count)` on the pool and concatenates the outputs in job
/// order.
fn fan_out<F>(config: &ExperimentConfig, count: usize, job: F) -> Result<Vec<TrialResult>>
where
    F: Fn(usize) -> Result<Vec<TrialResult>> + Sync + Send,
{
    let chunks = pool(config.workers)?.install(|| (0..count).into_par_iter().map(job).collect::<Result<Vec<_>>>())?;
    Ok(chunks.into_iter().flatten().collect())
}

fn finish(
    config: &ExperimentConfig,
    name: &str,
    settings: Vec<String>,
    algorithms: Vec<String>,
    mut results: Vec<TrialResult>,
    trajectory_ticks: Option<usize>,
    start: Instant,
) -> ExperimentOutput {
    let pos = |list: &[String], x: &str| list.iter().position(|s| s == x).unwrap_or(usize::MAX);
    results.sort_by_key(|r| (pos(&settings, &r.setting), pos(&algorithms, &r.algorithm), r.trial));
    if let Some(ticks) = trajectory_ticks {
        for r in &mut results {
            r.record.pad_to(ticks - 1);
        }
    }
    ExperimentOutput {
        name: name.to_string(),
        config: config.clone(),
        settings,
        algorithms,
        results,
        trajectory_ticks,
        wall_time_secs: start.elapsed().as_secs_f64(),
    }
}

fn graph(sbm: SbmConfig, seed: u64) -> Result<Graph> {
    generate_sbm(&sbm.with_backend(Backend::Sparse), sub_seed(seed, "graph"))
}

/// Graph seed for a trial: the trial's own, or trial 0's when the
/// experiment shares one graph.
fn graph_seed(config: &ExperimentConfig, id: &str, ts: u64) -> u64 {
    if config.shared_graph {
        trial_seed(config.seed, id, 0)
    } else {
        ts
    }
}

fn pairing_for(graph: &Graph, seed: u64) -> Result<Pairing> {
    random_pairing(graph.n(), sub_seed(seed, "pairing"))
}

/// Starting `(p̂, q̂)` for an inference run, and when to start
/// re-estimating them.
#[derive(Clone, Copy, Debug)]
struct Fit {
    p: f64,
    q: f64,
    update_from: Option<usize>,
}

impl Fit {
    fn fixed(p: f64, q: f64) -> Self {
        Fit { p, q, update_from: None }
    }
}

/// Two-class run of `algorithm`. VIPS and MFVI share `init_seed`, so they
/// start from the same `u⁰`.
#[allow(clippy::too_many_arguments)]
fn run_binary(
    algorithm: Algorithm,
    graph: &Graph,
    pairing: &Pairing,
    fit: Fit,
    pi: f64,
    init: &InitMode,
    init_seed: u64,
    config: &ExperimentConfig,
    trial_seed: u64,
) -> Result<TrialRecord> {
    match algorithm {
        Algorithm::Vips => {
            let mut c = VipsConfig::new(fit.p, fit.q).with_init(init.clone());
            if let Some(start) = fit.update_from {
                c = c.with_param_updates(start);
            }
            c.pi = pi;
            c.max_meta_iters = config.max_meta_iters;
            c.tol = config.tol;
            c.record_elbo = false;
            Ok(run_vips(graph, pairing, &c, init_seed)?.1)
        }
        Algorithm::Mfvi => {
            let mut c = MfviConfig::new(fit.p, fit.q).with_init(init.clone());
            if let Some(start) = fit.update_from {
                c = c.with_param_updates(start);
            }
            c.pi = pi;
            c.max_iters = config.max_meta_iters * TICKS_PER_META;
            c.tol = config.tol;
            Ok(run_mfvi(graph, &c, init_seed)?.1)
        }
        Algorithm::Spectral => {
            Ok(run_spectral(graph, 2, &SpectralConfig::default(), sub_seed(trial_seed, "spectral"))?.1)
        }
        Algorithm::Bp => Ok(run_bp(graph, fit.p, fit.q, &[1.0 - pi, pi], &config.bp, sub_seed(trial_seed, "bp"))?.record),
    }
}

/// Balanced `K`-class run with known `(p, q)`; also returns hard labels.
fn run_multiclass(
    algorithm: Algorithm,
    graph: &Graph,
    pairing: &Pairing,
    k: usize,
    (p, q): (f64, f64),
    config: &ExperimentConfig,
    trial_seed: u64,
) -> Result<(TrialRecord, Vec<usize>)> {
    let init = GeneralInit::Dirichlet(vec![1.0; k]);
    let init_seed = sub_seed(trial_seed, "init");
    match algorithm {
        Algorithm::Vips => {
            let c = GeneralVipsConfig { max_meta_iters: config.max_meta_iters, tol: config.tol, init, ..GeneralVipsConfig::new(k, p, q) };
            let (state, record) = run_vips_general(graph, pairing, &c, init_seed)?;
            Ok((record, hard_labels_general(&state.rows_node_order(pairing))))
        }
        Algorithm::Mfvi => {
            let c = GeneralMfviConfig {
                max_iters: config.max_meta_iters * TICKS_PER_META,
                tol: config.tol,
                init,
                ..GeneralMfviConfig::new(k, p, q)
            };
            let (rows, record) = run_mfvi_general(graph, &c, init_seed)?;
            Ok((record, hard_labels_general(&rows)))
        }
        Algorithm::Spectral => {
            let (labels, record) = run_spectral(graph, k, &SpectralConfig::default(), sub_seed(trial_seed, "spectral"))?;
            Ok((record, labels))
        }
        Algorithm::Bp => {
            let out = run_bp(graph, p, q, &vec![1.0 / k as f64; k], &config.bp, sub_seed(trial_seed, "bp"))?;
            Ok((out.record, out.labels))
        }
    }
}

fn result(setting: &str, algorithm: &str, trial: usize, record: TrialRecord) -> TrialResult {
    TrialResult { setting: setting.to_string(), algorithm: algorithm.to_string(), trial, record, raster_row: None }
}

fn algorithm_names(config: &ExperimentConfig) -> Vec<String> {
    config.algorithms.iter().map(|a| a.name().to_string()).collect()
}

fn mu_setting(mu: f64) -> String {
    format!("mu={mu}")
}

/// ℓ1 trajectories of every algorithm from Bernoulli(μ) starts, true
/// `(p₀, q₀)`. All μ values of a trial share its pairing.
fn convergence(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let id = config.kind.name();
    let results = fan_out(config, config.trials, |trial| {
        let ts = trial_seed(config.seed, id, trial as u64);
        let g = graph(SbmConfig::two_class(config.n, config.p0, config.q0), graph_seed(config, id, ts))?;
        let pairing = pairing_for(&g, ts)?;
        let mut out = Vec::new();
        for &mu in &config.mus {
            let setting = mu_setting(mu);
            let init_seed = sub_seed(ts, &format!("init/{setting}"));
            for &alg in &config.algorithms {
                let fit = Fit::fixed(config.p0, config.q0);
                let rec = run_binary(alg, &g, &pairing, fit, 0.5, &InitMode::Bernoulli(mu), init_seed, config, ts)?;
                out.push(result(&setting, alg.name(), trial, rec));
            }
        }
        Ok(out)
    })?;
    let settings = config.mus.iter().map(|&m| mu_setting(m)).collect();
    Ok(finish(config, id, settings, algorithm_names(config), results, Some(config.ticks), start))
}

/// Label of a heatmap cell.
pub fn cell_setting(p_hat: f64, q_hat: f64) -> String {
    format!("p_hat={p_hat};q_hat={q_hat}")
}

/// Cells `(p̂, q̂)` of the grid with `p̂ > q̂`, row-major in `p̂`.
pub fn heatmap_cells(grid: &[f64]) -> Vec<(f64, f64)> {
    let mut cells = Vec::new();
    for &p in grid {
        for &q in grid {
            if p > q {
                cells.push((p, q));
            }
        }
    }
    cells
}

/// Final NMI over a grid of fixed `(p̂, q̂)`. A trial is one pairing and
/// one random initialization, shared by every cell.
fn heatmap(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let id = config.kind.name();
    let cells = heatmap_cells(&config.grid);
    let results = fan_out(config, config.trials, |trial| {
        let ts = trial_seed(config.seed, id, trial as u64);
        let g = graph(SbmConfig::two_class(config.n, config.p0, config.q0), graph_seed(config, id, ts))?;
        let pairing = pairing_for(&g, ts)?;
        let init_seed = sub_seed(ts, "init");
        let mut out = Vec::new();
        for &(p, q) in &cells {
            let setting = cell_setting(p, q);
            for &alg in &config.algorithms {
                let rec = run_binary(alg, &g, &pairing, Fit::fixed(p, q), 0.5, &InitMode::Bernoulli(0.5), init_seed, config, ts)?;
                out.push(result(&setting, alg.name(), trial, rec));
            }
        }
        Ok(out)
    })?;
    let settings = cells.iter().map(|&(p, q)| cell_setting(p, q)).collect();
    Ok(finish(config, id, settings, algorithm_names(config), results, None, start))
}

/// SNR sweep (degree fixed, ratio varies) or degree sweep (ratio fixed).
/// VIPS and MFVI start from `p̂ = density`, `q̂ = p̂/r` and re-estimate;
/// BP gets the true parameters.
fn sweep(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let id = config.kind.name();
    let points: Vec<(String, f64, f64)> = match config.kind {
        ExperimentKind::SnrSweep => config.ratios.iter().map(|&r| (format!("r={r}"), config.degree, r)).collect(),
        _ => config.degrees.iter().map(|&d| (format!("degree={d}"), d, config.ratio)).collect(),
    };
    let trials = config.trials;
    let results = fan_out(config, points.len() * trials, |job| {
        let (setting, degree, ratio) = &points[job / trials];
        let trial = job % trials;
        let ts = trial_seed(config.seed, &format!("{id}/{setting}"), trial as u64);
        let (p0, q0) = planted_pq(config.n, *degree, *ratio, 2)?;
        let g = graph(SbmConfig::two_class(config.n, p0, q0), ts)?;
        let pairing = pairing_for(&g, ts)?;
        let init_seed = sub_seed(ts, "init");
        let rho = g.density();
        let mut out = Vec::new();
        for &alg in &config.algorithms {
            let fit = match alg {
                Algorithm::Vips => Fit { p: rho, q: rho / ratio, update_from: Some(config.param_update_start) },
                Algorithm::Mfvi => Fit { p: rho, q: rho / ratio, update_from: Some(config.mfvi_param_update_start) },
                _ => Fit::fixed(p0, q0),
            };
            let rec = run_binary(alg, &g, &pairing, fit, 0.5, &InitMode::Bernoulli(0.5), init_seed, config, ts)?;
            out.push(result(setting, alg.name(), trial, rec));
        }
        Ok(out)
    })?;
    let settings = points.into_iter().map(|(s, _, _)| s).collect();
    Ok(finish(config, id, settings, algorithm_names(config), results, None, start))
}

pub const RASTER_SETTING: &str = "k=3;raster";

/// Best relabeling of `labels` onto `truth`, listed class by class.
fn raster_row(labels: &[usize], truth: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![vec![0usize; k]; k];
    for (&l, &z) in labels.iter().zip(truth) {
        counts[l.min(k - 1)][z] += 1;
    }
    let sigma = permutations(k)
        .into_iter()
        .max_by_key(|s| (0..k).map(|a| counts[a][s[a]]).sum::<usize>())
        .expect("k >= 1");
    let mut order: Vec<usize> = (0..truth.len()).collect();
    order.sort_by_key(|&i| (truth[i], i));
    order.into_iter().map(|i| sigma[labels[i].min(k - 1)]).collect()
}

/// The unbalanced (class-1 prior `π`) and balanced `K`-class models over
/// a ratio sweep at fixed degree, all with known parameters, plus the
/// `K`-class membership raster at `(p₀, q₀)`.
fn general(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let id = config.kind.name();
    let k = config.k;
    let n_k = multiclass_n(config.n, k);
    let pi = config.pi;
    let trials = config.trials;

    let pi_points: Vec<String> = config.ratios.iter().map(|r| format!("pi={pi};r={r}")).collect();
    let k_points: Vec<String> = config.ratios.iter().map(|r| format!("k={k};r={r}")).collect();
    let sweep_jobs = config.ratios.len() * trials;

    let mut results = fan_out(config, 2 * sweep_jobs, |job| {
        let unbalanced = job < sweep_jobs;
        let j = job % sweep_jobs;
        let (ratio, trial) = (config.ratios[j / trials], j % trials);
        let setting = if unbalanced { &pi_points[j / trials] } else { &k_points[j / trials] };
        let ts = trial_seed(config.seed, &format!("{id}/{setting}"), trial as u64);
        let mut out = Vec::new();
        if unbalanced {
            let (p, q) = pq_for_degree(config.n, config.degree, ratio, &[1.0 - pi, pi])?;
            let g = graph(SbmConfig::two_class_unbalanced(config.n, p, q, pi), ts)?;
            let pairing = pairing_for(&g, ts)?;
            let init_seed = sub_seed(ts, "init");
            for &alg in &config.algorithms {
                let rec = run_binary(alg, &g, &pairing, Fit::fixed(p, q), pi, &InitMode::Bernoulli(0.5), init_seed, config, ts)?;
                out.push(result(setting, alg.name(), trial, rec));
            }
        } else {
            let pq = planted_pq(n_k, config.degree, ratio, k)?;
            let g = graph(SbmConfig::planted(n_k, k, pq.0, pq.1), ts)?;
            let pairing = pairing_for(&g, ts)?;
            for &alg in &config.algorithms {
                let (rec, _) = run_multiclass(alg, &g, &pairing, k, pq, config, ts)?;
                out.push(result(setting, alg.name(), trial, rec));
            }
        }
        Ok(out)
    })?;

    // the raster compares the two variational methods only
    let raster_algs: Vec<Algorithm> =
        config.algorithms.iter().copied().filter(|a| matches!(a, Algorithm::Vips | Algorithm::Mfvi)).collect();
    if config.raster_trials > 0 && !raster_algs.is_empty() {
        results.extend(fan_out(config, config.raster_trials, |trial| {
            let ts = trial_seed(config.seed, &format!("{id}/{RASTER_SETTING}"), trial as u64);
            let g = graph(SbmConfig::planted(n_k, k, config.p0, config.q0), ts)?;
            let pairing = pairing_for(&g, ts)?;
            let mut out = Vec::new();
            for &alg in &raster_algs {
                let (rec, labels) = run_multiclass(alg, &g, &pairing, k, (config.p0, config.q0), config, ts)?;
                let mut r = result(RASTER_SETTING, alg.name(), trial, rec);
                r.raster_row = Some(raster_row(&labels, g.labels(), k));
                out.push(r);
            }
            Ok(out)
        })?);
    }

    let mut settings = pi_points;
    settings.extend(k_points);
    settings.push(RASTER_SETTING.to_string());
    Ok(finish(config, id, settings, algorithm_names(config), results, None, start))
}

/// Parameter schemes compared by the ablation, as `(label, algorithm)`.
pub const ABLATION_SCHEMES: [(&str, Algorithm); 4] = [
    ("vips:true", Algorithm::Vips),
    ("vips:estimate", Algorithm::Vips),
    ("vips:update", Algorithm::Vips),
    ("mfvi:update", Algorithm::Mfvi),
];

/// ℓ1 trajectories under true parameters, fixed estimates
/// `(ρ, ρ/2)` with `ρ` the edge density, and the same estimates
/// re-estimated during the run.
fn ablation(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let start = Instant::now();
    let id = config.kind.name();
    let results = fan_out(config, config.trials, |trial| {
        let ts = trial_seed(config.seed, id, trial as u64);
        let g = graph(SbmConfig::two_class(config.n, config.p0, config.q0), graph_seed(config, id, ts))?;
        let pairing = pairing_for(&g, ts)?;
        let rho = g.density();
        let mut out = Vec::new();
        for &mu in &config.mus {
            let setting = mu_setting(mu);
            let init_seed = sub_seed(ts, &format!("init/{setting}"));
            for (label, alg) in ABLATION_SCHEMES {
                let fit = match label {
                    "vips:true" => Fit::fixed(config.p0, config.q0),
                    "vips:estimate" => Fit::fixed(rho, rho / 2.0),
                    "vips:update" => Fit { p: rho, q: rho / 2.0, update_from: Some(config.param_update_start) },
                    _ => Fit { p: rho, q: rho / 2.0, update_from: Some(config.mfvi_param_update_start) },
                };
                let rec = run_binary(alg, &g, &pairing, fit, 0.5, &InitMode::Bernoulli(mu), init_seed, config, ts)?;
                out.push(result(&setting, label, trial, rec));
            }
        }
        Ok(out)
    })?;
    let settings = config.mus.iter().map(|&m| mu_setting(m)).collect();
    let algorithms = ABLATION_SCHEMES.iter().map(|(l, _)| l.to_string()).collect();
    Ok(finish(config, id, settings, algorithms, results, Some(config.ticks), start))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_alignment() {
        let truth = vec![0, 1, 2, 0, 1, 2];
        let labels = vec![2, 0, 1, 2, 0, 0];
        // 2 -> 0, 0 -> 1, 1 -> 2; node 5 is wrong
        assert_eq!(raster_row(&labels, &truth, 3), vec![0, 0, 1, 1, 2, 1]);
    }

    #[test]
    fn cells_exclude_the_diagonal() {
        let cells = heatmap_cells(&[0.1, 0.2, 0.3]);
        assert_eq!(cells, vec![(0.2, 0.1), (0.3, 0.1), (0.3, 0.2)]);
    }
}
