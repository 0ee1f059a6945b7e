//! Belief propagation for the planted-partition SBM.
//!
//! Sum-product messages live on directed edges; non-edges enter through a
//! mean-field external field built from the node beliefs, the usual cavity
//! treatment of sparse SBMs. Everything is kept in the log domain. Nodes
//! are visited in a fresh random order each sweep, and the field is
//! adjusted after every node: updating all nodes against a stale field
//! makes the global mode oscillate once `n(p − q)` is large. Messages are
//! damped in probability space.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::metrics::TrialRecord;
use crate::sbm::Graph;

/// Initial edge messages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum BpInit {
    /// Uniform plus i.i.d. uniform noise of the given amplitude, normalized.
    UniformNoise(f64),
    /// Exactly uniform; a fixed point whenever the prior is uniform.
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    /// Weight on the previous message: `m ← (1 − d)·new + d·old`.
    pub damping: f64,
    pub max_iters: usize,
    /// Stop once the largest message change in a sweep is below this.
    pub tol: f64,
    pub init: BpInit,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig { damping: 0.5, max_iters: 200, tol: 1e-6, init: BpInit::UniformNoise(0.1) }
    }
}

#[derive(Clone, Debug)]
pub struct BpOutput {
    /// `n × K` node marginals.
    pub beliefs: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub record: TrialRecord,
}

fn normalize_log(logits: &mut [f64]) {
    let mx = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for l in logits.iter_mut() {
        *l = (*l - mx).exp();
        z += *l;
    }
    logits.iter_mut().for_each(|l| *l /= z);
}

/// Directed-edge layout: node `i` sends the messages in `outbox(i)`, and
/// `reverse[e]` is the message travelling the other way along the same edge.
struct EdgeIndex {
    src: Vec<usize>,
    reverse: Vec<usize>,
    outbox_start: Vec<usize>,
}

impl EdgeIndex {
    fn new(graph: &Graph) -> Self {
        let n = graph.n();
        let mut src = Vec::new();
        let mut outbox_start = Vec::with_capacity(n + 1);
        let rows: Vec<Vec<usize>> = (0..n).map(|i| graph.neighbors(i)).collect();
        for (i, row) in rows.iter().enumerate() {
            outbox_start.push(src.len());
            src.extend(std::iter::repeat_n(i, row.len()));
        }
        outbox_start.push(src.len());
        let dst: Vec<usize> = rows.iter().flatten().copied().collect();
        let reverse = (0..src.len())
            .map(|e| {
                let (i, j) = (src[e], dst[e]);
                let pos = rows[j].binary_search(&i).expect("symmetric adjacency");
                outbox_start[j] + pos
            })
            .collect();
        EdgeIndex { src, reverse, outbox_start }
    }

    fn len(&self) -> usize {
        self.src.len()
    }

    /// Messages sent by `i`; their reverses are the messages `i` receives.
    fn outbox(&self, i: usize) -> std::ops::Range<usize> {
        self.outbox_start[i]..self.outbox_start[i + 1]
    }
}

/// Runs BP with connectivity `B = (p − q)I + qJ` and class prior `pi`.
pub fn run_bp(graph: &Graph, p: f64, q: f64, pi: &[f64], config: &BpConfig, seed: u64) -> Result<BpOutput> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidInput(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    let k = pi.len();
    if k < 2 {
        return Err(Error::InvalidConfig(format!("K = {k} must be at least 2")));
    }
    if pi.iter().any(|&x| !(x > 0.0)) || (pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("class prior {pi:?} is not a positive probability vector")));
    }
    if !(0.0..1.0).contains(&config.damping) {
        return Err(Error::InvalidConfig(format!("damping {} must lie in [0, 1)", config.damping)));
    }
    check_len(graph.n(), graph.labels().len())?;
    let start = Instant::now();
    let n = graph.n();
    let truth = graph.labels();
    let edges = EdgeIndex::new(graph);
    let b = |a: usize, c: usize| if a == c { p } else { q };
    let log_pi: Vec<f64> = pi.iter().map(|x| x.ln()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut msgs = vec![0.0; edges.len() * k];
    for e in 0..edges.len() {
        let m = &mut msgs[e * k..(e + 1) * k];
        match config.init {
            BpInit::UniformNoise(amp) => m.iter_mut().for_each(|x| *x = 1.0 + amp * rng.gen::<f64>()),
            BpInit::Uniform => m.iter_mut().for_each(|x| *x = 1.0),
        }
        let z: f64 = m.iter().sum();
        m.iter_mut().for_each(|x| *x /= z);
    }
    // beliefs start at the prior; they only feed the non-edge field
    let mut beliefs: Vec<Vec<f64>> = vec![pi.to_vec(); n];
    let log_mix = |m: &[f64], a: usize| (0..k).map(|c| b(a, c) * m[c]).sum::<f64>().ln();
    let log_mix_absent = |m: &[f64], a: usize| (0..k).map(|c| (1.0 - b(a, c)) * m[c]).sum::<f64>().ln();
    let mut absent: Vec<Vec<f64>> = beliefs.iter().map(|bj| (0..k).map(|a| log_mix_absent(bj, a)).collect()).collect();

    let mut record = TrialRecord::new("bp", seed, serde_json::to_value(config)?);
    let push = |record: &mut TrialRecord, tick: usize, beliefs: &[Vec<f64>]| {
        if k == 2 {
            let u: Vec<f64> = beliefs.iter().map(|r| r[1]).collect();
            record.push_binary(tick, &u, truth, f64::NAN, (p, q));
        } else {
            record.push_general(tick, beliefs, truth, k, f64::NAN, (p, q));
        }
    };
    push(&mut record, 0, &beliefs);

    let mut order: Vec<usize> = (0..n).collect();
    let mut converged = false;
    let mut iters = 0;
    while !converged && iters < config.max_iters {
        iters += 1;
        order.shuffle(&mut rng);
        // recomputed each sweep so incremental updates cannot drift
        let mut field: Vec<f64> = (0..k).map(|a| absent.iter().map(|h| h[a]).sum()).collect();
        let mut delta = 0f64;
        for &i in &order {
            // log-marginal of i: prior, non-edge field without i and its
            // neighbours, and one factor per incoming message
            let mut base: Vec<f64> = (0..k).map(|a| log_pi[a] + field[a] - absent[i][a]).collect();
            let incoming: Vec<Vec<f64>> = edges
                .outbox(i)
                .map(|e| {
                    let r = edges.reverse[e];
                    (0..k).map(|a| log_mix(&msgs[r * k..(r + 1) * k], a)).collect()
                })
                .collect();
            for (e, term) in edges.outbox(i).zip(&incoming) {
                let j = edges.src[edges.reverse[e]];
                for a in 0..k {
                    base[a] += term[a] - absent[j][a];
                }
            }
            // cavity message i → j leaves out j's own message to i
            for (e, term) in edges.outbox(i).zip(&incoming) {
                let mut m: Vec<f64> = (0..k).map(|a| base[a] - term[a]).collect();
                normalize_log(&mut m);
                for a in 0..k {
                    let old = msgs[e * k + a];
                    let v = (1.0 - config.damping) * m[a] + config.damping * old;
                    delta = delta.max((v - old).abs());
                    msgs[e * k + a] = v;
                }
            }
            normalize_log(&mut base);
            beliefs[i] = base;
            for a in 0..k {
                field[a] -= absent[i][a];
                absent[i][a] = log_mix_absent(&beliefs[i], a);
                field[a] += absent[i][a];
            }
        }
        push(&mut record, iters, &beliefs);
        converged = delta < config.tol;
    }

    let labels = beliefs
        .iter()
        .map(|r| (0..k).max_by(|&x, &y| r[x].total_cmp(&r[y]).then(y.cmp(&x))).unwrap())
        .collect();
    if !converged {
        record.warnings.push(format!("no convergence after {iters} sweeps"));
    }
    record.converged = converged;
    record.iterations = iters;
    record.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(BpOutput { beliefs, labels, record })
}
