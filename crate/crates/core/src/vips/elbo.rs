//! Evidence lower bound of the pairwise family and its gradient in ψ.
//!
//! The likelihood part splits into the `zz`, `yy`, off-diagonal `zy` dyads
//! (independent across pairs, so weighted by products of marginals) and the
//! linked pairs themselves (weighted by ψ). Each dyad contributes
//! `T(A_ij, B_ab) = A_ij log(B_ab / (1 − B_ab)) + log(1 − B_ab)`.

use crate::error::{check_len, Error, Result};
use crate::pairing::BlockViews;
use crate::sbm::BinaryMatrix;
use crate::vips::state::VipsState;

/// Values of ψ below this are treated as this inside logarithms.
pub const PSI_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug)]
struct EdgeModel {
    alpha_p: f64,
    alpha_q: f64,
    log1m_p: f64,
    log1m_q: f64,
}

impl EdgeModel {
    fn new(p: f64, q: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("q", q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        Ok(EdgeModel {
            alpha_p: (p / (1.0 - p)).ln(),
            alpha_q: (q / (1.0 - q)).ln(),
            log1m_p: (-p).ln_1p(),
            log1m_q: (-q).ln_1p(),
        })
    }

    fn t_p(&self, a: f64) -> f64 {
        a * self.alpha_p + self.log1m_p
    }

    fn t_q(&self, a: f64) -> f64 {
        a * self.alpha_q + self.log1m_q
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad(a: &BinaryMatrix, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &a.mul_vec(y))
}

/// `Σ_{i≠j} [s_ij T(A_ij, p) + (1 − s_ij) T(A_ij, q)]` where `s_ij` is the
/// probability that row node `i` and column node `j` share a class, with
/// independent marginals `x` (rows) and `y` (columns). The `i = j` terms
/// are always left out: for `zz`/`yy` they are self-pairs, for `zy` they are
/// the linked pairs, which are scored separately.
fn independent_dyads(a: &BinaryMatrix, x: &[f64], y: &[f64], model: EdgeModel) -> f64 {
    let m = x.len() as f64;
    let xc: Vec<f64> = x.iter().map(|v| 1.0 - v).collect();
    let yc: Vec<f64> = y.iter().map(|v| 1.0 - v).collect();
    let same_edges = quad(a, &xc, &yc) + quad(a, x, y);
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let (sxc, syc) = (m - sx, m - sy);
    let diag_same: Vec<f64> = (0..x.len()).map(|i| xc[i] * yc[i] + x[i] * y[i]).collect();
    let total_same = sxc * syc + sx * sy - diag_same.iter().sum::<f64>();
    let diag = a.diagonal();
    let same_edges = same_edges - dot(&diag, &diag_same);
    let edges = a.nnz() as f64 - diag.iter().sum::<f64>();
    let pairs = m * m - m;
    // T(A, q) everywhere, plus s·(T(A, p) − T(A, q))
    edges * model.alpha_q
        + pairs * model.log1m_q
        + (model.alpha_p - model.alpha_q) * same_edges
        + (model.log1m_p - model.log1m_q) * total_same
}

fn xlogy_ratio(x: f64, prior: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * (x.max(PSI_FLOOR) / prior).ln()
    }
}

/// `Σᵢ KL(Q(zᵢ, yᵢ) ‖ P(zᵢ) P(yᵢ))` with `0 log 0 = 0`.
pub fn kl_term(psi: [&[f64]; 4], pi: f64) -> f64 {
    let [p00, p01, p10, p11] = psi;
    let (a, b) = ((1.0 - pi) * (1.0 - pi), pi * (1.0 - pi));
    (0..p00.len())
        .map(|i| xlogy_ratio(p00[i], a) + xlogy_ratio(p01[i], b) + xlogy_ratio(p10[i], b) + xlogy_ratio(p11[i], pi * pi))
        .sum()
}

/// ELBO for ψ given as the four cell vectors `[ψ⁰⁰, ψ⁰¹, ψ¹⁰, ψ¹¹]`. The
/// marginals are derived from ψ, not read from a state.
pub fn elbo_from_psi(psi: [&[f64]; 4], blocks: &BlockViews, p: f64, q: f64, pi: f64) -> Result<f64> {
    let model = EdgeModel::new(p, q)?;
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidInput(format!("pi = {pi} must lie in (0, 1)")));
    }
    let m = blocks.m();
    for v in psi {
        check_len(m, v.len())?;
    }
    let [_, p01, p10, p11] = psi;
    let phi: Vec<f64> = (0..m).map(|i| p10[i] + p11[i]).collect();
    let xi: Vec<f64> = (0..m).map(|i| p01[i] + p11[i]).collect();

    let t1 = 0.5 * independent_dyads(&blocks.a_zz, &phi, &phi, model);
    let t2 = 0.5 * independent_dyads(&blocks.a_yy, &xi, &xi, model);
    let t3 = independent_dyads(&blocks.a_zy, &phi, &xi, model);
    let t4: f64 = (0..m)
        .map(|i| {
            let d = blocks.a_zy_diag[i];
            let split = p01[i] + p10[i];
            (1.0 - split) * model.t_p(d) + split * model.t_q(d)
        })
        .sum();
    Ok(t1 + t2 + t3 + t4 - kl_term(psi, pi))
}

pub fn elbo(state: &VipsState, blocks: &BlockViews, p: f64, q: f64, pi: f64) -> Result<f64> {
    elbo_from_psi([&state.psi00, &state.psi01, &state.psi10, &state.psi11], blocks, p, q, pi)
}

/// `∂L/∂ψ^{cd}` for `(c, d) ∈ {(1,0), (0,1), (1,1)}`, treating
/// `ψ⁰⁰ = 1 − ψ⁰¹ − ψ¹⁰ − ψ¹¹` as dependent.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiGradient {
    pub d10: Vec<f64>,
    pub d01: Vec<f64>,
    pub d11: Vec<f64>,
}

/// Reconstruction derivatives written out with `T(a, p) − T(a, q)`, using
/// the given marginals for the other nodes, minus the KL derivative
/// `log(ψ^{cd}/ψ⁰⁰) − (c + d) logit(π)` at `psi`.
pub fn elbo_grad_psi_at(
    psi: [&[f64]; 4],
    phi: &[f64],
    xi: &[f64],
    blocks: &BlockViews,
    p: f64,
    q: f64,
    pi: f64,
) -> Result<PsiGradient> {
    let model = EdgeModel::new(p, q)?;
    let m = blocks.m();
    check_len(m, phi.len())?;
    check_len(m, xi.len())?;
    for v in psi {
        check_len(m, v.len())?;
    }
    let [p00, p01, p10, p11] = psi;
    for i in 0..m {
        if [p00[i], p01[i], p10[i], p11[i]].iter().any(|&x| x <= 0.0) {
            return Err(Error::Domain(i));
        }
    }
    let prior = (pi / (1.0 - pi)).ln();
    let d_alpha = model.alpha_p - model.alpha_q;
    let d_log = model.log1m_p - model.log1m_q;

    // Σ_{j≠i} (2x_j − 1) [T(A_ij, p) − T(A_ij, q)], with the diagonal of A
    // excluded explicitly
    let sweep = |a: &BinaryMatrix, x: &[f64]| -> Vec<f64> {
        let w: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let total: f64 = w.iter().sum();
        let aw = a.mul_vec(&w);
        let diag = a.diagonal();
        (0..m)
            .map(|i| d_alpha * (aw[i] - diag[i] * w[i]) + d_log * (total - w[i]))
            .collect()
    };
    let zz = sweep(&blocks.a_zz, phi);
    let zy = sweep(&blocks.a_zy, xi);
    let yy = sweep(&blocks.a_yy, xi);
    let yz = sweep(&blocks.a_yz, phi);

    let mut g = PsiGradient { d10: vec![0.0; m], d01: vec![0.0; m], d11: vec![0.0; m] };
    for i in 0..m {
        let d = blocks.a_zy_diag[i];
        let pair = -model.t_p(d) + model.t_q(d);
        let log00 = p00[i].max(PSI_FLOOR).ln();
        g.d10[i] = zz[i] + zy[i] + pair - (p10[i].ln() - log00 - prior);
        g.d01[i] = yy[i] + yz[i] + pair - (p01[i].ln() - log00 - prior);
        g.d11[i] = zz[i] + zy[i] + yy[i] + yz[i] - (p11[i].ln() - log00 - 2.0 * prior);
    }
    Ok(g)
}

pub fn elbo_grad_psi(state: &VipsState, blocks: &BlockViews, p: f64, q: f64, pi: f64) -> Result<PsiGradient> {
    let psi = [&state.psi00[..], &state.psi01, &state.psi10, &state.psi11];
    let phi: Vec<f64> = (0..state.m()).map(|i| state.psi10[i] + state.psi11[i]).collect();
    let xi: Vec<f64> = (0..state.m()).map(|i| state.psi01[i] + state.psi11[i]).collect();
    elbo_grad_psi_at(psi, &phi, &xi, blocks, p, q, pi)
}

/// Mean-field ELBO over the full adjacency:
/// `½ Σ_{i≠j} E[log P(A_ij | ·)] − Σᵢ KL(Bernoulli(uᵢ) ‖ Bernoulli(π))`.
pub fn mean_field_elbo(adjacency: &BinaryMatrix, u: &[f64], p: f64, q: f64, pi: f64) -> Result<f64> {
    let model = EdgeModel::new(p, q)?;
    check_len(adjacency.rows(), u.len())?;
    let likelihood = 0.5 * independent_dyads(adjacency, u, u, model);
    let kl: f64 = u.iter().map(|&x| xlogy_ratio(x, pi) + xlogy_ratio(1.0 - x, 1.0 - pi)).sum();
    Ok(likelihood - kl)
}
