use crate::error::{check_len, Error, Result};
use crate::pairing::BlockViews;
use crate::sbm::clamp_probability;
use crate::vips::state::VipsState;

/// `xᵀ A y` for the full permuted adjacency, with `x`, `y` in `(P1, P2)`
/// order.
fn full_quad(blocks: &BlockViews, x: &[f64], y: &[f64]) -> f64 {
    let m = blocks.m();
    let (xz, xy) = x.split_at(m);
    let (yz, yy) = y.split_at(m);
    let dot = |a: &[f64], b: Vec<f64>| a.iter().zip(&b).map(|(p, q)| p * q).sum::<f64>();
    dot(xz, blocks.a_zz.mul_vec(yz))
        + dot(xz, blocks.a_zy.mul_vec(yy))
        + dot(xy, blocks.a_yz.mul_vec(yz))
        + dot(xy, blocks.a_yy.mul_vec(yy))
}

/// `xᵀ (J − I) y`.
fn off_diagonal_quad(x: &[f64], y: &[f64]) -> f64 {
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    sx * sy - x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
}

/// Re-estimates `(p̂, q̂)` from the current variational state.
///
/// Dyads across pairs are weighted by products of the marginals `u`; each
/// linked pair adds its within-pair agreement `1 − ψ¹⁰ − ψ⁰¹` (to `p̂`) or
/// disagreement `ψ¹⁰ + ψ⁰¹` (to `q̂`). Results are clamped to
/// `[1e-8, 1 − 1e-8]`.
pub fn update_parameters(state: &VipsState, blocks: &BlockViews) -> Result<(f64, f64)> {
    check_len(blocks.m(), state.m())?;
    let u = state.u();
    let uc: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
    let split: Vec<f64> = state.psi10.iter().zip(&state.psi01).map(|(a, b)| a + b).collect();
    let d = &blocks.a_zy_diag;

    let agree_edges: f64 = split.iter().zip(d).map(|(s, d)| (1.0 - s) * d).sum();
    let agree_pairs: f64 = split.iter().map(|s| 1.0 - s).sum();
    let split_edges: f64 = split.iter().zip(d).map(|(s, d)| s * d).sum();
    let split_pairs: f64 = split.iter().sum();

    let p_num = full_quad(blocks, &uc, &uc) + full_quad(blocks, &u, &u) + 2.0 * agree_edges;
    let p_den = off_diagonal_quad(&uc, &uc) + off_diagonal_quad(&u, &u) + 2.0 * agree_pairs;
    let q_num = full_quad(blocks, &uc, &u) + split_edges;
    let q_den = off_diagonal_quad(&uc, &u) + split_pairs;

    if !(p_den > 0.0) {
        return Err(Error::Estimation { which: "p denominator", value: p_den });
    }
    if !(q_den > 0.0) {
        return Err(Error::Estimation { which: "q denominator", value: q_den });
    }
    Ok((clamp_probability(p_num / p_den), clamp_probability(q_num / q_den)))
}

/// Mean-field analogue (no linked pairs) for a node-order `u`.
pub fn update_parameters_mean_field(adjacency: &crate::sbm::BinaryMatrix, u: &[f64]) -> Result<(f64, f64)> {
    check_len(adjacency.rows(), u.len())?;
    let uc: Vec<f64> = u.iter().map(|x| 1.0 - x).collect();
    let quad = |x: &[f64], y: &[f64]| x.iter().zip(adjacency.mul_vec(y)).map(|(a, b)| a * b).sum::<f64>();
    let p_num = quad(&uc, &uc) + quad(u, u);
    let p_den = off_diagonal_quad(&uc, &uc) + off_diagonal_quad(u, u);
    let q_num = quad(&uc, u);
    let q_den = off_diagonal_quad(&uc, u);
    if !(p_den > 0.0) {
        return Err(Error::Estimation { which: "p denominator", value: p_den });
    }
    if !(q_den > 0.0) {
        return Err(Error::Estimation { which: "q denominator", value: q_den });
    }
    Ok((clamp_probability(p_num / p_den), clamp_probability(q_num / q_den)))
}
