//! Logit updates for the two-class pairwise family.
//!
//! With `c_φ = φ − ½1`, `c_ξ = ξ − ½1` and `d = diag(A^{zy})`, the `P1`-side
//! field is
//!
//! ```text
//! x_z = 4t [A^{zz} − λ(J − I)] c_φ + 4t [A^{zy} − λ(J − I) − diag(d)] c_ξ
//! ```
//!
//! and `x_y` is its mirror with `(A^{yy}, A^{yz})` and the roles of `φ`, `ξ`
//! swapped. Then `θ¹⁰ = x_z − s`, `θ⁰¹ = x_y − s` and `θ¹¹ = x_z + x_y` with
//! `s = 2t(d − λ1)`. The joint update has no pair-diagonal term because
//! both members of the pair move together.

use crate::error::{check_len, Error, Result};
use crate::pairing::BlockViews;
use crate::sbm::{BinaryMatrix, LogitConstants};
use crate::vips::state::{check_finite, VipsState};

fn centered(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v - 0.5).collect()
}

/// `[A − λ(J − I)] x` using a single sparse/dense matvec.
fn shifted_matvec(a: &BinaryMatrix, lambda: f64, x: &[f64], sum: f64) -> Vec<f64> {
    let mut y = a.mul_vec(x);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= lambda * (sum - xi);
    }
    y
}

/// `4t{[own − λ(J−I)] c_own + [cross − λ(J−I) − diag(d)] c_cross}`.
pub(crate) fn side_field(
    own: &BinaryMatrix,
    cross: &BinaryMatrix,
    diag: &[f64],
    consts: LogitConstants,
    own_marginal: &[f64],
    cross_marginal: &[f64],
) -> Vec<f64> {
    let c_own = centered(own_marginal);
    let c_cross = centered(cross_marginal);
    let s_own: f64 = c_own.iter().sum();
    let s_cross: f64 = c_cross.iter().sum();
    let a = shifted_matvec(own, consts.lambda, &c_own, s_own);
    let b = shifted_matvec(cross, consts.lambda, &c_cross, s_cross);
    let four_t = 4.0 * consts.t;
    a.iter()
        .zip(&b)
        .zip(diag.iter().zip(&c_cross))
        .map(|((ai, bi), (di, ci))| four_t * (ai + (bi - di * ci)))
        .collect()
}

/// `s = 2t(diag(A^{zy}) − λ1)`, the pair-diagonal constant.
pub fn pair_diagonal_term(blocks: &BlockViews, consts: LogitConstants) -> Vec<f64> {
    blocks.a_zy_diag.iter().map(|d| 2.0 * consts.t * (d - consts.lambda)).collect()
}

fn check_state(state: &VipsState, blocks: &BlockViews) -> Result<()> {
    check_len(blocks.m(), state.m())
}

pub(crate) fn field_z(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<f64> {
    side_field(&blocks.a_zz, &blocks.a_zy, &blocks.a_zy_diag, consts, &state.phi, &state.xi)
}

pub(crate) fn field_y(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<f64> {
    side_field(&blocks.a_yy, &blocks.a_yz, &blocks.a_zy_diag, consts, &state.xi, &state.phi)
}

pub(crate) fn theta10_raw(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<f64> {
    let s = pair_diagonal_term(blocks, consts);
    field_z(state, blocks, consts).into_iter().zip(s).map(|(x, s)| x - s).collect()
}

pub(crate) fn theta01_raw(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<f64> {
    let s = pair_diagonal_term(blocks, consts);
    field_y(state, blocks, consts).into_iter().zip(s).map(|(x, s)| x - s).collect()
}

pub(crate) fn theta11_raw(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Vec<f64> {
    let xz = field_z(state, blocks, consts);
    let xy = field_y(state, blocks, consts);
    xz.into_iter().zip(xy).map(|(a, b)| a + b).collect()
}

/// New `θ¹⁰` from the current marginals.
pub fn update_theta10(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Result<Vec<f64>> {
    check_state(state, blocks)?;
    check_finite(theta10_raw(state, blocks, consts))
}

/// New `θ⁰¹`: the mirror of [`update_theta10`] with `P1` and `P2` swapped.
pub fn update_theta01(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Result<Vec<f64>> {
    check_state(state, blocks)?;
    check_finite(theta01_raw(state, blocks, consts))
}

/// New `θ¹¹`, the sum of both side fields.
pub fn update_theta11(state: &VipsState, blocks: &BlockViews, consts: LogitConstants) -> Result<Vec<f64>> {
    check_state(state, blocks)?;
    check_finite(theta11_raw(state, blocks, consts))
}

/// `log(π / (1 − π))`; errors unless `π ∈ (0, 1)`.
pub fn prior_logit(pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::InvalidConfig(format!("class probability {pi} must lie in (0, 1)")));
    }
    Ok((pi / (1.0 - pi)).ln())
}

/// Shifts the logits for an unbalanced prior: `θ¹⁰` and `θ⁰¹` by
/// `logit(π)`, `θ¹¹` by `2 logit(π)`.
pub fn unbalanced_adjustment(theta10: &mut [f64], theta01: &mut [f64], theta11: &mut [f64], pi: f64) -> Result<()> {
    let shift = prior_logit(pi)?;
    if shift == 0.0 {
        return Ok(());
    }
    theta10.iter_mut().for_each(|x| *x += shift);
    theta01.iter_mut().for_each(|x| *x += shift);
    theta11.iter_mut().for_each(|x| *x += 2.0 * shift);
    Ok(())
}
