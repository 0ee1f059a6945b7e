use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairing::Pairing;

/// Bound on exponent arguments. Refresh subtracts the largest logit of
/// each pair and floors the shifted values at `-THETA_CLAMP`, so nothing
/// overflows and no ψ cell underflows to exactly zero. The stored logits
/// themselves are left unclamped: clamping them individually would tie
/// cells whose logits both exceed the bound.
pub const THETA_CLAMP: f64 = 700.0;

/// How the initial membership vector `u⁰` is drawn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum InitMode {
    /// i.i.d. Bernoulli(μ) entries.
    Bernoulli(f64),
    /// Every entry equal to `c`.
    Constant(f64),
    /// i.i.d. Uniform[0, 1].
    Uniform,
    /// A given vector in node order.
    Explicit(Vec<f64>),
}

impl InitMode {
    /// Draws `u⁰` in node order.
    pub fn draw(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = match self {
            InitMode::Bernoulli(mu) => {
                if !(0.0..=1.0).contains(mu) {
                    return Err(Error::InvalidConfig(format!("bernoulli mean {mu} outside [0, 1]")));
                }
                (0..n).map(|_| if rng.gen::<f64>() < *mu { 1.0 } else { 0.0 }).collect()
            }
            InitMode::Constant(c) => vec![*c; n],
            InitMode::Uniform => (0..n).map(|_| rng.gen::<f64>()).collect(),
            InitMode::Explicit(v) => {
                if v.len() != n {
                    return Err(Error::InvalidInput(format!("init vector has length {}, expected {n}", v.len())));
                }
                v.clone()
            }
        };
        if u.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidInput("init entries must lie in [0, 1]".into()));
        }
        Ok(u)
    }
}

/// Variational parameters for the two-class pairwise family.
///
/// Vectors are indexed by pair `k`. `phi[k]` is the probability that the
/// `P1` node of pair `k` is in class 1, `xi[k]` the same for its `P2`
/// node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VipsState {
    pub theta10: Vec<f64>,
    pub theta01: Vec<f64>,
    pub theta11: Vec<f64>,
    pub psi00: Vec<f64>,
    pub psi01: Vec<f64>,
    pub psi10: Vec<f64>,
    pub psi11: Vec<f64>,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
}

impl VipsState {
    /// All logits zero (so ψ uniform) with the marginals overwritten by
    /// `u0`, given in `(P1, P2)` order. The first update reads `u0`; ψ
    /// becomes consistent with the marginals from the first refresh on.
    pub fn from_marginals(u0: &[f64]) -> Result<Self> {
        if !u0.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("membership vector length {} is odd", u0.len())));
        }
        let m = u0.len() / 2;
        let mut s = VipsState::uniform(m);
        s.phi.copy_from_slice(&u0[..m]);
        s.xi.copy_from_slice(&u0[m..]);
        Ok(s)
    }

    pub fn uniform(m: usize) -> Self {
        VipsState {
            theta10: vec![0.0; m],
            theta01: vec![0.0; m],
            theta11: vec![0.0; m],
            psi00: vec![0.25; m],
            psi01: vec![0.25; m],
            psi10: vec![0.25; m],
            psi11: vec![0.25; m],
            phi: vec![0.5; m],
            xi: vec![0.5; m],
        }
    }

    pub fn m(&self) -> usize {
        self.phi.len()
    }

    /// `u = (φ, ξ)` in `(P1, P2)` order.
    pub fn u(&self) -> Vec<f64> {
        self.phi.iter().chain(&self.xi).copied().collect()
    }

    pub fn u_node_order(&self, pairing: &Pairing) -> Vec<f64> {
        pairing.to_node_order(&self.u())
    }

    /// Recomputes ψ, φ and ξ from the logits with a max-shifted softmax
    /// over `{0, θ¹⁰, θ⁰¹, θ¹¹}`.
    pub fn refresh(&mut self) -> Result<()> {
        for k in 0..self.m() {
            let (a, b, c) = (self.theta10[k], self.theta01[k], self.theta11[k]);
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                return Err(Error::Numeric("theta"));
            }
            let mx = 0f64.max(a).max(b).max(c);
            let e00 = shifted_exp(0.0, mx);
            let e10 = shifted_exp(a, mx);
            let e01 = shifted_exp(b, mx);
            let e11 = shifted_exp(c, mx);
            let z = e00 + e10 + e01 + e11;
            self.psi00[k] = e00 / z;
            self.psi10[k] = e10 / z;
            self.psi01[k] = e01 / z;
            self.psi11[k] = e11 / z;
            self.phi[k] = self.psi10[k] + self.psi11[k];
            self.xi[k] = self.psi01[k] + self.psi11[k];
        }
        #[cfg(debug_assertions)]
        {
            let v = self.invariant_violation();
            debug_assert!(v <= 1e-12, "state invariants violated by {v}");
        }
        Ok(())
    }

    /// Largest violation of the simplex and marginal-consistency
    /// invariants (0 for a consistent state).
    pub fn invariant_violation(&self) -> f64 {
        let mut worst = 0f64;
        for k in 0..self.m() {
            let s = self.psi00[k] + self.psi01[k] + self.psi10[k] + self.psi11[k];
            worst = worst.max((s - 1.0).abs());
            for p in [self.psi00[k], self.psi01[k], self.psi10[k], self.psi11[k]] {
                worst = worst.max(-p);
            }
            worst = worst.max((self.phi[k] - self.psi10[k] - self.psi11[k]).abs());
            worst = worst.max((self.xi[k] - self.psi01[k] - self.psi11[k]).abs());
        }
        worst
    }
}

/// `exp(max(θ − max, −THETA_CLAMP))`.
pub(crate) fn shifted_exp(theta: f64, max: f64) -> f64 {
    (theta - max).max(-THETA_CLAMP).exp()
}

pub(crate) fn check_finite(theta: Vec<f64>) -> Result<Vec<f64>> {
    if theta.iter().all(|x| x.is_finite()) {
        Ok(theta)
    } else {
        Err(Error::Numeric("theta"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logits_are_uniform() {
        let mut s = VipsState::from_marginals(&[1.0, 0.0, 0.3, 0.9]).unwrap();
        s.refresh().unwrap();
        assert!(s.psi00.iter().chain(&s.psi11).all(|&p| p == 0.25));
        assert_eq!(s.u(), vec![0.5; 4]);
    }

    #[test]
    fn dominating_logit() {
        let mut s = VipsState::uniform(1);
        s.theta10[0] = 50.0;
        s.refresh().unwrap();
        assert!((1.0 - s.phi[0]).abs() < 1e-20);
        assert!(s.xi[0] < 1e-20);
    }

    #[test]
    fn explicit_logits() {
        let mut s = VipsState::uniform(1);
        s.theta10[0] = 1.0;
        s.theta01[0] = -0.5;
        s.theta11[0] = 2.0;
        s.refresh().unwrap();
        let z = 1.0 + 1f64.exp() + (-0.5f64).exp() + 2f64.exp();
        assert!((s.psi10[0] - 1f64.exp() / z).abs() < 1e-15);
        assert!((s.psi01[0] - (-0.5f64).exp() / z).abs() < 1e-15);
        assert!((s.psi11[0] - 2f64.exp() / z).abs() < 1e-15);
        assert!((s.psi00[0] - 1.0 / z).abs() < 1e-15);
        assert!(s.invariant_violation() < 1e-15);
    }

    #[test]
    fn clamped_extremes_stay_finite() {
        let mut s = VipsState::uniform(3);
        s.theta10 = vec![THETA_CLAMP, -THETA_CLAMP, THETA_CLAMP];
        s.theta01 = vec![-THETA_CLAMP, THETA_CLAMP, THETA_CLAMP];
        s.theta11 = vec![THETA_CLAMP, -THETA_CLAMP, -THETA_CLAMP];
        s.refresh().unwrap();
        assert!(s.u().iter().all(|x| x.is_finite()));
        s.theta11[0] = f64::NAN;
        assert!(matches!(s.refresh(), Err(Error::Numeric(_))));
    }

    #[test]
    fn init_modes() {
        let u = InitMode::Bernoulli(0.5).draw(4000, 3).unwrap();
        assert!(u.iter().all(|&x| x == 0.0 || x == 1.0));
        let mean = u.iter().sum::<f64>() / 4000.0;
        assert!((mean - 0.5).abs() < 5.0 / 4000f64.sqrt());
        assert_eq!(InitMode::Constant(1.0).draw(6, 0).unwrap(), vec![1.0; 6]);
        assert!(InitMode::Explicit(vec![0.1; 5]).draw(6, 0).is_err());
        assert!(InitMode::Bernoulli(1.5).draw(6, 0).is_err());
        assert_eq!(InitMode::Uniform.draw(8, 9).unwrap(), InitMode::Uniform.draw(8, 9).unwrap());
    }
}
