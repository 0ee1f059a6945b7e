use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sbm::matrix::Backend;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssignmentMode {
    /// A uniformly random permutation split into `K` classes of size `n/K`.
    ExactBalanced,
    /// Labels drawn i.i.d. from `Multinomial(1; pi)`.
    Multinomial,
}

/// Stochastic block model parameters.
///
/// Label `a` has prior probability `pi[a]`. For the two-class constructors
/// with a scalar `pi`, that scalar is the probability of label 1, matching
/// the orientation of the membership vector `u` in the inference engines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub n: usize,
    pub k: usize,
    pub pi: Vec<f64>,
    pub connectivity: Vec<Vec<f64>>,
    pub assignment: AssignmentMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Backend>,
}

impl SbmConfig {
    /// Balanced two-class model with `B11 = B22 = p`, `B12 = B21 = q`.
    pub fn two_class(n: usize, p: f64, q: f64) -> Self {
        Self::planted(n, 2, p, q)
    }

    /// Two-class model where label 1 has probability `pi`; labels are
    /// multinomial.
    pub fn two_class_unbalanced(n: usize, p: f64, q: f64, pi: f64) -> Self {
        SbmConfig {
            n,
            k: 2,
            pi: vec![1.0 - pi, pi],
            connectivity: vec![vec![p, q], vec![q, p]],
            assignment: AssignmentMode::Multinomial,
            backend: None,
        }
    }

    /// Balanced `K`-class planted partition, `B = (p - q) I + q J`.
    pub fn planted(n: usize, k: usize, p: f64, q: f64) -> Self {
        let connectivity = (0..k)
            .map(|a| (0..k).map(|b| if a == b { p } else { q }).collect())
            .collect();
        SbmConfig {
            n,
            k,
            pi: vec![1.0 / k as f64; k],
            connectivity,
            assignment: AssignmentMode::ExactBalanced,
            backend: None,
        }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn backend(&self) -> Backend {
        self.backend.unwrap_or_else(|| Backend::auto(self.n))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if self.k < 2 {
            return bad(format!("K must be at least 2, got {}", self.k));
        }
        if self.pi.len() != self.k {
            return bad(format!("pi has length {}, expected {}", self.pi.len(), self.k));
        }
        if self.pi.iter().any(|&x| !(0.0..=1.0).contains(&x)) || (self.pi.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("pi must be a probability vector, got {:?}", self.pi));
        }
        if self.connectivity.len() != self.k || self.connectivity.iter().any(|r| r.len() != self.k) {
            return bad("connectivity must be K x K".into());
        }
        for a in 0..self.k {
            for b in 0..self.k {
                let v = self.connectivity[a][b];
                if !(v > 0.0 && v < 1.0) {
                    return bad(format!("B[{a}][{b}] = {v} is outside (0, 1)"));
                }
                if v != self.connectivity[b][a] {
                    return bad(format!("B is not symmetric at ({a}, {b})"));
                }
            }
        }
        if self.assignment == AssignmentMode::ExactBalanced && !self.n.is_multiple_of(self.k) {
            return bad(format!("exact-balanced mode needs K | n (n = {}, K = {})", self.n, self.k));
        }
        Ok(())
    }

    /// `(p, q)` for a planted-partition model: the diagonal and off-diagonal
    /// of `B`. Returns `None` if `B` is not of that form.
    pub fn planted_pq(&self) -> Option<(f64, f64)> {
        let p = self.connectivity[0][0];
        let q = self.connectivity[0][1];
        for a in 0..self.k {
            for b in 0..self.k {
                let want = if a == b { p } else { q };
                if self.connectivity[a][b] != want {
                    return None;
                }
            }
        }
        Some((p, q))
    }
}
