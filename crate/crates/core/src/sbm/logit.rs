use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probabilities at exactly 0 or 1 are pulled in by this much.
pub const PROB_EPS: f64 = 1e-8;

/// The two scalars every logit update is written in terms of.
///
/// `t` is half the log odds ratio of `p` against `q`; `lambda` is the
/// probability threshold that edges are compared against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogitConstants {
    pub t: f64,
    pub lambda: f64,
}

pub fn clamp_probability(x: f64) -> f64 {
    x.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

fn logit(x: f64) -> f64 {
    (x / (1.0 - x)).ln()
}

/// `t = ½ log[(p/(1-p)) / (q/(1-q))]`, `λ = log[(1-q)/(1-p)] / (2t)`.
///
/// Values at exactly 0 or 1 are clamped to `[1e-8, 1 - 1e-8]`; values
/// outside `[0, 1]` and `p == q` (or so close that `t` cancels to zero)
/// are errors.
pub fn logit_constants(p: f64, q: f64) -> Result<LogitConstants> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidInput(format!("{name} = {v} is not a probability")));
        }
    }
    let (p, q) = (clamp_probability(p), clamp_probability(q));
    if p == q {
        return Err(Error::DegenerateParameters(p));
    }
    let t = 0.5 * (logit(p) - logit(q));
    let lambda = ((1.0 - q).ln() - (1.0 - p).ln()) / (2.0 * t);
    // p and q a few ulps apart can cancel to t = 0
    if t == 0.0 || !lambda.is_finite() {
        return Err(Error::DegenerateParameters(p));
    }
    Ok(LogitConstants { t, lambda })
}

impl LogitConstants {
    /// Like [`logit_constants`], but `p == q` yields the continuous limit
    /// `t = 0, λ = p`, under which every data term vanishes.
    pub fn with_limit(p: f64, q: f64) -> Result<Self> {
        match logit_constants(p, q) {
            Err(Error::DegenerateParameters(p)) => Ok(LogitConstants { t: 0.0, lambda: p }),
            other => other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // direct evaluation at higher precision (mpmath, 30 digits):
        // t = 1.60441274450734965...  lambda = 0.0664084775536174868...
        let c = logit_constants(0.2, 0.01).unwrap();
        assert!((c.t - 1.604_412_744_507_349_7).abs() < 1e-13, "{}", c.t);
        assert!((c.lambda - 0.066_408_477_553_617_49).abs() < 1e-14, "{}", c.lambda);
    }

    #[test]
    fn near_equal_is_degenerate() {
        let p = 0.035_037_518_759_379_69;
        let q = 0.035_037_518_759_379_68;
        assert!(matches!(logit_constants(p, q), Err(Error::DegenerateParameters(_))));
        let c = LogitConstants::with_limit(p, q).unwrap();
        assert_eq!(c.t, 0.0);
        assert!(c.lambda.is_finite());
    }

    #[test]
    fn symmetric_pair_gives_midpoint() {
        let c = logit_constants(0.9, 0.1).unwrap();
        assert!((c.lambda - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lambda_between_q_and_mean() {
        let c = logit_constants(0.2, 0.1).unwrap();
        assert!(0.1 < c.lambda && c.lambda < 0.15);
    }

    #[test]
    fn degenerate_and_boundary() {
        assert!(matches!(logit_constants(0.3, 0.3), Err(Error::DegenerateParameters(_))));
        assert!(logit_constants(1.2, 0.3).is_err());
        let c = logit_constants(1.0, 0.0).unwrap();
        assert!(c.t.is_finite() && c.lambda.is_finite());
        let lim = LogitConstants::with_limit(0.3, 0.3).unwrap();
        assert_eq!(lim, LogitConstants { t: 0.0, lambda: 0.3 });
    }
}
