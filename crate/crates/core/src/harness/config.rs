use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::BpConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    Heatmap,
    SnrSweep,
    DegreeSweep,
    GeneralK,
    ParamUpdateAblation,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Heatmap => "heatmap",
            ExperimentKind::SnrSweep => "snr-sweep",
            ExperimentKind::DegreeSweep => "degree-sweep",
            ExperimentKind::GeneralK => "general-k",
            ExperimentKind::ParamUpdateAblation => "param-update-ablation",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Vips,
    Mfvi,
    Spectral,
    Bp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Vips, Algorithm::Mfvi, Algorithm::Spectral, Algorithm::Bp];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Vips => "vips",
            Algorithm::Mfvi => "mfvi",
            Algorithm::Spectral => "spectral",
            Algorithm::Bp => "bp",
        }
    }
}

/// One experiment, as a flat JSON document. Fields irrelevant to a kind
/// are ignored by it; [`ExperimentConfig::defaults`] fills every field
/// with the standard setup of each experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    /// True within/between-class edge probabilities, where the experiment
    /// fixes them.
    pub p0: f64,
    pub q0: f64,
    /// Prior probability of class 1 in the unbalanced two-class runs.
    pub pi: f64,
    /// Class count of the balanced multi-class runs.
    pub k: usize,
    pub algorithms: Vec<Algorithm>,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    /// Initialization means μ (convergence, ablation).
    pub mus: Vec<f64>,
    /// Ticks recorded per trajectory (iterations `0..ticks`).
    pub ticks: usize,
    /// Values for both axes of the `(p̂, q̂)` heatmap.
    pub grid: Vec<f64>,
    /// Average degree held fixed while the ratio varies.
    pub degree: f64,
    pub ratios: Vec<f64>,
    /// Ratio `p₀/q₀` held fixed while the degree varies.
    pub ratio: f64,
    pub degrees: Vec<f64>,
    /// Trials for the multi-class membership raster.
    pub raster_trials: usize,
    /// Draw one graph for the whole experiment, so trials differ only in
    /// pairing and initialization (on by default for convergence and
    /// heatmap).
    pub shared_graph: bool,
    pub max_meta_iters: usize,
    pub tol: f64,
    /// First VIPS meta iteration followed by a parameter update.
    pub param_update_start: usize,
    /// First MFVI sweep followed by a parameter update.
    pub mfvi_param_update_start: usize,
    pub bp: BpConfig,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = ExperimentConfig {
            kind,
            n: 2000,
            p0: 0.2,
            q0: 0.1,
            pi: 0.5,
            k: 2,
            algorithms: vec![Algorithm::Vips, Algorithm::Mfvi],
            trials: 20,
            seed: 0,
            workers: 0,
            mus: vec![0.1, 0.5, 0.9],
            ticks: 31,
            grid: (1..=16).map(|i| f64::from(i) * 0.025).collect(),
            degree: 70.0,
            ratios: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            ratio: 2.0,
            degrees: vec![10.0, 20.0, 30.0, 50.0, 70.0, 100.0],
            raster_trials: 100,
            shared_graph: false,
            max_meta_iters: 100,
            tol: 1e-6,
            param_update_start: 3,
            mfvi_param_update_start: 9,
            bp: BpConfig::default(),
        };
        let all = Algorithm::ALL.to_vec();
        match kind {
            ExperimentKind::Convergence => ExperimentConfig { n: 3000, p0: 0.2, q0: 0.01, shared_graph: true, ..base },
            ExperimentKind::Heatmap => ExperimentConfig { shared_graph: true, ..base },
            ExperimentKind::SnrSweep | ExperimentKind::DegreeSweep => ExperimentConfig { algorithms: all, ..base },
            ExperimentKind::GeneralK => ExperimentConfig {
                algorithms: all,
                pi: 0.3,
                k: 3,
                degree: 50.0,
                ratios: vec![2.0, 3.0, 4.0, 6.0, 8.0],
                p0: 0.5,
                q0: 0.01,
                ..base
            },
            ExperimentKind::ParamUpdateAblation => {
                ExperimentConfig { p0: 0.1, q0: 0.02, trials: 50, ticks: 61, ..base }
            }
        }
    }

    /// Defaults for `kind` overridden by the keys of a flat JSON object.
    /// A `kind` key, if present, must agree with `kind`.
    pub fn from_json_overrides(kind: ExperimentKind, json: &str) -> Result<Self> {
        let overrides: serde_json::Value = serde_json::from_str(json)?;
        let serde_json::Value::Object(overrides) = overrides else {
            return Err(Error::InvalidConfig("config must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::defaults(kind))?;
        let target = merged.as_object_mut().expect("struct serializes to an object");
        for (key, value) in overrides {
            target.insert(key, value);
        }
        let config: ExperimentConfig = serde_json::from_value(merged)?;
        if config.kind != kind {
            return Err(Error::InvalidConfig(format!(
                "config file is for {}, not {}",
                config.kind.name(),
                kind.name()
            )));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(kind: ExperimentKind, path: &Path) -> Result<Self> {
        Self::from_json_overrides(kind, &std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return bad(format!("n = {} must be even and positive", self.n));
        }
        if self.algorithms.is_empty() {
            return bad("algorithm list is empty".into());
        }
        let probability = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} must lie in (0, 1)")))
            }
        };
        match self.kind {
            ExperimentKind::Convergence | ExperimentKind::ParamUpdateAblation => {
                probability("p0", self.p0)?;
                probability("q0", self.q0)?;
                if self.mus.is_empty() || self.ticks == 0 {
                    return bad("mus and ticks must be non-empty".into());
                }
                if self.mus.iter().any(|m| !(0.0..=1.0).contains(m)) {
                    return bad("every mu must lie in [0, 1]".into());
                }
            }
            ExperimentKind::Heatmap => {
                probability("p0", self.p0)?;
                probability("q0", self.q0)?;
                if self.grid.len() < 2 {
                    return bad("heatmap grid needs at least two values".into());
                }
                for &g in &self.grid {
                    probability("grid value", g)?;
                }
            }
            ExperimentKind::SnrSweep => {
                if self.ratios.is_empty() {
                    return bad("ratios must be non-empty".into());
                }
                for &r in &self.ratios {
                    planted_pq(self.n, self.degree, r, 2)?;
                }
            }
            ExperimentKind::DegreeSweep => {
                if self.degrees.is_empty() {
                    return bad("degrees must be non-empty".into());
                }
                for &d in &self.degrees {
                    planted_pq(self.n, d, self.ratio, 2)?;
                }
            }
            ExperimentKind::GeneralK => {
                probability("pi", self.pi)?;
                probability("p0", self.p0)?;
                probability("q0", self.q0)?;
                if self.k < 2 {
                    return bad(format!("K = {} must be at least 2", self.k));
                }
                if self.ratios.is_empty() {
                    return bad("ratios must be non-empty".into());
                }
                let n_k = multiclass_n(self.n, self.k);
                for &r in &self.ratios {
                    pq_for_degree(self.n, self.degree, r, &[1.0 - self.pi, self.pi])?;
                    planted_pq(n_k, self.degree, r, self.k)?;
                }
            }
        }
        Ok(())
    }
}

/// `(p, q)` with `p = r·q` giving expected average degree `d` when labels
/// follow `class_probs`: `d = n(s·p + (1 − s)q)` with `s = Σ π_a²`. For
/// two balanced classes this is `q = 2d/(n(1 + r))`.
pub fn pq_for_degree(n: usize, degree: f64, ratio: f64, class_probs: &[f64]) -> Result<(f64, f64)> {
    let s: f64 = class_probs.iter().map(|x| x * x).sum();
    let q = degree / (n as f64 * (s * ratio + 1.0 - s));
    let p = ratio * q;
    if !(q > 0.0 && p < 1.0 && ratio >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "degree {degree} with ratio {ratio} at n = {n} gives (p, q) = ({p}, {q}) outside (0, 1)"
        )));
    }
    Ok((p, q))
}

/// [`pq_for_degree`] for `k` equal classes.
pub fn planted_pq(n: usize, degree: f64, ratio: f64, k: usize) -> Result<(f64, f64)> {
    pq_for_degree(n, degree, ratio, &vec![1.0 / k as f64; k])
}

/// Multi-class runs need `n` divisible by both 2 (pairing) and `K`
/// (equal classes); this is the largest such size not above `n`.
pub fn multiclass_n(n: usize, k: usize) -> usize {
    let step = if k.is_multiple_of(2) { k } else { 2 * k };
    n - n % step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_map() {
        let (p, q) = planted_pq(2000, 70.0, 3.0, 2).unwrap();
        assert!((q - 2.0 * 70.0 / (2000.0 * 4.0)).abs() < 1e-15);
        assert!((p - 3.0 * q).abs() < 1e-15);
        assert!(planted_pq(100, 90.0, 10.0, 2).is_err());
        assert_eq!(multiclass_n(2000, 3), 1998);
        assert_eq!(multiclass_n(2000, 4), 2000);
    }

    #[test]
    fn overrides_merge() {
        let c = ExperimentConfig::from_json_overrides(ExperimentKind::Heatmap, r#"{"trials": 3, "seed": 9}"#).unwrap();
        assert_eq!((c.trials, c.seed, c.n), (3, 9, 2000));
        assert!(ExperimentConfig::from_json_overrides(ExperimentKind::Heatmap, r#"{"kind": "convergence"}"#).is_err());
        assert!(ExperimentConfig::from_json_overrides(ExperimentKind::Heatmap, r#"{"bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json_overrides(ExperimentKind::Heatmap, r#"{"trials": 0}"#).is_err());
    }

    #[test]
    fn defaults_validate() {
        for kind in [
            ExperimentKind::Convergence,
            ExperimentKind::Heatmap,
            ExperimentKind::SnrSweep,
            ExperimentKind::DegreeSweep,
            ExperimentKind::GeneralK,
            ExperimentKind::ParamUpdateAblation,
        ] {
            ExperimentConfig::defaults(kind).validate().unwrap();
        }
    }
}
