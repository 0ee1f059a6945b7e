//! `results.csv`, `summary.json` and the SVG charts.
//!
//! `results.csv` is long format with the columns
//! `experiment, algorithm, trial, iteration, metric, value`. The
//! experiment column is `<kind>/<setting>`. Trajectory experiments
//! (convergence, ablation) emit one `l1_error` row per tick; the others
//! emit the final `nmi`, `l1_error`, `p_hat` and `q_hat` of each run with
//! `iteration` set to the number of iterations it took. Values use Rust's
//! shortest round-trip float formatting, so the file is a pure function of
//! the configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::harness::config::{multiclass_n, ExperimentConfig, ExperimentKind};
use crate::harness::experiments::{cell_setting, ExperimentOutput, TrialResult, RASTER_SETTING};
use crate::harness::svg::{heatmap, label_raster, line_chart, Series};

pub const CSV_COLUMNS: [&str; 6] = ["experiment", "algorithm", "trial", "iteration", "metric", "value"];

/// Final metrics written per run by non-trajectory experiments.
pub const FINAL_METRICS: [&str; 4] = ["nmi", "l1_error", "p_hat", "q_hat"];

/// Runs with final ℓ1 below this count as exact recovery.
pub const EXACT_L1: f64 = 0.5;

/// Fraction of `n` below which a run counts as recovered.
pub const RECOVERED_FRACTION: f64 = 1e-3;

fn last(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(f64::NAN)
}

pub fn write_results_csv<W: std::io::Write>(writer: W, outputs: &[ExperimentOutput]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for out in outputs {
        for r in &out.results {
            let experiment = format!("{}/{}", out.name, r.setting);
            let trial = r.trial.to_string();
            let rec = &r.record;
            if let Some(ticks) = out.trajectory_ticks {
                for tick in 0..ticks {
                    w.write_record([&experiment, &r.algorithm, &trial, &tick.to_string(), "l1_error", &rec.l1_at(tick).to_string()])?;
                }
            } else {
                let iteration = rec.iterations.to_string();
                let values = [rec.final_nmi(), rec.final_l1(), last(&rec.p_hat), last(&rec.q_hat)];
                for (metric, value) in FINAL_METRICS.iter().zip(values) {
                    w.write_record([&experiment, &r.algorithm, &trial, &iteration, *metric, &value.to_string()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn results_csv_string(outputs: &[ExperimentOutput]) -> Result<String> {
    let mut buf = Vec::new();
    write_results_csv(&mut buf, outputs)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn fraction(results: &[&TrialResult], pred: impl Fn(&TrialResult) -> bool) -> f64 {
    results.iter().filter(|r| pred(r)).count() as f64 / results.len().max(1) as f64
}

/// Aggregates over the trials of one (setting, algorithm) pair.
#[derive(Clone, Debug, Serialize)]
pub struct GroupSummary {
    pub setting: String,
    pub algorithm: String,
    pub trials: usize,
    pub nmi_mean: f64,
    pub nmi_sd: f64,
    pub l1_mean: f64,
    pub l1_sd: f64,
    /// Final ℓ1 below [`EXACT_L1`].
    pub exact_fraction: f64,
    /// Final ℓ1 at most [`RECOVERED_FRACTION`]·n.
    pub recovered_fraction: f64,
    pub converged_fraction: f64,
    pub iterations_mean: f64,
    pub p_hat_mean: f64,
    pub q_hat_mean: f64,
    pub wall_time_mean_secs: f64,
    pub warnings: usize,
    /// Mean and standard deviation of ℓ1 per tick (trajectory experiments).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_curve_mean: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1_curve_sd: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub wall_time_secs: f64,
    pub groups: Vec<GroupSummary>,
}

pub fn summarize_group(out: &ExperimentOutput, setting: &str, algorithm: &str) -> Option<GroupSummary> {
    let rs = out.group(setting, algorithm);
    if rs.is_empty() {
        return None;
    }
    let nodes = if out.config.kind == ExperimentKind::GeneralK && setting.starts_with("k=") {
        multiclass_n(out.config.n, out.config.k) as f64
    } else {
        out.config.n as f64
    };
    let col = |f: &dyn Fn(&TrialResult) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let (nmi_mean, nmi_sd) = mean_sd(&col(&|r| r.record.final_nmi()));
    let (l1_mean, l1_sd) = mean_sd(&col(&|r| r.record.final_l1()));
    let (curve_mean, curve_sd) = match out.trajectory_ticks {
        Some(ticks) => {
            let per_tick: Vec<(f64, f64)> = (0..ticks).map(|t| mean_sd(&col(&|r| r.record.l1_at(t)))).collect();
            (Some(per_tick.iter().map(|x| x.0).collect()), Some(per_tick.iter().map(|x| x.1).collect()))
        }
        None => (None, None),
    };
    Some(GroupSummary {
        setting: setting.to_string(),
        algorithm: algorithm.to_string(),
        trials: rs.len(),
        nmi_mean,
        nmi_sd,
        l1_mean,
        l1_sd,
        exact_fraction: fraction(&rs, |r| r.record.final_l1() < EXACT_L1),
        recovered_fraction: fraction(&rs, |r| r.record.final_l1() <= RECOVERED_FRACTION * nodes),
        converged_fraction: fraction(&rs, |r| r.record.converged),
        iterations_mean: mean_sd(&col(&|r| r.record.iterations as f64)).0,
        p_hat_mean: mean_sd(&col(&|r| last(&r.record.p_hat))).0,
        q_hat_mean: mean_sd(&col(&|r| last(&r.record.q_hat))).0,
        wall_time_mean_secs: mean_sd(&col(&|r| r.record.wall_time_secs)).0,
        warnings: rs.iter().map(|r| r.record.warnings.len()).sum(),
        l1_curve_mean: curve_mean,
        l1_curve_sd: curve_sd,
    })
}

pub fn summarize(out: &ExperimentOutput) -> ExperimentSummary {
    let mut groups = Vec::new();
    for s in &out.settings {
        for a in &out.algorithms {
            groups.extend(summarize_group(out, s, a));
        }
    }
    ExperimentSummary { experiment: out.name.clone(), config: out.config.clone(), wall_time_secs: out.wall_time_secs, groups }
}

fn trajectory_chart(out: &ExperimentOutput, summaries: &[GroupSummary]) -> String {
    let series: Vec<Series> = summaries
        .iter()
        .filter_map(|g| {
            let mean = g.l1_curve_mean.clone()?;
            Some(Series {
                name: format!("{} {}", g.algorithm, g.setting),
                x: (0..mean.len()).map(|t| t as f64).collect(),
                y: mean,
                band: g.l1_curve_sd.clone(),
            })
        })
        .collect();
    let title = format!("{}: l1 distance to truth (n = {})", out.name, out.config.n);
    line_chart(&title, "iteration", "l1 error", &series)
}

/// Mean final NMI against the numeric sweep axis, one series per algorithm.
fn sweep_chart(title: &str, x_label: &str, axis: &[(String, f64)], out: &ExperimentOutput, summaries: &[GroupSummary]) -> String {
    let series: Vec<Series> = out
        .algorithms
        .iter()
        .map(|alg| {
            let (x, (y, sd)): (Vec<f64>, (Vec<f64>, Vec<f64>)) = axis
                .iter()
                .filter_map(|(setting, x)| {
                    summaries.iter().find(|g| &g.setting == setting && &g.algorithm == alg).map(|g| (*x, (g.nmi_mean, g.nmi_sd)))
                })
                .unzip();
            Series { name: alg.clone(), x, y, band: Some(sd) }
        })
        .filter(|s| !s.x.is_empty())
        .collect();
    line_chart(title, x_label, "NMI", &series)
}

/// Renders the charts of one experiment as `(file name, svg)` pairs.
pub fn render_charts(out: &ExperimentOutput, summary: &ExperimentSummary) -> Vec<(String, String)> {
    let c = &out.config;
    let groups = &summary.groups;
    let mut charts = Vec::new();
    match c.kind {
        ExperimentKind::Convergence | ExperimentKind::ParamUpdateAblation => {
            charts.push((format!("{}.svg", out.name), trajectory_chart(out, groups)));
        }
        ExperimentKind::Heatmap => {
            for alg in &out.algorithms {
                let values: Vec<Vec<Option<f64>>> = c
                    .grid
                    .iter()
                    .map(|&q| {
                        c.grid
                            .iter()
                            .map(|&p| {
                                let setting = cell_setting(p, q);
                                groups.iter().find(|g| g.setting == setting && &g.algorithm == alg).map(|g| g.nmi_mean)
                            })
                            .collect()
                    })
                    .collect();
                let title = format!("{alg}: mean NMI, truth (p, q) = ({}, {})", c.p0, c.q0);
                charts.push((format!("heatmap-{alg}.svg"), heatmap(&title, "p_hat", "q_hat", &c.grid, &c.grid, &values)));
            }
        }
        ExperimentKind::SnrSweep => {
            let axis: Vec<(String, f64)> = c.ratios.iter().map(|&r| (format!("r={r}"), r)).collect();
            let title = format!("NMI vs p0/q0 at degree {}", c.degree);
            charts.push((format!("{}.svg", out.name), sweep_chart(&title, "p0/q0", &axis, out, groups)));
        }
        ExperimentKind::DegreeSweep => {
            let axis: Vec<(String, f64)> = c.degrees.iter().map(|&d| (format!("degree={d}"), d)).collect();
            let title = format!("NMI vs degree at p0/q0 = {}", c.ratio);
            charts.push((format!("{}.svg", out.name), sweep_chart(&title, "average degree", &axis, out, groups)));
        }
        ExperimentKind::GeneralK => {
            let axis: Vec<(String, f64)> = c.ratios.iter().map(|&r| (format!("pi={};r={r}", c.pi), r)).collect();
            let title = format!("pi = {}, degree {}", c.pi, c.degree);
            charts.push(("general-pi.svg".into(), sweep_chart(&title, "p0/q0", &axis, out, groups)));
            let axis: Vec<(String, f64)> = c.ratios.iter().map(|&r| (format!("k={};r={r}", c.k), r)).collect();
            let title = format!("K = {}, degree {}", c.k, c.degree);
            charts.push(("general-k.svg".into(), sweep_chart(&title, "p0/q0", &axis, out, groups)));
            for alg in &out.algorithms {
                let rows: Vec<Vec<usize>> =
                    out.group(RASTER_SETTING, alg).iter().filter_map(|r| r.raster_row.clone()).collect();
                if !rows.is_empty() {
                    let title = format!("{alg}: K = {} memberships, (p, q) = ({}, {})", c.k, c.p0, c.q0);
                    charts.push((format!("general-raster-{alg}.svg"), label_raster(&title, &rows)));
                }
            }
        }
    }
    charts
}

/// Writes `results.csv`, `summary.json` and the charts of every output
/// into `dir`, returning the paths written.
pub fn write_outputs(dir: &Path, outputs: &[ExperimentOutput]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join("results.csv");
    write_results_csv(fs::File::create(&csv_path)?, outputs)?;
    written.push(csv_path);

    let summaries: Vec<ExperimentSummary> = outputs.iter().map(summarize).collect();
    for (out, summary) in outputs.iter().zip(&summaries) {
        for (name, svg) in render_charts(out, summary) {
            let path = dir.join(name);
            fs::write(&path, svg)?;
            written.push(path);
        }
    }
    let json_path = dir.join("summary.json");
    fs::write(&json_path, serde_json::to_string_pretty(&summaries)?)?;
    written.push(json_path);
    Ok(written)
}
