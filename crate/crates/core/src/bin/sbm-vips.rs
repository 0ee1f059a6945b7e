use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sbm_vips::harness::{run_experiment, summarize, write_outputs, ExperimentConfig, ExperimentKind, ExperimentOutput};
use sbm_vips::sbm::io::{write_graph, GraphSidecar};
use sbm_vips::sbm::{generate_sbm, SbmConfig};
use sbm_vips::{Error, Result};

#[derive(Parser)]
#[command(name = "sbm-vips", version, about = "Community detection benchmarks for stochastic block models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed; every trial seed is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Flat JSON document overriding experiment defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Trials per setting.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Number of nodes.
    #[arg(long, global = true)]
    n: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Snr,
    Degree,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write it as an edge list plus JSON sidecar.
    Gen {
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        q: f64,
        /// Probability of class 1 (two classes only); gives multinomial labels.
        #[arg(long)]
        pi: Option<f64>,
    },
    /// l1 error trajectories from Bernoulli(mu) starts.
    Convergence,
    /// Mean NMI over a grid of fixed (p_hat, q_hat).
    Heatmap,
    /// NMI against p0/q0 at fixed degree and/or against degree at fixed ratio.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepMode::Both)]
        mode: SweepMode,
    },
    /// Unbalanced two-class and K-class models.
    General,
    /// True / estimated / updated parameter schemes.
    Ablation,
}

fn load_config(kind: ExperimentKind, global: &Global, strip_kind: bool) -> Result<ExperimentConfig> {
    let mut config = match &global.config {
        Some(path) => {
            let mut value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            if strip_kind {
                if let Some(obj) = value.as_object_mut() {
                    obj.remove("kind");
                }
            }
            ExperimentConfig::from_json_overrides(kind, &value.to_string())?
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if let Some(workers) = global.workers {
        config.workers = workers;
    }
    if let Some(trials) = global.trials {
        config.trials = trials;
    }
    if let Some(n) = global.n {
        config.n = n;
    }
    config.validate()?;
    Ok(config)
}

fn report(outputs: &[ExperimentOutput], dir: &Path) -> Result<()> {
    let written = write_outputs(dir, outputs)?;
    for out in outputs {
        let summary = summarize(out);
        println!("{} ({:.1} s)", out.name, out.wall_time_secs);
        for g in &summary.groups {
            println!(
                "  {:<24} {:<14} nmi {:.3} ± {:.3}  l1 {:>9.2}  exact {:.2}",
                g.setting, g.algorithm, g.nmi_mean, g.nmi_sd, g.l1_mean, g.exact_fraction
            );
        }
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn generate(global: &Global, k: usize, p: f64, q: f64, pi: Option<f64>) -> Result<()> {
    let n = global.n.unwrap_or(2000);
    let seed = global.seed.unwrap_or(0);
    let config = match pi {
        Some(pi) if k == 2 => SbmConfig::two_class_unbalanced(n, p, q, pi),
        Some(_) => return Err(Error::InvalidConfig("--pi needs --k 2".into())),
        None => SbmConfig::planted(n, k, p, q),
    };
    let graph = generate_sbm(&config, seed)?;
    std::fs::create_dir_all(&global.out)?;
    let (edges, sidecar) = (global.out.join("graph.edges"), global.out.join("graph.json"));
    write_graph(&graph, &GraphSidecar::for_graph(&graph, Some(config), Some(seed)), &edges, &sidecar)?;
    println!("n = {n}, edges = {}, density = {:.5}", graph.edge_count(), graph.density());
    println!("wrote {}\nwrote {}", edges.display(), sidecar.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let single = |kind| -> Result<()> { report(&[run_experiment(&load_config(kind, g, false)?)?], &g.out) };
    match cli.command {
        Command::Gen { k, p, q, pi } => generate(g, k, p, q, pi),
        Command::Convergence => single(ExperimentKind::Convergence),
        Command::Heatmap => single(ExperimentKind::Heatmap),
        Command::General => single(ExperimentKind::GeneralK),
        Command::Ablation => single(ExperimentKind::ParamUpdateAblation),
        Command::Sweep { mode } => {
            let kinds: &[ExperimentKind] = match mode {
                SweepMode::Snr => &[ExperimentKind::SnrSweep],
                SweepMode::Degree => &[ExperimentKind::DegreeSweep],
                SweepMode::Both => &[ExperimentKind::SnrSweep, ExperimentKind::DegreeSweep],
            };
            let strip = kinds.len() > 1;
            let outputs = kinds
                .iter()
                .map(|&kind| run_experiment(&load_config(kind, g, strip)?))
                .collect::<Result<Vec<_>>>()?;
            report(&outputs, &g.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
