//! Command-line front end.
//!
//! ```text
//! swarm-jump <single|batch|sweep-sigma|chaos|cbo-limit> [--config FILE] [flags] [--set KEY=VALUE]...
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 non-finite state.

pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Result, SwarmError};
use crate::experiments::{
    cbo_limit_sweep, chaos_experiment, run_batch, run_realization, sigma_sweep, stats::bootstrap_mean_ci,
    LimitMethod,
};
use crate::noise::realization_seed;

pub use config::{ExperimentConfig, ExperimentKind, RawConfig};
use output::Artifacts;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SWARM_JUMP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "swarm-jump", version, about = "Jump-velocity swarm optimization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One realization with consensus trajectory.
    Single(CommonArgs),
    /// Independent realizations with success statistics.
    Batch(CommonArgs),
    /// One batch per diffusion gain in `sigmas`.
    SweepSigma(CommonArgs),
    /// Propagation-of-chaos rate study.
    Chaos(CommonArgs),
    /// Scaled jump swarm against CBO for each `eps` in `eps_values`.
    CboLimit(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML (or resolved JSON) configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "n-particles")]
    pub n_particles: Option<usize>,
    #[arg(long = "n-runs")]
    pub n_runs: Option<usize>,
    #[arg(long = "k-max")]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides any configuration key, e.g. `--set eps_values=[1,0.1]`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    pub set: Vec<(String, String)>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

impl CommonArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                o.push((k.to_string(), v));
            }
        };
        push("objective", self.objective.as_deref().map(quoted));
        push("dim", self.dim.map(|v| v.to_string()));
        push("noise", self.noise.as_deref().map(quoted));
        push("variant", self.variant.as_deref().map(quoted));
        push("sigma", self.sigma.map(|v| format!("{v:?}")));
        push("n_particles", self.n_particles.map(|v| v.to_string()));
        push("n_runs", self.n_runs.map(|v| v.to_string()));
        push("k_max", self.k_max.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("output_dir", self.out.as_ref().map(|p| quoted(&p.to_string_lossy())));
        o.extend(self.set.iter().cloned());
        o
    }

    /// File values first, then flags and `--set` pairs on top.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let raw = match &self.config {
            Some(path) => RawConfig::from_path(path)?,
            None => RawConfig::default(),
        };
        raw.with_overrides(&self.overrides())?.resolve(kind)
    }
}

impl Command {
    fn parts(&self) -> (ExperimentKind, &CommonArgs) {
        match self {
            Command::Single(a) => (ExperimentKind::Single, a),
            Command::Batch(a) => (ExperimentKind::Batch, a),
            Command::SweepSigma(a) => (ExperimentKind::SigmaSweep, a),
            Command::Chaos(a) => (ExperimentKind::Chaos, a),
            Command::CboLimit(a) => (ExperimentKind::CboLimit, a),
        }
    }
}

#[derive(Debug, Serialize)]
struct CboLimitSummary {
    eps: f64,
    sigma_tilde: f64,
    method: LimitMethod,
    mean_linf_error: f64,
    success_rate: f64,
    /// 95% bootstrap interval of the mean error (CBO rows only).
    ci95: Option<(f64, f64)>,
}

/// Runs the configured experiment and writes its artifacts.
pub fn run(config: &ExperimentConfig) -> Result<Artifacts> {
    let dir = &config.output_dir;
    output::ensure_dir(dir)?;
    let objective = config.objective_spec()?;
    let mut art = Artifacts::default();
    let (cfg, opts) = (&config.swarm, &config.run);

    match config.kind {
        ExperimentKind::Single => {
            let seed = config.seed;
            let r = run_realization(&objective.for_realization(seed), cfg, seed, opts)?;
            art.text(dir, "single.csv", &output::single_csv(&r))?;
            if let Some(h) = &r.consensus_history {
                let native: Vec<Vec<f64>> = h.iter().map(|x| objective.from_unit(x)).collect::<Result<_>>()?;
                art.text(dir, "consensus_history.csv", &output::consensus_history_csv(&native))?;
            }
            let summary = crate::experiments::RunResult {
                consensus_history: None,
                ..r
            };
            art.json(dir, "summary.json", &summary)?;
        }
        ExperimentKind::Batch => {
            let stats = run_batch(&objective, cfg, opts, config.n_runs, config.seed)?;
            art.text(dir, "batch.csv", &output::batch_csv(&stats))?;
            art.json(dir, "summary.json", &stats)?;
        }
        ExperimentKind::SigmaSweep => {
            let rows = sigma_sweep(&objective, cfg, opts, &config.sigmas, config.n_runs, config.seed)?;
            art.text(dir, "sigma_sweep.csv", &output::sigma_sweep_csv(&rows))?;
            art.json(dir, "summary.json", &rows)?;
        }
        ExperimentKind::Chaos => {
            let report = chaos_experiment(&objective, cfg, &config.chaos, config.seed)?;
            art.text(dir, "chaos.csv", &output::chaos_csv(&report))?;
            art.json(dir, "summary.json", &report)?;
        }
        ExperimentKind::CboLimit => {
            let rows = cbo_limit_sweep(
                &objective,
                cfg,
                opts,
                &config.eps_values,
                &config.sigma_tilde_grid,
                config.n_runs,
                config.seed,
            )?;
            art.text(dir, "cbo_limit.csv", &output::cbo_limit_csv(&rows))?;
            let summary = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let ci95 = match r.method {
                        LimitMethod::Cbo => Some(bootstrap_mean_ci(
                            &r.linf_errors,
                            0.95,
                            2000,
                            realization_seed(config.seed, i as u64),
                        )?),
                        LimitMethod::Scaled => None,
                    };
                    Ok(CboLimitSummary {
                        eps: r.eps,
                        sigma_tilde: r.sigma_tilde,
                        method: r.method,
                        mean_linf_error: r.mean_linf_error,
                        success_rate: r.success_rate,
                        ci95,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            art.json(dir, "summary.json", &summary)?;
        }
    }
    art.json(dir, "config.resolved.json", &config.to_raw())?;
    Ok(art)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| SwarmError::config(THREADS_ENV, format!("expected a positive integer, got `{value}`")))?;
    // a second call in the same process keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (kind, common) = cli.command.parts();
    let outcome = configure_threads()
        .and_then(|()| common.resolve(kind))
        .and_then(|config| run(&config).map(|art| (config, art)));
    match outcome {
        Ok((config, art)) => {
            log::info!("{} finished; wrote {} files to {}", config.kind, art.files.len(), config.output_dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
