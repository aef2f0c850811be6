//! Experiment configuration: a flat TOML table with optional keys, merged
//! with command-line overrides and resolved against per-experiment defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{SwarmConfig, Variant};
use crate::error::{Result, SwarmError};
use crate::experiments::{ChaosSettings, Coordinates, RunOptions, StallSettings, VelocityInit};
use crate::noise::NoiseKind;
use crate::objectives::{make_objective, ObjectiveId, ObjectiveSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Single,
    Batch,
    SigmaSweep,
    Chaos,
    CboLimit,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Single => "single",
            ExperimentKind::Batch => "batch",
            ExperimentKind::SigmaSweep => "sigma_sweep",
            ExperimentKind::Chaos => "chaos",
            ExperimentKind::CboLimit => "cbo_limit",
        })
    }
}

/// Every key accepted in a configuration file. Absent keys take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub objective: Option<ObjectiveId>,
    pub dim: Option<usize>,
    pub variant: Option<Variant>,
    pub noise: Option<NoiseKind>,
    pub n_particles: Option<usize>,
    pub lambda: Option<f64>,
    pub sigma: Option<f64>,
    pub sigma0: Option<f64>,
    pub nu: Option<f64>,
    pub dt: Option<f64>,
    pub alpha: Option<f64>,
    pub eps: Option<f64>,
    pub sigma_tilde: Option<f64>,
    pub domain_lo: Option<f64>,
    pub domain_hi: Option<f64>,
    pub velocity_init: Option<VelocityInit>,
    pub k_max: Option<usize>,
    pub n_runs: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub stall: Option<bool>,
    pub stall_tol: Option<f64>,
    pub stall_window: Option<usize>,
    pub success_radius: Option<f64>,
    pub success_coordinates: Option<Coordinates>,
    pub sigmas: Option<Vec<f64>>,
    pub eps_values: Option<Vec<f64>>,
    pub sigma_tilde_grid: Option<Vec<f64>>,
    pub n_values: Option<Vec<usize>>,
    pub n_ref: Option<usize>,
    pub horizon: Option<f64>,
    pub n_trials: Option<usize>,
}

/// A fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub objective: ObjectiveId,
    pub dim: usize,
    pub swarm: SwarmConfig,
    pub run: RunOptions,
    pub n_runs: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub sigmas: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub sigma_tilde_grid: Vec<f64>,
    pub chaos: ChaosSettings,
}

pub const DEFAULT_SEED: u64 = 20_240_601;

/// `0, 1/per_unit, 2/per_unit, ...` with `count` entries.
fn grid(per_unit: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / per_unit).collect()
}

fn default_sigmas(noise: NoiseKind) -> Vec<f64> {
    match noise {
        NoiseKind::Gaussian => grid(4.0, 11),
        NoiseKind::Cauchy => grid(10.0, 16),
    }
}

/// Default diffusion gain for each noise distribution.
pub fn default_sigma(noise: NoiseKind) -> f64 {
    match noise {
        NoiseKind::Gaussian => 0.75,
        NoiseKind::Cauchy => 0.25,
    }
}

impl RawConfig {
    /// Parses TOML text, reporting line and column on failure.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| SwarmError::Parse(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SwarmError::Parse(e.to_string()))
    }

    /// Reads a configuration file; `.json` files are parsed as JSON, anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SwarmError::Parse(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        };
        parsed.map_err(|e| match e {
            SwarmError::Parse(msg) => SwarmError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Applies `key=value` overrides; values use TOML syntax, bare words are strings.
    pub fn with_overrides(self, overrides: &[(String, String)]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self);
        }
        let mut table = toml::Table::try_from(&self).map_err(|e| SwarmError::Parse(e.to_string()))?;
        for (key, value) in overrides {
            let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.clone()));
            table.insert(key.clone(), parsed);
        }
        table
            .try_into()
            .map_err(|e: toml::de::Error| SwarmError::Parse(e.to_string()))
    }

    pub fn resolve(self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(SwarmError::config("kind", format!("file is for `{k}` but `{kind}` was requested")));
            }
        }
        let objective = self
            .objective
            .ok_or_else(|| SwarmError::config("objective", "required (e.g. `ackley`)"))?;
        let dim = self.dim.unwrap_or(20);
        let noise = self.noise.unwrap_or(NoiseKind::Gaussian);
        let chaos_kind = kind == ExperimentKind::Chaos;
        let variant = self.variant.unwrap_or(if chaos_kind {
            Variant::ProjectedJump
        } else {
            Variant::Jump
        });
        let swarm = SwarmConfig {
            lambda: self.lambda.unwrap_or(1.0),
            sigma: self.sigma.unwrap_or_else(|| default_sigma(noise)),
            sigma0: self.sigma0.unwrap_or(if chaos_kind { 0.01 } else { 0.0 }),
            nu: self.nu.unwrap_or(1.0),
            dt: self.dt.unwrap_or(0.1),
            alpha: self.alpha.unwrap_or(1e5),
            eps: self.eps.unwrap_or(1.0),
            n_particles: self.n_particles.unwrap_or(200),
            dim,
            noise,
            variant,
            domain_lo: self.domain_lo.unwrap_or(-1.0),
            domain_hi: self.domain_hi.unwrap_or(1.0),
            cbo_sigma_tilde: self.sigma_tilde.unwrap_or(0.0),
        };
        swarm.validate()?;

        let stall = if self.stall.unwrap_or(true) {
            let s = StallSettings {
                tol: self.stall_tol.unwrap_or(1e-4),
                window: self.stall_window.unwrap_or(500),
            };
            if !(s.tol >= 0.0) {
                return Err(SwarmError::config("stall_tol", "must be >= 0"));
            }
            Some(s)
        } else {
            None
        };
        let run = RunOptions {
            k_max: self.k_max.unwrap_or(1000),
            stall,
            success_radius: self.success_radius.unwrap_or(0.25),
            success_coordinates: self.success_coordinates.unwrap_or(Coordinates::Native),
            velocity_init: self.velocity_init.unwrap_or(VelocityInit::Zero),
            record_consensus: kind == ExperimentKind::Single,
            energy_gamma: None,
        };
        if run.k_max == 0 {
            return Err(SwarmError::config("k_max", "must be >= 1"));
        }
        if !(run.success_radius > 0.0) {
            return Err(SwarmError::config("success_radius", "must be > 0"));
        }
        let n_runs = self.n_runs.unwrap_or(100);
        if n_runs == 0 {
            return Err(SwarmError::config("n_runs", "must be >= 1"));
        }

        let sigmas = self.sigmas.unwrap_or_else(|| default_sigmas(noise));
        if sigmas.is_empty() || sigmas.iter().any(|s| !(*s >= 0.0)) {
            return Err(SwarmError::config("sigmas", "must be nonempty and nonnegative"));
        }
        let eps_values = self.eps_values.unwrap_or_else(|| vec![1.0, 0.5, 0.25, 0.1]);
        if eps_values.is_empty() || eps_values.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(SwarmError::config("eps_values", "must be nonempty and lie in (0, 1]"));
        }
        let sigma_tilde_grid = self.sigma_tilde_grid.unwrap_or_else(|| grid(2.0, 11));
        if sigma_tilde_grid.is_empty() || sigma_tilde_grid.iter().any(|s| !(*s >= 0.0)) {
            return Err(SwarmError::config("sigma_tilde_grid", "must be nonempty and nonnegative"));
        }
        let defaults = ChaosSettings::default();
        let chaos = ChaosSettings {
            n_values: self.n_values.unwrap_or(defaults.n_values),
            n_ref: self.n_ref.unwrap_or(defaults.n_ref),
            horizon: self.horizon.unwrap_or(defaults.horizon),
            n_trials: self.n_trials.unwrap_or(defaults.n_trials),
        };
        if kind == ExperimentKind::CboLimit && noise != NoiseKind::Gaussian {
            return Err(SwarmError::config("noise", "cbo_limit requires gaussian noise"));
        }
        if chaos_kind && variant != Variant::ProjectedJump {
            return Err(SwarmError::config("variant", "chaos requires projected_jump"));
        }

        Ok(ExperimentConfig {
            kind,
            objective,
            dim,
            swarm,
            run,
            n_runs,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from("out")),
            sigmas,
            eps_values,
            sigma_tilde_grid,
            chaos,
        })
    }
}

impl ExperimentConfig {
    /// Objective instance; the random XSY function is seeded from the root seed
    /// and redrawn per realization by the batch drivers.
    pub fn objective_spec(&self) -> Result<ObjectiveSpec> {
        make_objective(self.objective, self.dim, self.seed)
    }

    /// The same configuration with every key spelled out.
    pub fn to_raw(&self) -> RawConfig {
        let s = &self.swarm;
        RawConfig {
            kind: Some(self.kind),
            objective: Some(self.objective),
            dim: Some(self.dim),
            variant: Some(s.variant),
            noise: Some(s.noise),
            n_particles: Some(s.n_particles),
            lambda: Some(s.lambda),
            sigma: Some(s.sigma),
            sigma0: Some(s.sigma0),
            nu: Some(s.nu),
            dt: Some(s.dt),
            alpha: Some(s.alpha),
            eps: Some(s.eps),
            sigma_tilde: Some(s.cbo_sigma_tilde),
            domain_lo: Some(s.domain_lo),
            domain_hi: Some(s.domain_hi),
            velocity_init: Some(self.run.velocity_init),
            k_max: Some(self.run.k_max),
            n_runs: Some(self.n_runs),
            seed: Some(self.seed),
            output_dir: Some(self.output_dir.clone()),
            stall: Some(self.run.stall.is_some()),
            stall_tol: Some(self.run.stall.unwrap_or_default().tol),
            stall_window: Some(self.run.stall.unwrap_or_default().window),
            success_radius: Some(self.run.success_radius),
            success_coordinates: Some(self.run.success_coordinates),
            sigmas: Some(self.sigmas.clone()),
            eps_values: Some(self.eps_values.clone()),
            sigma_tilde_grid: Some(self.sigma_tilde_grid.clone()),
            n_values: Some(self.chaos.n_values.clone()),
            n_ref: Some(self.chaos.n_ref),
            horizon: Some(self.chaos.horizon),
            n_trials: Some(self.chaos.n_trials),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: SwarmError) -> String {
        match err {
            SwarmError::Config { field, .. } => field,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn objective_alone_gives_figure_defaults() {
        let raw = RawConfig::from_toml_str("objective = \"ackley\"").unwrap();
        let cfg = raw.resolve(ExperimentKind::Batch).unwrap();
        let s = &cfg.swarm;
        assert_eq!(cfg.objective, ObjectiveId::Ackley);
        assert_eq!((s.n_particles, s.dim, cfg.dim), (200, 20, 20));
        assert_eq!((s.dt, s.lambda, s.nu, s.alpha, s.sigma), (0.1, 1.0, 1.0, 1e5, 0.75));
        assert_eq!((cfg.run.k_max, cfg.n_runs), (1000, 100));
        assert_eq!(cfg.run.stall, Some(StallSettings { tol: 1e-4, window: 500 }));
        assert_eq!(s.variant, Variant::Jump);
    }

    #[test]
    fn negative_dt_names_field() {
        let raw = RawConfig::from_toml_str("objective = \"ackley\"\ndt = -0.1").unwrap();
        assert_eq!(field_of(raw.resolve(ExperimentKind::Batch).unwrap_err()), "dt");
    }

    #[test]
    fn cauchy_flips_sigma_default() {
        let raw = RawConfig::from_toml_str("objective = \"rastrigin\"\nnoise = \"cauchy\"").unwrap();
        assert_eq!(raw.resolve(ExperimentKind::Batch).unwrap().swarm.sigma, 0.25);
    }

    #[test]
    fn unknown_keys_and_syntax_errors_are_rejected() {
        let e = RawConfig::from_toml_str("objective = \"ackley\"\nbogus = 1").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = RawConfig::from_toml_str("objective = \"ackley\"\ndt = = 3").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert_eq!(e.exit_code(), 2);
        assert!(RawConfig::from_toml_str("objective = \"sphere\"").is_err());
    }

    #[test]
    fn overrides_replace_file_values() {
        let raw = RawConfig::from_toml_str("objective = \"ackley\"\nsigma = 0.5").unwrap();
        let raw = raw
            .with_overrides(&[
                ("sigma".into(), "1.25".into()),
                ("noise".into(), "cauchy".into()),
                ("sigmas".into(), "[0.1, 0.2]".into()),
            ])
            .unwrap();
        let cfg = raw.resolve(ExperimentKind::SigmaSweep).unwrap();
        assert_eq!(cfg.swarm.sigma, 1.25);
        assert_eq!(cfg.swarm.noise, NoiseKind::Cauchy);
        assert_eq!(cfg.sigmas, vec![0.1, 0.2]);
    }

    #[test]
    fn missing_objective_is_a_config_error() {
        assert_eq!(field_of(RawConfig::default().resolve(ExperimentKind::Single).unwrap_err()), "objective");
    }

    #[test]
    fn chaos_defaults() {
        let raw = RawConfig::from_toml_str("objective = \"ackley\"\ndim = 5").unwrap();
        let cfg = raw.resolve(ExperimentKind::Chaos).unwrap();
        assert_eq!(cfg.swarm.variant, Variant::ProjectedJump);
        assert_eq!(cfg.swarm.sigma0, 0.01);
        assert_eq!(cfg.swarm.alpha, 1e5);
        assert_eq!(cfg.chaos, ChaosSettings::default());
    }

    #[test]
    fn resolved_echo_resolves_to_itself() {
        let raw = RawConfig::from_toml_str("objective = \"griewank\"\nnoise = \"cauchy\"\nn_runs = 7").unwrap();
        let cfg = raw.resolve(ExperimentKind::Batch).unwrap();
        let json = serde_json::to_string(&cfg.to_raw()).unwrap();
        let again = RawConfig::from_json_str(&json).unwrap().resolve(ExperimentKind::Batch).unwrap();
        assert_eq!(cfg, again);
        let wrong_kind = RawConfig::from_json_str(&json).unwrap().resolve(ExperimentKind::Chaos);
        assert_eq!(field_of(wrong_kind.unwrap_err()), "kind");
    }
}
