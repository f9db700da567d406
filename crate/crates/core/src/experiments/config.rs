//! Experiment configuration: JSON schema, desk-scale defaults, and
//! validation with field-path errors.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::proposals::ProposalFamily;
use crate::targets::TargetModel;

use super::scenarios;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("config parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SweepStepsize,
    Scaling,
    AdaptiveScenarios,
    Poisson,
    GapLab,
    TvDecay,
    AcceptanceOrder,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::SweepStepsize => "sweep_stepsize",
            ExperimentKind::Scaling => "scaling",
            ExperimentKind::AdaptiveScenarios => "adaptive_scenarios",
            ExperimentKind::Poisson => "poisson",
            ExperimentKind::GapLab => "gap_lab",
            ExperimentKind::TvDecay => "tv_decay",
            ExperimentKind::AcceptanceOrder => "acceptance_order",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "snake_case")]
pub enum SamplerName {
    Rwm,
    Mala,
    Barker,
    BarkerGlobalFlip,
    Malta,
    Maltac,
    Hmc,
}

impl SamplerName {
    pub fn family(&self) -> ProposalFamily {
        match self {
            SamplerName::Rwm => ProposalFamily::Rwm,
            SamplerName::Mala => ProposalFamily::Mala,
            SamplerName::Barker => ProposalFamily::Barker,
            SamplerName::BarkerGlobalFlip => ProposalFamily::BarkerGlobalFlip,
            SamplerName::Malta => ProposalFamily::Malta,
            SamplerName::Maltac => ProposalFamily::MaltaC,
            SamplerName::Hmc => ProposalFamily::Hmc,
        }
    }

    pub fn name(&self) -> &'static str {
        self.family().name()
    }
}

/// Target selection for experiments that take one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    StdGaussian {
        dim: usize,
    },
    Gaussian {
        scales: Vec<f64>,
        #[serde(default)]
        means: Option<Vec<f64>>,
    },
    Hyperbolic {
        scales: Vec<f64>,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    SkewNormal {
        scales: Vec<f64>,
        alpha: f64,
    },
    ExponentialFamily {
        dim: usize,
        alpha: f64,
        beta: f64,
    },
    /// One of the four heterogeneous adaptation scenarios; random scales are
    /// drawn deterministically from the experiment seed.
    Scenario {
        index: u32,
        #[serde(default = "default_scenario_dim")]
        dim: usize,
    },
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_scenario_dim() -> usize {
    100
}

impl TargetSpec {
    pub fn build(&self, seed: u64) -> Result<TargetModel<f64>, ConfigError> {
        match self {
            TargetSpec::StdGaussian { dim } => {
                if *dim == 0 {
                    return Err(invalid("target.dim", "must be positive"));
                }
                Ok(TargetModel::std_gaussian(*dim))
            }
            TargetSpec::Gaussian { scales, means } => {
                check_scales("target.scales", scales)?;
                match means {
                    Some(m) => {
                        if m.len() != scales.len() {
                            return Err(invalid("target.means", "length must match scales"));
                        }
                        Ok(TargetModel::gaussian_with_mean(m.clone(), scales.clone()))
                    }
                    None => Ok(TargetModel::gaussian(scales.clone())),
                }
            }
            TargetSpec::Hyperbolic { scales, epsilon } => {
                check_scales("target.scales", scales)?;
                if *epsilon <= 0.0 {
                    return Err(invalid("target.epsilon", "must be positive"));
                }
                Ok(TargetModel::hyperbolic(scales.clone(), *epsilon))
            }
            TargetSpec::SkewNormal { scales, alpha } => {
                check_scales("target.scales", scales)?;
                Ok(TargetModel::skew_normal(scales.clone(), *alpha))
            }
            TargetSpec::ExponentialFamily { dim, alpha, beta } => {
                if *dim == 0 {
                    return Err(invalid("target.dim", "must be positive"));
                }
                if *alpha <= 0.0 || *beta <= 0.0 {
                    return Err(invalid("target.alpha/beta", "must be positive"));
                }
                Ok(TargetModel::exponential_family(*dim, *alpha, *beta))
            }
            TargetSpec::Scenario { index, dim } => {
                if !(1..=4).contains(index) {
                    return Err(invalid("target.index", "scenario index must be 1..=4"));
                }
                Ok(scenarios::scenario_target(*index, *dim, seed))
            }
        }
    }
}

fn check_scales(path: &str, scales: &[f64]) -> Result<(), ConfigError> {
    if scales.is_empty() {
        return Err(invalid(path, "must be non-empty"));
    }
    if !scales.iter().all(|s| *s > 0.0 && s.is_finite()) {
        return Err(invalid(path, "entries must be positive finite"));
    }
    Ok(())
}

/// Full experiment configuration. Desk-scale defaults are provided by
/// [`ExperimentConfig::default_for`]; any field can be overridden in the
/// JSON file, and `--seed`, `--replicates`, `--threads`, `--output-dir`
/// override from the command line.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub samplers: Vec<SamplerName>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    #[serde(default)]
    pub sigma_grid: Vec<f64>,
    #[serde(default)]
    pub dim_grid: Vec<usize>,
    #[serde(default)]
    pub lambda_grid: Vec<f64>,
    #[serde(default)]
    pub scenarios: Vec<u32>,
    #[serde(default)]
    pub n_steps: Option<usize>,
    #[serde(default)]
    pub replicates: Option<u32>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub hmc_leapfrog_steps: Option<usize>,
    #[serde(default)]
    pub malta_delta: Option<f64>,
    /// Threshold for the adaptation time tau_adapt.
    #[serde(default)]
    pub tau_epsilon: Option<f64>,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment (paper scales shrunk; the
    /// manifest records the actual values used).
    pub fn default_for(kind: ExperimentKind) -> Self {
        let mut cfg = ExperimentConfig {
            experiment: kind,
            seed: 42,
            output_dir: PathBuf::from("out"),
            samplers: vec![SamplerName::Rwm, SamplerName::Mala, SamplerName::Barker],
            target: None,
            sigma_grid: Vec::new(),
            dim_grid: Vec::new(),
            lambda_grid: Vec::new(),
            scenarios: Vec::new(),
            n_steps: None,
            replicates: None,
            kappa: None,
            hmc_leapfrog_steps: None,
            malta_delta: None,
            tau_epsilon: None,
        };
        match kind {
            ExperimentKind::SweepStepsize => {
                cfg.target = Some(TargetSpec::StdGaussian { dim: 1 });
                cfg.sigma_grid = log_grid(0.01, 100.0, 25);
                cfg.n_steps = Some(100_000);
                cfg.replicates = Some(1);
            }
            ExperimentKind::Scaling => {
                cfg.dim_grid = vec![10, 31, 100, 316, 1000];
                cfg.n_steps = Some(20_000);
                cfg.replicates = Some(3);
            }
            ExperimentKind::AdaptiveScenarios => {
                cfg.scenarios = vec![1, 2, 3, 4];
                cfg.n_steps = Some(20_000);
                cfg.replicates = Some(10);
                cfg.kappa = Some(0.6);
                cfg.tau_epsilon = Some(1.0);
            }
            ExperimentKind::Poisson => {
                cfg.samplers = vec![
                    SamplerName::Rwm,
                    SamplerName::Mala,
                    SamplerName::Barker,
                    SamplerName::Hmc,
                ];
                cfg.scenarios = vec![1, 3];
                cfg.n_steps = Some(20_000);
                cfg.replicates = Some(5);
                cfg.kappa = Some(0.6);
                cfg.hmc_leapfrog_steps = Some(10);
            }
            ExperimentKind::GapLab => {
                cfg.lambda_grid = vec![1.0, 0.5, 0.25, 0.125, 0.0625];
            }
            ExperimentKind::TvDecay => {
                cfg.samplers = vec![SamplerName::Mala, SamplerName::Barker];
                cfg.lambda_grid = vec![10.0, 100.0, 1000.0, 10000.0];
            }
            ExperimentKind::AcceptanceOrder => {
                cfg.sigma_grid = log_grid(1e-3, 1e-1, 7);
                cfg.replicates = Some(5);
            }
        }
        cfg
    }

    /// Parse a JSON config, reporting the offending field path on error.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig =
            serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.samplers.is_empty() {
            return Err(invalid("samplers", "must list at least one sampler"));
        }
        if let Some(n) = self.n_steps {
            if n == 0 {
                return Err(invalid("n_steps", "must be >= 1"));
            }
        }
        if let Some(r) = self.replicates {
            if r == 0 {
                return Err(invalid("replicates", "must be >= 1"));
            }
        }
        if let Some(k) = self.kappa {
            if !(0.5..1.0).contains(&k) {
                return Err(invalid("kappa", "must lie in [0.5, 1)"));
            }
        }
        let need_grid = |grid: &[f64], path: &str| -> Result<(), ConfigError> {
            if grid.is_empty() {
                return Err(invalid(path, "must be non-empty for this experiment"));
            }
            if !grid.iter().all(|g| *g > 0.0 && g.is_finite()) {
                return Err(invalid(path, "entries must be positive finite"));
            }
            Ok(())
        };
        match self.experiment {
            ExperimentKind::SweepStepsize | ExperimentKind::AcceptanceOrder => {
                need_grid(&self.sigma_grid, "sigma_grid")?;
            }
            ExperimentKind::Scaling => {
                if self.dim_grid.is_empty() {
                    return Err(invalid("dim_grid", "must be non-empty for this experiment"));
                }
                if self.dim_grid.contains(&0) {
                    return Err(invalid("dim_grid", "dimensions must be positive"));
                }
            }
            ExperimentKind::GapLab | ExperimentKind::TvDecay => {
                need_grid(&self.lambda_grid, "lambda_grid")?;
            }
            ExperimentKind::AdaptiveScenarios => {
                if self.scenarios.is_empty() || self.scenarios.iter().any(|s| !(1..=4).contains(s))
                {
                    return Err(invalid("scenarios", "must be a non-empty subset of 1..=4"));
                }
            }
            ExperimentKind::Poisson => {
                if self.scenarios.is_empty() || self.scenarios.iter().any(|s| !(1..=3).contains(s))
                {
                    return Err(invalid("scenarios", "must be a non-empty subset of 1..=3"));
                }
            }
        }
        Ok(())
    }

    pub fn n_steps_or(&self, default: usize) -> usize {
        self.n_steps.unwrap_or(default)
    }

    pub fn replicates_or(&self, default: u32) -> u32 {
        self.replicates.unwrap_or(default)
    }

    pub fn kappa_or(&self, default: f64) -> f64 {
        self.kappa.unwrap_or(default)
    }
}

/// Log-spaced grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| lo * (step * i as f64).exp())
        .collect()
}
