//! Experiment configuration: TOML schema, validation and built-in presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::{generate_linear_world, ArmSpec, DelayDist, EnvModel};
use crate::error::{io_error, Error, Result};
use crate::policies::{PolicyConfig, PolicyKind, BASELINE_CUTOFF};

pub const REFERENCE_PI: [f64; 10] = [0.09, 0.15, 0.11, 0.05, 0.1, 0.05, 0.08, 0.14, 0.13, 0.1];

fn default_reps() -> usize {
    50
}
fn default_seed() -> u64 {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("results")
}
fn default_window() -> f64 {
    BASELINE_CUTOFF
}
fn default_stride() -> usize {
    100
}
fn default_diag_stride() -> usize {
    500
}
fn default_noise() -> f64 {
    0.1
}
fn default_dim() -> usize {
    5
}
fn default_true() -> bool {
    true
}

/// Delay specification for the arm set: either one entry per arm or a
/// family with a parameter list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DelaySpec {
    PerArm(Vec<DelayDist>),
    Family(DelayFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DelayFamily {
    Geometric { means: Vec<f64> },
    Pareto { minima: Vec<f64>, shape: f64 },
}

impl DelaySpec {
    pub fn dists(&self) -> Vec<DelayDist> {
        match self {
            DelaySpec::PerArm(v) => v.clone(),
            DelaySpec::Family(DelayFamily::Geometric { means }) => {
                means.iter().map(|&mean| DelayDist::Geometric { mean }).collect()
            }
            DelaySpec::Family(DelayFamily::Pareto { minima, shape }) => minima
                .iter()
                .map(|&x_min| DelayDist::Pareto { x_min, shape: *shape })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    /// Context distribution; its length fixes the number of contexts.
    pub pi: Vec<f64>,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub delays: DelaySpec,
    /// Per-arm costs; defaults to one for every arm.
    #[serde(default)]
    pub costs: Option<Vec<f64>>,
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    pub budget: f64,
    pub horizon: usize,
    /// Require every arm's mean delay to be at most `budget / 4`.
    #[serde(default = "default_true")]
    pub enforce_delay_bound: bool,
    /// Seed for the generated features and context parameters; defaults to
    /// the experiment's base seed.
    #[serde(default)]
    pub world_seed: Option<u64>,
    /// Explicit arm features (one row per arm), overriding generation.
    #[serde(default)]
    pub features: Option<Vec<Vec<f64>>>,
    /// Explicit context parameters (one row per context).
    #[serde(default)]
    pub thetas: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Largest delay whose reward counts toward cumulative reward and regret.
    #[serde(default = "default_window")]
    pub reward_window: f64,
    /// Round spacing of the rows in `curves.csv`; the last round is always
    /// included.
    #[serde(default = "default_stride")]
    pub curve_stride: usize,
    #[serde(default = "default_true")]
    pub diagnostics: bool,
    #[serde(default = "default_diag_stride")]
    pub diag_stride: usize,
    pub env: EnvConfig,
    pub policies: Vec<PolicyConfig>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.scenario.is_empty() || self.scenario.contains(['/', '\\']) {
            return bad(format!("scenario: invalid name {:?}", self.scenario));
        }
        if self.replications == 0 {
            return bad("replications: must be >= 1".into());
        }
        if self.curve_stride == 0 || self.diag_stride == 0 {
            return bad("curve_stride and diag_stride: must be >= 1".into());
        }
        if !(self.reward_window >= 0.0) {
            return bad(format!("reward_window: must be >= 0, got {}", self.reward_window));
        }
        if self.policies.is_empty() {
            return bad("policies: at least one policy required".into());
        }
        let env = self.build_env().map_err(|e| Error::Config(format!("env: {e}")))?;
        let mut labels = std::collections::HashSet::new();
        for p in &self.policies {
            p.validate(&env)?;
            if !labels.insert(p.label()) {
                return bad(format!("policies: duplicate label {:?}", p.label()));
            }
        }
        Ok(())
    }

    pub fn world_seed(&self) -> u64 {
        self.env.world_seed.unwrap_or(self.base_seed)
    }

    /// Builds the simulated world shared by every replication.
    pub fn build_env(&self) -> Result<EnvModel> {
        let e = &self.env;
        let delays = e.delays.dists();
        let num_arms = delays.len();
        let num_contexts = e.pi.len();
        if num_arms == 0 || num_contexts == 0 {
            return Err(Error::InvalidModel("need at least one arm and one context".into()));
        }
        let (generated_f, generated_t, _) = generate_linear_world(num_contexts, num_arms, e.dim, self.world_seed());
        let features = e.features.clone().unwrap_or(generated_f);
        let thetas = e.thetas.clone().unwrap_or(generated_t);
        if features.len() != num_arms {
            return Err(Error::DimensionMismatch {
                expected: num_arms,
                got: features.len(),
            });
        }
        let costs = e.costs.clone().unwrap_or_else(|| vec![1.0; num_arms]);
        if costs.len() != num_arms {
            return Err(Error::DimensionMismatch {
                expected: num_arms,
                got: costs.len(),
            });
        }
        let arms = features
            .into_iter()
            .zip(delays)
            .zip(costs)
            .enumerate()
            .map(|(id, ((features, delay), cost))| ArmSpec {
                id,
                features,
                cost,
                delay,
            })
            .collect();
        if e.enforce_delay_bound {
            EnvModel::new(e.pi.clone(), thetas, arms, e.noise_sigma, e.horizon, e.budget)
        } else {
            EnvModel::new_relaxed(e.pi.clone(), thetas, arms, e.noise_sigma, e.horizon, e.budget)
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Loads a built-in preset by name or a TOML file by path.
pub fn resolve(name_or_path: &str) -> Result<ExperimentConfig> {
    match preset(name_or_path) {
        Some(cfg) => Ok(cfg),
        None => load_config(Path::new(name_or_path)),
    }
}

pub const GEOMETRIC_SIMILAR: [f64; 10] = [100.0, 110.0, 120.0, 130.0, 140.0, 150.0, 160.0, 170.0, 180.0, 190.0];
pub const GEOMETRIC_DIVERSE: [f64; 10] = [100.0, 120.0, 140.0, 160.0, 200.0, 220.0, 240.0, 260.0, 280.0, 300.0];
pub const PARETO_SIMILAR: [f64; 10] = GEOMETRIC_SIMILAR;
pub const PARETO_DIVERSE: [f64; 10] = [200.0, 220.0, 240.0, 260.0, 280.0, 320.0, 340.0, 360.0, 380.0, 400.0];
pub const PARETO_SHAPE: f64 = 2.0;

const FULL_BUDGET: f64 = 85_000.0;
const FULL_HORIZON: usize = 100_000;
const SMALL_BUDGET: f64 = 2_000.0;
const SMALL_HORIZON: usize = 2_500;
const SMALL_REPS: usize = 5;

pub const PRESET_NAMES: [&str; 8] = [
    "similar-delays-geometric",
    "similar-delays-pareto",
    "diverse-delays-geometric",
    "diverse-delays-pareto",
    "similar-delays-geometric-small",
    "similar-delays-pareto-small",
    "diverse-delays-geometric-small",
    "diverse-delays-pareto-small",
];

pub fn default_policies() -> Vec<PolicyConfig> {
    let mut doral = PolicyConfig::new(PolicyKind::Doral);
    doral.target_arms = Some(5);
    vec![
        doral,
        PolicyConfig::new(PolicyKind::DLinUcb),
        PolicyConfig::new(PolicyKind::Random),
        PolicyConfig::new(PolicyKind::Dalp),
    ]
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let (base, small) = match name.strip_suffix("-small") {
        Some(b) => (b, true),
        None => (name, false),
    };
    let delays = match base {
        "similar-delays-geometric" => DelayFamily::Geometric {
            means: GEOMETRIC_SIMILAR.to_vec(),
        },
        "diverse-delays-geometric" => DelayFamily::Geometric {
            means: GEOMETRIC_DIVERSE.to_vec(),
        },
        "similar-delays-pareto" => DelayFamily::Pareto {
            minima: PARETO_SIMILAR.to_vec(),
            shape: PARETO_SHAPE,
        },
        "diverse-delays-pareto" => DelayFamily::Pareto {
            minima: PARETO_DIVERSE.to_vec(),
            shape: PARETO_SHAPE,
        },
        _ => return None,
    };
    let (budget, horizon, replications) = if small {
        (SMALL_BUDGET, SMALL_HORIZON, SMALL_REPS)
    } else {
        (FULL_BUDGET, FULL_HORIZON, default_reps())
    };
    Some(ExperimentConfig {
        scenario: name.to_string(),
        replications,
        base_seed: default_seed(),
        output_dir: default_out(),
        reward_window: default_window(),
        curve_stride: if small { 10 } else { default_stride() },
        diagnostics: true,
        diag_stride: if small { 50 } else { default_diag_stride() },
        env: EnvConfig {
            pi: REFERENCE_PI.to_vec(),
            dim: default_dim(),
            delays: DelaySpec::Family(delays),
            costs: None,
            noise_sigma: default_noise(),
            budget,
            horizon,
            enforce_delay_bound: !small,
            world_seed: None,
            features: None,
            thetas: None,
        },
        policies: default_policies(),
    })
}
