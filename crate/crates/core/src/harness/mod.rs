//! Seeded experiments: replications, aggregation, CSV and chart output.

mod config;
mod output;
mod plot;

pub use config::{
    default_policies, load_config, preset, resolve, DelayFamily, DelaySpec, EnvConfig, ExperimentConfig, PRESET_NAMES,
    REFERENCE_PI,
};
pub use output::{curve_rounds, emit_csv, CsvPaths};
pub use plot::{render_plots, series_points, PlotFormat};

use rayon::prelude::*;

use crate::error::Result;
use crate::policies::{run_policy, PolicyConfig, RunFailure, RunMetrics, RunOptions};

/// Outcome of one policy replication.
#[derive(Debug)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub result: std::result::Result<RunMetrics, Box<RunFailure>>,
}

impl Replication {
    pub fn metrics(&self) -> &RunMetrics {
        match &self.result {
            Ok(m) => m,
            Err(f) => &f.partial,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.result.is_ok()
    }
}

/// Per-round mean curves over every replication of one policy. A run that
/// stopped early contributes its partial trace, held at its final value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Curve {
    pub mean_reward: Vec<f64>,
    pub stderr_reward: Vec<f64>,
    pub mean_regret: Vec<f64>,
    pub runs: usize,
    pub failed: usize,
}

impl Curve {
    pub fn rounds(&self) -> usize {
        self.mean_reward.len()
    }

    pub fn final_reward(&self) -> f64 {
        self.mean_reward.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug)]
pub struct PolicyResult {
    pub config: PolicyConfig,
    pub label: String,
    pub replications: Vec<Replication>,
    pub curve: Curve,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub scenario: String,
    pub config: ExperimentConfig,
    pub policies: Vec<PolicyResult>,
}

/// Element-wise mean and standard error of the sample mean. Shorter series
/// are padded with their final value.
pub fn aggregate(series: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = series.len();
    let len = series.iter().map(Vec::len).max().unwrap_or(0);
    let mut mean = vec![0.0; len];
    let mut stderr = vec![0.0; len];
    if n == 0 {
        return (mean, stderr);
    }
    let at = |s: &Vec<f64>, t: usize| s.get(t).or(s.last()).copied().unwrap_or(0.0);
    for t in 0..len {
        let m = series.iter().map(|s| at(s, t)).sum::<f64>() / n as f64;
        mean[t] = m;
        if n > 1 {
            let var = series.iter().map(|s| (at(s, t) - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            stderr[t] = (var / n as f64).sqrt();
        }
    }
    (mean, stderr)
}

fn curve_of(reps: &[Replication]) -> Curve {
    let all: Vec<&RunMetrics> = reps.iter().map(Replication::metrics).collect();
    let rewards: Vec<Vec<f64>> = all
        .iter()
        .map(|m| m.records.iter().map(|r| r.cum_reward).collect())
        .collect();
    let regrets: Vec<Vec<f64>> = all
        .iter()
        .map(|m| m.records.iter().map(|r| r.cum_regret).collect())
        .collect();
    let (mean_reward, stderr_reward) = aggregate(&rewards);
    let (mean_regret, _) = aggregate(&regrets);
    Curve {
        mean_reward,
        stderr_reward,
        mean_regret,
        runs: all.len(),
        failed: reps.iter().filter(|r| !r.is_ok()).count(),
    }
}

/// Runs every policy for every replication. Replication `r` uses seed
/// `base_seed + r`; results are reduced in replication order.
pub fn run_experiment(cfg: &ExperimentConfig, progress: Option<&(dyn Fn(&str) + Sync)>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let env = cfg.build_env()?;
    let mut policies = Vec::with_capacity(cfg.policies.len());
    for (k, pcfg) in cfg.policies.iter().enumerate() {
        let opts = RunOptions {
            reward_window: cfg.reward_window,
            diagnostics: cfg.diagnostics,
            diag_stride: cfg.diag_stride,
        };
        let replications: Vec<Replication> = (0..cfg.replications)
            .into_par_iter()
            .map(|index| {
                let seed = cfg.base_seed.wrapping_add(index as u64);
                let opts = RunOptions {
                    diagnostics: opts.diagnostics && index == 0,
                    ..opts.clone()
                };
                let result = run_policy(&env, pcfg, seed, &opts);
                if let Some(p) = progress {
                    let status = match &result {
                        Ok(m) => format!("final reward {:.2}", m.final_reward()),
                        Err(f) => format!("failed: {f}"),
                    };
                    p(&format!(
                        "[{}] {} replication {index}: {status}",
                        cfg.scenario,
                        pcfg.label()
                    ));
                }
                Replication { index, seed, result }
            })
            .collect();
        let curve = curve_of(&replications);
        if let Some(p) = progress {
            p(&format!(
                "[{}] policy {}/{} {} done: mean final reward {:.2} over {} runs ({} failed)",
                cfg.scenario,
                k + 1,
                cfg.policies.len(),
                pcfg.label(),
                curve.final_reward(),
                curve.runs,
                curve.failed
            ));
        }
        policies.push(PolicyResult {
            config: pcfg.clone(),
            label: pcfg.label(),
            replications,
            curve,
        });
    }
    Ok(ExperimentResult {
        scenario: cfg.scenario.clone(),
        config: cfg.clone(),
        policies,
    })
}
