//! The four agents and their shared round loop, plus regret accounting.
//!
//! Every run walks rounds `0..T`. A round first releases feedback that has
//! arrived, then observes a context, decides, and pays. Rewards count toward
//! the cumulative total when they arrive, provided their delay is within the
//! evaluation window. Runs continue to the horizon after the budget is gone
//! so late feedback is still collected.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::{adaptive_ratio, best_delayed_arm, solve_lp, RatioMode};
use crate::env::{EnvModel, PendingFeedback, World};
use crate::error::{Error, Result};
use crate::estimators::{DelayStats, RadiusMode};
use crate::identify::{run_race, AcceptanceRule, CutoffScope, RaceConfig, RaceEnv, RaceTraceRow};
use crate::linear::ContextRegressor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Doral,
    #[serde(rename = "d-linucb")]
    DLinUcb,
    Random,
    #[serde(rename = "d-alp")]
    Dalp,
}

impl PolicyKind {
    pub fn label(self) -> &'static str {
        match self {
            PolicyKind::Doral => "DORAL",
            PolicyKind::DLinUcb => "D-LinUCB",
            PolicyKind::Random => "Random",
            PolicyKind::Dalp => "D-ALP",
        }
    }
}

/// Source of the per-arm return probabilities `tau_a(m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauMode {
    /// Exact CDF of the simulated delay distribution.
    #[default]
    Given,
    /// Fraction of identification pulls returned within `m`.
    Estimated,
    /// Every arm treated as always responsive.
    Unit,
}

fn default_delta() -> f64 {
    0.05
}
fn default_alpha() -> f64 {
    1.0
}
fn default_lambda() -> f64 {
    1.0
}
fn default_id_fraction() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Display name; defaults to the kind's label.
    #[serde(default)]
    pub name: Option<String>,
    /// Fixed learning cut-off. Baselines default to 500; DORAL learns it
    /// unless this is set.
    #[serde(default)]
    pub cutoff: Option<f64>,
    /// Number of responsive arms DORAL identifies.
    #[serde(default)]
    pub target_arms: Option<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub tau_mode: TauMode,
    #[serde(default)]
    pub ratio_mode: RatioMode,
    #[serde(default)]
    pub radius_mode: RadiusMode,
    #[serde(default)]
    pub acceptance_rule: AcceptanceRule,
    #[serde(default)]
    pub cutoff_scope: CutoffScope,
    /// Identification spend cap as a fraction of the budget.
    #[serde(default = "default_id_fraction")]
    pub id_budget_fraction: f64,
}

pub const BASELINE_CUTOFF: f64 = 500.0;

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            name: None,
            cutoff: None,
            target_arms: None,
            delta: default_delta(),
            alpha: default_alpha(),
            lambda: default_lambda(),
            tau_mode: TauMode::default(),
            ratio_mode: RatioMode::default(),
            radius_mode: RadiusMode::default(),
            acceptance_rule: AcceptanceRule::default(),
            cutoff_scope: CutoffScope::default(),
            id_budget_fraction: default_id_fraction(),
        }
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.label().to_string())
    }

    /// Cut-off used by the learner when it is not identified.
    pub fn fixed_cutoff(&self) -> f64 {
        self.cutoff.unwrap_or(BASELINE_CUTOFF)
    }

    pub fn target(&self, num_arms: usize) -> usize {
        self.target_arms.unwrap_or(num_arms.div_ceil(2))
    }

    pub fn validate(&self, env: &EnvModel) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("policy {}: {msg}", self.label())));
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0,1), got {}", self.delta));
        }
        if !(self.alpha > 0.0) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if let Some(m) = self.cutoff {
            if !(m >= 0.0) {
                return bad(format!("cutoff must be >= 0, got {m}"));
            }
        }
        if !(self.id_budget_fraction > 0.0 && self.id_budget_fraction <= 1.0) {
            return bad(format!(
                "id_budget_fraction must lie in (0,1], got {}",
                self.id_budget_fraction
            ));
        }
        if self.kind == PolicyKind::Doral {
            let a = self.target(env.num_arms());
            if a == 0 || a > env.num_arms() {
                return bad(format!("target_arms must lie in 1..={}, got {a}", env.num_arms()));
            }
        }
        if matches!(self.kind, PolicyKind::Doral | PolicyKind::Dalp) && env.arms().iter().any(|a| a.cost != 1.0) {
            return bad("the allocation LP assumes unit arm costs".into());
        }
        Ok(())
    }
}

/// Harness-level options shared by every policy in an experiment.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Largest delay whose reward counts toward the cumulative total. The
    /// hindsight oracle uses the same window.
    pub reward_window: f64,
    pub diagnostics: bool,
    pub diag_stride: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            reward_window: BASELINE_CUTOFF,
            diagnostics: false,
            diag_stride: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub context: usize,
    pub action: Option<usize>,
    pub spend: f64,
    pub cum_reward: f64,
    pub cum_regret: f64,
    pub remaining: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Summary {
    pub accepted: Vec<usize>,
    pub cutoff: f64,
    pub spend: f64,
    pub rounds: usize,
}

/// One diagnostic value; written in long format to the diagnostics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRow {
    pub round: usize,
    pub source: &'static str,
    pub context: Option<usize>,
    pub arm: Option<usize>,
    pub key: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub kind: PolicyKind,
    pub label: String,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
    pub stage1: Option<Stage1Summary>,
    pub cutoff: f64,
    pub diagnostics: Vec<DiagRow>,
}

impl RunMetrics {
    pub fn rounds(&self) -> usize {
        self.records.len()
    }

    pub fn final_reward(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_reward)
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn total_spend(&self) -> f64 {
        self.records.iter().map(|r| r.spend).sum()
    }

    pub fn pulls(&self) -> usize {
        self.records.iter().filter(|r| r.action.is_some()).count()
    }

    pub fn actions(&self) -> Vec<Option<usize>> {
        self.records.iter().map(|r| r.action).collect()
    }
}

/// A run that stopped early, with the metrics gathered up to that point.
#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: Error,
    pub partial: RunMetrics,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} rounds)", self.error, self.partial.rounds())
    }
}

impl std::error::Error for RunFailure {}

pub type RunResult = std::result::Result<RunMetrics, Box<RunFailure>>;

/// Per-round hindsight payoff `max_a tau_a(w) <theta_j, f_a>` and the expected
/// payoff of the chosen action, with `w = min(window, T - 1 - t)`.
pub fn round_payoffs(env: &EnvModel, t: usize, context: usize, action: Option<usize>, window: f64) -> (f64, f64) {
    let w = window.min(env.horizon().saturating_sub(t + 1) as f64);
    let value = |a: usize| env.true_tau(a, w) * env.expected_reward(context, a);
    let oracle = (0..env.num_arms()).map(value).fold(0.0, f64::max);
    (oracle, action.map_or(0.0, value))
}

/// Cumulative regret of a trace against the per-round hindsight oracle.
pub fn oracle_and_regret(env: &EnvModel, records: &[RoundRecord], window: f64) -> Vec<f64> {
    let mut cum = 0.0;
    records
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let (oracle, got) = round_payoffs(env, t, r.context, r.action, window);
            cum += oracle - got;
            cum
        })
        .collect()
}

struct Learner {
    regs: Vec<ContextRegressor>,
    cutoff: f64,
    delta: f64,
    cache: Vec<Option<Vec<f64>>>,
}

impl Learner {
    fn new(env: &EnvModel, lambda: f64, delta: f64, cutoff: f64) -> Result<Self> {
        let regs = (0..env.num_contexts())
            .map(|j| ContextRegressor::new(j, env.dim(), lambda, cutoff))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cache: vec![None; regs.len()],
            regs,
            cutoff,
            delta,
        })
    }

    fn record_pull(&mut self, env: &EnvModel, round: usize, context: usize, arm: usize) -> Result<()> {
        self.regs[context].record_pull(round, arm, &env.arms()[arm].features)?;
        self.cache[context] = None;
        Ok(())
    }

    fn ingest(&mut self, env: &EnvModel, rec: &PendingFeedback) -> Result<()> {
        let within = (rec.delay as f64) <= self.cutoff;
        if within && rec.reward != 0.0 {
            self.cache[rec.context] = None;
        }
        self.regs[rec.context].record_feedback(&env.arms()[rec.arm].features, rec.reward, within)
    }

    fn advance(&mut self, round: usize) {
        for (reg, cache) in self.regs.iter_mut().zip(self.cache.iter_mut()) {
            let before = reg.window_len();
            reg.advance(round);
            if reg.window_len() != before {
                *cache = None;
            }
        }
    }

    /// Delayed LinUCB index of every arm under `context`.
    fn indices(&mut self, env: &EnvModel, context: usize) -> &[f64] {
        if self.cache[context].is_none() {
            let feats: Vec<&[f64]> = env.arms().iter().map(|a| a.features.as_slice()).collect();
            let idx = self.regs[context]
                .indices(&feats, self.delta)
                .expect("dimensions validated with the model");
            self.cache[context] = Some(idx);
        }
        self.cache[context].as_deref().expect("filled above")
    }
}

fn argmax(values: &[f64], candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    for &a in &candidates[1..] {
        if values[a] > values[best] {
            best = a;
        }
    }
    best
}

struct Runner<'a> {
    env: &'a EnvModel,
    world: World<'a>,
    opts: RunOptions,
    t: usize,
    cum_reward: f64,
    records: Vec<RoundRecord>,
    diagnostics: Vec<DiagRow>,
    learner: Option<Learner>,
    // identification stage bookkeeping
    stage1_returns: Vec<PendingFeedback>,
    race_stats: Option<Vec<DelayStats>>,
    stage2_start: usize,
}

impl<'a> Runner<'a> {
    fn new(env: &'a EnvModel, seed: u64, opts: RunOptions) -> Self {
        Self {
            env,
            world: World::new(env, seed),
            opts,
            t: 0,
            cum_reward: 0.0,
            records: Vec::with_capacity(env.horizon()),
            diagnostics: Vec::new(),
            learner: None,
            stage1_returns: Vec::new(),
            race_stats: None,
            stage2_start: 0,
        }
    }

    fn done(&self) -> bool {
        self.t >= self.env.horizon()
    }

    fn diag_due(&self) -> bool {
        self.opts.diagnostics && self.t.is_multiple_of(self.opts.diag_stride.max(1))
    }

    fn diag(
        &mut self,
        source: &'static str,
        context: Option<usize>,
        arm: Option<usize>,
        key: &'static str,
        value: f64,
    ) {
        self.diagnostics.push(DiagRow {
            round: self.t,
            source,
            context,
            arm,
            key,
            value,
        });
    }

    /// Releases feedback due this round and returns it.
    fn begin_round(&mut self) -> Result<Vec<PendingFeedback>> {
        let arrivals = self.world.pop_due(self.t);
        for rec in &arrivals {
            if (rec.delay as f64) <= self.opts.reward_window {
                self.cum_reward += rec.reward;
            }
            if let Some(learner) = self.learner.as_mut() {
                learner.ingest(self.env, rec)?;
            }
            if rec.decision_round < self.stage2_start {
                if let Some(stats) = self.race_stats.as_mut() {
                    stats[rec.arm].record_return(rec.decision_round, rec.delay as f64);
                }
            }
        }
        if let Some(learner) = self.learner.as_mut() {
            learner.advance(self.t);
        }
        Ok(arrivals)
    }

    fn finish_round(&mut self, context: usize, action: Option<usize>) -> Result<()> {
        let spend = self.world.step(self.t, context, action)?;
        if let (Some(arm), Some(learner)) = (action, self.learner.as_mut()) {
            learner.record_pull(self.env, self.t, context, arm)?;
        }
        self.records.push(RoundRecord {
            context,
            action,
            spend,
            cum_reward: self.cum_reward,
            cum_regret: 0.0,
            remaining: self.world.remaining(),
        });
        self.t += 1;
        Ok(())
    }

    fn affordable(&self, arms: &[usize]) -> bool {
        arms.iter().any(|&a| self.world.can_afford(a))
    }

    fn finish(
        mut self,
        kind: PolicyKind,
        label: String,
        seed: u64,
        stage1: Option<Stage1Summary>,
        cutoff: f64,
    ) -> RunMetrics {
        let regret = oracle_and_regret(self.env, &self.records, self.opts.reward_window);
        for (r, g) in self.records.iter_mut().zip(regret) {
            r.cum_regret = g;
        }
        RunMetrics {
            kind,
            label,
            seed,
            records: self.records,
            stage1,
            cutoff,
            diagnostics: self.diagnostics,
        }
    }
}

impl RaceEnv for Runner<'_> {
    fn round(&self) -> usize {
        self.t
    }

    fn cost(&self, arm: usize) -> f64 {
        self.env.arms()[arm].cost
    }

    fn remaining_budget(&self) -> f64 {
        self.world.remaining()
    }

    fn rounds_left(&self) -> usize {
        self.env.horizon().saturating_sub(self.t)
    }

    fn pull(&mut self, arm: usize) -> Result<Vec<(usize, usize, usize)>> {
        let arrivals = self.begin_round()?;
        let context = self.world.sample_context();
        // keep the policy stream aligned with the allocation stage
        let _: f64 = self.world.rngs.policy.random();
        self.finish_round(context, Some(arm))?;
        let out = arrivals.iter().map(|r| (r.arm, r.decision_round, r.delay)).collect();
        self.stage1_returns.extend(arrivals);
        Ok(out)
    }
}

fn race_diagnostics(trace: &[RaceTraceRow]) -> Vec<DiagRow> {
    let mut out = Vec::with_capacity(trace.len() * 6);
    for row in trace {
        let mut push = |key: &'static str, value: f64| {
            out.push(DiagRow {
                round: row.round,
                source: "identify",
                context: None,
                arm: Some(row.arm),
                key,
                value,
            })
        };
        push("pulled", if row.pulled { 1.0 } else { 0.0 });
        push("returned", row.returned as f64);
        push("d_m", row.d_m);
        push("lcb", row.lcb);
        push("ucb", row.ucb);
        push("decision", row.decision.code());
    }
    out
}

/// Allocation stage shared by DORAL and D-ALP: per-round LP over contexts
/// scored by `tau_a * index`, acting on the observed context with the LP's
/// serving probability.
fn allocation_stage(
    runner: &mut Runner<'_>,
    arms: &[usize],
    taus: &mut [f64],
    cfg: &PolicyConfig,
    cutoff: f64,
) -> Result<()> {
    let env = runner.env;
    let horizon = env.horizon();
    let num_contexts = env.num_contexts();
    let mut eta = vec![0.0; num_contexts];
    let mut best = vec![arms[0]; num_contexts];
    let mut taus_resolved = cfg.tau_mode != TauMode::Estimated;
    while !runner.done() {
        runner.begin_round()?;
        if !taus_resolved {
            let stats = runner.race_stats.as_ref().expect("race statistics kept");
            for &a in arms {
                if let Ok(tau) = stats[a].estimate_tau_resolved(cutoff, runner.t) {
                    taus[a] = tau;
                }
            }
            taus_resolved = arms.iter().all(|&a| stats[a].is_resolved(cutoff, runner.t));
        }
        let context = runner.world.sample_context();
        let u: f64 = runner.world.rngs.policy.random();
        let mut action = None;
        if runner.affordable(arms) {
            let learner = runner.learner.as_mut().expect("learner present");
            for c in 0..num_contexts {
                let scores = learner.indices(env, c);
                let (a, v) = best_delayed_arm(arms, scores, taus)?;
                best[c] = a;
                eta[c] = v.max(0.0);
            }
            let rho = adaptive_ratio(runner.world.remaining(), runner.t, horizon, cfg.ratio_mode);
            let sol = solve_lp(env.pi(), &eta, rho)?;
            if u < sol.p[context] && runner.world.can_afford(best[context]) {
                action = Some(best[context]);
            }
            if runner.diag_due() {
                runner.diag("allocation", None, None, "rho", rho);
                runner.diag("allocation", None, None, "threshold", sol.threshold as f64);
                for c in 0..num_contexts {
                    runner.diag("allocation", Some(c), None, "p", sol.p[c]);
                }
                runner.diag(
                    "allocation",
                    Some(context),
                    action,
                    "action",
                    action.map_or(-1.0, |a| a as f64),
                );
                linear_diagnostics(runner, context, action);
            }
        }
        runner.finish_round(context, action)?;
    }
    Ok(())
}

fn linear_diagnostics(runner: &mut Runner<'_>, context: usize, action: Option<usize>) {
    let env = runner.env;
    let learner = runner.learner.as_mut().expect("learner present");
    let theta = learner.regs[context].theta_hat();
    let err = theta
        .iter()
        .zip(&env.thetas()[context])
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let chosen = action.map(|a| learner.indices(env, context)[a]);
    runner.diag("linear", Some(context), None, "theta_error", err);
    if let (Some(a), Some(v)) = (action, chosen) {
        runner.diag("linear", Some(context), Some(a), "index", v);
    }
}

fn failure(runner: Runner<'_>, cfg: &PolicyConfig, seed: u64, error: Error) -> Box<RunFailure> {
    let partial = runner.finish(cfg.kind, cfg.label(), seed, None, f64::NAN);
    Box::new(RunFailure { error, partial })
}

/// Two-stage DORAL: identify responsive arms and the cut-off, then allocate.
pub fn doral_run(env: &EnvModel, cfg: &PolicyConfig, seed: u64, opts: &RunOptions) -> RunResult {
    let mut runner = Runner::new(env, seed, opts.clone());
    let num_arms = env.num_arms();
    let target = cfg.target(num_arms);
    let skip_race = cfg.cutoff.is_some() && target == num_arms;

    let (accepted, cutoff, stage1) = if skip_race {
        ((0..num_arms).collect::<Vec<_>>(), cfg.fixed_cutoff(), None)
    } else {
        let race_cfg = RaceConfig {
            target,
            delta: cfg.delta,
            alpha: cfg.alpha,
            budget: env.budget(),
            spend_cap: cfg.id_budget_fraction * env.budget(),
            radius_mode: cfg.radius_mode,
            acceptance_rule: cfg.acceptance_rule,
            cutoff_scope: cfg.cutoff_scope,
        };
        let outcome = match run_race(&mut runner, num_arms, &race_cfg) {
            Ok(o) => o,
            Err(e) => return Err(failure(runner, cfg, seed, e)),
        };
        if opts.diagnostics {
            runner.diagnostics.extend(race_diagnostics(&outcome.trace));
        }
        let cutoff = cfg.cutoff.unwrap_or(outcome.cutoff);
        let summary = Stage1Summary {
            accepted: outcome.accepted.clone(),
            cutoff,
            spend: outcome.spend,
            rounds: outcome.rounds,
        };
        runner.race_stats = Some(outcome.stats);
        (outcome.accepted, cutoff, Some(summary))
    };
    runner.stage2_start = runner.t;

    let mut learner = match Learner::new(env, cfg.lambda, cfg.delta, cutoff) {
        Ok(l) => l,
        Err(e) => return Err(failure(runner, cfg, seed, e)),
    };
    // identification pulls warm-start the regressors
    for (t, r) in runner.records.iter().enumerate() {
        if let Some(a) = r.action {
            learner.record_pull(env, t, r.context, a).expect("validated dimensions");
        }
    }
    for rec in &runner.stage1_returns {
        learner.ingest(env, rec).expect("validated dimensions");
    }
    learner.advance(runner.t);
    runner.learner = Some(learner);

    let mut cfg_eff = cfg.clone();
    if runner.race_stats.is_none() && cfg.tau_mode == TauMode::Estimated {
        cfg_eff.tau_mode = TauMode::Unit;
    }
    let mut taus: Vec<f64> = (0..num_arms)
        .map(|a| match cfg_eff.tau_mode {
            TauMode::Given => env.true_tau(a, cutoff),
            TauMode::Unit | TauMode::Estimated => 1.0,
        })
        .collect();
    if let Err(e) = allocation_stage(&mut runner, &accepted, &mut taus, &cfg_eff, cutoff) {
        return Err(failure(runner, cfg, seed, e));
    }
    Ok(runner.finish(cfg.kind, cfg.label(), seed, stage1, cutoff))
}

/// Allocation stage over all arms with every `tau` fixed at one.
pub fn dalp_run(env: &EnvModel, cfg: &PolicyConfig, seed: u64, opts: &RunOptions) -> RunResult {
    let mut runner = Runner::new(env, seed, opts.clone());
    let cutoff = cfg.fixed_cutoff();
    let learner = match Learner::new(env, cfg.lambda, cfg.delta, cutoff) {
        Ok(l) => l,
        Err(e) => return Err(failure(runner, cfg, seed, e)),
    };
    runner.learner = Some(learner);
    let arms: Vec<usize> = (0..env.num_arms()).collect();
    let mut taus = vec![1.0; env.num_arms()];
    let mut cfg_eff = cfg.clone();
    cfg_eff.tau_mode = TauMode::Unit;
    if let Err(e) = allocation_stage(&mut runner, &arms, &mut taus, &cfg_eff, cutoff) {
        return Err(failure(runner, cfg, seed, e));
    }
    Ok(runner.finish(cfg.kind, cfg.label(), seed, None, cutoff))
}

fn linucb_loop(runner: &mut Runner<'_>, random_gate: bool) -> Result<()> {
    let env = runner.env;
    let arms: Vec<usize> = (0..env.num_arms()).collect();
    let budget = env.budget();
    while !runner.done() {
        runner.begin_round()?;
        let context = runner.world.sample_context();
        let u: f64 = runner.world.rngs.policy.random();
        let mut action = None;
        let gate = !random_gate || u < runner.world.remaining() / budget;
        if gate && runner.affordable(&arms) {
            let learner = runner.learner.as_mut().expect("learner present");
            let scores = learner.indices(env, context);
            let affordable: Vec<usize> = arms.iter().copied().filter(|&a| runner.world.can_afford(a)).collect();
            action = Some(argmax(scores, &affordable));
        }
        if runner.diag_due() {
            linear_diagnostics(runner, context, action);
        }
        runner.finish_round(context, action)?;
    }
    Ok(())
}

fn linucb_run(env: &EnvModel, cfg: &PolicyConfig, seed: u64, opts: &RunOptions, random_gate: bool) -> RunResult {
    let mut runner = Runner::new(env, seed, opts.clone());
    let cutoff = cfg.fixed_cutoff();
    match Learner::new(env, cfg.lambda, cfg.delta, cutoff) {
        Ok(l) => runner.learner = Some(l),
        Err(e) => return Err(failure(runner, cfg, seed, e)),
    }
    if let Err(e) = linucb_loop(&mut runner, random_gate) {
        return Err(failure(runner, cfg, seed, e));
    }
    Ok(runner.finish(cfg.kind, cfg.label(), seed, None, cutoff))
}

/// Greedy delayed LinUCB over every arm until the budget runs out.
pub fn dlinucb_run(env: &EnvModel, cfg: &PolicyConfig, seed: u64, opts: &RunOptions) -> RunResult {
    linucb_run(env, cfg, seed, opts, false)
}

/// Delayed LinUCB acting with probability `b_t / B`.
pub fn random_run(env: &EnvModel, cfg: &PolicyConfig, seed: u64, opts: &RunOptions) -> RunResult {
    linucb_run(env, cfg, seed, opts, true)
}

pub fn run_policy(env: &EnvModel, cfg: &PolicyConfig, seed: u64, opts: &RunOptions) -> RunResult {
    if let Err(e) = cfg.validate(env) {
        let runner = Runner::new(env, seed, opts.clone());
        return Err(failure(runner, cfg, seed, e));
    }
    match cfg.kind {
        PolicyKind::Doral => doral_run(env, cfg, seed, opts),
        PolicyKind::DLinUcb => dlinucb_run(env, cfg, seed, opts),
        PolicyKind::Random => random_run(env, cfg, seed, opts),
        PolicyKind::Dalp => dalp_run(env, cfg, seed, opts),
    }
}
