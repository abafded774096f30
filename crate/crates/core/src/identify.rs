//! Patient racing on mean delay: pull every undecided arm once per race
//! round, then accept arms that are confidently among the most responsive
//! and reject arms that are confidently outside that set. Arms whose
//! feedback has not yet filled the median-of-means baskets are left alone
//! until it does.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{DelayStats, RadiusMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceRule {
    /// Accept confidently faster arms, reject confidently slower ones.
    #[default]
    Responsive,
    /// Accept an arm whose LCB exceeds more than `A' - |S|` UCBs; never reject.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffScope {
    /// Largest final UCB among accepted arms.
    #[default]
    Accepted,
    /// Largest final UCB among all arms.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Pending,
    Accepted,
    Rejected,
}

impl Decision {
    pub fn code(self) -> f64 {
        match self {
            Decision::Pending => 0.0,
            Decision::Accepted => 1.0,
            Decision::Rejected => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RaceConfig {
    pub target: usize,
    pub delta: f64,
    pub alpha: f64,
    /// Budget entering the confidence radius.
    pub budget: f64,
    /// Hard limit on identification spend.
    pub spend_cap: f64,
    pub radius_mode: RadiusMode,
    pub acceptance_rule: AcceptanceRule,
    pub cutoff_scope: CutoffScope,
}

/// Environment access needed by the race. Each call to `pull` consumes one
/// decision round and returns `(arm, pull round, delay)` for every feedback
/// that arrived during it.
pub trait RaceEnv {
    fn round(&self) -> usize;
    fn cost(&self, arm: usize) -> f64;
    fn remaining_budget(&self) -> f64;
    fn rounds_left(&self) -> usize;
    fn pull(&mut self, arm: usize) -> Result<Vec<(usize, usize, usize)>>;
}

/// One line of the identification trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceTraceRow {
    pub round: usize,
    pub arm: usize,
    pub pulled: bool,
    pub returned: usize,
    pub d_m: f64,
    pub lcb: f64,
    pub ucb: f64,
    pub decision: Decision,
}

#[derive(Debug, Clone)]
pub struct RaceState {
    pub accepted: Vec<usize>,
    pub remaining: Vec<usize>,
    pub rejected: Vec<usize>,
    pub stats: Vec<DelayStats>,
    pub target: usize,
    pub spend: f64,
    pub trace: Vec<RaceTraceRow>,
}

#[derive(Debug, Clone)]
pub struct RaceOutcome {
    pub accepted: Vec<usize>,
    pub cutoff: f64,
    pub spend: f64,
    pub rounds: usize,
    pub stats: Vec<DelayStats>,
    pub trace: Vec<RaceTraceRow>,
}

/// Bounds `(lcb, ucb)` for one arm; `None` is the uninformative `(0, inf)`.
pub type Interval = Option<(f64, f64)>;

/// Decides which remaining arms to accept and reject given their current
/// intervals and the number of open slots. Indices refer to `bounds`.
pub fn decide(bounds: &[Interval], slots: usize, rule: AcceptanceRule) -> (Vec<usize>, Vec<usize>) {
    let n = bounds.len();
    let lcb = |i: usize| bounds[i].map_or(0.0, |b| b.0);
    let ucb = |i: usize| bounds[i].map_or(f64::INFINITY, |b| b.1);
    let mut accept = Vec::new();
    let mut reject = Vec::new();
    for a in 0..n {
        if bounds[a].is_none() {
            continue;
        }
        let others = (0..n).filter(|&b| b != a);
        match rule {
            AcceptanceRule::Responsive => {
                let faster_than = others.clone().filter(|&b| ucb(a) < lcb(b)).count();
                let slower_than = others.filter(|&b| lcb(a) > ucb(b)).count();
                if faster_than >= n.saturating_sub(slots) {
                    accept.push(a);
                } else if slower_than >= slots {
                    reject.push(a);
                }
            }
            AcceptanceRule::AsPrinted => {
                let above = others.filter(|&b| lcb(a) > ucb(b)).count();
                if above > slots {
                    accept.push(a);
                }
            }
        }
    }
    if accept.len() > slots {
        match rule {
            AcceptanceRule::Responsive => accept.sort_by(|&x, &y| ucb(x).total_cmp(&ucb(y))),
            AcceptanceRule::AsPrinted => accept.sort_by(|&x, &y| lcb(y).total_cmp(&lcb(x))),
        }
        accept.truncate(slots);
        accept.sort_unstable();
    }
    (accept, reject)
}

impl RaceState {
    pub fn new(num_arms: usize, cfg: &RaceConfig) -> Self {
        Self {
            accepted: Vec::new(),
            remaining: (0..num_arms).collect(),
            rejected: Vec::new(),
            stats: (0..num_arms)
                .map(|a| DelayStats::new(a, cfg.alpha, cfg.delta, cfg.budget, cfg.radius_mode))
                .collect(),
            target: cfg.target,
            spend: 0.0,
            trace: Vec::new(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.accepted.len() >= self.target
    }

    fn ingest(&mut self, arrivals: Vec<(usize, usize, usize)>) {
        for (arm, pull_round, delay) in arrivals {
            self.stats[arm].record_return(pull_round, delay as f64);
        }
    }

    fn failure(&self) -> Error {
        Error::IdentificationFailed {
            accepted: self.accepted.clone(),
            target: self.target,
            spent: self.spend,
        }
    }

    /// One race round: pull each remaining arm once, then update decisions.
    pub fn race_round<E: RaceEnv>(&mut self, env: &mut E, cfg: &RaceConfig) -> Result<()> {
        let round_cost: f64 = self.remaining.iter().map(|&a| env.cost(a)).sum();
        if self.spend + round_cost > cfg.spend_cap
            || round_cost > env.remaining_budget()
            || env.rounds_left() < self.remaining.len()
        {
            return Err(self.failure());
        }
        let pulled = self.remaining.clone();
        for &a in &pulled {
            let round = env.round();
            let arrivals = env.pull(a).map_err(|_| self.failure())?;
            self.stats[a].record_pull(round);
            self.spend += env.cost(a);
            self.ingest(arrivals);
        }

        let slots = self.target - self.accepted.len();
        let bounds: Vec<Interval> = self
            .remaining
            .iter()
            .map(|&a| self.stats[a].bounds().map(|(_, u, l)| (l, u)))
            .collect();
        let (acc, rej) = decide(&bounds, slots, cfg.acceptance_rule);
        let acc: Vec<usize> = acc.into_iter().map(|i| self.remaining[i]).collect();
        let rej: Vec<usize> = rej.into_iter().map(|i| self.remaining[i]).collect();
        self.remaining.retain(|a| !acc.contains(a) && !rej.contains(a));
        self.accepted.extend(&acc);
        self.rejected.extend(&rej);

        let now = env.round();
        for &a in &pulled {
            let (d_m, ucb, lcb) = self.stats[a].bounds().unwrap_or((f64::NAN, f64::INFINITY, 0.0));
            let decision = if acc.contains(&a) {
                Decision::Accepted
            } else if rej.contains(&a) {
                Decision::Rejected
            } else {
                Decision::Pending
            };
            self.trace.push(RaceTraceRow {
                round: now,
                arm: a,
                pulled: true,
                returned: self.stats[a].returned(),
                d_m,
                lcb,
                ucb,
                decision,
            });
        }
        Ok(())
    }

    /// Cut-off from the final upper bounds; infinite when an arm in scope
    /// still lacks a finite bound.
    pub fn cutoff(&self, scope: CutoffScope) -> f64 {
        let arms: Vec<usize> = match scope {
            CutoffScope::Accepted => self.accepted.clone(),
            CutoffScope::All => (0..self.stats.len()).collect(),
        };
        arms.iter()
            .map(|&a| self.stats[a].bounds().map_or(f64::INFINITY, |b| b.1))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Races until `target` arms are accepted. Returns the accepted set (sorted),
/// the cut-off and the identification spend.
pub fn run_race<E: RaceEnv>(env: &mut E, num_arms: usize, cfg: &RaceConfig) -> Result<RaceOutcome> {
    if cfg.target == 0 || cfg.target > num_arms {
        return Err(Error::Config(format!(
            "responsive-arm target {} must lie in 1..={num_arms}",
            cfg.target
        )));
    }
    let start = env.round();
    let mut state = RaceState::new(num_arms, cfg);
    while !state.is_done() {
        state.race_round(env, cfg)?;
    }
    let cutoff = state.cutoff(cfg.cutoff_scope);
    let mut accepted = state.accepted.clone();
    accepted.sort_unstable();
    Ok(RaceOutcome {
        accepted,
        cutoff,
        spend: state.spend,
        rounds: env.round() - start,
        stats: state.stats,
        trace: state.trace,
    })
}
