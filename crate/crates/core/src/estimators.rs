//! Robust estimation of per-arm mean delays from partially returned feedback.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Which bias coefficient enters the confidence radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMode {
    /// `2 * d_M * T_a^-(alpha ∧ 1/2)`, the median-of-means estimate standing
    /// in for the unknown mean delay.
    #[default]
    Plugin,
    /// `B/2 * T_a^-(alpha ∧ 1/2)`.
    WorstCase,
}

/// Number of baskets `h = max(1, min(floor(8 ln(e^{1/8}/delta)), floor(T_a/2)))`
/// together with the basket size `floor(T_a/h)`.
pub fn basket_count(pulls: usize, delta: f64) -> Result<(usize, usize)> {
    if pulls < 2 {
        return Err(Error::InsufficientSamples { needed: 2, have: pulls });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid("delta", format!("must lie in (0,1], got {delta}")));
    }
    let by_confidence = (8.0 * (0.125 - delta.ln())).floor();
    let by_samples = pulls / 2;
    let h = if by_confidence < by_samples as f64 {
        by_confidence.max(1.0) as usize
    } else {
        by_samples
    }
    .max(1);
    Ok((h, pulls / h))
}

/// Median of the means of `h` consecutive, equally sized baskets taken from
/// the front of `values`. Trailing values that do not fill a basket are
/// ignored. Even `h` averages the two middle means.
pub fn median_of_means(values: &[f64], h: usize) -> Result<f64> {
    if h == 0 {
        return Err(invalid("h", "need at least one basket"));
    }
    if values.len() < h {
        return Err(Error::InsufficientSamples {
            needed: h,
            have: values.len(),
        });
    }
    let n = values.len() / h;
    let mut means: Vec<f64> = values[..h * n]
        .chunks_exact(n)
        .map(|c| c.iter().sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    Ok(if h % 2 == 1 {
        means[h / 2]
    } else {
        0.5 * (means[h / 2 - 1] + means[h / 2])
    })
}

/// Confidence radius around a median-of-means delay estimate.
pub fn robust_radius(d_m: f64, pulls: usize, alpha: f64, budget: f64, mode: RadiusMode) -> Result<f64> {
    if pulls == 0 {
        return Err(Error::InsufficientSamples { needed: 1, have: 0 });
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if !(budget > 1.0) {
        return Err(invalid(
            "budget",
            format!("must exceed 1 for a finite radius, got {budget}"),
        ));
    }
    let tail = budget.powf(-alpha);
    let ta = pulls as f64;
    let concentration = (2.0 * (16.0 / (1.0 - tail)).ln() / ta).sqrt();
    let coefficient = match mode {
        RadiusMode::Plugin => 2.0 * d_m,
        RadiusMode::WorstCase => budget / 2.0,
    };
    Ok(concentration + coefficient * ta.powf(-alpha.min(0.5)))
}

/// `(UCB, LCB)` with the lower bound clamped at zero.
pub fn robust_bounds(d_m: f64, pulls: usize, alpha: f64, budget: f64, mode: RadiusMode) -> Result<(f64, f64)> {
    let r = robust_radius(d_m, pulls, alpha, budget, mode)?;
    Ok((d_m + r, (d_m - r).max(0.0)))
}

/// Delay observations for one arm. Returned delays are kept in pull order;
/// pulls whose feedback is still pending count toward `T_a` only.
#[derive(Debug, Clone)]
pub struct DelayStats {
    pub arm: usize,
    pub alpha: f64,
    pub delta: f64,
    pub budget: f64,
    pub radius_mode: RadiusMode,
    pull_rounds: Vec<usize>,
    // (pull round, delay), sorted by pull round
    observed: Vec<(usize, f64)>,
}

impl DelayStats {
    pub fn new(arm: usize, alpha: f64, delta: f64, budget: f64, radius_mode: RadiusMode) -> Self {
        Self {
            arm,
            alpha,
            delta,
            budget,
            radius_mode,
            pull_rounds: Vec::new(),
            observed: Vec::new(),
        }
    }

    pub fn pulls(&self) -> usize {
        self.pull_rounds.len()
    }

    pub fn returned(&self) -> usize {
        self.observed.len()
    }

    pub fn record_pull(&mut self, round: usize) {
        self.pull_rounds.push(round);
    }

    pub fn record_return(&mut self, pull_round: usize, delay: f64) {
        let pos = self.observed.partition_point(|&(r, _)| r <= pull_round);
        self.observed.insert(pos, (pull_round, delay));
    }

    /// Observed delays in pull order.
    pub fn observed(&self) -> Vec<f64> {
        self.observed.iter().map(|&(_, d)| d).collect()
    }

    pub fn basket_count(&self) -> Result<(usize, usize)> {
        basket_count(self.pulls(), self.delta)
    }

    pub fn median_of_means(&self) -> Result<f64> {
        let (h, _) = self.basket_count()?;
        median_of_means(&self.observed(), h)
    }

    /// `(UCB, LCB)` around the median-of-means estimate, or `None` while too
    /// few samples have returned to fill the baskets.
    pub fn bounds(&self) -> Option<(f64, f64, f64)> {
        let d_m = self.median_of_means().ok()?;
        let (ucb, lcb) = robust_bounds(d_m, self.pulls(), self.alpha, self.budget, self.radius_mode).ok()?;
        Some((d_m, ucb, lcb))
    }

    pub fn delayed_empirical_mean(&self) -> Result<f64> {
        if self.observed.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, have: 0 });
        }
        Ok(self.observed.iter().map(|&(_, d)| d).sum::<f64>() / self.observed.len() as f64)
    }

    /// Fraction of pulls whose feedback came back within `m` rounds. Every pull
    /// must be at least `m` rounds old at `now`.
    pub fn estimate_tau(&self, m: f64, now: usize) -> Result<f64> {
        if self.pull_rounds.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, have: 0 });
        }
        let pending = self
            .pull_rounds
            .iter()
            .filter(|&&r| ((now.saturating_sub(r)) as f64) < m)
            .count();
        if pending > 0 {
            return Err(Error::NotYetResolved { pending });
        }
        let within = self.observed.iter().filter(|&&(_, d)| d <= m).count();
        Ok(within as f64 / self.pulls() as f64)
    }

    /// Like [`DelayStats::estimate_tau`] but restricted to the pulls that are
    /// already at least `m` rounds old at `now`.
    pub fn estimate_tau_resolved(&self, m: f64, now: usize) -> Result<f64> {
        let old_enough = |r: usize| (now.saturating_sub(r)) as f64 >= m;
        let resolved = self.pull_rounds.iter().filter(|&&r| old_enough(r)).count();
        if resolved == 0 {
            return Err(Error::InsufficientSamples { needed: 1, have: 0 });
        }
        let within = self.observed.iter().filter(|&&(r, d)| old_enough(r) && d <= m).count();
        Ok(within as f64 / resolved as f64)
    }

    /// True once every pull is at least `m` rounds old at `now`.
    pub fn is_resolved(&self, m: f64, now: usize) -> bool {
        self.pull_rounds
            .last()
            .is_none_or(|&r| (now.saturating_sub(r)) as f64 >= m)
    }
}
