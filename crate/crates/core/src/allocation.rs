//! Per-round budget allocation across contexts.
//!
//! The relaxed problem maximizes `sum_j p_j pi_j eta_j` subject to
//! `sum_j p_j pi_j <= rho` with `p in [0,1]^J`. Ranking contexts by `eta`
//! and filling the budget greedily gives the optimum: every context above a
//! threshold is always served, the next one fractionally, the rest never.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Context indices sorted by `eta` descending (ties by index).
    pub order: Vec<usize>,
    /// Number of fully served contexts in `order`.
    pub threshold: usize,
    /// Serving probability per context, indexed by context.
    pub p: Vec<f64>,
    pub value: f64,
}

/// Closed-form threshold solution of the allocation LP.
pub fn solve_lp(pi: &[f64], eta: &[f64], rho: f64) -> Result<LpSolution> {
    if pi.len() != eta.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            got: eta.len(),
        });
    }
    if pi.iter().chain(eta).any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Config(
            "allocation inputs must be finite and non-negative".into(),
        ));
    }
    if !(rho >= 0.0) {
        return Err(Error::Config(format!("budget ratio must be >= 0, got {rho}")));
    }
    let n = pi.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eta[b].total_cmp(&eta[a]).then(a.cmp(&b)));

    let mut p = vec![0.0; n];
    let mut threshold = 0;
    if rho >= 1.0 {
        p.iter_mut().for_each(|x| *x = 1.0);
        threshold = n;
    } else {
        let mut used = 0.0;
        for &j in &order {
            if used + pi[j] <= rho {
                used += pi[j];
                p[j] = 1.0;
                threshold += 1;
            } else {
                p[j] = ((rho - used) / pi[j]).clamp(0.0, 1.0);
                break;
            }
        }
    }
    let value = (0..n).map(|j| p[j] * pi[j] * eta[j]).sum();
    Ok(LpSolution {
        order,
        threshold,
        p,
        value,
    })
}

/// Arm maximizing `tau_a * score_a` among `candidates`; ties go to the lowest
/// arm index.
pub fn best_delayed_arm(candidates: &[usize], scores: &[f64], taus: &[f64]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &a in candidates {
        let v = taus[a] * scores[a];
        match best {
            Some((b, bv)) if bv > v || (bv == v && b < a) => {}
            _ => best = Some((a, v)),
        }
    }
    best.ok_or_else(|| Error::Config("no candidate arms".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMode {
    /// Remaining budget per remaining round, `b_t / (T - t)`.
    #[default]
    Remaining,
    /// `b_t / t` (unbounded at `t = 0`, clamped to 1).
    AsPrinted,
}

/// Per-round budget ratio, clamped to `[0, 1]`.
pub fn adaptive_ratio(remaining: f64, t: usize, horizon: usize, mode: RatioMode) -> f64 {
    if remaining <= 0.0 {
        return 0.0;
    }
    let denom = match mode {
        RatioMode::Remaining => horizon.saturating_sub(t) as f64,
        RatioMode::AsPrinted => t as f64,
    };
    if denom <= 0.0 {
        return 1.0;
    }
    (remaining / denom).clamp(0.0, 1.0)
}
