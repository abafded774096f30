//! Synthetic world: contexts, linear rewards, arm-dependent delays, and the
//! runtime state of one replication (feedback queue plus budget ledger).

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Geometric, Normal, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SimRng = ChaCha8Rng;

/// Delay distribution of one arm, in units of decision rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DelayDist {
    /// Support {1, 2, ...} with success probability `1 / mean`.
    Geometric { mean: f64 },
    /// `x_min * U^(-1/shape)` rounded up to the next integer.
    Pareto { x_min: f64, shape: f64 },
}

impl DelayDist {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DelayDist::Geometric { mean } => {
                if !(mean.is_finite() && mean >= 1.0) {
                    return Err(Error::InvalidModel(format!("geometric mean must be >= 1, got {mean}")));
                }
            }
            DelayDist::Pareto { x_min, shape } => {
                if !(x_min.is_finite() && x_min > 0.0 && shape.is_finite() && shape > 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "pareto needs x_min > 0 and shape > 0, got x_min={x_min} shape={shape}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Mean delay; infinite for Pareto tails with `shape <= 1`.
    pub fn mean(&self) -> f64 {
        match *self {
            DelayDist::Geometric { mean } => mean,
            DelayDist::Pareto { x_min, shape } => {
                if shape > 1.0 {
                    shape * x_min / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match *self {
            DelayDist::Geometric { mean } => {
                let p = 1.0 / mean;
                if p >= 1.0 {
                    1
                } else {
                    // rand_distr counts failures before the first success.
                    let failures = Geometric::new(p).expect("validated success probability").sample(rng);
                    usize::try_from(failures).unwrap_or(usize::MAX - 1) + 1
                }
            }
            DelayDist::Pareto { x_min, shape } => {
                let x: f64 = Pareto::new(x_min, shape)
                    .expect("validated pareto parameters")
                    .sample(rng);
                let d = x.ceil();
                if d >= usize::MAX as f64 {
                    usize::MAX - 1
                } else {
                    (d as usize).max(1)
                }
            }
        }
    }

    /// `P(D <= m)` for the integer delay produced by [`DelayDist::sample`].
    pub fn cdf(&self, m: f64) -> f64 {
        if m.is_nan() || m < 1.0 {
            return 0.0;
        }
        if m.is_infinite() {
            return 1.0;
        }
        let m = m.floor();
        match *self {
            DelayDist::Geometric { mean } => 1.0 - (1.0 - 1.0 / mean).powf(m),
            DelayDist::Pareto { x_min, shape } => {
                if m < x_min {
                    0.0
                } else {
                    1.0 - (x_min / m).powf(shape)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub id: usize,
    pub features: Vec<f64>,
    pub cost: f64,
    pub delay: DelayDist,
}

impl ArmSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cost.is_finite() && self.cost >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "arm {} has invalid cost {}",
                self.id, self.cost
            )));
        }
        if self.features.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel(format!("arm {} has non-finite features", self.id)));
        }
        self.delay.validate()
    }
}

/// Immutable description of the environment. Safe to share across
/// replications; all mutable run state lives in [`World`].
#[derive(Debug, Clone)]
pub struct EnvModel {
    pi: Vec<f64>,
    thetas: Vec<Vec<f64>>,
    arms: Vec<ArmSpec>,
    noise_sigma: f64,
    horizon: usize,
    budget: f64,
    delay_bound: bool,
    context_dist: WeightedIndex<f64>,
}

impl EnvModel {
    /// Validated model. Every arm's mean delay must be at most `budget / 4`.
    pub fn new(
        pi: Vec<f64>,
        thetas: Vec<Vec<f64>>,
        arms: Vec<ArmSpec>,
        noise_sigma: f64,
        horizon: usize,
        budget: f64,
    ) -> Result<Self> {
        Self::build(pi, thetas, arms, noise_sigma, horizon, budget, true)
    }

    /// As [`EnvModel::new`] without the mean-delay bound, for budgets too
    /// small to satisfy it.
    pub fn new_relaxed(
        pi: Vec<f64>,
        thetas: Vec<Vec<f64>>,
        arms: Vec<ArmSpec>,
        noise_sigma: f64,
        horizon: usize,
        budget: f64,
    ) -> Result<Self> {
        Self::build(pi, thetas, arms, noise_sigma, horizon, budget, false)
    }

    fn build(
        pi: Vec<f64>,
        thetas: Vec<Vec<f64>>,
        arms: Vec<ArmSpec>,
        noise_sigma: f64,
        horizon: usize,
        budget: f64,
        delay_bound: bool,
    ) -> Result<Self> {
        if pi.is_empty() {
            return Err(Error::InvalidModel("no contexts".into()));
        }
        if pi.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidModel("context probabilities must be >= 0".into()));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!(
                "context probabilities sum to {total}, expected 1"
            )));
        }
        if thetas.len() != pi.len() {
            return Err(Error::InvalidModel(format!(
                "{} contexts but {} parameter vectors",
                pi.len(),
                thetas.len()
            )));
        }
        if arms.is_empty() {
            return Err(Error::InvalidModel("no arms".into()));
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidModel(format!("budget must be positive, got {budget}")));
        }
        if horizon == 0 {
            return Err(Error::InvalidModel("horizon must be positive".into()));
        }
        if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "noise_sigma must be >= 0, got {noise_sigma}"
            )));
        }
        let dim = arms[0].features.len();
        for (i, arm) in arms.iter().enumerate() {
            if arm.id != i {
                return Err(Error::InvalidModel(format!("arm at position {i} has id {}", arm.id)));
            }
            arm.validate()?;
            if arm.features.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: arm.features.len(),
                });
            }
            let mean = arm.delay.mean();
            if delay_bound && mean > budget / 4.0 {
                return Err(Error::InvalidModel(format!(
                    "arm {i} mean delay {mean} exceeds budget/4 = {}",
                    budget / 4.0
                )));
            }
        }
        for theta in &thetas {
            if theta.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: theta.len(),
                });
            }
            if theta.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel("non-finite theta".into()));
            }
        }
        let context_dist =
            WeightedIndex::new(&pi).map_err(|e| Error::InvalidModel(format!("context distribution: {e}")))?;
        Ok(Self {
            pi,
            thetas,
            arms,
            noise_sigma,
            horizon,
            budget,
            delay_bound,
            context_dist,
        })
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn thetas(&self) -> &[Vec<f64>] {
        &self.thetas
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn num_contexts(&self) -> usize {
        self.pi.len()
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn dim(&self) -> usize {
        self.arms[0].features.len()
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Copy of the model with a different horizon and budget.
    pub fn with_limits(&self, horizon: usize, budget: f64) -> Result<Self> {
        Self::build(
            self.pi.clone(),
            self.thetas.clone(),
            self.arms.clone(),
            self.noise_sigma,
            horizon,
            budget,
            self.delay_bound,
        )
    }

    pub fn sample_context<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.context_dist.sample(rng)
    }

    pub fn sample_delay<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> usize {
        self.arms[arm].delay.sample(rng)
    }

    pub fn true_tau(&self, arm: usize, m: f64) -> f64 {
        true_tau(&self.arms[arm], m)
    }

    /// Noise-free reward `<theta_j, f_a>`.
    pub fn expected_reward(&self, context: usize, arm: usize) -> f64 {
        dot(&self.thetas[context], &self.arms[arm].features)
    }

    pub fn realized_reward<R: Rng + ?Sized>(&self, context: usize, arm: usize, rng: &mut R) -> f64 {
        let mean = self.expected_reward(context, arm);
        if self.noise_sigma == 0.0 {
            mean
        } else {
            let noise: f64 = Normal::new(0.0, self.noise_sigma).expect("validated sigma").sample(rng);
            mean + noise
        }
    }
}

/// `P(D <= m)` for the arm's delay distribution.
pub fn true_tau(arm: &ArmSpec, m: f64) -> f64 {
    arm.delay.cdf(m)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reward computation for a context/arm pair, checking dimensions instead of
/// relying on a validated model.
pub fn inner_reward<R: Rng + ?Sized>(theta: &[f64], arm: &ArmSpec, noise_sigma: f64, rng: &mut R) -> Result<f64> {
    if theta.len() != arm.features.len() {
        return Err(Error::DimensionMismatch {
            expected: arm.features.len(),
            got: theta.len(),
        });
    }
    let mean = dot(theta, &arm.features);
    if noise_sigma == 0.0 {
        return Ok(mean);
    }
    let noise: f64 = Normal::new(0.0, noise_sigma)
        .map_err(|e| Error::InvalidModel(format!("noise: {e}")))?
        .sample(rng);
    Ok(mean + noise)
}

/// Uniform (0,1) features and parameter vectors, with the parameters scaled so
/// that every expected reward lies in (0,1). Returns the scale factor applied.
pub fn generate_linear_world(
    num_contexts: usize,
    num_arms: usize,
    dim: usize,
    seed: u64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut open01 = || loop {
        let x: f64 = rng.random();
        if x > 0.0 {
            return x;
        }
    };
    let features: Vec<Vec<f64>> = (0..num_arms).map(|_| (0..dim).map(|_| open01()).collect()).collect();
    let mut thetas: Vec<Vec<f64>> = (0..num_contexts)
        .map(|_| (0..dim).map(|_| open01()).collect())
        .collect();
    let max_reward = thetas
        .iter()
        .flat_map(|th| features.iter().map(move |f| dot(th, f)))
        .fold(0.0_f64, f64::max);
    let scale = if max_reward > 0.0 { 0.99 / max_reward } else { 1.0 };
    for th in &mut thetas {
        for x in th.iter_mut() {
            *x *= scale;
        }
    }
    (features, thetas, scale)
}

/// A pulled arm waiting in the delay queue.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingFeedback {
    pub decision_round: usize,
    pub arm: usize,
    pub context: usize,
    pub reward: f64,
    pub delay: usize,
    pub arrival_round: usize,
}

#[derive(Debug)]
struct Queued {
    seq: u64,
    record: PendingFeedback,
}

impl Queued {
    fn key(&self) -> (usize, u64) {
        (self.record.arrival_round, self.seq)
    }
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Arrival-ordered delay queue; ties are released in enqueue order.
#[derive(Debug, Default)]
pub struct FeedbackQueue {
    heap: BinaryHeap<Reverse<Queued>>,
    next_seq: u64,
}

impl FeedbackQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: PendingFeedback) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Queued { seq, record }));
    }

    /// Removes and returns every record with `arrival_round <= t`.
    pub fn pop_due(&mut self, t: usize) -> Vec<PendingFeedback> {
        let mut out = Vec::new();
        while let Some(Reverse(top)) = self.heap.peek() {
            if top.record.arrival_round > t {
                break;
            }
            let Reverse(q) = self.heap.pop().expect("peeked");
            out.push(q.record);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Independent random streams of one replication. Contexts come from their
/// own stream so every policy sees the same context sequence under a seed.
#[derive(Debug, Clone)]
pub struct RunRngs {
    pub context: SimRng,
    pub outcome: SimRng,
    pub policy: SimRng,
}

impl RunRngs {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = SimRng::seed_from_u64(seed);
            rng.set_stream(k);
            rng
        };
        Self {
            context: stream(1),
            outcome: stream(2),
            policy: stream(3),
        }
    }
}

/// Mutable state of one replication: delay queue plus budget ledger.
#[derive(Debug)]
pub struct World<'a> {
    model: &'a EnvModel,
    queue: FeedbackQueue,
    remaining: f64,
    spent: f64,
    pub rngs: RunRngs,
}

impl<'a> World<'a> {
    pub fn new(model: &'a EnvModel, seed: u64) -> Self {
        Self {
            model,
            queue: FeedbackQueue::new(),
            remaining: model.budget(),
            spent: 0.0,
            rngs: RunRngs::new(seed),
        }
    }

    pub fn model(&self) -> &'a EnvModel {
        self.model
    }

    pub fn remaining(&self) -> f64 {
        self.remaining
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn can_afford(&self, arm: usize) -> bool {
        self.model.arms[arm].cost <= self.remaining
    }

    pub fn sample_context(&mut self) -> usize {
        self.model.sample_context(&mut self.rngs.context)
    }

    /// Executes the decision of round `t`. Pulling charges the arm's cost and
    /// enqueues its feedback; skipping spends nothing.
    pub fn step(&mut self, t: usize, context: usize, action: Option<usize>) -> Result<f64> {
        let Some(arm) = action else {
            return Ok(0.0);
        };
        let cost = self.model.arms[arm].cost;
        if cost > self.remaining {
            return Err(Error::BudgetExhausted {
                remaining: self.remaining,
                cost,
            });
        }
        let reward = self.model.realized_reward(context, arm, &mut self.rngs.outcome);
        let delay = self.model.sample_delay(arm, &mut self.rngs.outcome);
        self.queue.push(PendingFeedback {
            decision_round: t,
            arm,
            context,
            reward,
            delay,
            arrival_round: t.saturating_add(delay),
        });
        self.remaining -= cost;
        self.spent += cost;
        Ok(cost)
    }

    pub fn pop_due(&mut self, t: usize) -> Vec<PendingFeedback> {
        self.queue.pop_due(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const REFERENCE_PI: [f64; 10] = [0.09, 0.15, 0.11, 0.05, 0.1, 0.05, 0.08, 0.14, 0.13, 0.1];

    fn arm(delay: DelayDist) -> ArmSpec {
        ArmSpec {
            id: 0,
            features: vec![0.5; 5],
            cost: 1.0,
            delay,
        }
    }

    fn model_with(pi: Vec<f64>, arms: Vec<ArmSpec>, budget: f64) -> Result<EnvModel> {
        let j = pi.len();
        EnvModel::new(pi, vec![vec![0.1; 5]; j], arms, 0.0, 100, budget)
    }

    #[test]
    fn degenerate_context_distribution() {
        let m = model_with(vec![1.0], vec![arm(DelayDist::Geometric { mean: 1.0 })], 10.0).unwrap();
        let mut rng = SimRng::seed_from_u64(3);
        assert!((0..1000).all(|_| m.sample_context(&mut rng) == 0));
    }

    #[test]
    fn reference_context_distribution_is_valid() {
        assert!(model_with(
            REFERENCE_PI.to_vec(),
            vec![arm(DelayDist::Geometric { mean: 2.0 })],
            10.0
        )
        .is_ok());
    }

    #[test]
    fn context_frequencies_match_pi() {
        let m = model_with(
            REFERENCE_PI.to_vec(),
            vec![arm(DelayDist::Geometric { mean: 2.0 })],
            10.0,
        )
        .unwrap();
        let mut rng = SimRng::seed_from_u64(11);
        let n = 1_000_000;
        let mut counts = [0usize; 10];
        for _ in 0..n {
            counts[m.sample_context(&mut rng)] += 1;
        }
        for (c, p) in counts.iter().zip(REFERENCE_PI) {
            assert!((*c as f64 / n as f64 - p).abs() < 0.005);
        }
    }

    #[test]
    fn pi_must_sum_to_one() {
        let err = model_with(vec![0.5, 0.6], vec![arm(DelayDist::Geometric { mean: 2.0 })], 10.0);
        assert!(matches!(err, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn mean_delay_bounded_by_quarter_budget() {
        let err = model_with(vec![1.0], vec![arm(DelayDist::Geometric { mean: 30.0 })], 100.0);
        assert!(err.is_err());
        assert!(model_with(vec![1.0], vec![arm(DelayDist::Geometric { mean: 25.0 })], 100.0).is_ok());
        let relaxed = EnvModel::new_relaxed(
            vec![1.0],
            vec![vec![0.1; 5]],
            vec![arm(DelayDist::Geometric { mean: 30.0 })],
            0.0,
            100,
            100.0,
        );
        assert!(relaxed.is_ok());
        assert!(relaxed.unwrap().with_limits(100, 50.0).is_ok());
    }

    #[test]
    fn invalid_delay_parameters() {
        assert!(DelayDist::Geometric { mean: 0.5 }.validate().is_err());
        assert!(DelayDist::Pareto { x_min: 0.0, shape: 2.0 }.validate().is_err());
        assert!(DelayDist::Pareto {
            x_min: 1.0,
            shape: -1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn geometric_mean_one_is_always_one() {
        let d = DelayDist::Geometric { mean: 1.0 };
        let mut rng = SimRng::seed_from_u64(0);
        assert!((0..1000).all(|_| d.sample(&mut rng) == 1));
    }

    #[test]
    fn geometric_sample_mean() {
        let d = DelayDist::Geometric { mean: 300.0 };
        let mut rng = SimRng::seed_from_u64(5);
        let n = 1_000_000;
        let s: f64 = (0..n).map(|_| d.sample(&mut rng) as f64).sum();
        assert!((s / n as f64 - 300.0).abs() < 2.0);
    }

    #[test]
    fn pareto_sample_mean() {
        let d = DelayDist::Pareto {
            x_min: 400.0,
            shape: 2.0,
        };
        let mut rng = SimRng::seed_from_u64(6);
        let n = 1_000_000;
        let mut s = 0.0;
        for _ in 0..n {
            let x = d.sample(&mut rng);
            assert!(x >= 400);
            s += x as f64;
        }
        assert!((s / n as f64 - 800.0).abs() < 10.0);
    }

    #[test]
    fn tau_reference_values() {
        let p = arm(DelayDist::Pareto {
            x_min: 400.0,
            shape: 2.0,
        });
        assert!((true_tau(&p, 500.0) - 0.36).abs() < 1e-12);
        assert_eq!(true_tau(&p, 300.0), 0.0);
        let g = arm(DelayDist::Geometric { mean: 300.0 });
        let expected = 1.0 - (1.0 - 1.0 / 300.0_f64).powi(500);
        assert!((true_tau(&g, 500.0) - expected).abs() < 1e-12);
        assert!((true_tau(&g, 500.0) - 0.8113).abs() < 5e-4);
    }

    #[test]
    fn empirical_tau_matches_cdf() {
        let dists = [
            DelayDist::Geometric { mean: 100.0 },
            DelayDist::Pareto {
                x_min: 200.0,
                shape: 2.0,
            },
        ];
        for (k, d) in dists.iter().enumerate() {
            let mut rng = SimRng::seed_from_u64(40 + k as u64);
            let samples: Vec<usize> = (0..1_000_000).map(|_| d.sample(&mut rng)).collect();
            for m in [50.0, 150.0, 250.0, 500.0] {
                let frac = samples.iter().filter(|&&x| x as f64 <= m).count() as f64 / 1e6;
                assert!((frac - d.cdf(m)).abs() < 0.005, "{d:?} m={m}");
            }
        }
    }

    #[test]
    fn rewards() {
        let mut rng = SimRng::seed_from_u64(1);
        let a = ArmSpec {
            id: 0,
            features: vec![1.0 / 5f64.sqrt(); 5],
            cost: 1.0,
            delay: DelayDist::Geometric { mean: 1.0 },
        };
        assert_eq!(inner_reward(&[0.0; 5], &a, 0.0, &mut rng).unwrap(), 0.0);
        let r = inner_reward(&a.features.clone(), &a, 0.0, &mut rng).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(matches!(
            inner_reward(&[1.0; 4], &a, 0.0, &mut rng),
            Err(Error::DimensionMismatch { .. })
        ));
        let theta = [0.1, 0.2, 0.3, 0.4, 0.5];
        let mean = dot(&theta, &a.features);
        let n = 100_000;
        let s: f64 = (0..n).map(|_| inner_reward(&theta, &a, 0.1, &mut rng).unwrap()).sum();
        assert!((s / n as f64 - mean).abs() < 0.01);
    }

    #[test]
    fn step_and_queue() {
        let m = EnvModel::new_relaxed(
            vec![1.0],
            vec![vec![0.1; 5]],
            vec![arm(DelayDist::Geometric { mean: 1.0 })],
            0.0,
            100,
            1.5,
        )
        .unwrap();
        let mut w = World::new(&m, 0);
        assert_eq!(w.step(3, 0, None).unwrap(), 0.0);
        assert_eq!(w.pending(), 0);
        assert_eq!(w.step(10, 0, Some(0)).unwrap(), 1.0);
        assert_eq!(w.pending(), 1);
        let due = w.pop_due(11);
        assert_eq!(due[0].arrival_round, 11);
        assert_eq!(due[0].decision_round + due[0].delay, due[0].arrival_round);
        // remaining budget is now 0.5 < cost
        assert!(matches!(w.step(12, 0, Some(0)), Err(Error::BudgetExhausted { .. })));
        assert_eq!(w.remaining() + w.spent(), 1.5);
    }

    fn rec(t: usize, d: usize) -> PendingFeedback {
        PendingFeedback {
            decision_round: t,
            arm: 0,
            context: 0,
            reward: 0.0,
            delay: d,
            arrival_round: t + d,
        }
    }

    #[test]
    fn pop_due_boundary_inclusive() {
        let mut q = FeedbackQueue::new();
        assert!(q.pop_due(100).is_empty());
        q.push(rec(10, 5));
        q.push(rec(10, 2));
        let got = q.pop_due(12);
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].arrival_round, 12);
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn ties_release_in_enqueue_order() {
        let mut q = FeedbackQueue::new();
        for t in 0..5 {
            let mut r = rec(t, 10 - t);
            r.arm = t;
            q.push(r);
        }
        let got: Vec<usize> = q.pop_due(10).iter().map(|r| r.arm).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn queue_conserves_records() {
        let mut rng = SimRng::seed_from_u64(9);
        let mut q = FeedbackQueue::new();
        let mut pushed = Vec::new();
        for i in 0..10_000usize {
            let d = rng.random_range(1..500);
            let mut r = rec(i / 10, d);
            r.arm = i;
            pushed.push(r.clone());
            q.push(r);
        }
        let mut popped = Vec::new();
        for t in 0..2000 {
            for r in q.pop_due(t) {
                assert!(r.arrival_round <= t);
                popped.push(r);
            }
        }
        assert!(q.is_empty());
        popped.sort_by_key(|r| r.arm);
        assert_eq!(popped, pushed);
    }

    #[test]
    fn generated_world_rewards_in_unit_interval() {
        let (features, thetas, scale) = generate_linear_world(10, 10, 5, 7);
        assert!(scale > 0.0);
        for th in &thetas {
            for f in &features {
                let r = dot(th, f);
                assert!(r > 0.0 && r < 1.0);
            }
        }
    }

    #[test]
    fn determinism() {
        let (features, thetas, _) = generate_linear_world(3, 2, 5, 1);
        let arms: Vec<ArmSpec> = features
            .into_iter()
            .enumerate()
            .map(|(id, f)| ArmSpec {
                id,
                features: f,
                cost: 1.0,
                delay: DelayDist::Pareto { x_min: 3.0, shape: 2.0 },
            })
            .collect();
        let m = EnvModel::new(vec![0.2, 0.3, 0.5], thetas, arms, 0.1, 1000, 1000.0).unwrap();
        let trace = |seed| {
            let mut w = World::new(&m, seed);
            let mut out = Vec::new();
            for t in 0..200 {
                let j = w.sample_context();
                w.step(t, j, Some(t % 2)).unwrap();
                out.extend(w.pop_due(t));
            }
            out
        };
        assert_eq!(trace(4), trace(4));
        assert_ne!(trace(4), trace(5));
    }
}
