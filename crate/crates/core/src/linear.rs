//! Censored ridge regression per context and the delayed LinUCB index.
//!
//! The design matrix grows at pull time; the response vector only absorbs
//! rewards that came back within the cut-off. Pulls made during the last `m`
//! rounds may still have feedback in flight and contribute an extra width
//! term to the index.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone)]
pub struct ContextRegressor {
    pub context: usize,
    lambda: f64,
    window: f64,
    v: DMatrix<f64>,
    g: DVector<f64>,
    pulls: usize,
    // (decision round, arm key) of pulls inside the window, oldest first
    recent: VecDeque<(usize, usize)>,
    in_window: Vec<usize>,
    arm_features: Vec<Option<DVector<f64>>>,
}

impl ContextRegressor {
    pub fn new(context: usize, dim: usize, lambda: f64, window: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        if !(window >= 0.0) {
            return Err(invalid("window", format!("must be >= 0, got {window}")));
        }
        if dim == 0 {
            return Err(invalid("dim", "must be positive"));
        }
        Ok(Self {
            context,
            lambda,
            window,
            v: DMatrix::identity(dim, dim) * lambda,
            g: DVector::zeros(dim),
            pulls: 0,
            recent: VecDeque::new(),
            in_window: Vec::new(),
            arm_features: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn pulls(&self) -> usize {
        self.pulls
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.g
    }

    /// Number of pulls still inside the feedback window.
    pub fn window_len(&self) -> usize {
        self.in_window.iter().sum()
    }

    fn check_dim(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Keeps only pulls made in rounds `round - m ..= round - 1`.
    pub fn advance(&mut self, round: usize) {
        if self.window.is_infinite() {
            return;
        }
        while let Some(&(r, arm)) = self.recent.front() {
            if (round as f64) - (r as f64) <= self.window {
                break;
            }
            self.recent.pop_front();
            self.in_window[arm] -= 1;
        }
    }

    /// Rank-one update `V += f f^T` for a pull of `arm` at `round`.
    pub fn record_pull(&mut self, round: usize, arm: usize, f: &[f64]) -> Result<()> {
        self.check_dim(f)?;
        let x = DVector::from_column_slice(f);
        self.v.ger(1.0, &x, &x, 1.0);
        self.pulls += 1;
        if arm >= self.in_window.len() {
            self.in_window.resize(arm + 1, 0);
            self.arm_features.resize(arm + 1, None);
        }
        if self.arm_features[arm].is_none() {
            self.arm_features[arm] = Some(x);
        }
        if self.window > 0.0 {
            self.recent.push_back((round, arm));
            self.in_window[arm] += 1;
        }
        self.advance(round + 1);
        Ok(())
    }

    /// `G += r f` when the reward returned within the cut-off; censored
    /// feedback leaves `G` untouched.
    pub fn record_feedback(&mut self, f: &[f64], reward: f64, within_cutoff: bool) -> Result<()> {
        self.check_dim(f)?;
        if within_cutoff {
            for (g, x) in self.g.iter_mut().zip(f) {
                *g += reward * x;
            }
        }
        Ok(())
    }

    fn factor(&self) -> nalgebra::Cholesky<f64, nalgebra::Dyn> {
        self.v
            .clone()
            .cholesky()
            .expect("design matrix is positive definite for lambda > 0")
    }

    /// Ridge estimate solving `V theta = G`.
    pub fn theta_hat(&self) -> Vec<f64> {
        self.factor().solve(&self.g).iter().copied().collect()
    }

    /// Confidence width multiplier `sqrt(lambda) + sqrt(2 ln(1/delta) + d ln((d lambda + t)/(d lambda)))`.
    pub fn width(&self, delta: f64) -> f64 {
        let d = self.dim() as f64;
        let dl = d * self.lambda;
        self.lambda.sqrt() + (2.0 * (1.0 / delta).ln() + d * ((dl + self.pulls as f64) / dl).ln()).sqrt()
    }

    /// Delayed LinUCB index of every candidate feature vector, sharing one
    /// factorization of the design matrix.
    pub fn indices(&self, candidates: &[&[f64]], delta: f64) -> Result<Vec<f64>> {
        for f in candidates {
            self.check_dim(f)?;
        }
        let chol = self.factor();
        let theta = chol.solve(&self.g);
        let norm = |x: &DVector<f64>| x.dot(&chol.solve(x)).max(0.0).sqrt();
        let penalty: f64 = self
            .in_window
            .iter()
            .zip(&self.arm_features)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, f)| c as f64 * norm(f.as_ref().expect("feature of pulled arm")))
            .sum();
        let bonus = 2.0 * self.width(delta) + penalty;
        Ok(candidates
            .iter()
            .map(|f| {
                let x = DVector::from_column_slice(f);
                theta.dot(&x) + bonus * norm(&x)
            })
            .collect())
    }

    pub fn index(&self, f: &[f64], delta: f64) -> Result<f64> {
        Ok(self.indices(&[f], delta)?[0])
    }

    /// Sum of `||f'||_{V^-1}` over pulls still inside the window.
    pub fn window_penalty(&self) -> f64 {
        let chol = self.factor();
        self.in_window
            .iter()
            .zip(&self.arm_features)
            .filter(|(&c, _)| c > 0)
            .map(|(&c, f)| {
                let x = f.as_ref().expect("feature of pulled arm");
                c as f64 * x.dot(&chol.solve(x)).max(0.0).sqrt()
            })
            .sum()
    }
}
