//! Online sparsity estimation.
//!
//! The tracker keeps an exponentially weighted average `err` of the negated
//! gradient directions `b(n) = e*(n) x(n)`. Because `E[b(n)] = -R_x E[w̄(n)]`
//! with `w̄(n) = w(n) - w`, `err` follows the current estimation error (up to
//! the regressor covariance, `I/N` for unit-norm rows). The corrected vector
//! `w′ = w - ξ·err` is then compared against the occupancy threshold `q*`,
//! and the number of passing coefficients is the estimate of `s`.

use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::sparse::SupportSet;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    /// Forgetting factor λ ∈ (0, 1].
    pub lambda: f64,
    /// Error-correction scale ξ ≥ 0.
    pub xi: f64,
    /// Occupancy magnitude threshold q* > 0.
    pub q_star: f64,
    /// Restrict the next estimate to the coefficients that pass the occupancy
    /// test instead of thresholding by count.
    pub support_shortcut: bool,
}

impl TrackerConfig {
    pub fn new(lambda: f64, xi: f64, q_star: f64) -> Self {
        Self { lambda, xi, q_star, support_shortcut: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::invalid("forgetting factor must lie in (0, 1]"));
        }
        if !self.xi.is_finite() || self.xi < 0.0 {
            return Err(Error::invalid("xi must be finite and nonnegative"));
        }
        if !self.q_star.is_finite() || self.q_star <= 0.0 {
            return Err(Error::invalid("q* must be finite and positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tracker {
    config: TrackerConfig,
    err: Vec<C64>,
    kappa: f64,
}

impl Tracker {
    pub fn new(len: usize, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, err: alloc::vec![C64::new(0.0, 0.0); len], kappa: 0.0 })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn err(&self) -> &[C64] {
        &self.err
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `κ ← λκ + 1`, `err ← (1 − 1/κ)·err − (1/κ)·b`.
    pub fn update(&mut self, b: &[C64]) -> Result<()> {
        check_len(self.err.len(), b.len())?;
        let (keep, gain) = self.advance();
        for (e, bk) in self.err.iter_mut().zip(b) {
            *e = *e * keep - *bk * gain;
        }
        Ok(())
    }

    /// Same as [`update`](Self::update) with `b = e*·x`, without building `b`.
    pub fn observe(&mut self, error: C64, x: &[C64]) -> Result<()> {
        check_len(self.err.len(), x.len())?;
        let (keep, gain) = self.advance();
        let scaled = error.conj() * gain;
        for (e, xk) in self.err.iter_mut().zip(x) {
            *e = *e * keep - scaled * xk;
        }
        Ok(())
    }

    fn advance(&mut self) -> (f64, f64) {
        self.kappa = self.config.lambda * self.kappa + 1.0;
        let gain = 1.0 / self.kappa;
        (1.0 - gain, gain)
    }

    /// `w′ = w − ξ·err`.
    pub fn corrected_estimate(&self, w: &[C64]) -> Result<Vec<C64>> {
        check_len(self.err.len(), w.len())?;
        let xi = self.config.xi;
        Ok(w.iter().zip(&self.err).map(|(wk, ek)| wk - ek * xi).collect())
    }

    /// Coefficients with `|w′_i| > q*`.
    pub fn occupied(&self, w: &[C64]) -> Result<SupportSet> {
        check_len(self.err.len(), w.len())?;
        let q2 = self.config.q_star * self.config.q_star;
        let xi = self.config.xi;
        Ok(w.iter()
            .zip(&self.err)
            .enumerate()
            .filter(|(_, (wk, ek))| (*wk - *ek * xi).norm_sqr() > q2)
            .map(|(i, _)| i)
            .collect())
    }

    /// `|{i : |w′_i| > q*}|`, clamped to `[1, N]`.
    pub fn estimate_sparsity(&self, w: &[C64]) -> Result<usize> {
        Ok(self.occupied(w)?.len().clamp(1, self.err.len().max(1)))
    }
}
