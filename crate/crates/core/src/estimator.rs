//! Single-sample online estimators of a sparse spectrum.
//!
//! Every rule starts from the LMS step `w ← w + μ e* x` with the a-priori
//! error `e = y − w^H x`, then adds a sparsity-promoting term:
//!
//! | variant   | extra term / operation                          |
//! |-----------|-------------------------------------------------|
//! | `Lms`     | none                                            |
//! | `Za`      | `− ρ sgn(w)`                                    |
//! | `Rza`     | `− ρ sgn(w) / (1 + ε|w|)`                       |
//! | `L0`      | `− ρ sgn(w) exp(−β|w|)`                         |
//! | `Sza`     | `− ρ P_s(w)` (penalty off the `s` leading terms)|
//! | `Hard`    | `H_s(·)` applied after the LMS step             |
//! | `HardL0`  | `H_s(·)` applied after the `L0` step            |
//!
//! Penalties are evaluated on the pre-update estimate `w(n)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::sparse::{hard_threshold_in_place, sign, threshold_level};
use crate::tracker::{Tracker, TrackerConfig};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Lms,
    Za,
    Rza,
    L0,
    Sza,
    Hard,
    HardL0,
}

impl Variant {
    pub const ALL: [Variant; 7] =
        [Variant::Lms, Variant::Za, Variant::Rza, Variant::L0, Variant::Sza, Variant::Hard, Variant::HardL0];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Lms => "lms",
            Variant::Za => "za",
            Variant::Rza => "rza",
            Variant::L0 => "l0",
            Variant::Sza => "sza",
            Variant::Hard => "hard",
            Variant::HardL0 => "hard-l0",
        }
    }

    /// Whether the rule consumes a sparsity budget `s`.
    pub fn uses_budget(self) -> bool {
        matches!(self, Variant::Sza | Variant::Hard | Variant::HardL0)
    }

    fn thresholds(self) -> bool {
        matches!(self, Variant::Hard | Variant::HardL0)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .map(|c| if c == 'ℓ' { 'l' } else { c.to_ascii_lowercase() })
            .collect();
        let key = key.strip_suffix("lms").filter(|k| !k.is_empty()).unwrap_or(&key);
        Ok(match key {
            "lms" => Variant::Lms,
            "za" => Variant::Za,
            "rza" => Variant::Rza,
            "l0" => Variant::L0,
            "sza" => Variant::Sza,
            "hard" => Variant::Hard,
            "hardl0" => Variant::HardL0,
            _ => return Err(Error::invalid(alloc::format!("unknown estimator variant {s:?}"))),
        })
    }
}

/// The sparsity budget `s` of the budgeted variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sparsity {
    Fixed(usize),
    /// Re-estimated every step by a [`Tracker`].
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub variant: Variant,
    pub mu: f64,
    /// Penalty weight ρ (already multiplied by μ).
    pub rho: f64,
    /// ℓ0 approximation sharpness β.
    pub beta: f64,
    /// Reweighting constant ε of RZA-LMS.
    pub epsilon: f64,
    pub sparsity: Sparsity,
    /// Initial samples during which the threshold (and the penalty, except
    /// for `HardL0`) is not applied.
    pub burn_in: usize,
}

impl EstimatorConfig {
    pub fn new(variant: Variant, mu: f64) -> Self {
        Self { variant, mu, rho: 0.0, beta: 0.0, epsilon: 1.0, sparsity: Sparsity::Fixed(1), burn_in: 0 }
    }

    pub fn lms(mu: f64) -> Self {
        Self::new(Variant::Lms, mu)
    }

    pub fn za(mu: f64, rho: f64) -> Self {
        Self { rho, ..Self::new(Variant::Za, mu) }
    }

    pub fn rza(mu: f64, rho: f64, epsilon: f64) -> Self {
        Self { rho, epsilon, ..Self::new(Variant::Rza, mu) }
    }

    pub fn l0(mu: f64, rho: f64, beta: f64) -> Self {
        Self { rho, beta, ..Self::new(Variant::L0, mu) }
    }

    pub fn sza(mu: f64, rho: f64, sparsity: Sparsity) -> Self {
        Self { rho, sparsity, ..Self::new(Variant::Sza, mu) }
    }

    pub fn hard(mu: f64, sparsity: Sparsity) -> Self {
        Self { sparsity, ..Self::new(Variant::Hard, mu) }
    }

    pub fn hard_l0(mu: f64, rho: f64, beta: f64, sparsity: Sparsity) -> Self {
        Self { rho, beta, sparsity, ..Self::new(Variant::HardL0, mu) }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Checks parameter ranges for a length-`len` problem. The step size
    /// bound `0 < μ < 2` is the mean-square stability range for unit-norm
    /// regressors.
    pub fn validate(&self, len: usize) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 2.0) {
            return Err(Error::invalid(alloc::format!("step size must lie in (0, 2), got {}", self.mu)));
        }
        if !self.rho.is_finite() || self.rho < 0.0 {
            return Err(Error::invalid("rho must be finite and nonnegative"));
        }
        if self.beta.is_nan() || self.beta < 0.0 {
            return Err(Error::invalid("beta must be nonnegative"));
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be finite and positive"));
        }
        if let (true, Sparsity::Fixed(s)) = (self.variant.uses_budget(), self.sparsity) {
            if s == 0 || s > len {
                return Err(Error::SparsityOutOfRange { s, len });
            }
        }
        Ok(())
    }
}

/// Current estimate `w(n)`, step count `n` and last a-priori error `e(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub w: Vec<C64>,
    pub n: usize,
    pub last_e: C64,
}

impl EstimatorState {
    pub fn new(len: usize) -> Self {
        Self { w: alloc::vec![C64::new(0.0, 0.0); len], n: 0, last_e: C64::new(0.0, 0.0) }
    }
}

/// `e(n) = y(n) − w^H(n) x(n)`, stored in `state.last_e`.
pub fn prediction_error(state: &mut EstimatorState, x: &[C64], y: C64) -> Result<C64> {
    check_len(state.w.len(), x.len())?;
    let predicted: C64 = state.w.iter().zip(x).map(|(w, x)| w.conj() * x).sum();
    state.last_e = y - predicted;
    Ok(state.last_e)
}

fn penalized_update<P>(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64, mut penalty: P) -> Result<C64>
where
    P: FnMut(C64) -> C64,
{
    let e = prediction_error(state, x, y)?;
    let gain = e.conj() * mu;
    for (wk, xk) in state.w.iter_mut().zip(x) {
        let p = penalty(*wk);
        *wk += gain * xk - p;
    }
    state.n += 1;
    Ok(e)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn za_term(rho: f64) -> impl Fn(C64) -> C64 {
    move |w| sign(w) * rho
}

fn rza_term(rho: f64, epsilon: f64) -> impl Fn(C64) -> C64 {
    move |w| {
        let m = w.norm();
        if m == 0.0 {
            zero()
        } else {
            w.unscale(m) * (rho / (1.0 + epsilon * m))
        }
    }
}

fn l0_term(rho: f64, beta: f64) -> impl Fn(C64) -> C64 {
    move |w| {
        let m = w.norm();
        if m == 0.0 {
            zero()
        } else {
            w.unscale(m) * (rho * (-beta * m).exp())
        }
    }
}

fn selective_term(rho: f64, level: f64) -> impl Fn(C64) -> C64 {
    move |w| if w.norm_sqr() >= level { zero() } else { sign(w) * rho }
}

/// `w ← w + μ e* x`.
pub fn lms_step(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64) -> Result<()> {
    penalized_update(state, x, y, mu, |_| zero()).map(drop)
}

/// Zero-attracting LMS: `w ← w + μ e* x − ρ sgn(w)`.
pub fn za_step(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64, rho: f64) -> Result<()> {
    penalized_update(state, x, y, mu, za_term(rho)).map(drop)
}

/// Reweighted zero-attracting LMS: `w ← w + μ e* x − ρ sgn(w) / (1 + ε|w|)`.
pub fn rza_step(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64, rho: f64, epsilon: f64) -> Result<()> {
    penalized_update(state, x, y, mu, rza_term(rho, epsilon)).map(drop)
}

/// ℓ0-LMS: `w ← w + μ e* x − ρ sgn(w) exp(−β|w|)`.
pub fn l0_step(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64, rho: f64, beta: f64) -> Result<()> {
    penalized_update(state, x, y, mu, l0_term(rho, beta)).map(drop)
}

/// Selective zero-attracting LMS: `w ← w + μ e* x − ρ P_s(w)`.
pub fn sza_step(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64, rho: f64, s: usize) -> Result<()> {
    let level = threshold_level(&state.w, s, &mut Vec::new())?;
    penalized_update(state, x, y, mu, selective_term(rho, level)).map(drop)
}

/// Hard-threshold LMS: `w ← H_s(w + μ e* x)`.
pub fn hard_step(state: &mut EstimatorState, x: &[C64], y: C64, mu: f64, s: usize) -> Result<()> {
    check_budget(s, state.w.len())?;
    lms_step(state, x, y, mu)?;
    hard_threshold_in_place(&mut state.w, s, &mut Vec::new())
}

/// `w ← H_s(w + μ e* x − ρ sgn(w) exp(−β|w|))`.
pub fn hard_l0_step(
    state: &mut EstimatorState,
    x: &[C64],
    y: C64,
    mu: f64,
    rho: f64,
    beta: f64,
    s: usize,
) -> Result<()> {
    check_budget(s, state.w.len())?;
    l0_step(state, x, y, mu, rho, beta)?;
    hard_threshold_in_place(&mut state.w, s, &mut Vec::new())
}

fn check_budget(s: usize, len: usize) -> Result<()> {
    if s == 0 || s > len {
        Err(Error::SparsityOutOfRange { s, len })
    } else {
        Ok(())
    }
}

/// A configured estimator driving one of the update rules over a stream,
/// with burn-in handling and an optional sparsity tracker.
#[derive(Debug, Clone)]
pub struct Estimator {
    config: EstimatorConfig,
    state: EstimatorState,
    tracker: Option<Tracker>,
    scratch: Vec<f64>,
    budget: Option<usize>,
}

impl Estimator {
    pub fn new(len: usize, config: EstimatorConfig, tracker: Option<TrackerConfig>) -> Result<Self> {
        config.validate(len)?;
        if config.variant.uses_budget() && config.sparsity == Sparsity::Adaptive && tracker.is_none() {
            return Err(Error::invalid("adaptive sparsity needs a tracker configuration"));
        }
        let tracker = tracker.map(|t| Tracker::new(len, t)).transpose()?;
        let budget = match (config.variant.uses_budget(), config.sparsity) {
            (true, Sparsity::Fixed(s)) => Some(s),
            _ => None,
        };
        Ok(Self { config, state: EstimatorState::new(len), tracker, scratch: Vec::with_capacity(len), budget })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn state(&self) -> &EstimatorState {
        &self.state
    }

    pub fn estimate(&self) -> &[C64] {
        &self.state.w
    }

    pub fn tracker(&self) -> Option<&Tracker> {
        self.tracker.as_ref()
    }

    /// Budget `s` used by the most recent step (for adaptive estimators, the
    /// tracker's latest count, also reported during burn-in).
    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    pub fn in_burn_in(&self) -> bool {
        self.state.n < self.config.burn_in
    }

    /// Consumes one measurement `(x(n), y(n))` and returns `e(n)`.
    pub fn step(&mut self, x: &[C64], y: C64) -> Result<C64> {
        let len = self.state.w.len();
        check_len(len, x.len())?;
        let burn_in = self.in_burn_in();
        let cfg = &self.config;

        // The budget is read from w(n) and err(n) before b(n) enters the tracker.
        let mut mask = None;
        if cfg.variant.uses_budget() && cfg.sparsity == Sparsity::Adaptive {
            let tracker = self.tracker.as_ref().expect("checked at construction");
            let occupied = tracker.occupied(&self.state.w)?;
            self.budget = Some(occupied.len().clamp(1, len));
            if tracker.config().support_shortcut {
                mask = Some(occupied);
            }
        }

        let (mu, rho) = (cfg.mu, cfg.rho);
        let e = match (cfg.variant, burn_in) {
            (Variant::Lms | Variant::Hard, _) | (Variant::Za | Variant::Rza | Variant::L0 | Variant::Sza, true) => {
                penalized_update(&mut self.state, x, y, mu, |_| zero())?
            }
            (Variant::Za, false) => penalized_update(&mut self.state, x, y, mu, za_term(rho))?,
            (Variant::Rza, false) => penalized_update(&mut self.state, x, y, mu, rza_term(rho, cfg.epsilon))?,
            (Variant::L0 | Variant::HardL0, _) => penalized_update(&mut self.state, x, y, mu, l0_term(rho, cfg.beta))?,
            (Variant::Sza, false) => {
                let s = self.budget.expect("budgeted variant");
                let level = threshold_level(&self.state.w, s, &mut self.scratch)?;
                penalized_update(&mut self.state, x, y, mu, selective_term(rho, level))?
            }
        };

        if let Some(tracker) = self.tracker.as_mut() {
            tracker.observe(e, x)?;
        }

        if cfg.variant.thresholds() && !burn_in {
            match mask {
                Some(keep) => {
                    for (i, w) in self.state.w.iter_mut().enumerate() {
                        if !keep.contains(i) {
                            *w = zero();
                        }
                    }
                }
                None => {
                    let s = self.budget.expect("budgeted variant");
                    hard_threshold_in_place(&mut self.state.w, s, &mut self.scratch)?;
                }
            }
        }
        Ok(e)
    }
}
