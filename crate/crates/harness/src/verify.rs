//! Randomized property suites for the support-recovery guarantees of the
//! hard-threshold operator and the steady-state bias of selective
//! zero-attracting LMS.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sparsense_core::estimator::{sza_step, EstimatorState};
use sparsense_core::sensing::SensingBasis;
use sparsense_core::sparse::{relaxed_bound, relaxed_recovery_check, ser, strict_bound, strict_recovery_check};
use sparsense_core::C64;

use crate::stats::{mean, std_error};

/// Largest window length drawn by the support-recovery suites.
pub const MAX_LEN: usize = 32;

/// Draws land at most this fraction of the way to the premise boundary, so
/// that rounding cannot push a draw outside the premise.
const INSIDE: f64 = 1.0 - 1e-9;

/// Outcome of one named check, for CLI and acceptance reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Perturbation {
    /// Gaussian direction over every coordinate.
    Dense,
    /// Gaussian direction over a random subset.
    Sparse,
    /// Shrink the smallest true coefficient and grow off-support
    /// coordinates by the same final magnitude: the worst case.
    Adversarial,
}

const KINDS: [Perturbation; 3] = [Perturbation::Dense, Perturbation::Sparse, Perturbation::Adversarial];

fn unit_phase<R: Rng>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

fn gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// An `s`-sparse vector of length `len` whose smallest nonzero magnitude is
/// exactly `q`. Returns the vector and the index holding `q`.
fn sparse_truth<R: Rng>(rng: &mut R, len: usize, s: usize, q: f64) -> (Vec<C64>, usize) {
    let idx = rand::seq::index::sample(rng, len, s).into_vec();
    let mut w = vec![C64::new(0.0, 0.0); len];
    for (j, &i) in idx.iter().enumerate() {
        let mag = if j == 0 { q } else { q * (1.0 + 2.0 * rng.random::<f64>()) };
        w[i] = unit_phase(rng) * mag;
    }
    (w, idx[0])
}

/// Squared radius in `(0, bound)`, half the time hugging the boundary.
fn radius2<R: Rng>(rng: &mut R, bound: f64) -> f64 {
    let u: f64 = rng.random();
    let frac = if rng.random_bool(0.5) { u } else { 1.0 - 1e-3 * u };
    bound * INSIDE * frac.max(1e-12)
}

/// Perturbation direction (unnormalized). `spread` is the number of
/// off-support coordinates raised in the adversarial case.
fn direction<R: Rng>(rng: &mut R, kind: Perturbation, w: &[C64], weakest: usize, spread: usize) -> Vec<C64> {
    let len = w.len();
    match kind {
        Perturbation::Dense => (0..len).map(|_| gaussian(rng)).collect(),
        Perturbation::Sparse => {
            let k = rng.random_range(1..=len);
            let mut e = vec![C64::new(0.0, 0.0); len];
            for i in rand::seq::index::sample(rng, len, k) {
                e[i] = gaussian(rng);
            }
            e
        }
        Perturbation::Adversarial => {
            // final magnitudes all equal to t = q / (spread + 1), the error
            // minimizer for pushing `spread` zeros past the weakest coefficient
            let q = w[weakest].norm();
            let t = q / (spread as f64 + 1.0);
            let off: Vec<usize> = (0..len).filter(|&i| w[i] == C64::new(0.0, 0.0)).collect();
            let mut e = vec![C64::new(0.0, 0.0); len];
            e[weakest] = -w[weakest] / q * (q - t);
            for j in rand::seq::index::sample(rng, off.len(), spread.min(off.len())) {
                e[off[j]] = unit_phase(rng) * t;
            }
            e
        }
    }
}

fn scaled(e: Vec<C64>, r2: f64) -> Vec<C64> {
    let norm2: f64 = e.iter().map(|c| c.norm_sqr()).sum();
    let k = (r2 / norm2).sqrt();
    e.into_iter().map(|c| c * k).collect()
}

fn add(w: &[C64], e: &[C64]) -> Vec<C64> {
    w.iter().zip(e).map(|(a, b)| a + b).collect()
}

/// Tally of a support-recovery suite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecoveryReport {
    pub draws: usize,
    pub premise_held: usize,
    pub conclusion_held: usize,
    /// Draws whose signal-to-error ratio exceeded the implied `2s` floor
    /// (strict suite only).
    pub ser_above_floor: usize,
    /// The near-boundary counterexample breaks the conclusion.
    pub tight: bool,
}

impl RecoveryReport {
    pub fn passed(&self) -> bool {
        self.draws > 0
            && self.premise_held == self.draws
            && self.conclusion_held == self.draws
            && self.ser_above_floor == self.draws
            && self.tight
    }

    fn merge(mut self, other: Self) -> Self {
        self.draws += other.draws;
        self.premise_held += other.premise_held;
        self.conclusion_held += other.conclusion_held;
        self.ser_above_floor += other.ser_above_floor;
        self
    }
}

const CHUNK: usize = 1000;

fn chunked<F>(draws: usize, seed: u64, per_draw: F) -> RecoveryReport
where
    F: Fn(&mut ChaCha8Rng, usize) -> (bool, bool, bool) + Sync,
{
    let chunks = draws.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut rep = RecoveryReport::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(draws) {
                let (p, q, s) = per_draw(&mut rng, i);
                rep.draws += 1;
                rep.premise_held += usize::from(p);
                rep.conclusion_held += usize::from(p && q);
                rep.ser_above_floor += usize::from(s);
            }
            rep
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(RecoveryReport::default(), RecoveryReport::merge)
}

/// Two-coordinate counterexample with error `q²/2 + excess`.
pub fn strict_counterexample(q: f64, excess: f64) -> (Vec<C64>, Vec<C64>) {
    // |ŵ_k| = q/2 + δ, |ŵ_ℓ| = q/2 − δ, error 2(q/2 + δ)² = q²/2 + excess
    let delta = ((q * q / 4.0 + excess / 2.0).sqrt()) - q / 2.0;
    let w = vec![C64::new(q, 0.0), C64::new(0.0, 0.0), C64::new(3.0 * q, 0.0)];
    let est = vec![C64::new(q / 2.0 - delta, 0.0), C64::new(q / 2.0 + delta, 0.0), w[2]];
    (w, est)
}

/// Counterexample for the relaxed bound: `τ + 1` zeros overtake the
/// weakest coefficient with total error `q²(1 − 1/(τ+2)) + excess`.
pub fn relaxed_counterexample(q: f64, tau: usize, excess: f64) -> (Vec<C64>, Vec<C64>) {
    let k = tau as f64 + 2.0;
    let t = q / k;
    // error(δ) = (q − t + δ)² + (τ+1)(t + δ)² = bound + 4q(τ+1)δ/k + kδ²
    let (a, b) = (k, 4.0 * q * (tau as f64 + 1.0) / k);
    let delta = (-b + (b * b + 4.0 * a * excess).sqrt()) / (2.0 * a);
    let len = tau + 4;
    let mut w = vec![C64::new(0.0, 0.0); len];
    w[0] = C64::new(q, 0.0);
    w[len - 1] = C64::new(0.0, 5.0 * q);
    let mut est = w.clone();
    est[0] = C64::new(t - delta, 0.0);
    for c in est.iter_mut().skip(1).take(tau + 1) {
        *c = C64::new(t + delta, 0.0);
    }
    (w, est)
}

/// Strict-bound suite: `draws` random pairs with `‖w − ŵ‖² < q²/2`, `N ≤ 32`.
pub fn strict_suite(draws: usize, seed: u64) -> RecoveryReport {
    let mut rep = chunked(draws, seed, |rng, i| {
        let len = rng.random_range(2..=MAX_LEN);
        let s = rng.random_range(1..len);
        let q = rng.random_range(0.1..4.0);
        let (w, weakest) = sparse_truth(rng, len, s, q);
        let kind = KINDS[i % KINDS.len()];
        let e = scaled(direction(rng, kind, &w, weakest, 1), radius2(rng, strict_bound(q)));
        let est = add(&w, &e);
        let check = strict_recovery_check(&w, &est).expect("valid draw");
        let ser_ok = ser(&w, &est).expect("nonzero truth") > 2.0 * s as f64;
        (check.premise, check.conclusion, ser_ok)
    });
    let (w, est) = strict_counterexample(1.0, 1e-6);
    let check = strict_recovery_check(&w, &est).expect("valid counterexample");
    rep.tight = !check.premise && !check.conclusion;
    rep
}

/// Relaxed-bound suite with budget slack `tau`.
pub fn relaxed_suite(draws: usize, tau: usize, seed: u64) -> RecoveryReport {
    assert!(tau > 0 && tau + 2 <= MAX_LEN);
    let mut rep = chunked(draws, seed, |rng, i| {
        let len = rng.random_range(tau + 2..=MAX_LEN);
        let s = rng.random_range(1..=len - tau - 1);
        let q = rng.random_range(0.1..4.0);
        let (w, weakest) = sparse_truth(rng, len, s, q);
        let kind = KINDS[i % KINDS.len()];
        let mut e = direction(rng, kind, &w, weakest, tau + 1);
        // the premise also asks for at least d = s + τ nonzeros in ŵ
        if kind == Perturbation::Sparse {
            let off: Vec<usize> = (0..len).filter(|&j| w[j] == C64::new(0.0, 0.0)).collect();
            for j in rand::seq::index::sample(rng, off.len(), tau) {
                if e[off[j]] == C64::new(0.0, 0.0) {
                    e[off[j]] = gaussian(rng);
                }
            }
        }
        let est = add(&w, &scaled(e, radius2(rng, relaxed_bound(q, tau))));
        let check = relaxed_recovery_check(&w, &est, tau).expect("valid draw");
        (check.premise, check.conclusion, true)
    });
    let (w, est) = relaxed_counterexample(1.0, tau, 1e-6);
    let check = relaxed_recovery_check(&w, &est, tau).expect("valid counterexample");
    rep.tight = !check.premise && !check.conclusion;
    rep
}

/// Steady-state bias experiment for selective zero-attracting LMS with
/// i.i.d. uniformly drawn, unit-magnitude DFT regressors (`R_x = I`).
#[derive(Debug, Clone, PartialEq)]
pub struct BiasConfig {
    pub len: usize,
    pub sparsity: usize,
    pub magnitude: f64,
    pub mu: f64,
    pub rho: f64,
    pub noise_std: f64,
    pub iterations: usize,
    /// Trailing iterations averaged into the per-realization estimate.
    pub average_last: usize,
    pub realizations: usize,
    pub seed: u64,
}

impl Default for BiasConfig {
    fn default() -> Self {
        Self {
            len: 32,
            sparsity: 4,
            magnitude: 1.0,
            mu: 0.01,
            rho: 1e-4,
            noise_std: 0.1,
            iterations: 3000,
            average_last: 1500,
            realizations: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub config: BiasConfig,
    pub truth: Vec<C64>,
    /// Mean over realizations of `time-averaged w − w`.
    pub bias: Vec<C64>,
    /// Standard error of each bias entry, combining both components.
    pub se: Vec<f64>,
    pub se_re: Vec<f64>,
    pub se_im: Vec<f64>,
}

impl BiasReport {
    pub fn bound(&self) -> f64 {
        self.config.rho / self.config.mu
    }

    fn on_support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.truth.len()).filter(|&i| self.truth[i] != C64::new(0.0, 0.0))
    }

    fn off_support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.truth.len()).filter(|&i| self.truth[i] == C64::new(0.0, 0.0))
    }

    /// Largest `|bias_i| − (ρ/μ + 3·SE_i)` over off-support coordinates.
    pub fn off_support_excess(&self) -> f64 {
        self.off_support()
            .map(|i| self.bias[i].norm() - (self.bound() + 3.0 * self.se[i]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_off_support_bias(&self) -> f64 {
        self.off_support().map(|i| self.bias[i].norm()).fold(0.0, f64::max)
    }

    /// Largest on-support component bias in units of its standard error.
    /// The `±3 SE` interval per real component is a joint interval of at
    /// least 95% over the `2s` components.
    pub fn max_on_support_z(&self) -> f64 {
        self.on_support()
            .flat_map(|i| [self.bias[i].re.abs() / self.se_re[i], self.bias[i].im.abs() / self.se_im[i]])
            .fold(0.0, f64::max)
    }

    pub fn off_support_ok(&self) -> bool {
        self.off_support_excess() <= 0.0
    }

    pub fn on_support_ok(&self) -> bool {
        self.max_on_support_z() <= 3.0
    }
}

pub fn sza_bias(config: &BiasConfig) -> BiasReport {
    let len = config.len;
    let mut setup = ChaCha8Rng::seed_from_u64(config.seed);
    let (truth, _) = sparse_truth(&mut setup, len, config.sparsity, config.magnitude);
    let basis = SensingBasis::new(len).expect("positive length");
    let root = (len as f64).sqrt();
    let averages: Vec<Vec<C64>> = (0..config.realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64 + 1);
            let mut state = EstimatorState::new(len);
            let mut x = vec![C64::new(0.0, 0.0); len];
            let mut acc = vec![C64::new(0.0, 0.0); len];
            let start = config.iterations - config.average_last;
            for n in 0..config.iterations {
                basis.fill_row(rng.random_range(0..len), &mut x).expect("index in range");
                x.iter_mut().for_each(|c| *c *= root);
                let clean: C64 = truth.iter().zip(&x).map(|(w, xk)| w.conj() * xk).sum();
                let noise = gaussian(&mut rng) * (config.noise_std / 2f64.sqrt());
                sza_step(&mut state, &x, clean + noise, config.mu, config.rho, config.sparsity).expect("valid step");
                if n >= start {
                    acc.iter_mut().zip(&state.w).for_each(|(a, w)| *a += w);
                }
            }
            acc.into_iter().map(|a| a / config.average_last as f64).collect()
        })
        .collect();
    let mut bias = Vec::with_capacity(len);
    let (mut se, mut se_re, mut se_im) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..len {
        let re: Vec<f64> = averages.iter().map(|a| a[i].re - truth[i].re).collect();
        let im: Vec<f64> = averages.iter().map(|a| a[i].im - truth[i].im).collect();
        bias.push(C64::new(mean(&re), mean(&im)));
        let (sr, si) = (std_error(&re), std_error(&im));
        se_re.push(sr);
        se_im.push(si);
        se.push(sr.hypot(si));
    }
    BiasReport { config: config.clone(), truth, bias, se, se_re, se_im }
}

fn recovery_outcome(name: &str, rep: &RecoveryReport) -> Outcome {
    Outcome {
        name: name.to_owned(),
        passed: rep.passed(),
        detail: format!(
            "{}/{} premises held, {}/{} conclusions held, counterexample {}",
            rep.premise_held,
            rep.draws,
            rep.conclusion_held,
            rep.draws,
            if rep.tight { "breaks it as expected" } else { "did NOT break it" }
        ),
    }
}

pub fn strict_outcome(draws: usize, seed: u64) -> Outcome {
    let rep = strict_suite(draws, seed);
    let mut out = recovery_outcome("strict support recovery", &rep);
    out.detail += &format!(", SER > 2s in {}/{}", rep.ser_above_floor, rep.draws);
    out
}

pub fn relaxed_outcome(draws: usize, seed: u64) -> Outcome {
    let reps: Vec<RecoveryReport> = (1..=3).map(|tau| relaxed_suite(draws, tau, seed + tau as u64)).collect();
    let passed = reps.iter().all(RecoveryReport::passed);
    let detail = reps
        .iter()
        .enumerate()
        .map(|(i, r)| {
            format!(
                "tau={}: {}/{} superset{}",
                i + 1,
                r.conclusion_held,
                r.draws,
                if r.tight { "" } else { " (not tight)" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { name: "relaxed support recovery".into(), passed, detail }
}

pub fn bias_outcome(config: &BiasConfig) -> Outcome {
    let rep = sza_bias(config);
    Outcome {
        name: "SZA steady-state bias".into(),
        passed: rep.off_support_ok() && rep.on_support_ok(),
        detail: format!(
            "max off-support |bias| {:.2e} (bound rho/mu = {:.1e} + 3 SE), max on-support |bias|/SE {:.2}",
            rep.max_off_support_bias(),
            rep.bound(),
            rep.max_on_support_z()
        ),
    }
}

/// All verification suites at the given draw count.
pub fn run_all(draws: usize, seed: u64) -> Vec<Outcome> {
    vec![
        strict_outcome(draws, seed),
        relaxed_outcome(draws, seed),
        bias_outcome(&BiasConfig { seed, ..BiasConfig::default() }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparsense_core::sparse::squared_distance;

    #[test]
    fn counterexamples_sit_just_outside_the_bounds() {
        let (w, est) = strict_counterexample(2.0, 1e-6);
        assert!((squared_distance(&w, &est) - (2.0 + 1e-6)).abs() < 1e-12);
        for tau in 1..=3 {
            let (w, est) = relaxed_counterexample(1.5, tau, 1e-6);
            let d = squared_distance(&w, &est);
            assert!((d - (relaxed_bound(1.5, tau) + 1e-6)).abs() < 1e-12, "tau {tau}: {d}");
        }
    }

    #[test]
    fn adversarial_direction_is_worst_case_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, weakest) = sparse_truth(&mut rng, 10, 3, 1.0);
        assert_eq!(w[weakest].norm(), 1.0);
        let e = direction(&mut rng, Perturbation::Adversarial, &w, weakest, 2);
        let est = add(&w, &e);
        // weakest coefficient and the two raised zeros end at magnitude 1/3
        assert!((est[weakest].norm() - 1.0 / 3.0).abs() < 1e-12);
        let raised = (0..10).filter(|&i| w[i] == C64::new(0.0, 0.0) && e[i] != C64::new(0.0, 0.0)).count();
        assert_eq!(raised, 2);
        assert!((squared_distance(&w, &est) - relaxed_bound(1.0, 1)).abs() < 1e-12);
    }

    #[test]
    fn small_suites_pass() {
        assert!(strict_suite(3000, 1).passed());
        for tau in 1..=3 {
            assert!(relaxed_suite(3000, tau, 2).passed(), "tau {tau}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(strict_suite(1500, 5), strict_suite(1500, 5));
    }
}
