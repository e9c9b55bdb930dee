//! Experiment specifications and the Monte-Carlo trial runner.

use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sparsense_core::estimator::{Estimator, EstimatorConfig, Sparsity, Variant};
use sparsense_core::metrics::{rmse, to_db};
use sparsense_core::sensing::{make_stream, MeasurementStream, SensingConfig, StreamMode};
use sparsense_core::signal::{multisine, true_spectrum, SignalSpec};
use sparsense_core::sparse::{support, SupportSet};
use sparsense_core::tracker::TrackerConfig;
use sparsense_core::C64;

use crate::error::{config_err, Result};

/// A spectrum change partway through a windowed stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalChange {
    /// First window that carries the augmented signal.
    pub after_window: usize,
    pub added_sines: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalPlan {
    pub len: usize,
    pub sines: usize,
    pub amplitude: f64,
    pub snr_db: f64,
    pub change: Option<SignalChange>,
}

impl SignalPlan {
    /// Smallest nonzero true spectral magnitude `q = A √N / 2`.
    pub fn min_magnitude(&self) -> f64 {
        self.amplitude * (self.len as f64).sqrt() / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BurnIn {
    Samples(usize),
    /// Multiples of the per-window measurement count `M`.
    PerMeasurement(f64),
}

impl BurnIn {
    pub fn resolve(self, measurements: usize) -> usize {
        match self {
            BurnIn::Samples(n) => n,
            BurnIn::PerMeasurement(f) => (f * measurements as f64).round() as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Absolute(f64),
    /// Fraction of the true minimum magnitude `q`.
    FractionOfQ(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerPlan {
    pub lambda: f64,
    pub xi: f64,
    pub q_star: Threshold,
    pub support_shortcut: bool,
}

impl TrackerPlan {
    pub fn resolve(&self, signal: &SignalPlan) -> TrackerConfig {
        let q_star = match self.q_star {
            Threshold::Absolute(v) => v,
            Threshold::FractionOfQ(f) => f * signal.min_magnitude(),
        };
        TrackerConfig { lambda: self.lambda, xi: self.xi, q_star, support_shortcut: self.support_shortcut }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSpec {
    pub label: String,
    pub variant: Variant,
    pub mu: f64,
    pub rho: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub sparsity: Sparsity,
    pub burn_in: BurnIn,
    pub tracker: Option<TrackerPlan>,
}

impl AlgorithmSpec {
    pub fn new(label: impl Into<String>, variant: Variant, mu: f64) -> Self {
        Self {
            label: label.into(),
            variant,
            mu,
            rho: 0.0,
            beta: 0.0,
            epsilon: 1.0,
            sparsity: Sparsity::Fixed(1),
            burn_in: BurnIn::Samples(0),
            tracker: None,
        }
    }

    pub fn estimator_config(&self, measurements: usize) -> EstimatorConfig {
        EstimatorConfig {
            variant: self.variant,
            mu: self.mu,
            rho: self.rho,
            beta: self.beta,
            epsilon: self.epsilon,
            sparsity: self.sparsity,
            burn_in: self.burn_in.resolve(measurements),
        }
    }

    pub fn build(&self, signal: &SignalPlan, measurements: usize) -> Result<Estimator> {
        let tracker = self.tracker.as_ref().map(|t| t.resolve(signal));
        Ok(Estimator::new(signal.len, self.estimator_config(measurements), tracker)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub description: String,
    pub signal: SignalPlan,
    pub measurements: usize,
    pub mode: StreamMode,
    /// When set, the experiment is repeated for each listed `M` and only
    /// steady-state values are reported.
    pub sweep: Option<Vec<usize>>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub trials: usize,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        if self.algorithms.is_empty() {
            return Err(config_err("experiment lists no algorithms"));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].iter().any(|b| b.label == a.label) {
                return Err(config_err(format!("duplicate algorithm label {:?}", a.label)));
            }
        }
        let total_sines = self.signal.sines + self.signal.change.as_ref().map_or(0, |c| c.added_sines);
        let bins = (self.signal.len.max(1) - 1) / 2;
        if self.signal.sines == 0 || total_sines > bins {
            return Err(config_err(format!(
                "{total_sines} sines do not fit in the {bins} usable bins of a length-{} window",
                self.signal.len
            )));
        }
        if let Some(change) = &self.signal.change {
            if !matches!(self.mode, StreamMode::Windowed { .. }) {
                return Err(config_err("a signal change requires windowed sensing"));
            }
            if change.after_window == 0 || change.after_window >= self.sensing(self.measurements, 0).windows() {
                return Err(config_err("signal change must fall strictly inside the stream"));
            }
        }
        for m in self.measurement_grid() {
            self.sensing(m, 0).validate()?;
            for a in &self.algorithms {
                a.build(&self.signal, m)?;
            }
        }
        Ok(())
    }

    pub fn sensing(&self, measurements: usize, seed: u64) -> SensingConfig {
        SensingConfig { len: self.signal.len, measurements, mode: self.mode, seed }
    }

    /// The `M` values this experiment runs at.
    pub fn measurement_grid(&self) -> Vec<usize> {
        self.sweep.clone().unwrap_or_else(|| vec![self.measurements])
    }

    pub fn algorithm(&self, label: &str) -> Option<&AlgorithmSpec> {
        self.algorithms.iter().find(|a| a.label == label)
    }
}

/// Per-trial seed: independent of how many trials run or in which order.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial as u64 + 1);
    rng.next_u64()
}

fn sub_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Signal, ground truth and measurement stream for one trial. Every algorithm
/// of the trial sees the same data.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub seed: u64,
    pub signals: Vec<SignalSpec>,
    pub truths: Vec<Vec<C64>>,
    pub stream: MeasurementStream,
    pub measurements: usize,
    change_after: Option<usize>,
}

impl TrialData {
    pub fn build(spec: &ExperimentSpec, measurements: usize, seed: u64) -> Result<Self> {
        let plan = &spec.signal;
        let mut signal_rng = sub_rng(seed, 1);
        let first = SignalSpec::random(plan.len, plan.sines, plan.amplitude, plan.snr_db, &mut signal_rng)?;
        let mut signals = vec![first];
        if let Some(change) = &plan.change {
            let next = signals[0].augmented(change.added_sines, plan.amplitude, &mut signal_rng)?;
            signals.push(next);
        }
        let waves = signals.iter().map(multisine).collect::<Result<Vec<_>, _>>()?;
        let sigmas: Vec<f64> = signals.iter().map(|s| s.noise_variance().sqrt()).collect();
        let truths = signals.iter().map(true_spectrum).collect::<Result<Vec<_>, _>>()?;
        let change_after = plan.change.as_ref().map(|c| c.after_window);

        let sensing = spec.sensing(measurements, sub_rng(seed, 2).next_u64());
        let mut noise_rng = sub_rng(seed, 3);
        let len = plan.len;
        let mut source = |t: usize| -> Option<f64> {
            let phase = usize::from(change_after.is_some_and(|c| t / len >= c));
            let noise: f64 = StandardNormal.sample(&mut noise_rng);
            Some(waves[phase][t % len] + sigmas[phase] * noise)
        };
        let stream = make_stream(&sensing, &mut source)?;
        Ok(Self { seed, signals, truths, stream, measurements, change_after })
    }

    /// Ground truth in effect for a given window.
    pub fn truth(&self, window: usize) -> &[C64] {
        let phase = usize::from(self.change_after.is_some_and(|c| window >= c));
        &self.truths[phase]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub label: String,
    pub trial: usize,
    pub seed: u64,
    /// Linear r-MSE after every stream sample.
    pub rmse: Vec<f64>,
    /// Sparsity budget used at every sample; 0 for unbudgeted variants.
    pub s_trajectory: Vec<u32>,
    pub final_support: SupportSet,
    pub wallclock: Duration,
}

impl TrialRecord {
    pub fn rmse_db_trajectory(&self) -> Vec<f64> {
        self.rmse.iter().copied().map(to_db).collect()
    }

    /// First iteration (1-based count of consumed samples) at which r-MSE
    /// reaches `level_db` or below.
    pub fn iterations_to_reach(&self, level_db: f64) -> Option<usize> {
        self.rmse.iter().position(|&r| to_db(r) <= level_db).map(|i| i + 1)
    }

    /// Mean linear r-MSE over samples `range`.
    pub fn mean_rmse(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.rmse[range];
        slice.iter().sum::<f64>() / slice.len() as f64
    }

    pub fn mean_budget(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.s_trajectory[range];
        slice.iter().map(|&s| s as f64).sum::<f64>() / slice.len() as f64
    }
}

/// Runs one algorithm over prepared trial data.
pub fn run_on(data: &TrialData, algo: &AlgorithmSpec, spec: &ExperimentSpec, trial: usize) -> Result<TrialRecord> {
    let start = Instant::now();
    let stream = &data.stream;
    let mut est = algo.build(&spec.signal, data.measurements)?;
    let basis = stream.basis();
    let mut x = vec![C64::new(0.0, 0.0); basis.len()];
    let mut rmse_traj = Vec::with_capacity(stream.len());
    let mut s_traj = Vec::with_capacity(stream.len());
    for obs in stream.observations() {
        basis.fill_row(obs.index, &mut x)?;
        est.step(&x, C64::new(obs.y, 0.0))?;
        rmse_traj.push(rmse(data.truth(obs.window), est.estimate())?);
        s_traj.push(est.budget().unwrap_or(0) as u32);
    }
    Ok(TrialRecord {
        label: algo.label.clone(),
        trial,
        seed: data.seed,
        rmse: rmse_traj,
        s_trajectory: s_traj,
        final_support: support(est.estimate(), 0.0),
        wallclock: start.elapsed(),
    })
}

/// One trial of one algorithm, deterministic in `(spec.seed, trial)`.
pub fn run_trial(spec: &ExperimentSpec, label: &str, trial: usize) -> Result<TrialRecord> {
    let algo = spec.algorithm(label).ok_or_else(|| config_err(format!("no algorithm labelled {label:?}")))?;
    let data = TrialData::build(spec, spec.measurements, trial_seed(spec.seed, trial))?;
    run_on(&data, algo, spec, trial)
}

/// Runs every algorithm on every trial (trials in parallel). Records are
/// returned per algorithm, in trial order.
pub fn run_trials(spec: &ExperimentSpec, measurements: usize) -> Result<Vec<Vec<TrialRecord>>> {
    spec.validate()?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let data = TrialData::build(spec, measurements, trial_seed(spec.seed, trial))?;
            spec.algorithms.iter().map(|a| run_on(&data, a, spec, trial)).collect()
        })
        .collect::<Result<_>>()?;
    let mut by_algo: Vec<Vec<TrialRecord>> = spec.algorithms.iter().map(|_| Vec::with_capacity(spec.trials)).collect();
    for records in per_trial {
        for (slot, rec) in by_algo.iter_mut().zip(records) {
            slot.push(rec);
        }
    }
    Ok(by_algo)
}
