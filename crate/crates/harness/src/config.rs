//! TOML experiment files and the built-in presets.
//!
//! ```toml
//! name = "exp2"
//! trials = 200
//! seed = 2
//!
//! [signal]
//! len = 1000
//! sines = 10
//! snr_db = 20.0
//!
//! [sensing]
//! measurements = 200
//! passes = 100            # or `windows = W` for a windowed stream
//!
//! [[algorithm]]
//! label = "HARD-EST"
//! variant = "hard"
//! mu = 1.0
//! sparsity = "adaptive"   # or an integer budget
//! burn_in = "2M"          # or an integer sample count
//! tracker = { lambda = 0.99, xi = 1.0, q_star_fraction = 0.1 }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sparsense_core::estimator::{Sparsity, Variant};
use sparsense_core::sensing::StreamMode;

use crate::error::{config_err, HarnessError, Result};
use crate::experiment::{AlgorithmSpec, BurnIn, ExperimentSpec, SignalChange, SignalPlan, Threshold, TrackerPlan};

pub const PRESETS: &[(&str, &str)] = &[
    ("exp1", include_str!("../presets/exp1.toml")),
    ("exp2", include_str!("../presets/exp2.toml")),
    ("exp3", include_str!("../presets/exp3.toml")),
    ("exp-msweep", include_str!("../presets/exp-msweep.toml")),
    ("exp4-tracking", include_str!("../presets/exp4-tracking.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub signal: SignalSection,
    pub sensing: SensingSection,
    #[serde(rename = "algorithm")]
    pub algorithms: Vec<AlgorithmSection>,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    pub len: usize,
    pub sines: usize,
    #[serde(default = "unit")]
    pub amplitude: f64,
    /// Omit for a noiseless signal.
    pub snr_db: Option<f64>,
    pub change: Option<ChangeSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangeSection {
    pub after_window: usize,
    pub added_sines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingSection {
    pub measurements: usize,
    pub passes: Option<usize>,
    pub windows: Option<usize>,
    pub sweep: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Fixed(usize),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSection {
    pub label: String,
    pub variant: String,
    pub mu: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default = "unit")]
    pub epsilon: f64,
    pub sparsity: Option<Count>,
    pub burn_in: Option<Count>,
    pub tracker: Option<TrackerSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSection {
    pub lambda: f64,
    pub xi: f64,
    pub q_star: Option<f64>,
    pub q_star_fraction: Option<f64>,
    #[serde(default)]
    pub support_shortcut: bool,
}

fn parse_burn_in(count: &Option<Count>) -> Result<BurnIn> {
    match count {
        None => Ok(BurnIn::Samples(0)),
        Some(Count::Fixed(n)) => Ok(BurnIn::Samples(*n)),
        Some(Count::Named(s)) => {
            let t = s.trim();
            let factor = t.strip_suffix(['M', 'm']).ok_or_else(|| {
                config_err(format!("burn_in {s:?}: expected a sample count or a multiple of M like \"2M\""))
            })?;
            let factor = if factor.is_empty() {
                1.0
            } else {
                factor.trim().parse::<f64>().map_err(|_| config_err(format!("burn_in {s:?}: bad multiplier")))?
            };
            if factor.is_nan() || factor < 0.0 {
                return Err(config_err(format!("burn_in {s:?} is negative")));
            }
            Ok(BurnIn::PerMeasurement(factor))
        }
    }
}

fn parse_sparsity(count: &Option<Count>, variant: Variant) -> Result<Sparsity> {
    match count {
        Some(Count::Fixed(s)) => Ok(Sparsity::Fixed(*s)),
        Some(Count::Named(s)) if s.eq_ignore_ascii_case("adaptive") => Ok(Sparsity::Adaptive),
        Some(Count::Named(s)) => Err(config_err(format!("sparsity {s:?}: expected an integer or \"adaptive\""))),
        None if variant.uses_budget() => Err(config_err(format!("variant {variant} needs a sparsity budget"))),
        None => Ok(Sparsity::Fixed(1)),
    }
}

impl TrackerSection {
    fn to_plan(&self) -> Result<TrackerPlan> {
        let q_star = match (self.q_star, self.q_star_fraction) {
            (Some(v), None) => Threshold::Absolute(v),
            (None, Some(f)) => Threshold::FractionOfQ(f),
            _ => return Err(config_err("tracker needs exactly one of q_star and q_star_fraction")),
        };
        Ok(TrackerPlan { lambda: self.lambda, xi: self.xi, q_star, support_shortcut: self.support_shortcut })
    }

    fn from_plan(plan: &TrackerPlan) -> Self {
        let (q_star, q_star_fraction) = match plan.q_star {
            Threshold::Absolute(v) => (Some(v), None),
            Threshold::FractionOfQ(f) => (None, Some(f)),
        };
        Self { lambda: plan.lambda, xi: plan.xi, q_star, q_star_fraction, support_shortcut: plan.support_shortcut }
    }
}

impl AlgorithmSection {
    fn to_spec(&self) -> Result<AlgorithmSpec> {
        let variant: Variant = self.variant.parse()?;
        let sparsity = parse_sparsity(&self.sparsity, variant)?;
        let tracker = self.tracker.as_ref().map(TrackerSection::to_plan).transpose()?;
        if sparsity == Sparsity::Adaptive && tracker.is_none() {
            return Err(config_err(format!("{}: adaptive sparsity needs a [tracker] table", self.label)));
        }
        Ok(AlgorithmSpec {
            label: self.label.clone(),
            variant,
            mu: self.mu,
            rho: self.rho,
            beta: self.beta,
            epsilon: self.epsilon,
            sparsity,
            burn_in: parse_burn_in(&self.burn_in)?,
            tracker,
        })
    }

    fn from_spec(spec: &AlgorithmSpec) -> Self {
        Self {
            label: spec.label.clone(),
            variant: spec.variant.name().to_owned(),
            mu: spec.mu,
            rho: spec.rho,
            beta: spec.beta,
            epsilon: spec.epsilon,
            sparsity: spec.variant.uses_budget().then(|| match spec.sparsity {
                Sparsity::Fixed(s) => Count::Fixed(s),
                Sparsity::Adaptive => Count::Named("adaptive".into()),
            }),
            burn_in: Some(match spec.burn_in {
                BurnIn::Samples(n) => Count::Fixed(n),
                BurnIn::PerMeasurement(f) => Count::Named(format!("{f}M")),
            }),
            tracker: spec.tracker.as_ref().map(TrackerSection::from_plan),
        }
    }
}

impl ExperimentFile {
    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let mode = match (self.sensing.passes, self.sensing.windows) {
            (Some(passes), None) => StreamMode::RepeatedPass { passes },
            (None, Some(windows)) => StreamMode::Windowed { windows },
            _ => return Err(config_err("[sensing] needs exactly one of `passes` and `windows`")),
        };
        let spec = ExperimentSpec {
            name: self.name.clone(),
            description: self.description.clone(),
            signal: SignalPlan {
                len: self.signal.len,
                sines: self.signal.sines,
                amplitude: self.signal.amplitude,
                snr_db: self.signal.snr_db.unwrap_or(f64::INFINITY),
                change: self
                    .signal
                    .change
                    .as_ref()
                    .map(|c| SignalChange { after_window: c.after_window, added_sines: c.added_sines }),
            },
            measurements: self.sensing.measurements,
            mode,
            sweep: self.sensing.sweep.clone(),
            algorithms: self.algorithms.iter().map(AlgorithmSection::to_spec).collect::<Result<_>>()?,
            trials: self.trials,
            seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_spec(spec: &ExperimentSpec) -> Self {
        let (passes, windows) = match spec.mode {
            StreamMode::RepeatedPass { passes } => (Some(passes), None),
            StreamMode::Windowed { windows } => (None, Some(windows)),
        };
        Self {
            name: spec.name.clone(),
            description: spec.description.clone(),
            trials: spec.trials,
            seed: spec.seed,
            signal: SignalSection {
                len: spec.signal.len,
                sines: spec.signal.sines,
                amplitude: spec.signal.amplitude,
                snr_db: spec.signal.snr_db.is_finite().then_some(spec.signal.snr_db),
                change: spec
                    .signal
                    .change
                    .as_ref()
                    .map(|c| ChangeSection { after_window: c.after_window, added_sines: c.added_sines }),
            },
            sensing: SensingSection { measurements: spec.measurements, passes, windows, sweep: spec.sweep.clone() },
            algorithms: spec.algorithms.iter().map(AlgorithmSection::from_spec).collect(),
        }
    }
}

pub fn parse_str(text: &str, origin: &Path) -> Result<ExperimentSpec> {
    let file: ExperimentFile =
        toml::from_str(text).map_err(|source| HarnessError::Parse { path: origin.to_owned(), source })?;
    file.to_spec()
}

pub fn to_toml(spec: &ExperimentSpec) -> Result<String> {
    toml::to_string_pretty(&ExperimentFile::from_spec(spec)).map_err(|e| config_err(e.to_string()))
}

pub fn preset(name: &str) -> Option<ExperimentSpec> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_str(text, Path::new(n)).expect("shipped presets parse"))
}

/// Resolves a preset name or a path to a config file.
pub fn load(name_or_path: &str) -> Result<ExperimentSpec> {
    if let Some(spec) = preset(name_or_path) {
        return Ok(spec);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        return Err(config_err(format!(
            "{name_or_path:?} is neither a preset ({}) nor an existing file",
            names.join(", ")
        )));
    }
    parse_str(&std::fs::read_to_string(path)?, path)
}

/// Rescales an experiment to window length `len`, keeping the undersampling
/// ratio `M/N` and any absolute burn-in proportional.
pub fn rescale(spec: &ExperimentSpec, len: usize) -> Result<ExperimentSpec> {
    let ratio = len as f64 / spec.signal.len as f64;
    let scale = |m: usize| ((m as f64 * ratio).round() as usize).clamp(1, len);
    let mut out = spec.clone();
    out.signal.len = len;
    out.measurements = scale(spec.measurements);
    out.sweep = spec.sweep.as_ref().map(|ms| ms.iter().copied().map(scale).collect());
    for a in &mut out.algorithms {
        if let BurnIn::Samples(n) = a.burn_in {
            a.burn_in = BurnIn::Samples((n as f64 * ratio).round() as usize);
        }
        if let Sparsity::Fixed(s) = a.sparsity {
            a.sparsity = Sparsity::Fixed(s.min(len));
        }
    }
    out.validate()?;
    Ok(out)
}
