//! Partial inverse-DFT sensing: regressor rows, random undersampling and
//! measurement streams.
//!
//! Regressors are the conjugated rows of the unitary IDFT matrix,
//! `x_k(n) = exp(-j 2π k n / N) / √N`. With this convention
//! `Σ_n x(n) x(n)^H = I_N`, every row has unit norm, and for a real signal
//! `z` with unitary DFT `w` the model reads `z_n = w^H x(n)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::C64;

/// How the measurement stream is formed from the sampled windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    /// Sample one window once and feed the same `M` measurements `passes` times.
    RepeatedPass { passes: usize },
    /// Split the signal into `windows` consecutive windows of length `N` and
    /// sample `M` fresh positions in each.
    Windowed { windows: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensingConfig {
    /// Window length `N` (Nyquist-grid samples per window).
    pub len: usize,
    /// Observed samples per window, `M`.
    pub measurements: usize,
    pub mode: StreamMode,
    pub seed: u64,
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.len == 0 {
            return Err(Error::invalid("window length must be positive"));
        }
        if self.measurements == 0 || self.measurements > self.len {
            return Err(Error::invalid(alloc::format!(
                "measurements per window must lie in 1..={}, got {}",
                self.len,
                self.measurements
            )));
        }
        match self.mode {
            StreamMode::RepeatedPass { passes: 0 } => Err(Error::invalid("passes must be >= 1")),
            StreamMode::Windowed { windows: 0 } => Err(Error::invalid("windows must be >= 1")),
            _ => Ok(()),
        }
    }

    /// Number of distinct sampled windows.
    pub fn windows(&self) -> usize {
        match self.mode {
            StreamMode::RepeatedPass { .. } => 1,
            StreamMode::Windowed { windows } => windows,
        }
    }

    /// Total number of samples the stream emits.
    pub fn stream_len(&self) -> usize {
        match self.mode {
            StreamMode::RepeatedPass { passes } => passes * self.measurements,
            StreamMode::Windowed { windows } => windows * self.measurements,
        }
    }
}

/// One observation: regressor `x(n)`, noisy scalar `y(n)`, global counter `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSample {
    pub x: Vec<C64>,
    pub y: C64,
    pub n: usize,
}

/// Compact stream entry. The regressor is recovered from `index` through a
/// [`SensingBasis`], so long streams never materialize `N`-length rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub window: usize,
    /// Position inside the window, `0..N`.
    pub index: usize,
    pub y: f64,
}

/// `exp(-j 2π m / N) / √N` for `m = ((k · n) mod N)`, computed directly.
fn unit_root(len: usize, m: usize) -> C64 {
    let angle = -2.0 * PI * (m as f64) / (len as f64);
    let scale = (len as f64).sqrt().recip();
    C64::new(angle.cos() * scale, angle.sin() * scale)
}

/// Row `index` of the conjugated unitary IDFT matrix of size `len`.
pub fn regressor_row(len: usize, index: usize) -> Result<Vec<C64>> {
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    Ok((0..len).map(|k| unit_root(len, (k * index) % len)).collect())
}

/// Precomputed twiddle table for fast regressor construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingBasis {
    twiddles: Vec<C64>,
}

impl SensingBasis {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("window length must be positive"));
        }
        Ok(Self { twiddles: (0..len).map(|m| unit_root(len, m)).collect() })
    }

    pub fn len(&self) -> usize {
        self.twiddles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twiddles.is_empty()
    }

    /// Writes regressor `x(index)` into `out`.
    pub fn fill_row(&self, index: usize, out: &mut [C64]) -> Result<()> {
        let len = self.len();
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        check_len(len, out.len())?;
        let mut m = 0usize;
        for slot in out.iter_mut() {
            *slot = self.twiddles[m];
            m += index;
            if m >= len {
                m -= len;
            }
        }
        Ok(())
    }

    pub fn row(&self, index: usize) -> Result<Vec<C64>> {
        let mut out = alloc::vec![C64::new(0.0, 0.0); self.len()];
        self.fill_row(index, &mut out)?;
        Ok(out)
    }

    /// Noise-free model output `w^H x(index)`.
    pub fn predict(&self, w: &[C64], index: usize) -> Result<C64> {
        let len = self.len();
        check_len(len, w.len())?;
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
        let mut m = 0usize;
        let mut acc = C64::new(0.0, 0.0);
        for wk in w {
            acc += wk.conj() * self.twiddles[m];
            m += index;
            if m >= len {
                m -= len;
            }
        }
        Ok(acc)
    }
}

/// Sorted, distinct sample positions for one window, drawn uniformly without
/// replacement. The draw depends only on `(config.seed, window)`.
pub fn sample_indices(config: &SensingConfig, window: usize) -> Result<Vec<usize>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(window as u64);
    let mut picked = rand::seq::index::sample(&mut rng, config.len, config.measurements).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Anything that can deliver the (possibly noisy) signal value observed at
/// absolute time `t = window · N + index`. `None` means the source has run out.
pub trait SignalSource {
    fn value(&mut self, t: usize) -> Option<f64>;
}

impl<F: FnMut(usize) -> Option<f64>> SignalSource for F {
    fn value(&mut self, t: usize) -> Option<f64> {
        self(t)
    }
}

/// A finite recorded signal; reads past the end exhaust the source.
#[derive(Debug, Clone, Copy)]
pub struct Recorded<'a>(pub &'a [f64]);

impl SignalSource for Recorded<'_> {
    fn value(&mut self, t: usize) -> Option<f64> {
        self.0.get(t).copied()
    }
}

/// An ordered measurement stream together with the basis that rebuilds its
/// regressors.
#[derive(Debug, Clone)]
pub struct MeasurementStream {
    basis: SensingBasis,
    observations: Vec<Observation>,
}

impl MeasurementStream {
    pub fn basis(&self) -> &SensingBasis {
        &self.basis
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Materializes the stream as [`MeasurementSample`]s, one row at a time.
    pub fn samples(&self) -> impl Iterator<Item = MeasurementSample> + '_ {
        self.observations.iter().enumerate().map(move |(n, obs)| MeasurementSample {
            x: self.basis.row(obs.index).expect("observation indices are below the window length"),
            y: C64::new(obs.y, 0.0),
            n,
        })
    }
}

/// Builds the measurement stream for `config`, reading values from `source`.
///
/// Repeated-pass mode reads the `M` sampled positions of window 0 once and
/// replays them `passes` times in ascending index order. Windowed mode reads
/// `M` fresh positions from every window.
pub fn make_stream<S: SignalSource + ?Sized>(config: &SensingConfig, source: &mut S) -> Result<MeasurementStream> {
    config.validate()?;
    let basis = SensingBasis::new(config.len)?;
    let mut read_window = |window: usize| -> Result<Vec<Observation>> {
        sample_indices(config, window)?
            .into_iter()
            .map(|index| {
                let t = window * config.len + index;
                source.value(t).map(|y| Observation { window, index, y }).ok_or(Error::StreamExhausted(t))
            })
            .collect()
    };

    let observations = match config.mode {
        StreamMode::RepeatedPass { passes } => {
            let once = read_window(0)?;
            let mut all = Vec::with_capacity(once.len() * passes);
            for _ in 0..passes {
                all.extend_from_slice(&once);
            }
            all
        }
        StreamMode::Windowed { windows } => {
            let mut all = Vec::with_capacity(windows * config.measurements);
            for window in 0..windows {
                all.extend(read_window(window)?);
            }
            all
        }
    };

    Ok(MeasurementStream { basis, observations })
}
