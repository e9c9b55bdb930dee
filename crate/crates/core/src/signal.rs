//! Multisine test signals on the DFT grid, their exact sparse spectra, and
//! calibrated white Gaussian noise.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sensing::SignalSource;
use crate::C64;

/// A sum of `k` zero-phase sines at distinct grid bins `m_i ∈ 1..N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    pub len: usize,
    pub bins: Vec<usize>,
    pub amplitudes: Vec<f64>,
    /// Measurement SNR in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,
}

impl SignalSpec {
    /// `sines` equal-amplitude sines at distinct bins drawn uniformly from
    /// `1..N/2`.
    pub fn random<R: Rng + ?Sized>(len: usize, sines: usize, amplitude: f64, snr_db: f64, rng: &mut R) -> Result<Self> {
        let avail = available_bins(len);
        if sines == 0 || sines > avail {
            return Err(Error::invalid(alloc::format!(
                "cannot place {sines} sines on a grid with {avail} usable bins"
            )));
        }
        let mut bins: Vec<usize> = rand::seq::index::sample(rng, avail, sines).into_iter().map(|i| i + 1).collect();
        bins.sort_unstable();
        let spec = Self { len, bins, amplitudes: alloc::vec![amplitude; sines], snr_db };
        spec.validate()?;
        Ok(spec)
    }

    /// The same signal with `extra` additional sines at fresh bins.
    pub fn augmented<R: Rng + ?Sized>(&self, extra: usize, amplitude: f64, rng: &mut R) -> Result<Self> {
        let free: Vec<usize> = (1..=available_bins(self.len)).filter(|b| !self.bins.contains(b)).collect();
        if extra > free.len() {
            return Err(Error::invalid("not enough free bins to augment the signal"));
        }
        let mut out = self.clone();
        for i in rand::seq::index::sample(rng, free.len(), extra) {
            out.bins.push(free[i]);
            out.amplitudes.push(amplitude);
        }
        out.validate()?;
        Ok(out)
    }

    pub fn sines(&self) -> usize {
        self.bins.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins.len() != self.amplitudes.len() {
            return Err(Error::invalid("bins and amplitudes differ in length"));
        }
        if self.bins.is_empty() {
            return Err(Error::invalid("signal needs at least one sine"));
        }
        let top = available_bins(self.len);
        for (i, &b) in self.bins.iter().enumerate() {
            if b == 0 || b > top {
                return Err(Error::invalid(alloc::format!("bin {b} outside 1..={top} for window length {}", self.len)));
            }
            if self.bins[..i].contains(&b) {
                return Err(Error::invalid(alloc::format!("bin {b} listed twice")));
            }
        }
        if self.amplitudes.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::invalid("amplitudes must be positive and finite"));
        }
        if self.snr_db.is_nan() {
            return Err(Error::invalid("snr_db is NaN"));
        }
        Ok(())
    }

    /// Analytic power `Σ A_i² / 2`.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a / 2.0).sum()
    }

    /// Smallest nonzero spectral magnitude `q = min_i A_i √N / 2`.
    pub fn min_magnitude(&self) -> f64 {
        let a = self.amplitudes.iter().copied().fold(f64::INFINITY, f64::min);
        a * (self.len as f64).sqrt() / 2.0
    }

    pub fn noise_variance(&self) -> f64 {
        noise_variance(self.snr_db, self.power())
    }
}

/// Usable bins exclude DC and Nyquist: `1..=N/2-1` (for odd `N`, `1..=(N-1)/2`).
fn available_bins(len: usize) -> usize {
    if len.is_multiple_of(2) {
        (len / 2).saturating_sub(1)
    } else {
        len / 2
    }
}

/// `z_n = Σ_i A_i sin(2π m_i n / N)`, noiseless.
pub fn multisine(spec: &SignalSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n_f = spec.len as f64;
    Ok((0..spec.len)
        .map(|n| {
            spec.bins
                .iter()
                .zip(&spec.amplitudes)
                .map(|(&m, &a)| a * (2.0 * PI * ((m * n) % spec.len) as f64 / n_f).sin())
                .sum()
        })
        .collect())
}

/// Unitary DFT of the noiseless multisine: `w_m = -j A √N / 2` and
/// `w_{N-m} = +j A √N / 2`, zero elsewhere.
pub fn true_spectrum(spec: &SignalSpec) -> Result<Vec<C64>> {
    spec.validate()?;
    let root = (spec.len as f64).sqrt();
    let mut w = alloc::vec![C64::new(0.0, 0.0); spec.len];
    for (&m, &a) in spec.bins.iter().zip(&spec.amplitudes) {
        let c = a * root / 2.0;
        w[m] = C64::new(0.0, -c);
        w[spec.len - m] = C64::new(0.0, c);
    }
    Ok(w)
}

/// `σ² = P / 10^(SNR/10)`; zero for infinite SNR.
pub fn noise_variance(snr_db: f64, signal_power: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        signal_power / 10f64.powf(snr_db / 10.0)
    }
}

/// Adds i.i.d. zero-mean Gaussian noise calibrated to `snr_db` relative to
/// `signal_power`.
pub fn add_noise<R: Rng + ?Sized>(values: &[f64], snr_db: f64, signal_power: f64, rng: &mut R) -> Result<Vec<f64>> {
    if signal_power.is_nan() || signal_power <= 0.0 {
        return Err(Error::invalid("signal power must be positive"));
    }
    let var = noise_variance(snr_db, signal_power);
    if var == 0.0 {
        return Ok(values.to_vec());
    }
    let normal = Normal::new(0.0, var.sqrt()).map_err(|_| Error::invalid("bad noise variance"))?;
    Ok(values.iter().map(|v| v + normal.sample(rng)).collect())
}

/// Wraps a source so that every read is corrupted by fresh Gaussian noise of
/// standard deviation `sigma`.
pub struct Noisy<S, R> {
    source: S,
    normal: Option<Normal<f64>>,
    rng: R,
}

impl<S, R> Noisy<S, R> {
    pub fn new(source: S, variance: f64, rng: R) -> Result<Self> {
        if !variance.is_finite() || variance < 0.0 {
            return Err(Error::invalid("noise variance must be finite and nonnegative"));
        }
        let normal = if variance == 0.0 {
            None
        } else {
            Some(Normal::new(0.0, variance.sqrt()).map_err(|_| Error::invalid("bad noise variance"))?)
        };
        Ok(Self { source, normal, rng })
    }
}

impl<S: SignalSource, R: Rng> SignalSource for Noisy<S, R> {
    fn value(&mut self, t: usize) -> Option<f64> {
        let v = self.source.value(t)?;
        Some(match &self.normal {
            Some(d) => v + d.sample(&mut self.rng),
            None => v,
        })
    }
}
