//! Brute-force reference implementations and the cross-checks that compare
//! the core crate against them.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sparsense_core::sensing::{regressor_row, sample_indices, SensingBasis, SensingConfig, StreamMode};
use sparsense_core::signal::{multisine, true_spectrum, SignalSpec};
use sparsense_core::sparse::hard_threshold;
use sparsense_core::C64;

use crate::verify::Outcome;

/// Keeps every entry whose magnitude is at least the `s`-th largest, by
/// full sort.
pub fn reference_hard_threshold(v: &[C64], s: usize) -> Vec<C64> {
    let mut mags: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let level = mags[s - 1];
    v.iter().map(|&c| if c.norm_sqr() >= level { c } else { C64::new(0.0, 0.0) }).collect()
}

/// Random complex vector of length `len`, with some entries replaced by
/// exact-magnitude copies of others (rotations by multiples of a quarter
/// turn are exact in floating point) and some exact zeros.
pub fn tied_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..len).map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect();
    let rotations = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
    for _ in 0..rng.random_range(0..=len / 2) {
        let (from, to) = (rng.random_range(0..len), rng.random_range(0..len));
        v[to] = v[from] * rotations[rng.random_range(0..4)];
    }
    if rng.random_bool(0.2) {
        v[rng.random_range(0..len)] = C64::new(0.0, 0.0);
    }
    v
}

pub fn hard_threshold_oracle(cases: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut agree, mut with_ties) = (0, 0);
    let mut first_mismatch = None;
    for case in 0..cases {
        let len = rng.random_range(1..=12);
        let v = tied_vector(&mut rng, len);
        let s = rng.random_range(1..=len);
        let mut mags: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
        mags.sort_by(f64::total_cmp);
        with_ties += usize::from(mags.windows(2).any(|p| p[0] == p[1]));
        if hard_threshold(&v, s).expect("valid budget") == reference_hard_threshold(&v, s) {
            agree += 1;
        } else if first_mismatch.is_none() {
            first_mismatch = Some(case);
        }
    }
    Outcome {
        name: "hard threshold vs sort reference".into(),
        passed: agree == cases && with_ties > 0,
        detail: format!(
            "{agree}/{cases} agree ({with_ties} with tied magnitudes){}",
            first_mismatch.map(|c| format!(", first mismatch at case {c}")).unwrap_or_default()
        ),
    }
}

/// Largest entry of `|Σ_n x(n) x(n)^H − I|` over all window lengths in
/// `lens`, with rows computed directly.
pub fn sensing_identity_error(lens: impl IntoIterator<Item = usize>) -> f64 {
    let mut worst = 0.0f64;
    for len in lens {
        let rows: Vec<Vec<C64>> = (0..len).map(|n| regressor_row(len, n).expect("index in range")).collect();
        for i in 0..len {
            for j in 0..len {
                let g: C64 = rows.iter().map(|x| x[i] * x[j].conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
    }
    worst
}

pub fn sensing_identity_oracle() -> Outcome {
    let err = sensing_identity_error(2..=64);
    Outcome {
        name: "sensing second moment".into(),
        passed: err <= 1e-12,
        detail: format!("max |sum x x^H - I| = {err:.2e} over N = 2..=64"),
    }
}

/// Twiddle-table rows and predictions against the direct formula.
pub fn basis_oracle(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for len in [1usize, 2, 3, 7, 16, 31, 64, 125, 1000] {
        let basis = SensingBasis::new(len).expect("positive length");
        let w: Vec<C64> = (0..len).map(|_| C64::new(StandardNormal.sample(&mut rng), 0.0)).collect();
        for index in 0..len.min(40) {
            let direct = regressor_row(len, index).expect("index in range");
            let row = basis.row(index).expect("index in range");
            worst = worst.max(direct.iter().zip(&row).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
            let expected: C64 = w.iter().zip(&direct).map(|(a, b)| a.conj() * b).sum();
            worst = worst.max((basis.predict(&w, index).expect("valid") - expected).norm());
        }
    }
    Outcome {
        name: "regressor table vs direct rows".into(),
        passed: worst < 1e-9,
        detail: format!("max deviation {worst:.2e}"),
    }
}

/// Each position is picked with frequency `M/N` across independent windows.
pub fn index_frequency_oracle(windows: usize, seed: u64) -> Outcome {
    let (len, m) = (100, 20);
    let cfg = SensingConfig { len, measurements: m, mode: StreamMode::Windowed { windows }, seed };
    let mut counts = vec![0usize; len];
    for w in 0..windows {
        for i in sample_indices(&cfg, w).expect("valid config") {
            counts[i] += 1;
        }
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / windows as f64).collect();
    let (lo, hi) = freqs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    Outcome {
        name: "sample index frequency".into(),
        passed: freqs.iter().all(|f| (f - 0.2).abs() <= 0.02),
        detail: format!(
            "N={len}, M={m}, {windows} windows: per-index frequency in [{lo:.4}, {hi:.4}], target 0.2 +- 0.02"
        ),
    }
}

/// Unitary DFT `w_m = N^{-1/2} Σ_n z_n e^{-j2πmn/N}` by direct summation.
pub fn direct_dft(z: &[f64]) -> Vec<C64> {
    let len = z.len();
    let scale = (len as f64).sqrt().recip();
    (0..len)
        .map(|m| {
            z.iter()
                .enumerate()
                .map(|(n, &v)| C64::from_polar(v, -2.0 * PI * ((m * n) % len) as f64 / len as f64))
                .sum::<C64>()
                * scale
        })
        .collect()
}

pub fn spectrum_oracle(seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for len in [4usize, 9, 32, 100, 257, 1000] {
        let sines = rng.random_range(1..=(len / 2 - 1).clamp(1, 10));
        let spec =
            SignalSpec::random(len, sines, rng.random_range(0.5..2.0), f64::INFINITY, &mut rng).expect("valid signal");
        let dft = direct_dft(&multisine(&spec).expect("valid"));
        let w = true_spectrum(&spec).expect("valid");
        worst = worst.max(dft.iter().zip(&w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    Outcome {
        name: "closed-form spectrum vs direct DFT".into(),
        passed: worst < 1e-9,
        detail: format!("max deviation {worst:.2e}"),
    }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    vec![
        hard_threshold_oracle(10_000, seed),
        sensing_identity_oracle(),
        basis_oracle(seed),
        index_frequency_oracle(10_000, seed),
        spectrum_oracle(seed),
    ]
}
