use std::time::Duration;

use proptest::prelude::*;
use sparsense_core::metrics::to_db;
use sparsense_core::SupportSet;
use sparsense_harness::config;
use sparsense_harness::experiment::TrialRecord;
use sparsense_harness::report::{curve, Averaging};
use sparsense_harness::stats::bootstrap_mean_ci;

fn record(rmse: Vec<f64>) -> TrialRecord {
    let len = rmse.len();
    TrialRecord {
        label: "A".into(),
        trial: 0,
        seed: 0,
        rmse,
        s_trajectory: vec![0; len],
        final_support: SupportSet::default(),
        wallclock: Duration::ZERO,
    }
}

proptest! {
    #[test]
    fn linear_average_dominates_db_average(values in prop::collection::vec(1e-9..10.0f64, 1..30)) {
        let lin = Averaging::Linear.mean_db(values.iter().copied());
        let db = Averaging::Decibel.mean_db(values.iter().copied());
        prop_assert!(db <= lin + 1e-9);
        // both lie within the range of the per-trial dB values
        let lo = values.iter().map(|&v| to_db(v)).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|&v| to_db(v)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo - 1e-9 <= db && lin <= hi + 1e-9);
    }

    #[test]
    fn curve_is_order_independent(mut trials in prop::collection::vec(prop::collection::vec(1e-6..2.0f64, 5), 1..8)) {
        let a = curve(&trials.iter().cloned().map(record).collect::<Vec<_>>(), Averaging::Linear);
        trials.reverse();
        let b = curve(&trials.into_iter().map(record).collect::<Vec<_>>(), Averaging::Linear);
        for (x, y) in a.rmse_db.iter().zip(&b.rmse_db) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn bootstrap_interval_brackets_the_mean(xs in prop::collection::vec(-100.0..100.0f64, 2..60), seed in any::<u64>()) {
        let ci = bootstrap_mean_ci(&xs, 0.95, 300, seed);
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        prop_assert!(lo - tol <= ci.lo && ci.lo <= ci.hi && ci.hi <= hi + tol);
    }

    #[test]
    fn rescaling_keeps_undersampling_ratio(len in 42usize..2000) {
        for (name, _) in config::PRESETS {
            let spec = config::preset(name).unwrap();
            let scaled = config::rescale(&spec, len).unwrap();
            let before = spec.measurements as f64 / spec.signal.len as f64;
            let after = scaled.measurements as f64 / len as f64;
            prop_assert!((before - after).abs() <= 0.5 / len as f64 + 1e-12);
        }
    }
}

#[test]
fn rescaling_below_bin_capacity_is_rejected() {
    // 20 sines need 20 usable bins: N = 40 has 19, N = 41 has 20
    let spec = config::preset("exp4-tracking").unwrap();
    assert!(config::rescale(&spec, 40).is_err());
    assert!(config::rescale(&spec, 41).is_ok());
}
