use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sparsense_core::sensing::{make_stream, sample_indices, Recorded, SensingBasis, SensingConfig, StreamMode};
use sparsense_core::signal::{multisine, true_spectrum, SignalSpec};
use sparsense_core::C64;

proptest! {
    #[test]
    fn rows_are_orthonormal(n in 1usize..=64) {
        let basis = SensingBasis::new(n).unwrap();
        let rows: Vec<Vec<C64>> = (0..n).map(|i| basis.row(i).unwrap()).collect();
        for a in 0..n {
            for b in a..n {
                let dot: C64 = rows[a].iter().zip(&rows[b]).map(|(p, q)| p * q.conj()).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - target).norm() < 1e-12, "rows {a},{b}: {dot}");
            }
        }
    }

    #[test]
    fn window_indices_are_distinct_and_in_range(n in 1usize..200, frac in 0.01..1.0f64, seed in any::<u64>(), window in 0usize..1000) {
        let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let cfg = SensingConfig { len: n, measurements: m, mode: StreamMode::Windowed { windows: window + 1 }, seed };
        let idx = sample_indices(&cfg, window).unwrap();
        prop_assert_eq!(idx.len(), m);
        prop_assert!(idx.windows(2).all(|p| p[0] < p[1]));
        prop_assert!(idx.iter().all(|&i| i < n));
        prop_assert_eq!(sample_indices(&cfg, window).unwrap(), idx);
    }

    #[test]
    fn repeated_passes_replay_one_window(n in 2usize..64, passes in 1usize..6, seed in any::<u64>()) {
        let m = n / 2 + 1;
        let signal: Vec<f64> = (0..n).map(|t| t as f64).collect();
        let cfg = SensingConfig { len: n, measurements: m, mode: StreamMode::RepeatedPass { passes }, seed };
        let stream = make_stream(&cfg, &mut Recorded(&signal)).unwrap();
        prop_assert_eq!(stream.len(), passes * m);
        let obs = stream.observations();
        for (k, o) in obs.iter().enumerate() {
            prop_assert_eq!(o.window, 0);
            prop_assert_eq!(o, &obs[k % m]);
            prop_assert_eq!(o.y, o.index as f64);
        }
    }

    #[test]
    fn windowed_stream_reads_absolute_time(n in 2usize..32, windows in 1usize..6, seed in any::<u64>()) {
        let m = (n / 3).max(1);
        let signal: Vec<f64> = (0..n * windows).map(|t| t as f64).collect();
        let cfg = SensingConfig { len: n, measurements: m, mode: StreamMode::Windowed { windows }, seed };
        let stream = make_stream(&cfg, &mut Recorded(&signal)).unwrap();
        prop_assert_eq!(stream.len(), windows * m);
        for o in stream.observations() {
            prop_assert_eq!(o.y, (o.window * n + o.index) as f64);
        }
    }

    /// The model output of the closed-form spectrum reproduces the signal.
    #[test]
    fn spectrum_synthesizes_signal(n in 4usize..=128, sines in 1usize..=5, amp in 0.1..3.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sines = sines.min(n / 2 - 1).max(1);
        prop_assume!(n / 2 > 1);
        let spec = SignalSpec::random(n, sines, amp, f64::INFINITY, &mut rng).unwrap();
        let z = multisine(&spec).unwrap();
        let w = true_spectrum(&spec).unwrap();
        let basis = SensingBasis::new(n).unwrap();
        for (t, &v) in z.iter().enumerate() {
            let y = basis.predict(&w, t).unwrap();
            prop_assert!((y.re - v).abs() < 1e-9 && y.im.abs() < 1e-9);
        }
        prop_assert_eq!(w.iter().filter(|c| c.norm() > 0.0).count(), 2 * sines);
        let q = spec.min_magnitude();
        prop_assert!(w.iter().filter(|c| c.norm() > 0.0).all(|c| (c.norm() - q).abs() < 1e-12));
    }
}
