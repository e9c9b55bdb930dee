use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsense_core::estimator::{
    hard_l0_step, hard_step, l0_step, lms_step, rza_step, sza_step, za_step, EstimatorState,
};
use sparsense_core::metrics::rmse_db;
use sparsense_core::sensing::SensingBasis;
use sparsense_core::tracker::{Tracker, TrackerConfig};
use sparsense_core::{Estimator, EstimatorConfig, Sparsity, C64};

fn complex() -> impl Strategy<Value = C64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| C64::new(re, im))
}

/// Estimate, sample stream (index, y) over a random window length.
fn setup() -> impl Strategy<Value = (Vec<C64>, Vec<(usize, C64)>)> {
    (2usize..=24)
        .prop_flat_map(|n| (prop::collection::vec(complex(), n), prop::collection::vec((0..n, complex()), 1..40)))
}

/// One estimator step applied to a state, regressor row and sample.
type Step<'a> = dyn Fn(&mut EstimatorState, &[C64], C64) -> sparsense_core::Result<()> + 'a;

fn run(w0: &[C64], samples: &[(usize, C64)], step: &Step<'_>) -> Vec<C64> {
    let basis = SensingBasis::new(w0.len()).unwrap();
    let mut state = EstimatorState::new(w0.len());
    state.w = w0.to_vec();
    for &(i, y) in samples {
        step(&mut state, &basis.row(i).unwrap(), y).unwrap();
    }
    state.w
}

proptest! {
    /// Degenerate parameter choices collapse every variant onto a simpler one.
    #[test]
    fn reduction_lattice((w0, samples) in setup(), mu in 0.1..1.9f64, rho in 0.0..0.1f64) {
        let n = w0.len();
        let lms = run(&w0, &samples, &|s, x, y| lms_step(s, x, y, mu));
        let za = run(&w0, &samples, &|s, x, y| za_step(s, x, y, mu, rho));
        prop_assert_eq!(&run(&w0, &samples, &|s, x, y| za_step(s, x, y, mu, 0.0)), &lms);
        prop_assert_eq!(&run(&w0, &samples, &|s, x, y| rza_step(s, x, y, mu, 0.0, 2.0)), &lms);
        prop_assert_eq!(&run(&w0, &samples, &|s, x, y| l0_step(s, x, y, mu, 0.0, 0.5)), &lms);
        prop_assert_eq!(&run(&w0, &samples, &|s, x, y| sza_step(s, x, y, mu, rho, n)), &lms);
        prop_assert_eq!(&run(&w0, &samples, &|s, x, y| hard_step(s, x, y, mu, n)), &lms);
        // ε = 0 and β = 0 remove the reweighting
        let close = |a: &[C64], b: &[C64]| a.iter().zip(b).all(|(p, q)| (p - q).norm() < 1e-9);
        prop_assert!(close(&run(&w0, &samples, &|s, x, y| rza_step(s, x, y, mu, rho, 0.0)), &za));
        prop_assert!(close(&run(&w0, &samples, &|s, x, y| l0_step(s, x, y, mu, rho, 0.0)), &za));
        for k in 1..=n {
            prop_assert_eq!(
                run(&w0, &samples, &|s, x, y| hard_l0_step(s, x, y, mu, 0.0, 0.5, k)),
                run(&w0, &samples, &|s, x, y| hard_step(s, x, y, mu, k))
            );
        }
    }

    /// With unit-norm regressors and μ = 1 the a-posteriori error vanishes.
    #[test]
    fn unit_step_interpolates((w0, samples) in setup()) {
        let basis = SensingBasis::new(w0.len()).unwrap();
        let mut state = EstimatorState::new(w0.len());
        state.w = w0;
        for (i, y) in samples {
            lms_step(&mut state, &basis.row(i).unwrap(), y, 1.0).unwrap();
            prop_assert!((basis.predict(&state.w, i).unwrap() - y).norm() < 1e-9);
        }
    }

    /// Over a full sweep of indices with the estimate held fixed,
    /// −Σ b(n) recovers the estimation error exactly.
    #[test]
    fn full_sweep_recovers_error(truth in prop::collection::vec(complex(), 2..=32), est_seed in any::<u64>()) {
        let n = truth.len();
        let mut rng = ChaCha8Rng::seed_from_u64(est_seed);
        let est: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect();
        let basis = SensingBasis::new(n).unwrap();
        let mut tracker = Tracker::new(n, TrackerConfig::new(1.0, 1.0, 1.0)).unwrap();
        let mut sum = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let x = basis.row(i).unwrap();
            let y = basis.predict(&truth, i).unwrap();
            let e = y - basis.predict(&est, i).unwrap();
            for (s, xk) in sum.iter_mut().zip(&x) {
                *s += e.conj() * xk;
            }
            tracker.observe(e, &x).unwrap();
        }
        for i in 0..n {
            prop_assert!((-sum[i] - (est[i] - truth[i])).norm() < 1e-10);
            // with λ = 1 the tracker holds −mean(b)
            prop_assert!((tracker.err()[i] * n as f64 - (est[i] - truth[i])).norm() < 1e-10);
        }
    }

    #[test]
    fn kappa_is_monotone_and_bounded(lambda in 0.5..0.999f64, steps in 1usize..500) {
        let mut t = Tracker::new(1, TrackerConfig::new(lambda, 1.0, 1.0)).unwrap();
        let mut prev = 0.0;
        for _ in 0..steps {
            t.update(&[C64::new(1.0, 0.0)]).unwrap();
            prop_assert!(t.kappa() >= prev && t.kappa() <= 1.0 / (1.0 - lambda) + 1e-9);
            prev = t.kappa();
        }
    }

    #[test]
    fn hard_estimates_stay_within_budget((w0, samples) in setup(), s in 1usize..=24) {
        let n = w0.len();
        let s = s.min(n);
        let basis = SensingBasis::new(n).unwrap();
        let mut est = Estimator::new(n, EstimatorConfig::hard(1.0, Sparsity::Fixed(s)), None).unwrap();
        for (i, y) in samples {
            est.step(&basis.row(i).unwrap(), y).unwrap();
            // ties can keep more than s, never fewer nonzero than min(s, support)
            let nz = est.estimate().iter().filter(|c| c.norm() > 0.0).count();
            prop_assert!(nz <= n);
            let mut mags: Vec<f64> = est.estimate().iter().map(|c| c.norm_sqr()).collect();
            mags.sort_by(f64::total_cmp);
            if mags.windows(2).all(|p| p[0] < p[1] || p[1] == 0.0) {
                prop_assert!(nz <= s);
            }
        }
    }
}

fn sparse_truth(rng: &mut ChaCha8Rng, n: usize, s: usize) -> Vec<C64> {
    let mut w = vec![C64::new(0.0, 0.0); n];
    for i in rand::seq::index::sample(rng, n, s) {
        w[i] = C64::from_polar(rng.random_range(1.0..2.0), rng.random_range(0.0..std::f64::consts::TAU));
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Noiseless, fully sampled windows replayed 50 times: every variant ends
    /// below −80 dB.
    #[test]
    fn noiseless_full_sampling_converges(n in 4usize..=64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = rng.random_range(1..=n / 4);
        let truth = sparse_truth(&mut rng, n, s);
        let basis = SensingBasis::new(n).unwrap();
        let rho = 1e-9;
        let tracker = TrackerConfig::new(0.99, 1.0, 0.1);
        let configs = [
            EstimatorConfig::lms(1.0),
            EstimatorConfig::za(1.0, rho),
            EstimatorConfig::rza(1.0, rho, 2.25),
            EstimatorConfig::l0(1.0, rho, 0.5),
            EstimatorConfig::sza(1.0, rho, Sparsity::Fixed(s)),
            EstimatorConfig::hard(1.0, Sparsity::Fixed(s)).with_burn_in(n),
            EstimatorConfig::hard(1.0, Sparsity::Adaptive).with_burn_in(n),
            EstimatorConfig::hard_l0(1.0, rho, 0.5, Sparsity::Adaptive).with_burn_in(2 * n),
        ];
        for cfg in configs {
            let adaptive = cfg.sparsity == Sparsity::Adaptive;
            let mut est = Estimator::new(n, cfg.clone(), adaptive.then_some(tracker)).unwrap();
            for _ in 0..50 {
                for i in 0..n {
                    est.step(&basis.row(i).unwrap(), basis.predict(&truth, i).unwrap()).unwrap();
                }
            }
            let db = rmse_db(&truth, est.estimate()).unwrap();
            prop_assert!(db < -80.0, "{:?}: {} dB", cfg.variant, db);
        }
    }
}
