// SPDX-License-Identifier: MIT OR Apache-2.0

use bocpd_core::{detect_series, generate, Algorithm, Detector, HazardSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn walk(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.03) {
                level += rng.gen_range(-20.0..20.0);
            }
            level + rng.gen_range(-1.0..1.0)
        })
        .collect()
}

#[test]
fn bls_delta_bound_on_long_streams() {
    let mut steps = 0usize;
    for (seed, lambda) in [(1u64, 2.5), (2, 10.0), (3, 100.0), (4, 1000.0)] {
        let mut d = Detector::new(Algorithm::BocpdBls, lambda, 0.0).unwrap();
        for x in walk(seed, 5_000) {
            let s = d.observe(x).unwrap();
            let r_t = s.posterior_snapshot.len() as i64 - 1;
            assert!(s.delta <= 1, "lambda {lambda} t {}: delta {}", s.t, s.delta);
            assert!(s.delta >= -(r_t - 1), "lambda {lambda} t {}: delta {} r_t {r_t}", s.t, s.delta);
            steps += 1;
        }
    }
    assert!(steps >= 10_000);
}

#[test]
fn hazard_decreases_with_lambda() {
    let grid = [1.5, 2.0, 10.0, 30.0, 100.0, 1e3, 1e6];
    let p: Vec<f64> = grid.iter().map(|&l| HazardSpec::new(l).unwrap().probability()).collect();
    assert!(p.windows(2).all(|w| w[0] > w[1]));
    for l in [1.0, 0.5, f64::NAN, f64::INFINITY] {
        assert!(HazardSpec::new(l).is_err());
    }
}

#[test]
fn per_step_cost_is_linear_for_bocpd() {
    let xs = generate(2, 0).unwrap().values;
    let mut d = Detector::new(Algorithm::Bocpd, 30.0, 0.0).unwrap();
    for (i, &x) in xs.iter().enumerate() {
        let s = d.observe(x).unwrap();
        assert_eq!(s.hypotheses_evaluated, i + 1);
        assert_eq!(d.hypotheses().len(), d.posterior().len());
    }
}

#[test]
fn bocpd_never_resets() {
    let xs = generate(1, 5).unwrap().values;
    let det = detect_series(Algorithm::Bocpd, 30.0, &xs).unwrap();
    assert!(det.events.iter().all(|e| e.partition == 1));
    assert_eq!(det.events.last().unwrap().posterior_snapshot.len(), xs.len() + 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_is_bit_identical(seed in any::<u64>(), lambda in 1.5f64..500.0, bls in any::<bool>()) {
        let alg = if bls { Algorithm::BocpdBls } else { Algorithm::Bocpd };
        let xs = walk(seed, 150);
        let a = detect_series(alg, lambda, &xs).unwrap();
        let b = detect_series(alg, lambda, &xs).unwrap();
        prop_assert_eq!(&a.change_points, &b.change_points);
        for (ea, eb) in a.events.iter().zip(&b.events) {
            let la: Vec<u64> = ea.posterior_snapshot.log_probs.iter().map(|v| v.to_bits()).collect();
            let lb: Vec<u64> = eb.posterior_snapshot.log_probs.iter().map(|v| v.to_bits()).collect();
            prop_assert_eq!(la, lb);
        }
    }

    #[test]
    fn bls_support_tracks_partition(seed in any::<u64>(), lambda in 2.1f64..300.0) {
        let mut d = Detector::new(Algorithm::BocpdBls, lambda, 0.0).unwrap();
        let mut since_reset = 0usize;
        let mut partition = None;
        for x in walk(seed, 200) {
            let s = d.observe(x).unwrap();
            if partition != Some(s.partition) {
                partition = Some(s.partition);
                since_reset = 0;
            }
            since_reset += 1;
            prop_assert_eq!(s.posterior_snapshot.len(), since_reset + 1);
            prop_assert_eq!(s.hypotheses_evaluated, since_reset);
            prop_assert_eq!(d.hypotheses().len(), d.posterior().len());
        }
    }

    #[test]
    fn bls_is_translation_invariant(
        seed in any::<u64>(),
        lambda in 2.1f64..300.0,
        shift in -1000i32..1000,
    ) {
        // Eighths keep x - baseline exact under integer shifts.
        let xs: Vec<f64> = walk(seed, 120).iter().map(|v| (v * 8.0).round() / 8.0).collect();
        let shifted: Vec<f64> = xs.iter().map(|v| v + f64::from(shift)).collect();
        let a = detect_series(Algorithm::BocpdBls, lambda, &xs).unwrap();
        let b = detect_series(Algorithm::BocpdBls, lambda, &shifted).unwrap();
        prop_assert_eq!(a.change_points, b.change_points);
    }

    #[test]
    fn posterior_stays_normalized(seed in any::<u64>(), lambda in 1.5f64..1000.0, bls in any::<bool>()) {
        let alg = if bls { Algorithm::BocpdBls } else { Algorithm::Bocpd };
        let det = detect_series(alg, lambda, &walk(seed, 100)).unwrap();
        for e in &det.events {
            prop_assert!(e.posterior_snapshot.log_mass().abs() < 1e-9);
        }
    }
}
