use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use snr_prior::deconv::deconvolve;
use snr_prior::em::{bic, fit_em, select_components, EmConfig};
use snr_prior::model::{reference, SnrPrior};
use snr_prior::sim::sample_z;

fn normal_z(sd: f64, n: usize, seed: u64) -> Vec<f64> {
    // z = SNR + noise with SNR ~ N(0, sd² − 1) is N(0, sd²)
    sample_z(&SnrPrior::new(vec![1.0], vec![(sd * sd - 1.0).sqrt()]).unwrap(), n, seed)
}

fn quick() -> EmConfig {
    EmConfig { restarts: 3, ..EmConfig::default() }
}

#[test]
fn single_component_is_root_mean_square() {
    let zs = normal_z(2.0, 50_000, 3);
    let (m, d) = fit_em(&zs, 1, &EmConfig::default()).unwrap();
    let rms = (zs.iter().map(|z| z * z).sum::<f64>() / zs.len() as f64).sqrt();
    assert!((m.sigmas()[0] - rms).abs() < 1e-12);
    assert!((m.sigmas()[0] - 2.0).abs() < 0.02);
    // one M-step lands on the RMS; the next E-step confirms convergence
    assert!(d.n_iter <= 2, "{}", d.n_iter);
}

#[test]
fn log_likelihood_never_decreases() {
    let zs = sample_z(&reference::snr_prior(), 5_000, 4);
    for k in [2, 3, 4] {
        let (_, d) = fit_em(&zs, k, &quick()).unwrap();
        assert!(d.loglik.is_finite());
        assert_eq!(d.loglik_trace.last(), Some(&d.loglik));
        for w in d.loglik_trace.windows(2) {
            assert!(w[1] - w[0] >= -1e-9, "K = {k}: {} -> {}", w[0], w[1]);
        }
        assert!((d.bic - bic(d.loglik, k, zs.len())).abs() < 1e-9);
        assert!((d.bic - (-2.0 * d.loglik + (2 * k - 1) as f64 * (zs.len() as f64).ln())).abs() < 1e-9);
    }
}

#[test]
fn fit_ignores_order_and_sign() {
    let zs = sample_z(&reference::snr_prior(), 3_000, 5);
    let (a, da) = fit_em(&zs, 3, &quick()).unwrap();
    let mut shuffled = zs.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let (b, db) = fit_em(&shuffled, 3, &quick()).unwrap();
    let neg: Vec<f64> = zs.iter().map(|z| -z).collect();
    let (c, _) = fit_em(&neg, 3, &quick()).unwrap();
    for other in [&b, &c] {
        for (x, y) in a.weights().iter().zip(other.weights()) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in a.sigmas().iter().zip(other.sigmas()) {
            assert!((x - y).abs() < 1e-10);
        }
    }
    assert!((da.loglik - db.loglik).abs() < 1e-8);
}

#[test]
fn fits_are_reproducible() {
    let zs = sample_z(&reference::snr_prior(), 2_000, 6);
    let cfg = EmConfig { seed: 17, ..quick() };
    assert_eq!(fit_em(&zs, 2, &cfg).unwrap(), fit_em(&zs, 2, &cfg).unwrap());
}

#[test]
fn floors_hold_under_a_spike_at_zero() {
    let mut zs = vec![0.0; 500];
    zs.extend(normal_z(3.0, 500, 8));
    let cfg = quick();
    let (m, _) = fit_em(&zs, 3, &cfg).unwrap();
    assert!(m.sigmas().iter().all(|&s| s >= cfg.sigma_floor));
    assert!(m.weights().iter().all(|&w| w >= cfg.weight_floor * 0.5));
}

#[test]
fn singleton_range_returns_that_fit() {
    let zs = normal_z(1.5, 2_000, 9);
    let s = select_components(&zs, 2..=2, &quick()).unwrap();
    assert_eq!(s.chosen_k, 2);
    assert_eq!(s.bic_by_k.len(), 1);
    assert!(select_components(&zs, 0..=2, &quick()).is_err());
    assert!(select_components(&zs, 1..=9, &quick()).is_err());
}

fn single_normal_selection(seeds: std::ops::Range<u64>) {
    let cfg = EmConfig::default();
    let total = seeds.end - seeds.start;
    let ones = seeds
        .filter(|&seed| select_components(&normal_z(1.5, 20_000, 100 + seed), 1..=4, &cfg).unwrap().chosen_k == 1)
        .count();
    assert!(ones as f64 >= 0.95 * total as f64, "K = 1 chosen in {ones}/{total}");
}

#[test]
fn bic_picks_one_component_for_normal_data() {
    single_normal_selection(0..10);
}

/// The full 100-seed study, about five minutes on one core.
#[test]
#[ignore]
fn bic_picks_one_component_for_normal_data_full_study() {
    single_normal_selection(0..100);
}

#[test]
fn bic_plateau_on_reference_mixture() {
    let truth = deconvolve(&reference::z_mixture(), 0.0).unwrap().prior;
    let zs = sample_z(&truth, 23_747, 1);
    let s = select_components(&zs, 1..=6, &EmConfig::default()).unwrap();
    assert!((3..=5).contains(&s.chosen_k), "chose {} from {:?}", s.chosen_k, s.bic_by_k);
}
