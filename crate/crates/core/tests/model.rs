use proptest::prelude::*;

use snr_prior::deconv::deconvolve;
use snr_prior::model::{reference, NormalMixture, SnrPrior, ZMixture};
use snr_prior::numeric::integrate;
use snr_prior::posterior::posterior_snr;
use snr_prior::Error;

fn parts(sd_lo: f64) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=5).prop_flat_map(move |k| {
        (prop::collection::vec(0.05f64..1.0, k), prop::collection::vec(sd_lo..6.0, k)).prop_map(|(w, s)| {
            let total: f64 = w.iter().sum();
            (w.iter().map(|x| x / total).collect(), s)
        })
    })
}

fn probability_grid() -> impl Iterator<Item = f64> {
    (1..=99).map(|i| i as f64 / 100.0)
}

fn check_inverse_pair<M: NormalMixture>(m: &M) {
    for p in probability_grid() {
        let q = m.quantile(p).unwrap();
        assert!((m.cdf(q) - p).abs() < 1e-8, "cdf(quantile({p})) = {}", m.cdf(q));
        let back = m.quantile(m.cdf(q)).unwrap();
        assert!((back - q).abs() < 1e-8, "quantile(cdf({q})) = {back}");
    }
}

fn check_pdf_integrates_to_cdf<M: NormalMixture>(m: &M, a: f64, b: f64) {
    let q = integrate(|x| m.density(x), a, b, 1e-10, 2000);
    assert!((q.value - (m.cdf(b) - m.cdf(a))).abs() < 1e-6, "{q:?}");
}

proptest! {
    #[test]
    fn z_mixture_quantile_inverts_cdf((w, s) in parts(0.2)) {
        check_inverse_pair(&ZMixture::new(w, s).unwrap());
    }

    #[test]
    fn posterior_quantile_inverts_cdf((w, s) in parts(0.2), z in -6.0f64..6.0) {
        let post = posterior_snr(&SnrPrior::new(w, s).unwrap(), z).unwrap();
        check_inverse_pair(&post);
    }

    #[test]
    fn pdf_integrates_to_cdf((w, s) in parts(0.2), a in -10.0f64..0.0, len in 0.1f64..15.0, z in -5.0f64..5.0) {
        let m = ZMixture::new(w.clone(), s.clone()).unwrap();
        check_pdf_integrates_to_cdf(&m, a, a + len);
        let p = SnrPrior::new(w, s).unwrap();
        check_pdf_integrates_to_cdf(&p, a, a + len);
        check_pdf_integrates_to_cdf(&posterior_snr(&p, z).unwrap(), a, a + len);
    }

    #[test]
    fn zero_mean_mixtures_are_symmetric((w, s) in parts(0.0), x in 0.0f64..20.0) {
        let p = SnrPrior::new(w, s).unwrap();
        prop_assert_eq!(p.pdf(x).unwrap(), p.pdf(-x).unwrap());
        let atoms: f64 = p.weights().iter().zip(p.taus()).filter(|(_, &t)| t == 0.0).map(|(w, _)| w).sum();
        prop_assert!((p.cdf(0.0) - 0.5 * (1.0 + atoms)).abs() < 1e-12);
        prop_assert!((p.abs_cdf(0.0).unwrap() - atoms).abs() < 1e-12);
        if x > 0.0 {
            let abs = p.abs_cdf(x).unwrap();
            prop_assert!((abs - (2.0 * p.cdf(x) - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_mirrors_under_sign_flip((w, s) in parts(0.0), z in -8.0f64..8.0) {
        let p = SnrPrior::new(w, s).unwrap();
        let a = posterior_snr(&p, z).unwrap();
        let b = posterior_snr(&p, -z).unwrap();
        prop_assert_eq!(a.weights(), b.weights());
        prop_assert_eq!(a.sds(), b.sds());
        for (x, y) in a.means().iter().zip(b.means()) {
            prop_assert_eq!(*x, -*y);
        }
        let total: f64 = a.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn abs_quantile_inverts_abs_cdf((w, s) in parts(0.2), p in 0.01f64..0.99) {
        let prior = SnrPrior::new(w, s).unwrap();
        let q = prior.abs_quantile(p).unwrap();
        prop_assert!((prior.abs_cdf(q).unwrap() - p).abs() < 1e-10);
    }
}

#[test]
fn standard_normal_values() {
    let m = ZMixture::new(vec![1.0], vec![1.0]).unwrap();
    assert!((m.pdf(0.0).unwrap() - 0.398_942).abs() < 1e-6);
    assert!((m.cdf(1.96) - 0.975).abs() < 1e-4);
    assert!((m.quantile(0.975).unwrap() - 1.96).abs() < 1e-4);
    assert!((m.quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-6);
    assert!(m.quantile(0.5).unwrap().abs() < 1e-8);
    assert!(matches!(m.pdf(f64::NAN), Err(Error::InvalidInput(_))));
    assert!(matches!(m.quantile(1.0), Err(Error::InvalidInput(_))));
    assert_eq!(m.cdf(f64::NEG_INFINITY), 0.0);
    assert_eq!(m.cdf(f64::INFINITY), 1.0);
}

#[test]
fn reference_density_at_zero_matches_direct_sum() {
    let direct: f64 = reference::WEIGHTS
        .iter()
        .zip(reference::Z_SIGMAS)
        .map(|(w, s)| w / (s * (2.0 * std::f64::consts::PI).sqrt()))
        .sum();
    let m = reference::z_mixture();
    assert!((m.pdf(0.0).unwrap() - direct).abs() < 1e-15);
    assert_eq!(m.pdf(1.7).unwrap(), m.pdf(-1.7).unwrap());
    assert!((m.cdf(0.0) - 0.5).abs() < 1e-15);
}

#[test]
fn reference_prior_abs_quantiles() {
    let row = [0.14, 0.37, 0.84, 1.72, 3.01];
    let deconvolved = deconvolve(&reference::z_mixture(), 0.0).unwrap().prior;
    for prior in [reference::snr_prior(), deconvolved] {
        for (p, want) in [0.10, 0.25, 0.50, 0.75, 0.90].into_iter().zip(row) {
            let q = prior.abs_quantile(p).unwrap();
            assert!((q - want).abs() <= 0.02, "p = {p}: {q} vs {want}");
        }
        assert!((prior.cdf(0.84) - 0.75).abs() < 0.005);
        assert!((prior.abs_cdf(0.84).unwrap() - 0.5).abs() < 0.01);
    }
}

#[test]
fn weights_are_renormalized_or_rejected() {
    let m = ZMixture::new(vec![0.5 + 5e-10, 0.5], vec![2.0, 1.0]).unwrap();
    assert_eq!(m.sigmas(), &[1.0, 2.0]);
    assert!((m.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert!(ZMixture::new(vec![0.6, 0.5], vec![1.0, 2.0]).is_err());
    assert!(ZMixture::new(vec![1.0], vec![0.0]).is_err());
    assert!(SnrPrior::new(vec![1.0], vec![0.0]).is_ok());
    assert!(SnrPrior::new(vec![-0.5, 1.5], vec![1.0, 2.0]).is_err());
    assert!(SnrPrior::new(vec![], vec![]).is_err());
}

#[test]
fn point_mass_prior_distribution() {
    let p = SnrPrior::new(vec![0.4, 0.6], vec![0.0, 1.0]).unwrap();
    assert_eq!(p.abs_cdf(0.0).unwrap(), 0.4);
    assert!((p.cdf(0.0) - 0.7).abs() < 1e-15);
    assert!((p.cdf(-1e-12) - 0.3).abs() < 1e-12);
    assert_eq!(p.quantile(0.5).unwrap(), 0.0);
    assert!(p.abs_cdf(-1.0).is_err());
}
