use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::numerics::fixed_point::solve_fv_fixed_point;
use crate::testutil::ks_distance;

fn gauss(rho: f64) -> KernelSpec<f64> {
    KernelSpec::GaussianCopula { rho, margin: MarginalLaw::StandardExponential }.checked().unwrap()
}

fn exp_ar(phi: f64) -> KernelSpec<f64> {
    let fv = solve_fv_fixed_point(phi, 1024, 1e-10).unwrap();
    KernelSpec::ExpAr { phi, fv: Arc::new(fv) }.checked().unwrap()
}

fn copula_kernels() -> Vec<KernelSpec<f64>> {
    let hr = ExponentMeasure::husler_reiss(1.0).unwrap();
    let beta = ExponentMeasure::density(SpectralDensity::symmetric_beta(2.0).unwrap());
    vec![
        gauss(0.7),
        KernelSpec::BevLogistic { gamma: 0.5 },
        KernelSpec::InvertedBevLogistic { gamma: 0.5 },
        KernelSpec::AsymmetricLogistic { phi1: 0.5, phi2: 0.5, nu: 0.152 },
        KernelSpec::InvertedMaxStable { exponent: hr },
        KernelSpec::InvertedMaxStable { exponent: beta },
    ]
}

#[test]
fn gaussian_copula_median_follows_correlation() {
    let k = KernelSpec::<f64>::GaussianCopula { rho: 0.6, margin: MarginalLaw::StandardGaussian };
    for &x in &[-2.0, 0.3, 4.0] {
        assert!((kernel_cdf(&k, x, 0.6 * x).unwrap() - 0.5).abs() < 1e-15);
    }
}

#[test]
fn gaussian_conditional_mean() {
    let k = KernelSpec::GaussianCopula { rho: 0.8, margin: MarginalLaw::StandardGaussian };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let mean: f64 = (0..n).map(|_| kernel_sample(&k, 3.0, &mut rng).unwrap()).sum::<f64>() / n as f64;
    // conditional sd is 0.6, so 4 standard errors is about 0.0076
    assert!((mean - 2.4).abs() < 0.008, "{mean}");
}

#[test]
fn inverted_logistic_reaches_one_at_infinity() {
    let k = KernelSpec::InvertedBevLogistic { gamma: 0.4 };
    assert_eq!(kernel_cdf(&k, 2.0, f64::INFINITY).unwrap(), 1.0);
    assert_eq!(kernel_cdf(&k, 2.0, 0.0).unwrap(), 0.0);
}

#[test]
fn logistic_diagonal_limit() {
    // Pr(Y ≤ x | X = x) → 2^{γ − 1} as x grows
    let k = KernelSpec::BevLogistic { gamma: 0.5 };
    let p = kernel_cdf(&k, 40.0, 40.0).unwrap();
    assert!((p - 2f64.powf(-0.5)).abs() < 1e-9, "{p}");
}

#[test]
fn logistic_matches_frechet_form() {
    // direct Fréchet-scale conditional cdf of the symmetric logistic copula
    let gamma: f64 = 0.6;
    let k = KernelSpec::BevLogistic { gamma };
    for &(x, y) in &[(0.5f64, 1.0f64), (2.0, 0.7), (3.0, 5.0)] {
        let tx = -1.0 / (1.0 - (-x).exp()).ln();
        let ty = -1.0 / (1.0 - (-y).exp()).ln();
        let s = tx.powf(-1.0 / gamma) + ty.powf(-1.0 / gamma);
        let v = s.powf(gamma);
        let oracle = s.powf(gamma - 1.0) * tx.powf(-1.0 / gamma - 1.0) * (-v).exp() * tx * tx
            / (-1.0 / tx).exp();
        let got = kernel_cdf(&k, x, y).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{x} {y} {got} {oracle}");
    }
}

#[test]
fn asymmetric_logistic_reduces_to_symmetric() {
    let a = KernelSpec::AsymmetricLogistic { phi1: 1.0 - 1e-15, phi2: 1.0 - 1e-15, nu: 0.3 };
    let b = KernelSpec::<f64>::BevLogistic { gamma: 0.3 };
    for &(x, y) in &[(1.0, 1.0), (4.0, 2.0), (0.2, 3.0)] {
        let d = kernel_cdf(&a, x, y).unwrap() - kernel_cdf(&b, x, y).unwrap();
        assert!(d.abs() < 1e-12);
    }
}

#[test]
fn exp_ar_truncates_below_the_autoregression() {
    let k = exp_ar(0.5);
    let KernelSpec::ExpAr { fv, .. } = &k else { unreachable!() };
    let x = 8.0;
    let ux = fv.isf_log(x).unwrap();
    // Y < φ U(x) − 1 is impossible
    let y = fv.neg_log_sf(0.5 * ux - 1.0 - 0.3);
    assert_eq!(kernel_cdf(&k, x, y).unwrap(), 0.0);
    let y = fv.neg_log_sf(0.5 * ux - 1.0 + 2.0);
    let p = kernel_cdf(&k, x, y).unwrap();
    assert!((p - (1.0 - (-2.0f64).exp())).abs() < 1e-8, "{p}");
}

#[test]
fn validation_errors() {
    let bad = [
        KernelSpec::GaussianCopula { rho: 0.0, margin: MarginalLaw::StandardExponential },
        KernelSpec::GaussianCopula { rho: 1.0, margin: MarginalLaw::StandardExponential },
        KernelSpec::BevLogistic { gamma: 1.0 },
        KernelSpec::AsymmetricLogistic { phi1: 0.0, phi2: 0.5, nu: 0.5 },
        KernelSpec::HtMixture {
            lambda: 0.5,
            first: Box::new(gauss(0.5)),
            second: Box::new(gauss(0.9)),
            alpha1: 0.25,
            beta1: 0.0,
            alpha2: 0.81,
            beta2: 0.0,
        },
    ];
    for k in bad {
        assert!(matches!(k.clone().checked(), Err(Error::Validation { .. })), "{k:?}");
    }
    assert!(KernelSpec::<f64>::AsymmetricLogistic { phi1: 0.5, phi2: 0.5, nu: 0.152 }.checked().is_ok());
}

#[test]
fn params_round_trip_through_json() {
    let p: KernelParams = serde_json::from_str(
        r#"{"id":"inverted_max_stable","exponent":{"family":"density","density":{"kind":"symmetric_beta","a":2.0}}}"#,
    )
    .unwrap();
    let k: KernelSpec<f64> = make_kernel(&p, 0).unwrap();
    assert_eq!(k.id(), "inverted_max_stable");
    let p: KernelParams = serde_json::from_str(r#"{"id":"rootzen_smith"}"#).unwrap();
    assert_eq!(make_kernel::<f64>(&p, 0).unwrap().id(), "rootzen_smith");
    assert!(serde_json::from_str::<KernelParams>(r#"{"id":"bev_logistic","gamma":0.5,"x":1}"#).is_err());
    let p = KernelParams::BevLogistic { gamma: 1.5 };
    assert!(matches!(make_kernel::<f64>(&p, 0), Err(Error::Validation { .. })));
}

#[test]
fn exponential_scale_rejects_nonpositive_state() {
    let k = KernelSpec::BevLogistic { gamma: 0.5 };
    assert!(matches!(kernel_cdf(&k, 0.0, 1.0), Err(Error::Domain { .. })));
    assert!(matches!(kernel_quantile(&k, 1.0, 1.0), Err(Error::Domain { .. })));
}

#[test]
fn rootzen_smith_atom_and_draws() {
    let k = KernelSpec::<f64>::RootzenSmith;
    let x = 5.0;
    // the atom at −x carries half the mass
    let below = kernel_cdf(&k, x, -x - 1e-12).unwrap();
    let at = kernel_cdf(&k, x, -x).unwrap();
    assert!((at - below - 0.5).abs() < 1e-9);
    assert!((at - (0.5 + 0.5 * 0.5 * (-5.0f64).exp())).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draws: Vec<f64> = (0..100_000).map(|_| kernel_sample(&k, x, &mut rng).unwrap()).collect();
    let d = ks_distance(draws, |y| kernel_cdf(&k, x, y).unwrap());
    assert!(d < 0.006, "{d}");
}

#[test]
fn mixture_sampler_matches_mixture_cdf() {
    let k = KernelSpec::HtMixture {
        lambda: 0.5,
        first: Box::new(gauss(0.9)),
        second: Box::new(gauss(0.5)),
        alpha1: 0.81,
        beta1: 0.5,
        alpha2: 0.25,
        beta2: 0.5,
    }
    .checked()
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = 3.0;
    let draws: Vec<f64> = (0..50_000).map(|_| kernel_sample(&k, x, &mut rng).unwrap()).collect();
    let d = ks_distance(draws, |y| kernel_cdf(&k, x, y).unwrap());
    assert!(d < 0.01, "{d}");
}

#[test]
fn quantile_inverts_cdf() {
    let mut ks = copula_kernels();
    ks.push(exp_ar(0.6));
    for k in &ks {
        for &x in &[0.3, 2.0, 9.0] {
            for &u in &[0.01, 0.3, 0.77, 0.999] {
                let y = kernel_quantile(k, x, u).unwrap();
                let p = kernel_cdf(k, x, y).unwrap();
                assert!((p - u).abs() < 1e-10, "{} x={x} u={u} p={p}", k.id());
            }
        }
    }
}

#[test]
fn kernels_preserve_the_margin() {
    let mut ks = copula_kernels();
    ks.push(exp_ar(0.6));
    ks.push(KernelSpec::RootzenSmith);
    for (i, k) in ks.iter().enumerate() {
        let margin = k.margin();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        let ys: Vec<f64> = (0..20_000)
            .map(|_| {
                let x = margin.sample(&mut rng);
                kernel_sample(k, x, &mut rng).unwrap()
            })
            .collect();
        let d = ks_distance(ys, |y| margin.cdf(y));
        assert!(d < 0.02, "{} {d}", k.id());
    }
}

#[test]
fn frechet_log_map() {
    for &x in &[0.01f64, 0.5, 0.7, 3.0] {
        let direct = (-1.0 / (1.0 - (-x).exp()).ln()).ln();
        assert!((log_frechet(x) - direct).abs() < 1e-10 * (1.0 + direct.abs()));
    }
    // far tail: ln T(x) = x − e^{−x}/2 + O(e^{−2x})
    let x = 30.0f64;
    assert!((log_frechet(x) - (x - 0.5 * (-x).exp())).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone_in_y(idx in 0usize..6, x in 0.05f64..15.0, y in 0.01f64..20.0, dy in 0.0f64..5.0) {
        let k = &copula_kernels()[idx];
        let a = kernel_cdf(k, x, y).unwrap();
        let b = kernel_cdf(k, x, y + dy).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-14);
    }

    #[test]
    fn quantile_is_consistent(idx in 0usize..6, x in 0.05f64..15.0, u in 0.001f64..0.999) {
        let k = &copula_kernels()[idx];
        let y = kernel_quantile(k, x, u).unwrap();
        prop_assert!((kernel_cdf(k, x, y).unwrap() - u).abs() < 1e-10);
    }
}
