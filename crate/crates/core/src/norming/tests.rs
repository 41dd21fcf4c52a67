use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::testutil::ks_distance;

fn ht(alpha: f64, beta: f64) -> NormingScheme<f64> {
    NormingScheme::HtCanonical { alpha, beta }.checked().unwrap()
}

fn hr(gamma: f64) -> NormingScheme<f64> {
    NormingScheme::HuslerReiss { gamma }.checked().unwrap()
}

fn dd() -> NormingScheme<f64> {
    NormingScheme::DensityDecay { kappa: 2.0, gamma: 1.5, delta: 0.5 }.checked().unwrap()
}

fn all_schemes() -> Vec<NormingScheme<f64>> {
    vec![
        ht(1.0, 0.0),
        ht(0.5, 0.3),
        ht(0.0, 0.5),
        hr(1.0),
        dd(),
        NormingScheme::NegativeHt { alpha_minus: -0.4, alpha_plus: -0.7, beta: 0.3 },
        NormingScheme::AlternatingGaussian { rho: -0.6 },
    ]
}

#[test]
fn canonical_substitutions() {
    let (a, b) = ht(0.5, 0.3).norming(3, 100.0).unwrap();
    assert!((a - 12.5).abs() < 1e-12);
    assert!((b - 100f64.powf(0.3)).abs() < 1e-12);
    for &v in &[5.0, 50.0, 1e6] {
        assert_eq!(ht(1.0, 0.0).norming(4, v).unwrap(), (v, 1.0));
    }
    let (a, b) = ht(0.0, 0.5).norming(2, 16.0).unwrap();
    assert_eq!(a, 0.0);
    assert!((b - 2.0).abs() < 1e-14);
}

#[test]
fn zeta_and_decay_constant() {
    let s = dd();
    let c = 0.5 + 2.0 * 2.5;
    assert!((s.decay_constant() - c).abs() < 1e-15);
    assert!((s.zeta(2) - (1.0 + 2.0 * c)).abs() < 1e-14);
    assert!((s.zeta(1) - c).abs() < 1e-15);
    assert!((s.zeta(4) - (6.0 + 4.0 * c)).abs() < 1e-13);
}

#[test]
fn parameter_box_is_enforced() {
    let bad = [
        NormingScheme::HtCanonical { alpha: 0.0, beta: 0.0 },
        NormingScheme::HtCanonical { alpha: 1.2, beta: 0.3 },
        NormingScheme::HtCanonical { alpha: 0.5, beta: 1.0 },
        NormingScheme::HuslerReiss { gamma: 0.0 },
        NormingScheme::DensityDecay { kappa: 1.0, gamma: 1.0, delta: -5.0 },
        NormingScheme::NegativeHt { alpha_minus: 0.2, alpha_plus: -0.5, beta: 0.5 },
        NormingScheme::AlternatingGaussian { rho: 0.4 },
    ];
    for s in bad {
        assert!(matches!(s.validate(), Err(Error::Validation { .. })), "{s:?}");
    }
    let p: SchemeParams = serde_json::from_str(r#"{"id":"ht_canonical","alpha":0.0,"beta":0.0}"#).unwrap();
    assert!(make_norming::<f64>(&p).is_err());
    let p: SchemeParams = serde_json::from_str(r#"{"id":"density_decay","kappa":2.0,"gamma":1.5,"delta":0.5}"#).unwrap();
    assert_eq!(make_norming::<f64>(&p).unwrap(), dd());
}

#[test]
fn update_function_examples() {
    let rw = ht(1.0, 0.0).update_functions();
    assert_eq!((rw.psi_a(3, 1.7), rw.psi_b(3, 1.7)), (1.7, 1.0));
    let pw = ht(0.0, 0.4).update_functions();
    assert_eq!(pw.psi_a(2, 3.0), 0.0);
    assert!((pw.psi_b(2, 3.0) - 3f64.powf(0.4)).abs() < 1e-15);
    let h = hr(0.8).update_functions();
    assert_eq!((h.psi_a(5, -2.0), h.psi_b(5, -2.0)), (-2.0, 1.0));
    let rho: f64 = -0.6;
    let g = NormingScheme::AlternatingGaussian { rho }.update_functions();
    for n in 2..8 {
        assert!((g.psi_a(n, 1.3) + rho * rho * 1.3).abs() < 1e-15);
        assert!((g.psi_b(n, 1.3) - rho.abs().powi(n as i32 - 1)).abs() < 1e-14);
    }
    let ar = ht(0.5, 0.3).update_functions();
    assert!((ar.psi_b(3, 0.0) - 0.5f64.powf(0.6)).abs() < 1e-15);
    let d = dd().update_functions();
    assert!((d.psi_a(3, 0.0) + 2.0 * 2f64.ln() / 2.25).abs() < 1e-14);
}

#[test]
fn exact_normings_leave_no_remainder() {
    let s = ht(1.0, 0.0);
    for &v in &[8.0, 30.0, 3e5] {
        for &x in &[-5.0, 0.0, 2.5, 5.0] {
            assert_eq!(s.remainder_terms(2, v, x).unwrap(), (0.0, 0.0));
        }
    }
}

#[test]
fn scale_remainder_rate() {
    // r_b(v, x) ≈ β v^{β−1} x / α^t, so doubling v scales it by 2^{β−1}
    let (alpha, beta) = (0.5, 0.3);
    let s = ht(alpha, beta);
    let x = 2.0;
    let target = 2f64.powf(beta - 1.0);
    let mut v: f64 = 1e4;
    while v < 1e9 {
        let r1 = s.remainder_terms(2, v, x).unwrap().1;
        let r2 = s.remainder_terms(2, 2.0 * v, x).unwrap().1;
        assert!((r2 / r1 - target).abs() < 2e-3, "v={v} {}", r2 / r1);
        v *= 10.0;
    }
}

#[test]
fn husler_reiss_location_remainder_is_root_log_small() {
    let s = hr(1.0);
    for t in 1..4 {
        for k in 10..=30 {
            let l = k as f64;
            let (ra, rb) = s.remainder_terms_log(t, l, 0.0).unwrap();
            assert!((ra * l.sqrt()).abs() < 3.0, "t={t} ln v={l} {ra}");
            assert!(rb.abs() < 1.0);
        }
    }
}

#[test]
fn remainders_vanish_far_out() {
    for s in [hr(1.0), dd()] {
        let near = s.remainder_terms_log(1, 1e3, 1.0).unwrap();
        let far = s.remainder_terms_log(1, 1e9, 1.0).unwrap();
        assert!(far.0.abs() < near.0.abs() && far.0.abs() < 0.01, "{} {near:?} {far:?}", s.id());
        assert!(far.1.abs() < near.1.abs() && far.1.abs() < 0.01);
    }
}

#[test]
fn semigroup_of_canonical_normings() {
    let s = ht(0.6, 0.4);
    for t in 1..6 {
        let v = 250.0;
        let (at, _) = s.norming(t, v).unwrap();
        let (an, _) = s.norming(t + 1, v).unwrap();
        assert!((s.norming(1, at).unwrap().0 - an).abs() < 1e-12 * an);
    }
    let s = ht(0.0, 0.7);
    for t in 1..6 {
        let (_, bt) = s.norming(t, 1e5).unwrap();
        let (_, bn) = s.norming(t + 1, 1e5).unwrap();
        assert!((s.norming(1, bt).unwrap().1 - bn).abs() < 1e-12 * bn);
    }
}

#[test]
fn semigroup_holds_asymptotically_on_log_schemes() {
    for s in [hr(1.0), dd()] {
        let mut prev = f64::INFINITY;
        for &l in &[1e2, 1e4, 1e6, 1e8] {
            let (la_t, _) = s.log_norming(2, l).unwrap();
            let (la_n, _) = s.log_norming(3, l).unwrap();
            let (la_comp, _) = s.log_norming(1, la_t).unwrap();
            let gap = (la_comp - la_n).abs();
            assert!(gap < prev, "{} ln v={l} gap={gap}", s.id());
            prev = gap;
        }
        assert!(prev < 0.05);
    }
}

#[test]
fn update_limits_match_closed_forms() {
    // finite-v estimates of ψ within 2%; absolute slack near ψ^a = 0
    let check = |s: &NormingScheme<f64>, est: (f64, f64), t: usize, x: f64| {
        let psi = s.update_functions();
        let (pa, pb) = (psi.psi_a(t + 1, x), psi.psi_b(t + 1, x));
        assert!((est.0 - pa).abs() <= 0.02 * pa.abs().max(1.0), "{} t={t} x={x} {} vs {pa}", s.id(), est.0);
        assert!((est.1 - pb).abs() <= 0.02 * pb, "{} t={t} x={x} {} vs {pb}", s.id(), est.1);
    };
    for s in [ht(1.0, 0.0), ht(0.5, 0.3), ht(0.0, 0.5)] {
        for t in 1..4 {
            for &x in &[0.5, 2.0, 4.0] {
                check(&s, s.update_estimates(t, 1e6, x).unwrap(), t, x);
            }
        }
    }
    let neg = NormingScheme::NegativeHt { alpha_minus: -0.4, alpha_plus: -0.7, beta: 0.3 };
    for t in 1..4 {
        check(&neg, neg.update_estimates(t, 1e6, 1.0).unwrap(), t, 1.0);
    }
    // the log-scale schemes only settle to 2% far beyond v = e^30
    for s in [hr(1.0), dd()] {
        for t in 1..3 {
            for &x in &[-2.0, 0.0, 2.0] {
                check(&s, s.update_estimates_log(t, 1e7, x).unwrap(), t, x);
            }
        }
    }
}

#[test]
fn norming_diverges_with_v() {
    for s in all_schemes() {
        // the comparison only bites once a_t(v) dominates b_t(v) x; the random
        // walk normings need ln v > (γt)²/2 before a_t grows
        let (lo, hi) = if s.is_log_scale() { (200f64.exp(), 400f64.exp()) } else { (1e6, 2e6) };
        // scale-only normings live on x > 0
        let xs: &[f64] = if matches!(s.update_functions(), UpdateFunctions::PowerAr { .. }) { &[5.0] } else { &[-5.0, 0.0, 5.0] };
        for t in 1..=10 {
            for &x in xs {
                let (a1, b1) = s.norming(t, lo).unwrap();
                let (a2, b2) = s.norming(t, hi).unwrap();
                assert!(b1 > 0.0 && b2 > 0.0);
                let (y1, y2) = (a1 + b1 * x, a2 + b2 * x);
                match s {
                    NormingScheme::NegativeHt { .. } | NormingScheme::AlternatingGaussian { .. } => {
                        // location sign alternates, −∞ at odd t
                        let sign = if t % 2 == 1 { -1.0 } else { 1.0 };
                        assert!(sign * a2 > sign * a1 && sign * a1 > 0.0, "{} t={t}", s.id());
                    }
                    _ => assert!(y2 > y1, "{} t={t} x={x}", s.id()),
                }
            }
        }
    }
}

#[test]
fn power_scale_sublevel_sets_shrink() {
    let psi = ht(0.0, 0.4).update_functions();
    let mut prev = f64::INFINITY;
    for &c in &[0.5, 0.1, 0.01, 1e-4] {
        let s = psi.scale_sublevel_sup(2, c);
        assert!((s - c.powf(2.5)).abs() < 1e-15 && s < prev);
        prev = s;
    }
    assert_eq!(psi.scale_sublevel_sup(2, 0.0), 0.0);
}

#[test]
fn update_functions_are_continuous() {
    for s in all_schemes() {
        let psi = s.update_functions();
        let h = 1e-4;
        let mut x: f64 = 0.01;
        while x < 5.0 {
            for n in 2..5 {
                assert!((psi.psi_a(n, x + h) - psi.psi_a(n, x)).abs() < 1e-3);
                assert!((psi.psi_b(n, x + h) - psi.psi_b(n, x)).abs() < 1e-3);
                assert!(psi.psi_b(n, x) > 0.0);
            }
            x += 0.05;
        }
    }
}

#[test]
fn remainder_csv_has_schema() {
    let rows = ht(0.5, 0.3).remainder_grid(1, 1e4, 11).unwrap();
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0].x, -5.0);
    let mut buf = Vec::new();
    write_remainder_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("t,v,x,r_a,r_b\n"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn single_precision_norming() {
    let s = NormingScheme::<f32>::HtCanonical { alpha: 0.5, beta: 0.3 };
    let (a, b) = s.norming(3, 100.0).unwrap();
    assert!((a - 12.5).abs() < 1e-5 && (b - 100f32.powf(0.3)).abs() < 1e-4);
}

// limit laws

fn law(p: LimitParams) -> LimitLaw<f64> {
    limit_law(&p).unwrap()
}

#[test]
fn gaussian_limit_on_exponential_margins() {
    let k = law(LimitParams::GaussianCopula { rho: 0.8, margin: "exponential".into() });
    assert_eq!(k.cdf(0.0), 0.5);
    let ContinuousLaw::Gaussian { sd } = k.continuous else { panic!() };
    assert!((sd * sd - 0.4608).abs() < 1e-15);
    let g = law(LimitParams::GaussianCopula { rho: 0.8, margin: "gaussian".into() });
    let ContinuousLaw::Gaussian { sd } = g.continuous else { panic!() };
    assert!((sd - 0.6).abs() < 1e-15);
}

#[test]
fn asymmetric_location_limit_at_zero() {
    for &nu in &[0.152, 0.5, 0.9] {
        let k = law(LimitParams::AsymLogisticLocation { phi1: 0.5, phi2: 0.5, nu });
        assert!((k.continuous.cdf(0.0) - 2f64.powf(nu - 1.0)).abs() < 1e-15);
        assert_eq!(k.atom_lo, 0.5);
    }
}

#[test]
fn husler_reiss_limit_at_zero() {
    let k = law(LimitParams::HuslerReiss { gamma: 1.0 });
    let oracle = 1.0 - (-1.0 / (8.0 * std::f64::consts::PI).sqrt()).exp();
    assert!((k.cdf(0.0) - oracle).abs() < 1e-15);
}

#[test]
fn arch_limits_are_reflections() {
    for &theta1 in &[0.3, 0.8, 1.0] {
        let plus = law(LimitParams::ArchPlus { theta1 }).continuous;
        let minus = law(LimitParams::ArchMinus { theta1 }).continuous;
        for &x in &[-6.0, -1.0, 0.0, 0.4, 3.0, 9.0] {
            assert!((minus.cdf(x) - (1.0 - plus.cdf(-x))).abs() < 1e-13, "{theta1} {x}");
        }
    }
}

#[test]
fn exp_ar_limit_is_unsupported() {
    assert!(matches!(limit_law::<f64>(&LimitParams::ExpAr { phi: 0.5 }), Err(Error::Unsupported(_))));
}

fn continuous_laws() -> Vec<ContinuousLaw<f64>> {
    vec![
        ContinuousLaw::Gaussian { sd: 0.7 },
        ContinuousLaw::LogisticBev { gamma: 0.5 },
        ContinuousLaw::AsymLogistic { ratio: 2.0, nu: 0.3 },
        ContinuousLaw::Weibull { gamma: 0.4 },
        ContinuousLaw::HuslerReiss { gamma: 1.2 },
        ContinuousLaw::DensityDecay { gamma: 1.5, c: 5.5 },
        ContinuousLaw::Exponential,
        ContinuousLaw::Laplace,
        ContinuousLaw::ArchPlus { kappa: 2.0, theta1: 1.0 },
        ContinuousLaw::ArchMinus { kappa: 3.1, theta1: 0.6 },
    ]
}

#[test]
fn limit_quantiles_invert() {
    for g in continuous_laws() {
        for &p in &[1e-6, 0.01, 0.3, 0.5, 0.9, 0.999] {
            let x = g.quantile(p).unwrap();
            assert!((g.cdf(x) - p).abs() < 1e-11 * (1.0 + 1.0 / (1.0 - p)), "{g:?} p={p}");
        }
    }
}

#[test]
fn limit_samplers_match_cdfs() {
    for (i, g) in continuous_laws().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(77 + i as u64);
        let xs: Vec<f64> = (0..100_000).map(|_| g.sample(&mut rng)).collect();
        let d = ks_distance(xs, |x| g.cdf(x));
        assert!(d < 0.006, "{g:?} {d}");
    }
}

#[test]
fn atoms_are_sampled_with_their_mass() {
    let k = law(LimitParams::ArchKPlus { theta1: 0.7 });
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let draws: Vec<ExtendedReal<f64>> = (0..n).map(|_| k.sample(&mut rng)).collect();
    let lo = draws.iter().filter(|d| matches!(d, ExtendedReal::NegInf)).count() as f64 / n as f64;
    assert!((lo - 0.5).abs() < 0.006, "{lo}");
    assert!(!draws.iter().any(|d| matches!(d, ExtendedReal::PosInf)));
    // −∞ sorts first, so it can stand in as a very negative number
    let xs: Vec<f64> = draws.iter().map(|d| d.finite().unwrap_or(-1e300)).collect();
    let d = ks_distance(xs, |x| if x < -1e300 { 0.0 } else if x < -1e299 { 0.5 } else { k.cdf(x) });
    assert!(d < 0.006, "{d}");
}

#[test]
fn atom_masses_are_validated() {
    assert!(LimitLaw::with_atoms(ContinuousLaw::<f64>::Laplace, 0.6, 0.4).is_err());
    assert!(LimitLaw::with_atoms(ContinuousLaw::<f64>::Laplace, -0.1, 0.4).is_err());
    assert!(LimitLaw::with_atoms(ContinuousLaw::<f64>::Laplace, 0.3, 0.4).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn norming_scale_is_positive(idx in 0usize..7, t in 1usize..12, lv in 3.0f64..40.0) {
        let s = all_schemes()[idx];
        let (_, b) = s.norming(t, lv.exp()).unwrap();
        prop_assert!(b > 0.0 && b.is_finite());
    }

    #[test]
    fn limit_cdfs_are_monotone_with_full_range(idx in 0usize..10, x in -30.0f64..30.0, dx in 0.0f64..3.0) {
        let g = &continuous_laws()[idx];
        let (a, b) = (g.cdf(x), g.cdf(x + dx));
        prop_assert!((0.0..=1.0).contains(&a) && b >= a);
    }

    #[test]
    fn atom_law_mass_is_one(lo in 0.0f64..0.5, hi in 0.0f64..0.49, x in -50.0f64..50.0) {
        let k = LimitLaw::with_atoms(ContinuousLaw::Laplace, lo, hi).unwrap();
        let c = k.cdf(x);
        prop_assert!(c >= lo - 1e-15 && c <= 1.0 - hi + 1e-15);
        prop_assert!((k.atom_lo + k.continuous_mass() + k.atom_hi - 1.0).abs() < 1e-15);
    }
}
