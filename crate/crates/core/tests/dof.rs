use dioph_core::channels::build_xchannel;
use dioph_core::dof::{gic_dof_formula, gic_value, reliability_report, xchannel_dof_sweep, xchannel_limit, xchannel_ratio};
use dioph_core::{ExactReal, Limits};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn surd_x() -> dioph_core::channels::ChannelModel {
    let one = ExactReal::one();
    build_xchannel(&[[one.clone(), one.clone()], [ExactReal::sqrt_int(2), ExactReal::sqrt_int(3)]], 1, &one).unwrap()
}

#[test]
fn ratio_at_two_to_the_twenty() {
    // P = 2^124, so the benchmark is 62 bits against 80 message bits.
    let r = xchannel_ratio(1 << 20, 0.05, 1.0);
    assert!((r - 80.0 / 62.0).abs() < 1e-12);
    assert!((xchannel_limit(0.05) - 4.0 / 3.1).abs() < 1e-15);
    assert!((xchannel_limit(0.0) - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn ratio_at_two_regression() {
    for eps in [0.01, 0.3, 1.0] {
        let want = 4.0 / (0.5 * (1.0 + 2f64.powf(6.0 + 4.0 * eps)).log2());
        assert!((xchannel_ratio(2, eps, 1.0) - want).abs() < 1e-12);
    }
}

#[test]
fn ratio_approaches_limit() {
    for eps in [0.01, 0.05, 0.1] {
        assert!((xchannel_ratio(1 << 20, eps, 1.0) - xchannel_limit(eps)).abs() < 0.01);
        // The implied constant washes out, slowly.
        let gap = |q: u64| (xchannel_ratio(q, eps, 10.0) - xchannel_ratio(q, eps, 1.0)).abs();
        assert!(gap(1 << 20) > gap(1 << 40) && gap(1 << 40) > gap(1 << 60));
        assert!((xchannel_ratio(1 << 60, eps, 10.0) - xchannel_limit(eps)).abs() < 0.02);
    }
    assert!(xchannel_limit(0.2) < xchannel_limit(0.1));
}

#[test]
fn sweep_reports_consistent_points() {
    let qs = [2, 16, 1 << 10, 1 << 20];
    let r = xchannel_dof_sweep(0.05, &qs, 1.0, None, &Limits::default()).unwrap();
    assert_eq!(r.points.len(), 4);
    for p in &r.points {
        assert!((p.ratio - xchannel_ratio(p.sweep, 0.05, 1.0)).abs() < 1e-12);
        assert!((p.lambda_log2 - 2.1 * (p.sweep as f64).log2()).abs() < 1e-9);
    }
    assert!(r.sup <= r.limit + 1e-9);
    assert!(xchannel_dof_sweep(0.0, &qs, 1.0, None, &Limits::default()).is_err());
    assert!(xchannel_dof_sweep(0.1, &[4, 2], 1.0, None, &Limits::default()).is_err());
}

#[test]
fn sweep_with_model_measures_distances() {
    let r = xchannel_dof_sweep(0.1, &[2, 4], 1.0, Some(&surd_x()), &Limits::default()).unwrap();
    for p in &r.points {
        let d = p.d_hat.as_ref().unwrap();
        assert!(d.to_f64() > 0.0);
        let x = d.to_f64() * p.lambda_log2.exp2();
        assert!((p.reliability.unwrap() - (-x * x / 8.0).exp()).abs() < 1e-15);
    }
}

#[test]
fn gic_small_values() {
    assert_eq!(gic_value(1, 6, &BigRational::zero()), rat(3, 65));
    assert_eq!(gic_value(2, 6, &BigRational::zero()), rat(192, 793));
    let v = gic_value(100, 6, &BigRational::zero()).to_f64().unwrap();
    assert!((v - 1.45524).abs() < 1e-5);
}

#[test]
fn gic_values_increase_below_three_halves() {
    let ks: Vec<u64> = (1..=1000).collect();
    let r = gic_dof_formula(&ks, 6, &rat(1, 100)).unwrap();
    let three_halves = rat(3, 2);
    for w in r.points.windows(2) {
        assert!(w[1].exact.as_ref().unwrap() > w[0].exact.as_ref().unwrap());
    }
    assert!(r.points.iter().all(|p| p.exact.as_ref().unwrap() < &three_halves));
    assert!(r.sup < 1.5 + 1e-9);
}

#[test]
fn reliability_decays_on_surd_model() {
    let r = reliability_report(&surd_x(), 0, 0.1, &[2, 4, 8, 16], 1.0, &Limits::default()).unwrap();
    assert!(r.decaying && r.kappa > 0.0);
    for w in r.rows.windows(2) {
        assert!(w[1].envelope < w[0].envelope);
    }
    for row in &r.rows {
        assert!(row.value <= row.envelope * (1.0 + 1e-12));
    }
    let r10 = reliability_report(&surd_x(), 0, 0.1, &[2, 4, 8, 16], 10.0, &Limits::default()).unwrap();
    for (a, b) in r.rows.iter().zip(&r10.rows) {
        assert!(b.value < a.value || a.value == 0.0);
    }
}

#[test]
fn reliability_flags_rational_model() {
    let h = [[ExactReal::one(), ExactReal::from_int(2)], [ExactReal::from_int(3), ExactReal::from_int(5)]];
    let m = build_xchannel(&h, 1, &ExactReal::one()).unwrap();
    let r = reliability_report(&m, 0, 0.1, &[2, 4, 8], 1.0, &Limits::default()).unwrap();
    assert!(!r.decaying);
}

proptest! {
    #[test]
    fn gic_value_is_the_rational_function(k in 1u64..200, en in 0i64..50, ed in 1i64..50) {
        let eps = rat(en, ed);
        let v = gic_value(k, 6, &eps);
        let k6 = num_bigint::BigInt::from(k).pow(6);
        let k16 = num_bigint::BigInt::from(k + 1).pow(6);
        // Cross-multiplied: v * (k^6 + (k+1)^6 + 2 eps) = 3 k^6.
        let lhs = &v * (BigRational::from_integer(k6.clone() + k16) + &eps * BigRational::from_integer(2.into()));
        prop_assert_eq!(lhs, BigRational::from_integer(k6 * 3));
    }
}
