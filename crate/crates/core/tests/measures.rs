use dioph_core::linforms::{effective_lower_bound, BoundVariant, PsiFamily};
use dioph_core::measures::{
    b1_exceptional_measure, b1_report, b1_union, exact_b1_measure, mc_probability, sample_point, totient_prefix_sums,
    totient_sum_exact, totient_sum_mobius, totient_sum_report, totient_sums_direct_scaled, totient_sums_mobius_scaled, Event, Sieve, Verdict,
};
use dioph_core::{Error, Limits};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn phi_naive(q: u64) -> u64 {
    (1..=q).filter(|&k| gcd(k, q) == 1).count() as u64
}

/// Oracle: every p/q (reduced or not), sorted by left endpoint, merged.
fn naive_measure(big_q: u64, kappa: &BigRational) -> BigRational {
    let mut iv = Vec::new();
    for q in 1..=big_q {
        let r = kappa / BigRational::from_integer(BigInt::from(q * big_q));
        for p in 0..=q {
            let x = BigRational::new(p.into(), q.into());
            iv.push((&x - &r, &x + &r));
        }
    }
    iv.sort();
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut total = BigRational::zero();
    let mut cur: Option<(BigRational, BigRational)> = None;
    for (l, h) in iv {
        let l = if l < zero { zero.clone() } else { l };
        let h = if h > one { one.clone() } else { h };
        cur = match cur {
            Some((s, e)) if l < e => Some((s, if h > e { h } else { e })),
            Some((s, e)) => {
                total += e - s;
                Some((l, h))
            }
            None => Some((l, h)),
        };
    }
    let (s, e) = cur.unwrap();
    total + (e - s)
}

#[test]
fn sieve_matches_trial_division() {
    let s = Sieve::new(500);
    for q in 1..=500u64 {
        assert_eq!(s.phi[q as usize], phi_naive(q), "phi({q})");
        // mu via factorisation
        let mut m = q;
        let mut mu = 1i8;
        let mut p = 2;
        while p * p <= m {
            if m % p == 0 {
                m /= p;
                if m % p == 0 {
                    mu = 0;
                    break;
                }
                mu = -mu;
            }
            p += 1;
        }
        if mu != 0 && m > 1 {
            mu = -mu;
        }
        assert_eq!(s.mu[q as usize], mu, "mu({q})");
    }
}

#[test]
fn b1_examples() {
    assert_eq!(exact_b1_measure(2, &rat(3, 10)).unwrap(), rat(11, 20));
    let u = b1_union(2, &rat(3, 10)).unwrap();
    assert_eq!(
        u.intervals,
        vec![(rat(0, 1), rat(3, 20)), (rat(17, 40), rat(23, 40)), (rat(17, 20), rat(1, 1))]
    );
    assert_eq!(u.measure, rat(9, 20));
    assert_eq!(exact_b1_measure(1, &rat(1, 2)).unwrap(), rat(0, 1));
    let small = exact_b1_measure(3, &rat(1, 1_000_000)).unwrap();
    assert!(small >= rat(1, 1) - rat(1, 100_000));
    let s = Sieve::new(3);
    let ub = rat(2, 1_000_000) * totient_sum_exact(3, &s);
    assert!(rat(1, 1) - small <= ub);
}

#[test]
fn b1_matches_naive_union_with_unreduced_fractions() {
    for big_q in 1..=25u64 {
        for k in [1i64, 3, 7, 9] {
            let kappa = rat(k, 10);
            let fast = exact_b1_measure(big_q, &kappa).unwrap();
            assert_eq!(fast, rat(1, 1) - naive_measure(big_q, &kappa), "Q={big_q} k={k}");
            assert_eq!(b1_union(big_q, &kappa).unwrap().measure, b1_exceptional_measure(big_q, &kappa).unwrap());
        }
    }
    let kappa = rat(12_345, 98_777);
    assert_eq!(exact_b1_measure(40, &kappa).unwrap(), rat(1, 1) - naive_measure(40, &kappa));
}

#[test]
fn b1_union_bound_and_monotonicity() {
    let sieve = Sieve::new(100);
    for big_q in 1..=100u64 {
        let s = totient_sum_exact(big_q, &sieve);
        let mut prev: Option<BigRational> = None;
        for k in 1..=9 {
            let kappa = rat(k, 10);
            let e = b1_exceptional_measure(big_q, &kappa).unwrap();
            let bound = rat(2, 1) * &kappa / BigRational::from_integer(big_q.into()) * &s;
            assert!(e <= bound, "Q={big_q} k={k}");
            let p = rat(1, 1) - e;
            if let Some(pp) = &prev {
                assert!(p <= *pp);
            }
            prev = Some(p);
        }
    }
}

#[test]
fn b1_guard_and_arguments() {
    assert!(matches!(exact_b1_measure(10_001, &rat(1, 2)), Err(Error::GuardExceeded(_))));
    assert!(matches!(exact_b1_measure(5, &rat(0, 1)), Err(Error::InvalidArgument(_))));
    assert!(matches!(exact_b1_measure(5, &rat(1, 1)), Err(Error::InvalidArgument(_))));
    // the largest Q runs
    let v = exact_b1_measure(10_000, &rat(1, 10)).unwrap();
    assert!(v > rat(0, 1) && v < rat(1, 1));
}

#[test]
fn b1_report_at_q2_is_tight() {
    let r = b1_report(2, &rat(3, 10)).unwrap();
    assert_eq!(r.exact, rat(11, 20));
    assert_eq!(r.union_bound, rat(11, 20));
    assert!((r.asymptotic - (1.0 - 3.6 / std::f64::consts::PI.powi(2))).abs() < 1e-15);
    assert!(!r.asymptotic_holds);
}

#[test]
fn totient_examples() {
    let r = totient_sum_report(2).unwrap();
    assert_eq!(r.sum.unwrap(), rat(3, 2));
    assert_eq!(r.verdict, Verdict::Exceeds);
    assert!((r.asymptote - 12.0 / std::f64::consts::PI.powi(2)).abs() < 1e-15);
    let r = totient_sum_report(1).unwrap();
    assert_eq!(r.sum.unwrap(), rat(1, 1));
    assert_eq!(r.verdict, Verdict::Exceeds);
    let r = totient_sum_report(100_000).unwrap();
    let direct: f64 = (1..=100_000u64).map(|q| phi_naive_fast(q) as f64 / q as f64).sum();
    assert!((r.sum_f64 - direct).abs() < 1e-6);
    assert!((r.sum_f64 / 1e5 - 6.0 / std::f64::consts::PI.powi(2)).abs() < 1e-3);
}

/// Trial-division totient, independent of the sieve.
fn phi_naive_fast(mut q: u64) -> u64 {
    let mut r = q;
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            while q % p == 0 {
                q /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if q > 1 {
        r -= r / q;
    }
    r
}

#[test]
fn totient_exact_agrees_with_float_prefix() {
    let sieve = Sieve::new(2000);
    let pre = totient_prefix_sums(2000, &sieve);
    for q in [1u64, 2, 3, 10, 97, 500, 2000] {
        let e = totient_sum_exact(q, &sieve);
        let naive: BigRational = (1..=q).map(|k| rat(phi_naive(k) as i64, k as i64)).sum();
        assert_eq!(e, naive);
        assert!((e.to_f64().unwrap() - pre[q as usize]).abs() < 1e-9);
    }
}

#[test]
fn mobius_form_equals_direct_form() {
    let sieve = Sieve::new(10_000);
    for q in (1..=200u64).chain([500, 1000, 2000, 5000, 10_000]) {
        assert_eq!(totient_sum_mobius(q, &sieve), totient_sum_exact(q, &sieve), "Q={q}");
    }
}

#[test]
fn mc_always_is_one_and_deterministic() {
    let l = Limits::default();
    let e = mc_probability(&Event::Always, 1000, 7, &l).unwrap();
    assert_eq!(e.estimate, 1.0);
    assert_eq!(e.radius, 0.0);
    let ev = Event::Bn { n: 1, big_q: 2, kappa: rat(3, 10) };
    let a = mc_probability(&ev, 20_000, 11, &l).unwrap();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| mc_probability(&ev, 20_000, 11, &l).unwrap());
    assert_eq!(a, b);
    assert_eq!(sample_point(11, 5, 2), sample_point(11, 5, 2));
    assert_ne!(sample_point(11, 5, 1), sample_point(12, 5, 1));
}

#[test]
fn mc_b1_matches_exact_value() {
    let l = Limits::default();
    let ev = Event::Bn { n: 1, big_q: 2, kappa: rat(3, 10) };
    let e = mc_probability(&ev, 1_000_000, 2024, &l).unwrap();
    assert_eq!(e.precision_failures, 0);
    assert!((e.estimate - 0.55).abs() <= e.radius, "{e:?}");
}

#[test]
fn mc_radius_covers_exact_value_for_most_seeds() {
    let l = Limits::default();
    let kappa = rat(1, 5);
    let exact = exact_b1_measure(5, &kappa).unwrap().to_f64().unwrap();
    let ev = Event::Bn { n: 1, big_q: 5, kappa };
    let covered = (0..100u64)
        .filter(|&s| {
            let e = mc_probability(&ev, 4000, 1000 + s, &l).unwrap();
            (e.estimate - exact).abs() <= e.radius
        })
        .count();
    assert!(covered >= 99, "covered {covered}");
}

#[test]
fn mc_b2_respects_lemma_bound() {
    let l = Limits::default();
    let ev = Event::Bn { n: 2, big_q: 10, kappa: rat(1, 20) };
    let e = mc_probability(&ev, 100_000, 99, &l).unwrap();
    let b = effective_lower_bound(&BoundVariant::Mum2 { n: 2, big_q: 10, kappa: rat(1, 20) }).unwrap();
    assert!(e.estimate >= b.value - e.radius, "{e:?} vs {}", b.value);
}

#[test]
fn mc_bpsi_is_conservative() {
    let l = Limits::default();
    let ev = Event::Bpsi { n: 1, kappa: 0.1, family: PsiFamily::Power, eps: 1.0, truncation: 200 };
    let e = mc_probability(&ev, 20_000, 5, &l).unwrap();
    assert!(e.bias_correction > 0.0);
    // the bias is bounded by 2 kappa sum_{q>T} q^{-2} plus slack
    assert!(e.bias_correction < 2.0 * 0.1 * (1.0 / 199.0) * 1.01);
    let bound = effective_lower_bound(&BoundVariant::Ekg { n: 1, kappa: 0.1, family: PsiFamily::Power, eps: 1.0 }).unwrap();
    assert!(e.estimate >= bound.value - e.radius);
    let bad = Event::Bpsi { n: 1, kappa: 0.1, family: PsiFamily::Power, eps: 0.0, truncation: 10 };
    assert!(matches!(mc_probability(&bad, 10, 5, &l), Err(Error::DivergentSeries(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn b1_oracle_agrees(q in 1u64..18, kn in 1i64..50, kd in 51i64..200) {
        let kappa = rat(kn, kd);
        prop_assert_eq!(exact_b1_measure(q, &kappa).unwrap(), rat(1, 1) - naive_measure(q, &kappa));
    }

    #[test]
    fn b1_union_is_sorted_and_disjoint(q in 1u64..60, kn in 1i64..99) {
        let u = b1_union(q, &rat(kn, 100)).unwrap();
        for w in u.intervals.windows(2) {
            prop_assert!(w[0].1 <= w[1].0);
        }
        for (l, h) in &u.intervals {
            prop_assert!(l < h);
        }
    }
}

#[test]
fn scaled_totient_sweeps_match_rational_sums() {
    let sieve = Sieve::new(300);
    let (l, direct) = totient_sums_direct_scaled(300, &sieve);
    let (l2, mobius) = totient_sums_mobius_scaled(300, &sieve);
    assert_eq!(l, l2);
    for q in [1u64, 2, 7, 30, 97, 210, 300] {
        // Trial-division oracle for phi(q)/q summed as rationals.
        let mut s = num_rational::BigRational::from_integer(0.into());
        for k in 1..=q {
            let phi = (1..=k).filter(|j| num_integer::gcd(*j, k) == 1).count() as i64;
            s += num_rational::BigRational::new(phi.into(), (k as i64).into());
        }
        let d = num_rational::BigRational::new(direct[q as usize].clone(), l.clone());
        let m = num_rational::BigRational::new(mobius[q as usize].clone(), l.clone());
        assert_eq!(d, s);
        assert_eq!(m, s);
    }
}
