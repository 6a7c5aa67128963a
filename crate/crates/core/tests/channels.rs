use std::cmp::Ordering;

use dioph_core::channels::{
    analytic_error_prob, build_gic, build_mac, build_multiantenna, build_multiantenna_xi, build_xchannel,
    build_xchannel_unaligned, constellation, constellation_difference, constellation_full, derived_points,
    fmap_pairings, kg_separation_check, mac_xi, mc_symbol_error_rate, theoretical_bounds, ChannelModel, DerivedWhich,
    FMap, GicGenerators, NoiseMode, Provenance,
};
use dioph_core::{Error, ExactReal, Limits};
use proptest::prelude::*;

fn er(s: &str) -> ExactReal {
    s.parse().unwrap()
}

fn lim() -> Limits {
    Limits::default()
}

fn one() -> ExactReal {
    ExactReal::one()
}

fn sqrt(d: u64) -> ExactReal {
    ExactReal::sqrt_int(d)
}

fn eq(a: &ExactReal, b: &ExactReal) -> bool {
    a.cmp_exact(b).unwrap() == Ordering::Equal
}

/// Exact oracle: evaluate every digit tuple exactly, sort, deduplicate and
/// take the least gap. Returns (distinct values, d_min), d_min = 0 on a
/// collision.
fn exact_oracle(coeffs: &[ExactReal], ranges: &[u64], lambda: &ExactReal) -> (Vec<ExactReal>, ExactReal) {
    let mut vals = vec![ExactReal::zero()];
    for (c, r) in coeffs.iter().zip(ranges) {
        let mut next = Vec::new();
        for v in &vals {
            for d in 0..=*r as i64 {
                next.push(v.add_ref(&c.mul_int(d)));
            }
        }
        vals = next;
    }
    let total = vals.len();
    vals.sort_by(|a, b| a.cmp_exact(b).unwrap());
    vals.dedup_by(|a, b| eq(a, b));
    let vals: Vec<ExactReal> = vals.into_iter().map(|v| v.mul_ref(lambda)).collect();
    if vals.len() < total {
        return (vals, ExactReal::zero());
    }
    let mut best = vals[1].sub_ref(&vals[0]);
    for w in vals.windows(2) {
        let g = w[1].sub_ref(&w[0]);
        if g.cmp_exact(&best).unwrap() == Ordering::Less {
            best = g;
        }
    }
    (vals, best)
}

fn golden_mac() -> ChannelModel {
    build_mac(&er("1/3"), &er("2/3"), &one(), &one(), 1, &one()).unwrap()
}

fn surd_x(q: u64) -> ChannelModel {
    build_xchannel(&[[one(), one()], [sqrt(2), sqrt(3)]], q, &one()).unwrap()
}

fn generic_h() -> [[ExactReal; 2]; 2] {
    [[one(), sqrt(2)], [sqrt(3), sqrt(5)]]
}

#[test]
fn mac_golden_outcomes() {
    let m = golden_mac();
    let c = constellation(&m, 0, &lim()).unwrap();
    let want = ["0", "1/3", "2/3", "1"].map(er);
    let got = c.values();
    assert_eq!(got.len(), 4);
    for (g, w) in got.iter().zip(&want) {
        assert!(eq(g, w));
    }
    assert!(eq(&c.d_min, &er("1/3")));
    assert_eq!(c.collisions, Some(0));
    assert_eq!(c.provenance, Provenance::FullEnumeration);
}

#[test]
fn mac_normalizing_gains_give_golden_outcomes() {
    for (h1, h2) in [(sqrt(2), sqrt(7)), (er("5/4"), er("dec:0.3"))] {
        let alpha = er("1/3").div_ref(&h1).unwrap();
        let beta = er("2/3").div_ref(&h2).unwrap();
        let m = build_mac(&h1, &h2, &alpha, &beta, 1, &one()).unwrap();
        let c = constellation(&m, 0, &lim()).unwrap();
        assert_eq!(c.value_count, Some(4));
        assert!(eq(&c.d_min, &er("1/3")));
        assert!(eq(&mac_xi(&m).unwrap(), &er("1/2")));
    }
}

#[test]
fn mac_equal_gains_collide() {
    let m = build_mac(&sqrt(2), &sqrt(2), &one(), &one(), 1, &one()).unwrap();
    let c = constellation(&m, 0, &lim()).unwrap();
    assert!(c.d_min.is_zero());
    assert_eq!(c.collisions, Some(1));
    assert!(c.collision);
    let d = constellation_difference(&m, 0, &lim()).unwrap();
    assert!(d.collision && d.d_min.is_zero());
}

#[test]
fn builders_reject_nonpositive_coefficients() {
    assert!(matches!(build_mac(&er("0"), &one(), &one(), &one(), 1, &one()), Err(Error::InvalidArgument(_))));
    assert!(matches!(build_mac(&one(), &er("-1/2"), &one(), &one(), 1, &one()), Err(Error::InvalidArgument(_))));
    assert!(matches!(build_mac(&one(), &one(), &one(), &one(), 1, &er("1/2")), Err(Error::InvalidArgument(_))));
    let bad = [[one(), er("0")], [one(), one()]];
    assert!(build_xchannel(&bad, 1, &one()).is_err());
}

#[test]
fn mac_bounds_and_brute_force() {
    let m = build_mac(&er("1/3"), &er("2/3"), &one(), &one(), 3, &one()).unwrap();
    let b = theoretical_bounds(&m, 0).unwrap();
    assert!(eq(b.constant.as_ref().unwrap(), &er("2/3")));
    assert!(eq(b.upper_bound.as_ref().unwrap(), &er("2/9")));
    assert!(eq(&b.perfect_separation, &er("1/5")));
    let r = m.receivers[0].coeffs();
    let (_, d) = exact_oracle(&r, &[3, 3], &one());
    let c = constellation(&m, 0, &lim()).unwrap();
    assert!(eq(&c.d_min, &d));
    assert_ne!(c.d_min.cmp_exact(b.upper_bound.as_ref().unwrap()).unwrap(), Ordering::Greater);
}

#[test]
fn xchannel_binary_has_twelve_outcomes() {
    let m = build_xchannel(&generic_h(), 1, &one()).unwrap();
    for i in 0..2 {
        let c = constellation(&m, i, &lim()).unwrap();
        assert_eq!(c.value_count, Some(12));
        assert_eq!(c.tuples, 12);
    }
    let gains = [sqrt(7), sqrt(11), sqrt(13), sqrt(17)];
    let u = build_xchannel_unaligned(&generic_h(), &gains, 1, &one()).unwrap();
    for i in 0..2 {
        assert_eq!(constellation(&u, i, &lim()).unwrap().value_count, Some(16));
    }
}

#[test]
fn xchannel_unit_gains_collide() {
    let m = build_xchannel(&[[one(), one()], [one(), one()]], 1, &one()).unwrap();
    let c = constellation(&m, 0, &lim()).unwrap();
    assert!(c.collision && c.d_min.is_zero());
}

#[test]
fn xchannel_surd_example_distance() {
    let m = surd_x(1);
    let c = constellation(&m, 0, &lim()).unwrap();
    assert!(eq(&c.d_min, &er("2").sub_ref(&sqrt(3))));
    // Float brute force of |sqrt3 a1 + sqrt2 a2 + a3| over the difference box.
    let mut best = f64::INFINITY;
    for a1 in -1i32..=1 {
        for a2 in -1i32..=1 {
            for a3 in -2i32..=2 {
                if (a1, a2, a3) != (0, 0, 0) {
                    let v = (3f64.sqrt() * a1 as f64 + 2f64.sqrt() * a2 as f64 + a3 as f64).abs();
                    best = best.min(v);
                }
            }
        }
    }
    assert!((c.d_min.to_f64() - best).abs() < 1e-12);
    let b = theoretical_bounds(&m, 0).unwrap();
    assert!(eq(b.constant.as_ref().unwrap(), &sqrt(3)));
    assert_ne!(c.d_min.cmp_exact(b.upper_bound.as_ref().unwrap()).unwrap(), Ordering::Greater);
}

#[test]
fn xchannel_value_count_formula() {
    let m = build_xchannel(&generic_h(), 2, &one()).unwrap();
    let c = constellation(&m, 0, &lim()).unwrap();
    assert_eq!(c.value_count, Some(45));
    let (vals, d) = exact_oracle(&m.receivers[0].coeffs(), &[2, 2, 4], &one());
    assert_eq!(vals.len(), 45);
    assert!(eq(&c.d_min, &d));
    for (a, b) in c.values().iter().zip(&vals) {
        assert!(eq(a, b));
    }
}

#[test]
fn lambda_doubling_doubles_distances_and_bounds() {
    let two = er("2");
    let a = surd_x(2);
    let b = build_xchannel(&[[one(), one()], [sqrt(2), sqrt(3)]], 2, &two).unwrap();
    let ca = constellation(&a, 0, &lim()).unwrap();
    let cb = constellation(&b, 0, &lim()).unwrap();
    assert!(eq(&cb.d_min, &ca.d_min.mul_int(2)));
    let (ba, bb) = (theoretical_bounds(&a, 0).unwrap(), theoretical_bounds(&b, 0).unwrap());
    assert!(eq(bb.upper_bound.as_ref().unwrap(), &ba.upper_bound.as_ref().unwrap().mul_int(2)));
    assert!(eq(&bb.perfect_separation, &ba.perfect_separation.mul_int(2)));
    let (pa, pb) = (derived_points(&a).unwrap(), derived_points(&b).unwrap());
    for (x, y) in pa.iter().zip(&pb) {
        assert!(eq(&x.point[0], &y.point[0]) && eq(&x.point[1], &y.point[1]));
    }
}

#[test]
fn derived_points_of_surd_example() {
    let pts = derived_points(&surd_x(1)).unwrap();
    assert_eq!(pts.len(), 6);
    let xi = pts.iter().find(|p| p.which == DerivedWhich::Xi).unwrap();
    assert!(eq(&xi.point[0], &sqrt(3)) && eq(&xi.point[1], &sqrt(2)));
    for p in &pts {
        assert!(p.point.iter().all(|c| c.sign().unwrap() > 0));
    }
}

#[test]
fn every_fmap_has_a_pairing() {
    let h = [[ExactReal::draw(1, 0), ExactReal::draw(1, 1)], [ExactReal::draw(1, 2), ExactReal::draw(1, 3)]];
    let m = build_xchannel(&h, 1, &one()).unwrap();
    let pts = derived_points(&m).unwrap();
    let pairs = fmap_pairings(&pts, lim().precision_bits).unwrap();
    for f in FMap::ALL {
        assert!(pairs.iter().any(|p| p.map == f), "{f} has no pairing");
    }
    assert!(pairs
        .iter()
        .any(|p| p.map == FMap::Inverse && p.xi == DerivedWhich::Xi && p.xi_prime == DerivedWhich::XiPrime));
}

#[test]
fn equal_gains_give_unit_points() {
    let m = build_xchannel(&[[er("3/2"), er("3/2")], [er("3/2"), er("3/2")]], 1, &one()).unwrap();
    let pts = derived_points(&m).unwrap();
    for p in &pts {
        assert!(eq(&p.point[0], &one()) && eq(&p.point[1], &one()));
    }
    assert_eq!(fmap_pairings(&pts, 64).unwrap().len(), 5 * 9);
}

#[test]
fn gic_full_mode_bookkeeping() {
    let h: [[ExactReal; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| ExactReal::draw(7, (3 * i + j) as u64)));
    let m = build_gic(&h, 1, 2, &one(), &GicGenerators::Full).unwrap();
    let dioph_core::channels::ChannelParams::Gic(g) = &m.params else { panic!() };
    assert_eq!(g.m_g(), 6);
    assert_eq!(g.nominal_m, 1);
    assert_eq!(g.nominal_m_prime, 65);
    assert_eq!(g.nominal_n(), 64);
    for i in 0..3 {
        assert_eq!(g.unwanted_support(i), 2);
        assert!(g.multiplicity[i].iter().all(|x| *x <= 2));
        assert_eq!(m.receivers[i].directions.len(), 3);
    }
}

fn reduced(mg: usize, map: [[usize; 3]; 3], stream: u64) -> ([[ExactReal; 3]; 3], GicGenerators) {
    let gens: Vec<ExactReal> = (0..mg as u64).map(|g| ExactReal::draw(stream, g)).collect();
    let h = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { ExactReal::draw(stream, 10 + i as u64) } else { gens[map[i][j]].clone() })
    });
    (h, GicGenerators::Reduced { generators: gens, map })
}

#[test]
fn gic_reduced_single_generator_matches_oracle() {
    let (h, g) = reduced(1, [[0; 3]; 3], 3);
    let m = build_gic(&h, 1, 2, &one(), &g).unwrap();
    for i in 0..3 {
        let rx = &m.receivers[i];
        // One unwanted direction T carrying both interferers, then h_ii.
        assert_eq!(rx.ranges(), vec![2, 1]);
        let f = constellation_full(&m, i, &lim()).unwrap();
        let d = constellation_difference(&m, i, &lim()).unwrap();
        let (vals, od) = exact_oracle(&rx.coeffs(), &rx.ranges(), &one());
        assert_eq!(f.value_count, Some(vals.len() as u64));
        assert!(eq(&f.d_min, &od) && eq(&d.d_min, &od));
    }
}

#[test]
fn gic_reduced_two_generators_disjoint_shifts() {
    let map = [[9, 0, 1], [0, 9, 1], [0, 1, 9]];
    let (h, g) = reduced(2, map, 4);
    let m = build_gic(&h, 2, 2, &one(), &g).unwrap();
    for rx in &m.receivers {
        let mut seen = std::collections::HashSet::new();
        for d in &rx.directions {
            assert!(d.sources.len() <= 2);
            for s in &d.sources {
                assert!(seen.insert(*s), "message routed twice");
            }
        }
    }
    let c = constellation(&m, 0, &lim()).unwrap();
    let d = constellation_difference(&m, 0, &lim()).unwrap();
    assert!(eq(&c.d_min, &d.d_min));
}

#[test]
fn gic_rejects_inconsistent_map() {
    let (mut h, g) = reduced(2, [[9, 0, 1], [0, 9, 1], [0, 1, 9]], 5);
    h[0][1] = er("7/3");
    assert!(matches!(build_gic(&h, 1, 2, &one(), &g), Err(Error::InvalidArgument(_))));
    let bad = GicGenerators::Reduced { generators: vec![one(); 3], map: [[0; 3]; 3] };
    assert!(build_gic(&h, 1, 2, &one(), &bad).is_err());
}

#[test]
fn gic_rational_equal_products_collide() {
    let (h, g) = reduced(1, [[0; 3]; 3], 6);
    let mut h = h;
    let t = er("2");
    for (i, row) in h.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = if i == j { er("4") } else { t.clone() };
        }
    }
    let g = match g {
        GicGenerators::Reduced { map, .. } => GicGenerators::Reduced { generators: vec![t], map },
        _ => unreachable!(),
    };
    let m = build_gic(&h, 1, 3, &one(), &g).unwrap();
    let c = constellation(&m, 0, &lim()).unwrap();
    assert!(c.collision && c.d_min.is_zero());
}

#[test]
fn multiantenna_trivial_rows_give_zero_matrix() {
    let z = er("0");
    let h = vec![vec![one(), z.clone(), z.clone(), z.clone()], vec![z.clone(), one(), z.clone(), z.clone()]];
    let xi = build_multiantenna_xi(&h, &[one(), one(), one(), one()]).unwrap();
    assert!(xi.entries().iter().all(|e| e.is_zero()));
}

#[test]
fn multiantenna_solves_the_linear_system() {
    let h = vec![
        vec![sqrt(2), er("1"), sqrt(3), er("2/5")],
        vec![er("1/2"), sqrt(5), er("3"), sqrt(7)],
    ];
    let alpha = vec![one(), er("2"), sqrt(2), er("1/3")];
    let xi = build_multiantenna_xi(&h, &alpha).unwrap();
    assert_eq!((xi.n(), xi.m()), (2, 2));
    // Residual oracle: L * (xi row) must reproduce the received column.
    for r in 0..2 {
        let j = r + 2;
        let (x, y) = (xi.get(r, 0), xi.get(r, 1));
        for i in 0..2 {
            let lhs = h[i][0].mul_ref(&alpha[0]).mul_ref(x).add_ref(&h[i][1].mul_ref(&alpha[1]).mul_ref(y));
            assert!(eq(&lhs, &h[i][j].mul_ref(&alpha[j])));
        }
    }
    let scaled: Vec<ExactReal> = alpha.iter().map(|a| a.mul_ref(&sqrt(11))).collect();
    let xi2 = build_multiantenna_xi(&h, &scaled).unwrap();
    for (a, b) in xi.entries().iter().zip(xi2.entries()) {
        assert!(eq(a, b));
    }
}

#[test]
fn multiantenna_singular_is_an_error() {
    let h = vec![vec![one(), er("2"), one()], vec![er("2"), er("4"), one()]];
    assert_eq!(build_multiantenna_xi(&h, &[one(), one(), one()]).unwrap_err(), Error::SingularMatrix);
}

#[test]
fn multiantenna_constellation_matches_oracle() {
    let h = vec![vec![sqrt(2), one(), sqrt(3)], vec![er("1/2"), sqrt(5), er("3")]];
    let m = build_multiantenna(&h, &[one(), one(), one()], 2, &one()).unwrap();
    for i in 0..2 {
        let c = constellation(&m, i, &lim()).unwrap();
        let (vals, d) = exact_oracle(&m.receivers[i].coeffs(), &[2, 2, 2], &one());
        assert_eq!(c.value_count, Some(vals.len() as u64));
        assert!(eq(&c.d_min, &d));
    }
}

/// Composite Simpson rule for `1 - sqrt(2/pi) int_0^{d/2} exp(-t^2/2) dt`.
fn simpson_tail(d: f64) -> f64 {
    let n = 20_000;
    let b = d / 2.0;
    let h = b / n as f64;
    let f = |t: f64| (-t * t / 2.0).exp();
    let mut s = f(0.0) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    1.0 - (2.0 / std::f64::consts::PI).sqrt() * s * h / 3.0
}

#[test]
fn analytic_error_probability() {
    assert_eq!(analytic_error_prob(0.0), 1.0);
    assert!(analytic_error_prob(100.0) < 1e-30);
    for d in [1.0 / 3.0, 0.5, 1.0, 2.5, 6.0] {
        assert!((analytic_error_prob(d) - simpson_tail(d)).abs() < 1e-12, "d = {d}");
    }
    assert!((analytic_error_prob(1.0 / 3.0) - 0.8676).abs() < 5e-5);
}

#[test]
fn zero_noise_never_errs() {
    let m = surd_x(2);
    let c = constellation(&m, 0, &lim()).unwrap();
    let r = mc_symbol_error_rate(&m, &c, 20_000, 11, NoiseMode::Zero).unwrap();
    assert_eq!(r.errors, 0);
    assert_eq!(r.samples, 20_000);
}

#[test]
fn sub_threshold_noise_never_errs() {
    let m = golden_mac();
    let c = constellation(&m, 0, &lim()).unwrap();
    let r = mc_symbol_error_rate(&m, &c, 100_000, 5, NoiseMode::BelowHalfDistance).unwrap();
    assert_eq!(r.errors, 0);
    assert!(r.samples > 0 && r.filtered > 0);
    assert_eq!(r.samples + r.filtered, 100_000);
}

#[test]
fn gaussian_rate_below_threshold_bound() {
    let m = golden_mac();
    let c = constellation(&m, 0, &lim()).unwrap();
    let r = mc_symbol_error_rate(&m, &c, 100_000, 9, NoiseMode::Gaussian).unwrap();
    assert!(r.rate <= analytic_error_prob(1.0 / 3.0) + r.radius);
    assert!(r.rate > 0.3);
    let again = mc_symbol_error_rate(&m, &c, 100_000, 9, NoiseMode::Gaussian).unwrap();
    assert_eq!(r, again);
}

#[test]
fn ser_needs_class_table() {
    let m = golden_mac();
    let c = constellation_difference(&m, 0, &lim()).unwrap();
    assert!(matches!(mc_symbol_error_rate(&m, &c, 10, 1, NoiseMode::Zero), Err(Error::WorkLimit { .. })));
}

#[test]
fn work_limit_is_enforced() {
    let m = surd_x(16);
    let tiny = lim().with_work(100);
    assert!(matches!(constellation(&m, 0, &tiny), Err(Error::WorkLimit { .. })));
}

#[test]
fn kg_check_on_surd_example() {
    let qs: Vec<u64> = (1..=16).collect();
    let r = kg_separation_check(&surd_x(1), 0, &qs, 0.1, Some(1e-3), &lim()).unwrap();
    assert!(r.empirical_kappa > 0.0);
    assert_eq!(r.all_pass, Some(r.empirical_kappa >= 1e-3));
    let two = build_xchannel(&[[one(), one()], [sqrt(2), sqrt(3)]], 1, &er("2")).unwrap();
    let r2 = kg_separation_check(&two, 0, &qs, 0.1, None, &lim()).unwrap();
    assert!((r.empirical_kappa - r2.empirical_kappa).abs() <= 1e-12 * r.empirical_kappa);
}

#[test]
fn kg_check_rational_model_is_zero() {
    let m = build_xchannel(&[[one(), er("2")], [er("3"), er("5")]], 1, &one()).unwrap();
    let r = kg_separation_check(&m, 0, &[1, 2, 3, 4], 0.1, Some(0.01), &lim()).unwrap();
    assert_eq!(r.empirical_kappa, 0.0);
    assert_eq!(r.all_pass, Some(false));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn difference_form_equals_full_enumeration(seed in 0u64..100_000, q in 1u64..4, rational in any::<bool>()) {
        let h: [[ExactReal; 2]; 2] = if rational {
            std::array::from_fn(|i| std::array::from_fn(|j| ExactReal::ratio(1 + ((seed >> (3 * (2 * i + j))) % 5) as i64, 3)))
        } else {
            std::array::from_fn(|i| std::array::from_fn(|j| ExactReal::draw(seed, (2 * i + j) as u64)))
        };
        let m = build_xchannel(&h, q, &one()).unwrap();
        for i in 0..2 {
            let f = constellation_full(&m, i, &lim()).unwrap();
            let d = constellation_difference(&m, i, &lim()).unwrap();
            prop_assert!(eq(&f.d_min, &d.d_min));
            prop_assert_eq!(f.collision, d.collision);
            prop_assert!(f.value_count.unwrap() as u128 <= (2 * q as u128 + 1) * (q as u128 + 1).pow(2));
        }
    }

    #[test]
    fn decoded_class_is_sent_class_below_threshold(seed in 0u64..1000) {
        let h = [[ExactReal::draw(seed, 0), ExactReal::draw(seed, 1)], [ExactReal::draw(seed, 2), ExactReal::draw(seed, 3)]];
        let m = build_xchannel(&h, 1, &one()).unwrap();
        let c = constellation(&m, 1, &lim()).unwrap();
        prop_assume!(!c.collision);
        let r = mc_symbol_error_rate(&m, &c, 2000, seed, NoiseMode::BelowHalfDistance).unwrap();
        prop_assert_eq!(r.errors, 0);
    }
}
