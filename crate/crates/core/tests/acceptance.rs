//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::cmp::Ordering;
use std::time::Instant;

use dioph_core::channels::{
    analytic_error_prob, build_gic, build_mac, build_xchannel, build_xchannel_unaligned, constellation,
    constellation_difference, constellation_full, mc_symbol_error_rate, theoretical_bounds, ChannelModel, GicGenerators,
    NoiseMode,
};
use dioph_core::dof::{gic_dof_formula, gic_value, xchannel_limit, xchannel_ratio};
use dioph_core::exactnum::dirichlet::{bad_constant_lower, dirichlet_sweep};
use dioph_core::latdyn::{dani_consistency, escape_set, DaniOutcome, Time};
use dioph_core::linforms::{effective_lower_bound, one_form_witness, BoundVariant, PsiFamily};
use dioph_core::measures::{
    b1_report, mc_probability, totient_prefix_sums, totient_sums_direct_scaled, totient_sums_mobius_scaled, Event,
    Sieve,
};
use dioph_core::{ExactReal, Limits, Result};
use num_rational::BigRational;
use num_traits::Zero;

/// Monte Carlo criteria allow the estimate to fall this many standard
/// deviations short of the bound.
const SIGMAS: f64 = 4.0;
/// Distance of the finite-Q DoF ratio from its limit.
const DOF_TOL: f64 = 0.01;
/// Slack on the GIC supremum.
const GIC_SUP_TOL: f64 = 1e-9;
/// Totient error envelope: `|S(Q) - 6Q/pi^2| <= TOTIENT_C * ln(Q + 2)`.
const TOTIENT_C: f64 = 2.0;

/// Estimators report `radius = 4 sigma`.
fn sigma(radius: f64) -> f64 {
    radius / 4.0
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn lim() -> Limits {
    Limits::default()
}

fn eq(a: &ExactReal, b: &ExactReal) -> bool {
    a.cmp_exact(b).map(|o| o == Ordering::Equal).unwrap_or(false)
}

fn mac_golden() -> Result<ChannelModel> {
    let one = ExactReal::one();
    build_mac(&ExactReal::ratio(1, 3), &ExactReal::ratio(2, 3), &one, &one, 1, &one)
}

fn c1_mac_golden() -> Result<(bool, String)> {
    let m = mac_golden()?;
    let c = constellation(&m, 0, &lim())?;
    let want: Vec<ExactReal> = [(0, 1), (1, 3), (2, 3), (1, 1)].iter().map(|(a, b)| ExactReal::ratio(*a, *b)).collect();
    let vals = c.values();
    let ok_vals = vals.len() == 4 && vals.iter().zip(&want).all(|(a, b)| eq(a, b));
    let ok_d = eq(&c.d_min, &ExactReal::ratio(1, 3));
    let shown: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
    Ok((ok_vals && ok_d, format!("outcomes [{}], d_min = {}", shown.join(", "), c.d_min)))
}

fn c2_exact_probability() -> Result<(bool, String)> {
    let r = b1_report(2, &rat(3, 10))?;
    let ok = r.exact == rat(11, 20) && r.union_bound == rat(11, 20) && !r.asymptotic_holds;
    Ok((
        ok,
        format!(
            "exact {} union bound {} asymptotic {:.4} ({})",
            r.exact,
            r.union_bound,
            r.asymptotic,
            if r.asymptotic_holds { "holds" } else { "FAIL at this Q" }
        ),
    ))
}

fn c3_totients() -> Result<(bool, String)> {
    const QMAX: u64 = 100_000;
    const EXACT_QMAX: u64 = 10_000;
    let sieve = Sieve::new(QMAX);
    let sums = totient_prefix_sums(QMAX, &sieve);
    let c = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let mut worst = 0.0f64;
    let mut bad = 0u64;
    for q in 1..=QMAX {
        let err = (sums[q as usize] - c * q as f64).abs();
        let env = TOTIENT_C * ((q + 2) as f64).ln();
        worst = worst.max(err / env);
        if err > env {
            bad += 1;
        }
    }
    let small = Sieve::new(EXACT_QMAX);
    let (l1, direct) = totient_sums_direct_scaled(EXACT_QMAX, &small);
    let (l2, mobius) = totient_sums_mobius_scaled(EXACT_QMAX, &small);
    let mismatches = direct.iter().zip(&mobius).filter(|(a, b)| a != b).count();
    let ok = bad == 0 && l1 == l2 && mismatches == 0;
    Ok((
        ok,
        format!(
            "envelope violations {bad} (worst err/envelope {worst:.3}); Moebius vs direct mismatches {mismatches} over Q <= {EXACT_QMAX}"
        ),
    ))
}

fn c4_dirichlet() -> Result<(bool, String)> {
    let one = ExactReal::one();
    let mut fails = 0u64;
    let mut checked = 0u64;
    for s in 0..1000u64 {
        let xi = ExactReal::draw(40_000 + s, 0);
        for w in dirichlet_sweep(&xi, 1000, &lim())? {
            checked += 1;
            if w.distance.mul_int(w.q as i64).cmp_with(&one, lim().precision_bits)? != Ordering::Less {
                fails += 1;
            }
        }
    }
    for s in 0..200u64 {
        let xi = [ExactReal::draw(50_000 + s, 0), ExactReal::draw(50_000 + s, 1)];
        for q in 1..=20u64 {
            let w = one_form_witness(&xi, q, &lim())?;
            checked += 1;
            let bound = ExactReal::ratio(1, (q * q) as i64);
            if w.value.cmp_with(&bound, lim().precision_bits)? != Ordering::Less {
                fails += 1;
            }
        }
    }
    Ok((fails == 0, format!("{checked} witnesses, {fails} failures")))
}

fn c5_golden() -> Result<(bool, String)> {
    // F_20 = 6765
    let v = bad_constant_lower(&ExactReal::golden(), 6765, &lim())?;
    let cap = lim().precision_bits;
    let lo = ExactReal::sqrt_int(5).div_ref(&ExactReal::from_int(6))?;
    let hi = ExactReal::sqrt_int(5).recip()?;
    let ok = v.cmp_with(&lo, cap)? != Ordering::Less && v.cmp_with(&hi, cap)? != Ordering::Greater;
    Ok((ok, format!("min q^2 dist = {:.9} in [{:.9}, {:.9}]", v.to_f64(), lo.to_f64(), hi.to_f64())))
}

fn c6_xchannel() -> Result<(bool, String)> {
    let one = ExactReal::one();
    let cap = lim().precision_bits;
    let mut count_bad = 0;
    let mut unaligned_bad = 0;
    let mut violations = Vec::new();
    for s in 0..100u64 {
        let st = 60_000 + s;
        let h = [[ExactReal::draw(st, 0), ExactReal::draw(st, 1)], [ExactReal::draw(st, 2), ExactReal::draw(st, 3)]];
        let m = build_xchannel(&h, 1, &one)?;
        for i in 0..2 {
            if constellation(&m, i, &lim())?.value_count != Some(12) {
                count_bad += 1;
            }
        }
        let gains = [4, 5, 6, 7].map(|k| ExactReal::draw(st, k));
        let u = build_xchannel_unaligned(&h, &gains, 1, &one)?;
        for i in 0..2 {
            if constellation(&u, i, &lim())?.value_count != Some(16) {
                unaligned_bad += 1;
            }
        }
        for q in 1..=16u64 {
            let m = build_xchannel(&h, q, &one)?;
            let d = constellation_difference(&m, 0, &lim())?.d_min;
            let b = theoretical_bounds(&m, 0)?.upper_bound.expect("X-channel bound");
            if d.cmp_with(&b, cap)? == Ordering::Greater {
                violations.push((s, q));
            }
        }
    }
    let ok = count_bad == 0 && unaligned_bad == 0 && violations.is_empty();
    Ok((
        ok,
        format!(
            "aligned != 12: {count_bad}, unaligned != 16: {unaligned_bad}, d_min,1 > C2 lambda/Q^2: {} {:?}",
            violations.len(),
            &violations[..violations.len().min(5)]
        ),
    ))
}

fn gic_config(c: u64) -> Result<ChannelModel> {
    let mg = 1 + (c % 2) as usize;
    let k = 1 + (c / 2 % 2);
    let base = 2 + (c / 4 % 2);
    let st = 70_000 + c;
    let rational = c % 5 == 4;
    let gens: Vec<ExactReal> = (0..mg as u64)
        .map(|g| if rational { ExactReal::from_int(2 + g as i64) } else { ExactReal::draw(st, g) })
        .collect();
    let mut map = [[0usize; 3]; 3];
    for (i, row) in map.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = ((c >> (i * 3 + j)) as usize + i + j) % mg;
        }
    }
    let h: [[ExactReal; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            if i != j {
                gens[map[i][j]].clone()
            } else if rational {
                ExactReal::from_int(4)
            } else {
                ExactReal::draw(st, 10 + i as u64)
            }
        })
    });
    build_gic(&h, k, base, &ExactReal::one(), &GicGenerators::Reduced { generators: gens, map })
}

fn c7_oracle_equivalence() -> Result<(bool, String)> {
    let one = ExactReal::one();
    let mut models = Vec::new();
    for c in 0..10u64 {
        let st = 80_000 + c;
        let (h1, h2) = if c % 5 == 4 {
            (ExactReal::ratio(1, 3), ExactReal::ratio(2, 3))
        } else {
            (ExactReal::draw(st, 0), ExactReal::draw(st, 1))
        };
        models.push(("mac", build_mac(&h1, &h2, &one, &one, 1 + c % 3, &one)?));
    }
    for c in 0..20u64 {
        let st = 90_000 + c;
        let h: [[ExactReal; 2]; 2] = if c % 5 == 4 {
            std::array::from_fn(|i| std::array::from_fn(|j| ExactReal::ratio(1 + (i + 2 * j) as i64, 2)))
        } else {
            std::array::from_fn(|i| std::array::from_fn(|j| ExactReal::draw(st, (2 * i + j) as u64)))
        };
        models.push(("xchannel", build_xchannel(&h, 1 + c % 3, &one)?));
    }
    for c in 0..20u64 {
        models.push(("gic", gic_config(c)?));
    }
    let mut mismatches = Vec::new();
    let mut pairs = 0;
    let mut collisions = 0;
    for (n, (kind, m)) in models.iter().enumerate() {
        for i in 0..m.receivers.len() {
            let f = constellation_full(m, i, &lim())?;
            let d = constellation_difference(m, i, &lim())?;
            pairs += 1;
            if f.collision {
                collisions += 1;
            }
            if !eq(&f.d_min, &d.d_min) || f.collision != d.collision {
                mismatches.push(format!("{kind}#{n} rx{}", i + 1));
            }
        }
    }
    Ok((
        mismatches.is_empty(),
        format!("{} configs, {pairs} receiver pairs ({collisions} with collisions), mismatches {mismatches:?}", models.len()),
    ))
}

fn c8_dani() -> Result<(bool, String)> {
    let mut agree = 0;
    let mut boundary = 0;
    let mut disagree = 0;
    for inst in 0..200u64 {
        let n = 1 + (inst % 2) as usize;
        let xi: Vec<ExactReal> = (0..n).map(|k| ExactReal::draw(100_000 + inst, k as u64)).collect();
        let t = if inst % 3 == 0 {
            Time::LogOf(rat(1 + (inst % 17) as i64, 1))
        } else {
            Time::Rational(rat((inst * 13 % 40) as i64, 10))
        };
        let eps = ExactReal::ratio(1 + (inst * 7 % 19) as i64, 20);
        match dani_consistency(&xi, &t, &eps, &lim())? {
            DaniOutcome::Agree(_) => agree += 1,
            DaniOutcome::Boundary => boundary += 1,
            DaniOutcome::Disagree { .. } => disagree += 1,
        }
    }
    let mut non_suffix = 0;
    let mut escapes = 0;
    for (a, b) in [(1i64, 2i64), (2, 3), (3, 7), (5, 8), (4, 9), (7, 12)] {
        for s in [Time::Rational(rat(3, 2)), Time::LogOf(rat(4, 1))] {
            let r = escape_set(&[ExactReal::ratio(a, b)], &s, 12, &ExactReal::ratio(1, 5), &lim())?;
            if let Some(&first) = r.set.first() {
                escapes += 1;
                if r.set != (first..=12).collect::<Vec<_>>() {
                    non_suffix += 1;
                }
            }
        }
    }
    Ok((
        disagree == 0 && non_suffix == 0 && escapes > 0,
        format!(
            "agree {agree}, boundary {boundary}, disagree {disagree}; rational escape sets non-empty {escapes}, non-suffix {non_suffix}"
        ),
    ))
}

fn c9_dof() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for eps in [0.01, 0.05, 0.1] {
        worst = worst.max((xchannel_ratio(1 << 20, eps, 1.0) - xchannel_limit(eps)).abs());
    }
    let zero = BigRational::zero();
    let exact_ok = gic_value(1, 6, &zero) == rat(3, 65) && gic_value(2, 6, &zero) == rat(192, 793);
    let ks: Vec<u64> = (1..=1000).collect();
    let r = gic_dof_formula(&ks, 6, &zero)?;
    let monotone = r.points.windows(2).all(|w| w[1].exact > w[0].exact);
    let below = r.points.iter().all(|p| p.exact.as_ref().unwrap() < &rat(3, 2));
    let ok = worst < DOF_TOL && exact_ok && monotone && below && r.sup < 1.5 + GIC_SUP_TOL;
    Ok((
        ok,
        format!(
            "max |ratio - 4/(3+2eps)| = {worst:.5}; k=1 {} k=2 {}; monotone {monotone}; sup to k=1000 {:.9}",
            gic_value(1, 6, &zero),
            gic_value(2, 6, &zero),
            r.sup
        ),
    ))
}

fn c10_noise() -> Result<(bool, String)> {
    let m = mac_golden()?;
    let c = constellation(&m, 0, &lim())?;
    let g = mc_symbol_error_rate(&m, &c, 1_000_000, 2024, NoiseMode::Gaussian)?;
    let p = analytic_error_prob(1.0 / 3.0);
    let f = mc_symbol_error_rate(&m, &c, 1_000_000, 2025, NoiseMode::BelowHalfDistance)?;
    let ok = g.rate <= p + SIGMAS * sigma(g.radius) && f.errors == 0 && f.samples > 0;
    Ok((
        ok,
        format!(
            "SER {:.5} <= {:.5} + {:.5}; filtered run {} errors in {} samples ({} discarded)",
            g.rate, p, g.radius, f.errors, f.samples, f.filtered
        ),
    ))
}

fn c11_effective_bounds() -> Result<(bool, String)> {
    let kappa = rat(1, 20);
    let b = effective_lower_bound(&BoundVariant::Mum2 { n: 2, big_q: 10, kappa: kappa.clone() })?;
    let mc = mc_probability(&Event::Bn { n: 2, big_q: 10, kappa }, 100_000, 11, &lim())?;
    let ok1 = mc.estimate >= b.value - SIGMAS * sigma(mc.radius);
    let ekg = effective_lower_bound(&BoundVariant::Ekg { n: 2, kappa: 0.02, family: PsiFamily::Power, eps: 1.0 })?;
    let ev = Event::Bpsi { n: 2, kappa: 0.02, family: PsiFamily::Power, eps: 1.0, truncation: 50 };
    let mp = mc_probability(&ev, 100_000, 12, &lim())?;
    // Undecided samples count as misses.
    let conservative = mp.hits as f64 / mp.samples as f64 - mp.bias_correction;
    let ok2 = conservative >= ekg.value - SIGMAS * sigma(mp.radius);
    Ok((
        ok1 && ok2,
        format!(
            "B2(10,1/20): MC {:.4} (r {:.4}) vs bound {:.4}; Bpsi(q^-3, 0.02): MC {:.4} (r {:.4}, bias {:.4}, undecided {}) vs bound {:.4}",
            mc.estimate, mc.radius, b.value, conservative, mp.radius, mp.bias_correction, mp.precision_failures, ekg.value
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Result<(bool, String)>); 11] = [
        ("MAC golden constellation", c1_mac_golden),
        ("exact B1 probability", c2_exact_probability),
        ("totient asymptotics", c3_totients),
        ("Dirichlet strictness", c4_dirichlet),
        ("golden-ratio badness", c5_golden),
        ("X-channel alignment", c6_xchannel),
        ("difference-form oracle", c7_oracle_equivalence),
        ("Dani consistency", c8_dani),
        ("DoF limits", c9_dof),
        ("noise contract", c10_noise),
        ("effective-bound audit", c11_effective_bounds),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            n + 1,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
