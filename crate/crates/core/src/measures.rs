//! Exact measure of `B_1(Q, kappa')`, totient sums, and seeded Monte Carlo
//! estimates for `B_n` events.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::exactnum::draw::Var;
use crate::exactnum::search::{half_box_tasks, run_half_box_task};
use crate::linforms::{in_b_n, psi, tail_bound, PsiFamily};
use crate::{Error, ExactReal, Limits, Result};

/// Largest `Q` accepted by [`exact_b1_measure`].
pub const B1_MAX_Q: u64 = 10_000;
/// Largest `Q` accepted by [`totient_sum_report`].
pub const TOTIENT_MAX_Q: u64 = 1_000_000;
/// Largest `Q` for which the totient sum is returned as an exact rational.
pub const TOTIENT_EXACT_MAX_Q: u64 = 100_000;

// ------------------------------------------------------------------- sieve

/// Euler's `phi`, Moebius `mu` and the primes up to `n`, by a linear sieve.
#[derive(Debug, Clone)]
pub struct Sieve {
    pub phi: Vec<u64>,
    pub mu: Vec<i8>,
    pub primes: Vec<u64>,
}

impl Sieve {
    pub fn new(n: u64) -> Sieve {
        let n = n as usize;
        let mut phi = vec![0u64; n + 1];
        let mut mu = vec![0i8; n + 1];
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        if n >= 1 {
            phi[1] = 1;
            mu[1] = 1;
        }
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u64);
                phi[i] = i as u64 - 1;
                mu[i] = -1;
            }
            for &p in &primes {
                let p = p as usize;
                let ip = i * p;
                if ip > n {
                    break;
                }
                composite[ip] = true;
                if i % p == 0 {
                    phi[ip] = phi[i] * p as u64;
                    mu[ip] = 0;
                    break;
                }
                phi[ip] = phi[i] * (p as u64 - 1);
                mu[ip] = -mu[i];
            }
        }
        Sieve { phi, mu, primes }
    }

    /// Product of the distinct primes dividing `q`.
    pub fn radical(&self, mut q: u64) -> u64 {
        let mut r = 1;
        for &p in &self.primes {
            if p * p > q {
                break;
            }
            if q % p == 0 {
                r *= p;
                while q % p == 0 {
                    q /= p;
                }
            }
        }
        if q > 1 {
            r *= q;
        }
        r
    }
}

fn primorial(primes: &[u64], upto: u64) -> BigInt {
    let mut v: Vec<BigInt> = primes.iter().take_while(|&&p| p <= upto).map(|&p| BigInt::from(p)).collect();
    // balanced product
    while v.len() > 1 {
        v = v.chunks(2).map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() }).collect();
    }
    v.pop().unwrap_or_else(BigInt::one)
}

// ------------------------------------------------------------- B_1 measure

/// A sorted union of disjoint open intervals in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    pub intervals: Vec<(BigRational, BigRational)>,
    pub measure: BigRational,
}

/// Endpoint `num / (q * Q * kd)`.
#[derive(Debug, Clone, Copy)]
struct End {
    num: i128,
    q: i128,
}

fn less(a: End, b: End) -> bool {
    a.num * b.q < b.num * a.q
}

/// Walks the reduced fractions `p/q` in `[0, 1]`, `q <= Q`, in increasing
/// order and merges the intervals `(p/q - r_q, p/q + r_q)`, `r_q = kappa/(qQ)`.
/// Consecutive Farey neighbours `a/b < c/d` satisfy `c/d - a/b = 1/(bd)`,
/// which exceeds `kappa |b - d| / (Q b d)`, so left endpoints arrive sorted.
/// Calls `emit(start, end)` for each merged component clipped to `[0, 1]`.
fn sweep_b1(big_q: u64, kn: i128, kd: i128, mut emit: impl FnMut(End, End)) {
    let qq = big_q as i128;
    let unit = qq * kd;
    let clip = |e: End, hi: bool| -> End {
        if !hi && e.num < 0 {
            End { num: 0, q: 1 }
        } else if hi && e.num > e.q * unit {
            End { num: unit, q: 1 }
        } else {
            e
        }
    };
    let (mut a, mut b, mut c, mut d) = (0i128, 1i128, 1i128, qq);
    let mut cur: Option<(End, End)> = None;
    loop {
        let lo = End { num: a * unit - kn, q: b };
        let hi = End { num: a * unit + kn, q: b };
        match cur {
            Some((s, e)) if less(lo, e) => {
                if less(e, hi) {
                    cur = Some((s, hi));
                }
            }
            Some((s, e)) => {
                emit(clip(s, false), clip(e, true));
                cur = Some((lo, hi));
            }
            None => cur = Some((lo, hi)),
        }
        if a == 1 && b == 1 {
            break;
        }
        let k = (qq + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
    }
    let (s, e) = cur.unwrap();
    emit(clip(s, false), clip(e, true));
}

fn fits_i128(big_q: u64, kd: &BigInt) -> bool {
    // cross products reach (Q * (Q*kd + kd))^2
    let bound = BigInt::from(big_q) * (BigInt::from(big_q) + 1u32) * kd;
    bound.bits() * 2 + 2 < 126
}

fn check_kappa(kappa: &BigRational) -> Result<()> {
    if !kappa.is_positive() || *kappa >= BigRational::one() {
        return Err(Error::InvalidArgument("kappa must lie in (0, 1)".into()));
    }
    Ok(())
}

/// `Prob(B_1(Q, kappa')) = 1 - |E|` exactly.
pub fn exact_b1_measure(big_q: u64, kappa: &BigRational) -> Result<BigRational> {
    let e = b1_exceptional_measure(big_q, kappa)?;
    Ok(BigRational::one() - e)
}

/// `|E|`, the measure of the union of the excluded intervals.
pub fn b1_exceptional_measure(big_q: u64, kappa: &BigRational) -> Result<BigRational> {
    check_kappa(kappa)?;
    if big_q == 0 {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    if big_q > B1_MAX_Q {
        return Err(Error::GuardExceeded(format!("exact B_1 measure needs Q <= {B1_MAX_Q}, got {big_q}")));
    }
    if !fits_i128(big_q, kappa.denom()) {
        let u = b1_union(big_q, kappa)?;
        return Ok(u.measure);
    }
    let kn = kappa.numer().to_i128().unwrap();
    let kd = kappa.denom().to_i128().unwrap();
    // measure = sum over components of (end - start); collect numerators by
    // denominator q, over the common factor Q * kd.
    let mut acc = vec![0i128; big_q as usize + 1];
    sweep_b1(big_q, kn, kd, |s, e| {
        acc[e.q as usize] += e.num;
        acc[s.q as usize] -= s.num;
    });
    let l = lcm_upto(big_q);
    let mut num = BigInt::zero();
    for (q, a) in acc.iter().enumerate().skip(1) {
        if *a != 0 {
            num += BigInt::from(*a) * (&l / BigInt::from(q));
        }
    }
    Ok(BigRational::new(num, l * BigInt::from(big_q) * kappa.denom()))
}

/// `lcm(1, ..., n)` as the product of maximal prime powers.
fn lcm_upto(n: u64) -> BigInt {
    let sieve = Sieve::new(n);
    let mut v: Vec<BigInt> = sieve
        .primes
        .iter()
        .map(|&p| {
            let mut pk = p;
            while pk * p <= n {
                pk *= p;
            }
            BigInt::from(pk)
        })
        .collect();
    while v.len() > 1 {
        v = v.chunks(2).map(|c| if c.len() == 2 { &c[0] * &c[1] } else { c[0].clone() }).collect();
    }
    v.pop().unwrap_or_else(BigInt::one)
}

/// The merged components of `E` with exact endpoints.
pub fn b1_union(big_q: u64, kappa: &BigRational) -> Result<IntervalUnion> {
    check_kappa(kappa)?;
    if big_q == 0 {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    if big_q > B1_MAX_Q {
        return Err(Error::GuardExceeded(format!("exact B_1 union needs Q <= {B1_MAX_Q}, got {big_q}")));
    }
    let qq = BigInt::from(big_q);
    let zero = BigRational::zero();
    let one = BigRational::one();
    let mut out: Vec<(BigRational, BigRational)> = Vec::new();
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, big_q);
    loop {
        let x = BigRational::new(a.into(), b.into());
        let r = kappa / BigRational::from_integer(BigInt::from(b) * &qq);
        let (lo, hi) = (&x - &r, &x + &r);
        match out.last_mut() {
            Some(last) if lo < last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
        if a == 1 && b == 1 {
            break;
        }
        let k = (big_q + b) / d;
        let (na, nb) = (c, d);
        c = k * c - a;
        d = k * d - b;
        a = na;
        b = nb;
    }
    for iv in out.iter_mut() {
        if iv.0 < zero {
            iv.0 = zero.clone();
        }
        if iv.1 > one {
            iv.1 = one.clone();
        }
    }
    let measure = out.iter().fold(BigRational::zero(), |s, (l, h)| s + (h - l));
    Ok(IntervalUnion { intervals: out, measure })
}

// ------------------------------------------------------------- totient sums

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The sum is at most `6Q / pi^2`.
    Within,
    /// The sum exceeds `6Q / pi^2`.
    Exceeds,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotientReport {
    pub big_q: u64,
    /// Exact for `Q <= TOTIENT_EXACT_MAX_Q`.
    pub sum: Option<BigRational>,
    pub sum_f64: f64,
    pub asymptote: f64,
    pub verdict: Verdict,
}

pub fn six_over_pi_sq() -> f64 {
    6.0 / (std::f64::consts::PI * std::f64::consts::PI)
}

/// `sum_{q <= Q} phi(q) / q` as an exact rational. Since `phi(q)/q` depends
/// only on the radical of `q`, terms are grouped by radical and scaled by
/// the primorial of `Q`.
pub fn totient_sum_exact(big_q: u64, sieve: &Sieve) -> BigRational {
    let mut count = std::collections::BTreeMap::<u64, u64>::new();
    for q in 1..=big_q {
        *count.entry(sieve.radical(q)).or_default() += 1;
    }
    let d = primorial(&sieve.primes, big_q);
    let mut num = BigInt::zero();
    for (r, c) in count {
        num += (&d / BigInt::from(r)) * BigInt::from(sieve.phi[r as usize] * c);
    }
    BigRational::new(num, d)
}

/// `sum_{d <= Q} mu(d) floor(Q/d) / d`, the Moebius-inversion form.
pub fn totient_sum_mobius(big_q: u64, sieve: &Sieve) -> BigRational {
    let d = primorial(&sieve.primes, big_q);
    let mut num = BigInt::zero();
    for k in 1..=big_q {
        let m = sieve.mu[k as usize];
        if m != 0 {
            let t = (&d / BigInt::from(k)) * BigInt::from(big_q / k);
            if m > 0 {
                num += t;
            } else {
                num -= t;
            }
        }
    }
    BigRational::new(num, d)
}

/// Scaled sums `L S(Q)` for every `Q = 0..=qmax`, where `L` is the
/// primorial of `qmax`, accumulated term by term. Returns `(L, sums)`.
pub fn totient_sums_direct_scaled(qmax: u64, sieve: &Sieve) -> (BigInt, Vec<BigInt>) {
    let l = primorial(&sieve.primes, qmax);
    let mut out = Vec::with_capacity(qmax as usize + 1);
    let mut acc = BigInt::zero();
    out.push(acc.clone());
    for q in 1..=qmax {
        let r = sieve.radical(q);
        acc += (&l / BigInt::from(r)) * BigInt::from(sieve.phi[r as usize]);
        out.push(acc.clone());
    }
    (l, out)
}

/// The same scaled sums from `sum_d mu(d) floor(Q/d) L/d`, evaluated per `Q`
/// over the blocks of `d` sharing one value of `floor(Q/d)`.
pub fn totient_sums_mobius_scaled(qmax: u64, sieve: &Sieve) -> (BigInt, Vec<BigInt>) {
    let l = primorial(&sieve.primes, qmax);
    // prefix[d] = sum_{e <= d} mu(e) L / e
    let mut prefix = Vec::with_capacity(qmax as usize + 1);
    let mut acc = BigInt::zero();
    prefix.push(acc.clone());
    for d in 1..=qmax {
        match sieve.mu[d as usize] {
            1 => acc += &l / BigInt::from(d),
            -1 => acc -= &l / BigInt::from(d),
            _ => {}
        }
        prefix.push(acc.clone());
    }
    let sums = (0..=qmax)
        .into_par_iter()
        .map(|q| {
            let mut s = BigInt::zero();
            let mut d = 1;
            while d <= q {
                let v = q / d;
                let top = q / v;
                s += (&prefix[top as usize] - &prefix[d as usize - 1]) * BigInt::from(v);
                d = top + 1;
            }
            s
        })
        .collect();
    (l, sums)
}

/// Running sums `S(Q) = sum_{q <= Q} phi(q)/q` for `Q = 0..=qmax` in f64
/// (compensated summation).
pub fn totient_prefix_sums(qmax: u64, sieve: &Sieve) -> Vec<f64> {
    let mut out = Vec::with_capacity(qmax as usize + 1);
    let (mut s, mut c) = (0f64, 0f64);
    out.push(0.0);
    for q in 1..=qmax {
        let v = sieve.phi[q as usize] as f64 / q as f64;
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
        out.push(s + c);
    }
    out
}

pub fn totient_sum_report(big_q: u64) -> Result<TotientReport> {
    if big_q == 0 || big_q > TOTIENT_MAX_Q {
        return Err(Error::InvalidArgument(format!("Q must lie in 1..={TOTIENT_MAX_Q}")));
    }
    let sieve = Sieve::new(big_q);
    let sum = (big_q <= TOTIENT_EXACT_MAX_Q).then(|| totient_sum_exact(big_q, &sieve));
    let sum_f64 = match &sum {
        Some(s) => s.to_f64().unwrap(),
        None => *totient_prefix_sums(big_q, &sieve).last().unwrap(),
    };
    let asymptote = six_over_pi_sq() * big_q as f64;
    let verdict = if sum_f64 <= asymptote { Verdict::Within } else { Verdict::Exceeds };
    Ok(TotientReport { big_q, sum, sum_f64, asymptote, verdict })
}

/// The chain of bounds for `Prob(B_1(Q, kappa'))`: exact value, the exact
/// union bound `1 - (2 kappa'/Q) sum phi(q)/q`, and the asymptotic figure
/// `1 - 12 kappa'/pi^2` with whether it holds at this `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct B1Report {
    pub exact: BigRational,
    pub union_bound: BigRational,
    pub asymptotic: f64,
    pub asymptotic_holds: bool,
}

pub fn b1_report(big_q: u64, kappa: &BigRational) -> Result<B1Report> {
    let exact = exact_b1_measure(big_q, kappa)?;
    let sieve = Sieve::new(big_q);
    let s = totient_sum_exact(big_q, &sieve);
    let two = BigRational::from_integer(2.into());
    let union_bound = BigRational::one() - two * kappa / BigRational::from_integer(big_q.into()) * s;
    let asymptotic = 1.0 - 2.0 * six_over_pi_sq() * kappa.to_f64().unwrap();
    let asymptotic_holds = exact.to_f64().unwrap() >= asymptotic;
    Ok(B1Report { exact, union_bound, asymptotic, asymptotic_holds })
}

// -------------------------------------------------------------- Monte Carlo

/// Events over points `xi` in the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Always,
    /// `xi in B_n(Q, kappa')`: `Q^n min |q.xi + p| >= kappa'`.
    Bn { n: usize, big_q: u64, kappa: BigRational },
    /// `||q . xi|| >= kappa psi(|q|)` for all `0 < |q| <= T`, with
    /// `psi(q) = q^{-n-eps}` (or the log family). The estimate is
    /// made conservative by subtracting the measure bound of the tail.
    Bpsi { n: usize, kappa: f64, family: PsiFamily, eps: f64, truncation: u64 },
}

impl Event {
    pub fn dim(&self) -> usize {
        match self {
            Event::Always => 1,
            Event::Bn { n, .. } | Event::Bpsi { n, .. } => *n,
        }
    }

    /// Upper bound on the measure of points that pass the truncated test
    /// but fail beyond it.
    pub fn truncation_bias(&self) -> f64 {
        match self {
            Event::Bpsi { n, kappa, family, eps, truncation } => {
                // |q| = k has at most n (2k+1)^{n-1} representatives up to
                // sign; each excludes measure 2 kappa psi(k).
                2.0 * *n as f64 * kappa * tail_bound(*family, *n as u32, *eps, *truncation)
            }
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub hits: u64,
    pub samples: u64,
    /// `4 sqrt(p(1-p)/N)`.
    pub radius: f64,
    pub seed: u64,
    /// Samples whose membership could not be certified.
    pub precision_failures: u64,
    /// Subtracted from the raw frequency (tail bias of `Bpsi`).
    pub bias_correction: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id of sample `i`: `splitmix64(seed ^ splitmix64(i))`. Coordinate
/// `k` of the sample is the draw `rand:<stream>:<k>`.
pub fn sample_stream(seed: u64, i: u64) -> u64 {
    splitmix64(seed ^ splitmix64(i))
}

pub fn sample_point(seed: u64, i: u64, n: usize) -> Vec<ExactReal> {
    let s = sample_stream(seed, i);
    (0..n as u64).map(|k| ExactReal::draw(s, k)).collect()
}

/// The same point rounded to f64 (error at most `2^-53`).
pub fn sample_point_f64(seed: u64, i: u64, n: usize) -> Vec<f64> {
    let s = sample_stream(seed, i);
    (0..n as u64).map(|k| Var::new(s, k).to_f64()).collect()
}

const MARGIN: f64 = 1e-9;

/// `Some(member)` when decided in floating point, `None` when too close.
fn fast_bn(x: &[f64], big_q: u64, kappa: f64) -> Option<bool> {
    let w = vec![big_q as i64; x.len()];
    let scale = (big_q as f64).powi(x.len() as i32);
    let mut min = f64::INFINITY;
    for t in half_box_tasks(&w) {
        run_half_box_task(&w, t, |q| {
            let s: f64 = q.iter().zip(x).map(|(k, v)| *k as f64 * v).sum();
            min = min.min((s - s.round()).abs());
        });
    }
    let p = min * scale;
    if p >= kappa + MARGIN {
        Some(true)
    } else if p <= kappa - MARGIN {
        Some(false)
    } else {
        None
    }
}

fn fast_bpsi(x: &[f64], kappa: f64, family: PsiFamily, eps: f64, t: u64) -> Option<bool> {
    let n = x.len();
    let w = vec![t as i64; n];
    let mut ok = Some(true);
    for task in half_box_tasks(&w) {
        run_half_box_task(&w, task, |q| {
            if ok == Some(false) {
                return;
            }
            let s: f64 = q.iter().zip(x).map(|(k, v)| *k as f64 * v).sum();
            let d = (s - s.round()).abs();
            let sup = q.iter().map(|k| k.abs()).max().unwrap() as f64;
            let th = kappa * psi(family, n as u32, 1, eps, sup);
            if d < th - MARGIN {
                ok = Some(false);
            } else if d < th + MARGIN {
                ok = None;
            }
        });
    }
    ok
}

/// Outcome of one sample: `Some(hit)` or `None` on a precision failure.
fn sample_event(event: &Event, seed: u64, i: u64, limits: &Limits) -> Option<bool> {
    match event {
        Event::Always => Some(true),
        Event::Bn { n, big_q, kappa } => {
            let x = sample_point_f64(seed, i, *n);
            match fast_bn(&x, *big_q, kappa.to_f64().unwrap()) {
                Some(b) => Some(b),
                None => in_b_n(&sample_point(seed, i, *n), *big_q, &ExactReal::from_rational(kappa.clone()), limits).ok(),
            }
        }
        Event::Bpsi { n, kappa, family, eps, truncation } => {
            let x = sample_point_f64(seed, i, *n);
            // No exact fallback: psi is transcendental in general, so an
            // undecided sample is a precision failure.
            fast_bpsi(&x, *kappa, *family, *eps, *truncation)
        }
    }
}

/// Deterministic estimate of `Prob(event)`; independent of thread count.
pub fn mc_probability(event: &Event, samples: u64, seed: u64, limits: &Limits) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    if let Event::Bpsi { eps, .. } = event {
        if !(*eps > 0.0) {
            return Err(Error::DivergentSeries(format!("eps = {eps} must be positive")));
        }
    }
    if let Event::Bn { n, big_q, kappa } = event {
        check_kappa(kappa)?;
        let side = 2 * *big_q as u128 + 1;
        limits.check_work(side.saturating_pow(*n as u32))?;
    }
    let (hits, fails) = (0..samples)
        .into_par_iter()
        .map(|i| match sample_event(event, seed, i, limits) {
            Some(true) => (1u64, 0u64),
            Some(false) => (0, 0),
            None => (0, 1),
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let decided = samples - fails;
    let raw = if decided == 0 { 0.0 } else { hits as f64 / decided as f64 };
    let bias = event.truncation_bias();
    let radius = 4.0 * (raw * (1.0 - raw) / decided.max(1) as f64).sqrt();
    Ok(McEstimate {
        estimate: raw - bias,
        hits,
        samples,
        radius,
        seed,
        precision_failures: fails,
        bias_correction: bias,
    })
}
