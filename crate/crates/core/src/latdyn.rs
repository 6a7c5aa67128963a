//! Orbit diagnostics for `g_t u_xi Z^{n+1}`: sup-norm shortest vectors,
//! escape sets, `Z`-membership and the unwound Diophantine check.
//!
//! A vector `(p, q)` maps to `(e^{nt}(p + q.xi), e^{-t} q_1, ..., e^{-t} q_n)`.
//! Its sup norm is the larger of the *form term* `e^{nt}|p + q.xi|` and the
//! *box term* `e^{-t}|q|`. All comparisons reduce to `x e^{kt}` versus `y`
//! for exact `x, y` and an integer `k`; they are exact when `e^t` is
//! rational and certified by interval refinement otherwise.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactnum::fixed::Fx;
use crate::exactnum::search::{half_box_tasks, nearest_offsets, run_half_box_task, FixedVec};
use crate::exactnum::{cf_expand, convergents};
use crate::linforms::{one_form_witness, TieKey};
use crate::{Error, ExactReal, Limits, Result};

// -------------------------------------------------------------------- time

/// A time `t >= 0`: either a rational, or `ln r` for a rational `r >= 1`
/// (then `e^t = r` exactly).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Time {
    Rational(BigRational),
    LogOf(BigRational),
}

impl Time {
    pub fn zero() -> Time {
        Time::Rational(BigRational::zero())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Time::Rational(t) if t.is_negative() => Err(Error::InvalidArgument("t must be non-negative".into())),
            Time::LogOf(r) if *r < BigRational::one() => Err(Error::InvalidArgument("log:r needs r >= 1".into())),
            _ => Ok(()),
        }
    }

    /// `l * t`.
    pub fn mul_int(&self, l: u64) -> Time {
        match self {
            Time::Rational(t) => Time::Rational(t * BigRational::from_integer(l.into())),
            Time::LogOf(r) => Time::LogOf(num_traits::pow(r.clone(), l as usize)),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Time::Rational(t) => t.to_f64().unwrap_or(f64::NAN),
            Time::LogOf(r) => r.to_f64().unwrap_or(f64::NAN).ln(),
        }
    }

    /// `e^{kt}` when it is rational.
    pub fn exp_exact(&self, k: i32) -> Option<BigRational> {
        let base = match self {
            Time::Rational(t) if t.is_zero() => return Some(BigRational::one()),
            Time::Rational(_) => return None,
            Time::LogOf(r) => r.clone(),
        };
        Some(if k >= 0 { num_traits::pow(base, k as usize) } else { num_traits::pow(base.recip(), (-k) as usize) })
    }

    /// Enclosure of `e^{kt}` at `prec` fractional bits.
    pub fn exp_enclose(&self, k: i32, prec: u32) -> Fx {
        match self.exp_exact(k) {
            Some(r) => Fx::from_rational(&r, prec),
            None => {
                let Time::Rational(t) = self else { unreachable!() };
                exp_rational(&(t * BigRational::from_integer(k.into())), prec)
            }
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Time::Rational(t) => write!(f, "{t}"),
            Time::LogOf(r) => write!(f, "log:{r}"),
        }
    }
}

impl FromStr for Time {
    type Err = Error;
    fn from_str(s: &str) -> Result<Time> {
        let s = s.trim();
        let rational = |x: &str| -> Result<BigRational> {
            x.parse::<ExactReal>()?.as_rational().ok_or_else(|| Error::Parse(format!("`{x}`: expected a rational")))
        };
        let t = match s.strip_prefix("log:") {
            Some(r) => Time::LogOf(rational(r)?),
            None => Time::Rational(rational(s)?),
        };
        t.validate()?;
        Ok(t)
    }
}

/// Enclosure of `e^x` for rational `x`: Taylor series on `x / 2^k` with
/// `|x / 2^k| <= 1/2`, then `k` squarings.
pub fn exp_rational(x: &BigRational, prec: u32) -> Fx {
    let mut k = 0u32;
    let half = BigRational::new(1.into(), 2.into());
    let mut y = x.clone();
    while y.abs() > half {
        y /= BigRational::from_integer(2.into());
        k += 1;
    }
    let wp = prec + k + 16;
    let yf = Fx::from_rational(&y, wp);
    let one = Fx::exact_int(&BigInt::one(), wp);
    let mut sum = one.clone();
    let mut term = one;
    let eps = BigInt::one();
    let mut j = 1u64;
    loop {
        term = term.mul(&yf).scale_rational(&BigRational::new(1.into(), j.into()));
        sum = sum.add(&term);
        j += 1;
        let mag = term.lo.abs().max(term.hi.abs());
        if mag <= eps {
            // |remaining tail| <= 2 |next term| <= 2 |term| for |y| <= 1/2
            let r = (mag * 2u32) + 2u32;
            sum = Fx { lo: &sum.lo - &r, hi: &sum.hi + &r, prec: wp };
            break;
        }
    }
    for _ in 0..k {
        sum = sum.mul(&sum);
    }
    sum.round_to(prec)
}

/// Compares `x e^{kt}` with `y` for non-negative exact `x, y`.
pub fn cmp_scaled(x: &ExactReal, k: i32, y: &ExactReal, time: &Time, cap: u32) -> Result<Ordering> {
    if let Some(e) = time.exp_exact(k) {
        return x.mul_ref(&ExactReal::from_rational(e)).cmp_with(y, cap);
    }
    if x.is_zero() || y.is_zero() || k == 0 {
        if k == 0 {
            return x.cmp_with(y, cap);
        }
        return Ok(match (x.is_zero(), y.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            _ => Ordering::Greater,
        });
    }
    let mut prec = 64u32;
    loop {
        if let (Some(ex), Some(ey)) = (x.enclose(prec), y.enclose(prec)) {
            let p = ex.mul(&time.exp_enclose(k, prec));
            if p.hi < ey.lo {
                return Ok(Ordering::Less);
            }
            if p.lo > ey.hi {
                return Ok(Ordering::Greater);
            }
        }
        if prec >= cap {
            return Err(Error::PrecisionCap { bits: cap });
        }
        prec = (prec * 2).min(cap);
    }
}

// ----------------------------------------------------------------- lattice

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitLattice {
    pub xi: Vec<ExactReal>,
    pub t: Time,
}

impl OrbitLattice {
    pub fn new(xi: Vec<ExactReal>, t: Time) -> Result<OrbitLattice> {
        if xi.is_empty() || xi.len() > 3 {
            return Err(Error::InvalidArgument("orbit lattices need 1 <= n <= 3".into()));
        }
        t.validate()?;
        Ok(OrbitLattice { xi, t })
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// Exponents `k_i` of the diagonal `g_t = diag(e^{k_i t})`.
    pub fn diagonal_exponents(&self) -> Vec<i32> {
        let n = self.n() as i32;
        std::iter::once(n).chain(std::iter::repeat(-1).take(self.n())).collect()
    }

    /// The basis `g_t u_xi` when `e^t` is rational.
    pub fn basis_exact(&self) -> Option<Vec<Vec<ExactReal>>> {
        let n = self.n();
        let d: Vec<ExactReal> = self
            .diagonal_exponents()
            .iter()
            .map(|&k| self.t.exp_exact(k).map(ExactReal::from_rational))
            .collect::<Option<_>>()?;
        let mut b = vec![vec![ExactReal::zero(); n + 1]; n + 1];
        b[0][0] = d[0].clone();
        for j in 0..n {
            b[0][j + 1] = d[0].mul_ref(&self.xi[j]);
            b[j + 1][j + 1] = d[j + 1].clone();
        }
        Some(b)
    }

    /// Determinant of the basis: `u_xi` is unitriangular and the diagonal
    /// exponents sum to zero, so it is exactly one.
    pub fn determinant(&self) -> ExactReal {
        let s: i32 = self.diagonal_exponents().iter().sum();
        assert_eq!(s, 0);
        match self.basis_exact() {
            Some(b) => (0..b.len()).fold(ExactReal::one(), |acc, i| acc.mul_ref(&b[i][i])),
            None => ExactReal::one(),
        }
    }

    fn form(&self, p: i64, q: &[i64]) -> ExactReal {
        let mut acc = ExactReal::from_int(p);
        for (x, k) in self.xi.iter().zip(q) {
            if *k != 0 {
                acc = acc.add_ref(&x.mul_int(*k));
            }
        }
        acc
    }
}

/// Which term attains the sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominant {
    Form,
    Box,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestVector {
    pub p: i64,
    pub q: Vec<i64>,
    /// `|p + q.xi|`.
    pub form_abs: ExactReal,
    /// `|q|`, the sup norm of `q`.
    pub box_norm: u64,
    pub dominant: Dominant,
    /// Certified enclosure of the sup norm.
    pub lower: f64,
    pub upper: f64,
    /// The norm itself when `e^t` is rational.
    pub exact: Option<ExactReal>,
}

/// Norm of a candidate: `max(e^{nt} a, e^{-t} b)`.
#[derive(Debug, Clone)]
struct Cand {
    key: TieKey,
    a: ExactReal,
    b: u64,
}

struct Ctx<'a> {
    n: i32,
    t: &'a Time,
    cap: u32,
}

impl Ctx<'_> {
    /// Compares form term `e^{nt} a` with box term `e^{-t} b`.
    fn form_vs_box(&self, a: &ExactReal, b: u64) -> Result<Ordering> {
        cmp_scaled(a, self.n + 1, &ExactReal::from_int(b as i64), self.t, self.cap)
    }

    fn dominant(&self, c: &Cand) -> Result<Dominant> {
        Ok(if self.form_vs_box(&c.a, c.b)? == Ordering::Less { Dominant::Box } else { Dominant::Form })
    }

    fn cmp(&self, x: &Cand, y: &Cand) -> Result<Ordering> {
        let dx = self.dominant(x)?;
        let dy = self.dominant(y)?;
        Ok(match (dx, dy) {
            (Dominant::Form, Dominant::Form) => x.a.cmp_with(&y.a, self.cap)?,
            (Dominant::Box, Dominant::Box) => x.b.cmp(&y.b),
            (Dominant::Form, Dominant::Box) => self.form_vs_box(&x.a, y.b)?,
            (Dominant::Box, Dominant::Form) => self.form_vs_box(&y.a, x.b)?.reverse(),
        })
    }

    /// Compares the norm with `eps`.
    fn cmp_eps(&self, c: &Cand, eps: &ExactReal) -> Result<Ordering> {
        match self.dominant(c)? {
            Dominant::Form => cmp_scaled(&c.a, self.n, eps, self.t, self.cap),
            Dominant::Box => cmp_scaled(&ExactReal::from_int(c.b as i64), -1, eps, self.t, self.cap),
        }
    }
}

fn enclose_norm(c: &Cand, d: Dominant, n: i32, t: &Time, cap: u32) -> Result<(f64, f64, Option<ExactReal>)> {
    let (x, k) = match d {
        Dominant::Form => (c.a.clone(), n),
        Dominant::Box => (ExactReal::from_int(c.b as i64), -1),
    };
    let exact = t.exp_exact(k).map(|e| x.mul_ref(&ExactReal::from_rational(e)));
    let e = x.enclose_tight(96, cap)?.mul(&t.exp_enclose(k, 96));
    let lo = libm::nextafter(e.lo_f64(), f64::NEG_INFINITY).max(0.0);
    let hi = libm::nextafter(e.hi_f64(), f64::INFINITY);
    Ok((lo, hi, exact))
}

/// Bound `K >= floor(e^t)` on `|q|` (rounded up when `e^t` is not exact),
/// saturated at `2^60`.
fn box_radius(t: &Time) -> u64 {
    const MAX: u64 = 1 << 60;
    let k = match t.exp_exact(1) {
        Some(r) => r.floor().to_integer(),
        None => t.exp_enclose(1, 64).hi >> 64usize,
    };
    k.to_u64().map_or(MAX, |k| k.min(MAX))
}

/// Shortest nonzero vector of `L` in the sup norm. Minkowski's theorem on
/// the unit cube gives `lambda_1 <= 1`, so every candidate has
/// `|q| <= e^t`; for `n = 1` the minimizer (smallest `q` among ties) has
/// `||q' xi|| > ||q xi||` for all `q' < q`, hence is a convergent
/// denominator or `q = 1`.
pub fn shortest_sup_vector(l: &OrbitLattice, limits: &Limits) -> Result<ShortestVector> {
    let cap = limits.precision_bits;
    let n = l.n();
    let ctx = Ctx { n: n as i32, t: &l.t, cap };
    let k = box_radius(&l.t);
    // q = 0: the vector (e^{nt} p, 0) with p = 1.
    let mut cands = vec![Cand { key: TieKey::new(&vec![0; n], vec![1]), a: ExactReal::one(), b: 0 }];
    if k >= 1 {
        if n == 1 {
            cands.extend(candidates_one_dim(l, k, limits)?);
        } else {
            cands.extend(candidates_box(l, k, limits)?);
        }
    }
    let mut best = cands[0].clone();
    for c in cands.into_iter().skip(1) {
        match ctx.cmp(&c, &best)? {
            Ordering::Less => best = c,
            Ordering::Equal if c.key < best.key => best = c,
            _ => {}
        }
    }
    let d = ctx.dominant(&best)?;
    let (lower, upper, exact) = enclose_norm(&best, d, n as i32, &l.t, cap)?;
    Ok(ShortestVector {
        p: best.key.extra()[0],
        q: best.key.q().to_vec(),
        form_abs: best.a,
        box_norm: best.b,
        dominant: d,
        lower,
        upper,
        exact,
    })
}

fn nearest_p_candidates(l: &OrbitLattice, q: &[i64], cap: u32) -> Result<Vec<(i64, ExactReal)>> {
    let v = l.form(0, q);
    let f = v.floor_with(cap)?;
    let f = f.to_i64().ok_or_else(|| Error::InvalidArgument("coordinate overflow".into()))?;
    let lo = v.sub_ref(&ExactReal::from_int(f));
    let hi = ExactReal::from_int(f + 1).sub_ref(&v);
    let c = lo.cmp_with(&hi, cap)?;
    let mut out = Vec::new();
    if c != Ordering::Greater {
        out.push((-f, lo.clone()));
    }
    if c != Ordering::Less {
        out.push((-f - 1, hi));
    }
    Ok(out)
}

fn candidates_one_dim(l: &OrbitLattice, k: u64, limits: &Limits) -> Result<Vec<Cand>> {
    let cap = limits.precision_bits;
    let mut qs: Vec<u64> = (1..=k.min(64)).collect();
    let mut depth = 16usize;
    loop {
        let cf = cf_expand(&l.xi[0], depth, limits)?;
        let conv = convergents(&cf.quotients);
        let last = conv.last().map(|c| c.q.clone()).unwrap_or_else(BigInt::one);
        if cf.terminated || last > BigInt::from(k) {
            for c in conv {
                if let Some(q) = c.q.to_u64() {
                    if q >= 1 && q <= k {
                        qs.push(q);
                    }
                }
            }
            break;
        }
        depth *= 2;
    }
    qs.sort_unstable();
    qs.dedup();
    let mut out = Vec::new();
    for q in qs {
        for (p, a) in nearest_p_candidates(l, &[q as i64], cap)? {
            out.push(Cand { key: TieKey::new(&[q as i64], vec![p]), a, b: q });
        }
    }
    Ok(out)
}

fn candidates_box(l: &OrbitLattice, k: u64, limits: &Limits) -> Result<Vec<Cand>> {
    let cap = limits.precision_bits;
    let n = l.n();
    let side = 2 * k as u128 + 1;
    limits.check_work(side.saturating_pow(n as u32))?;
    let w = vec![k as i64; n];
    let fx = FixedVec::new(&l.xi, &vec![k; n], 2, cap)?;
    let sc = fx.scale as f64;
    let en = l.t.exp_enclose(n as i32, 64);
    let em = l.t.exp_enclose(-1, 64);
    let (en_hi, en_lo) = (en.hi_f64() * (1.0 + 1e-12), en.lo_f64() * (1.0 - 1e-12));
    let (em_hi, em_lo) = (em.hi_f64() * (1.0 + 1e-12), em.lo_f64() * (1.0 - 1e-12));
    // Float enclosures of each candidate norm; keep all that may attain
    // the minimum, then decide exactly.
    let mut best_hi = en_hi; // the q = 0 vector
    let mut kept: Vec<(Vec<i64>, i64, f64)> = Vec::new();
    for task in half_box_tasks(&w) {
        run_half_box_task(&w, task, |q| {
            let (lo, hi) = fx.dot(q);
            let (c, m) = nearest_offsets(lo, hi, fx.scale);
            let b = q.iter().map(|x| x.unsigned_abs()).max().unwrap() as f64;
            for &(p, a0, a1) in &c[..m] {
                let lo_n = (en_lo * (a0 as f64 / sc) * (1.0 - 1e-12)).max(em_lo * b);
                if lo_n > best_hi {
                    continue;
                }
                let hi_n = (en_hi * (a1 as f64 / sc) * (1.0 + 1e-12)).max(em_hi * b);
                best_hi = best_hi.min(hi_n);
                kept.push((q.to_vec(), p, lo_n));
            }
        });
    }
    let mut out = Vec::new();
    for (q, p, lo_n) in kept {
        if lo_n <= best_hi {
            let a = l.form(p, &q).abs_with(cap)?;
            let b = q.iter().map(|x| x.unsigned_abs()).max().unwrap();
            out.push(Cand { key: TieKey::new(&q, vec![p]), a, b });
        }
    }
    Ok(out)
}

/// `shortest norm < eps`, or `None` when it equals `eps` exactly.
pub fn below_eps(l: &OrbitLattice, v: &ShortestVector, eps: &ExactReal, limits: &Limits) -> Result<Option<bool>> {
    let ctx = Ctx { n: l.n() as i32, t: &l.t, cap: limits.precision_bits };
    let c = Cand { key: TieKey::new(&v.q, vec![v.p]), a: v.form_abs.clone(), b: v.box_norm };
    Ok(match ctx.cmp_eps(&c, eps)? {
        Ordering::Less => Some(true),
        Ordering::Greater => Some(false),
        Ordering::Equal => None,
    })
}

// ------------------------------------------------------------- escape sets

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeRow {
    pub l: u64,
    pub t: Time,
    pub lower: f64,
    pub upper: f64,
    /// The lattice lies in `K_eps` (no vector shorter than `eps`).
    pub in_k_eps: bool,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeRecord {
    pub s: Time,
    pub big_n: u64,
    pub eps: ExactReal,
    /// `{ l : shortest norm at t = s l is < eps }`.
    pub set: Vec<u64>,
    pub fraction: BigRational,
    /// Grid points whose shortest norm equals `eps` exactly.
    pub boundary: Vec<u64>,
    pub rows: Vec<EscapeRow>,
}

pub fn escape_set(xi: &[ExactReal], s: &Time, big_n: u64, eps: &ExactReal, limits: &Limits) -> Result<EscapeRecord> {
    if s.to_f64() <= 1.0 {
        return Err(Error::InvalidArgument("s must exceed 1".into()));
    }
    if big_n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if eps.sign_with(limits.precision_bits)? <= 0 {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let mut set = Vec::new();
    let mut boundary = Vec::new();
    let mut rows = Vec::new();
    for l in 1..=big_n {
        let t = s.mul_int(l);
        let lat = OrbitLattice::new(xi.to_vec(), t.clone())?;
        let v = shortest_sup_vector(&lat, limits)?;
        let b = below_eps(&lat, &v, eps, limits)?;
        match b {
            Some(true) => set.push(l),
            None => boundary.push(l),
            Some(false) => {}
        }
        rows.push(EscapeRow { l, t, lower: v.lower, upper: v.upper, in_k_eps: b != Some(true), boundary: b.is_none() });
    }
    let fraction = BigRational::new((set.len() as u64).into(), big_n.into());
    Ok(EscapeRecord { s: s.clone(), big_n, eps: eps.clone(), set, fraction, boundary, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZReport {
    pub fractions: Vec<BigRational>,
    pub members: Vec<bool>,
    pub delta_sum: BigRational,
    /// `sum delta_j >= 1 - (m+1)/s`; `None` if `s = ln r` could not be
    /// separated in double precision.
    pub joint: Option<bool>,
}

pub fn z_membership(points: &[Vec<ExactReal>], s: &Time, big_n: u64, eps: &ExactReal, delta: &[BigRational], limits: &Limits) -> Result<ZReport> {
    if points.len() != delta.len() {
        return Err(Error::InvalidArgument("one delta per point".into()));
    }
    let mut fractions = Vec::new();
    let mut members = Vec::new();
    for (x, d) in points.iter().zip(delta) {
        let r = escape_set(x, s, big_n, eps, limits)?;
        members.push(r.fraction >= *d);
        fractions.push(r.fraction);
    }
    let delta_sum: BigRational = delta.iter().cloned().sum();
    let m1 = BigRational::from_integer((points.len() as u64 + 1).into());
    let joint = match s {
        Time::Rational(sv) => Some(delta_sum >= BigRational::one() - m1 / sv),
        Time::LogOf(_) => {
            let rhs = 1.0 - m1.to_f64().unwrap() / s.to_f64();
            let lhs = delta_sum.to_f64().unwrap();
            let tol = 1e-12 * (1.0 + rhs.abs());
            if lhs > rhs + tol {
                Some(true)
            } else if lhs < rhs - tol {
                Some(false)
            } else {
                None
            }
        }
    };
    Ok(ZReport { fractions, members, delta_sum, joint })
}

// ---------------------------------------------------------- correspondence

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaniOutcome {
    /// Both sides agree; the flag is the common verdict.
    Agree(bool),
    Disagree { lattice: bool, diophantine: bool },
    /// One side sits exactly on its boundary.
    Boundary,
}

/// Checks `lambda_1 < eps` against the Diophantine statement: some
/// `(p, q) != 0` with `|p + q.xi| < eps e^{-nt}` and `|q| < eps e^t`.
/// The Diophantine side is searched independently over `|q| <= Q'`,
/// `Q'` the largest integer below `eps e^t`.
pub fn dani_consistency(xi: &[ExactReal], t: &Time, eps: &ExactReal, limits: &Limits) -> Result<DaniOutcome> {
    let cap = limits.precision_bits;
    let n = xi.len() as i32;
    let lat = OrbitLattice::new(xi.to_vec(), t.clone())?;
    let v = shortest_sup_vector(&lat, limits)?;
    let Some(lattice) = below_eps(&lat, &v, eps, limits)? else {
        return Ok(DaniOutcome::Boundary);
    };

    // Q' = largest integer strictly below eps e^t
    let qprime = match t.exp_exact(1) {
        Some(r) => {
            let x = eps.mul_ref(&ExactReal::from_rational(r));
            let f = x.floor_with(cap)?;
            if x.sub_ref(&ExactReal::from_bigint(f.clone())).is_zero() { f - 1 } else { f }
        }
        None => {
            let mut prec = 64u32;
            loop {
                let e = eps.enclose(prec).map(|e| e.mul(&t.exp_enclose(1, prec)));
                if let Some(e) = e {
                    let a = &e.lo >> prec as usize;
                    let b = &e.hi >> prec as usize;
                    // e^t is transcendental here, so eps e^t is never an integer
                    if a == b {
                        break a;
                    }
                }
                if prec >= cap {
                    return Err(Error::PrecisionCap { bits: cap });
                }
                prec = (prec * 2).min(cap);
            }
        }
    };
    let qprime = qprime.to_u64().unwrap_or(0);

    // q = 0 needs |p| >= 1 below eps e^{-nt}
    let mut dioph = match cmp_scaled(&ExactReal::one(), n, eps, t, cap)? {
        Ordering::Less => Some(true),
        Ordering::Equal => None,
        Ordering::Greater => Some(false),
    };
    if dioph != Some(true) && qprime >= 1 {
        let w = one_form_witness(xi, qprime, limits)?;
        match cmp_scaled(&w.value, n, eps, t, cap)? {
            Ordering::Less => dioph = Some(true),
            Ordering::Equal => return Ok(DaniOutcome::Boundary),
            Ordering::Greater => {}
        }
    }
    Ok(match dioph {
        None => DaniOutcome::Boundary,
        Some(d) if d == lattice => DaniOutcome::Agree(d),
        Some(d) => DaniOutcome::Disagree { lattice, diophantine: d },
    })
}
