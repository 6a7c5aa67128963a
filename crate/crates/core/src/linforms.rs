//! One linear form and systems of linear forms: witness search, profiles and
//! effective Khintchine–Groshev lower bounds.

use std::cmp::{Ordering, Reverse};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;

use crate::exactnum::search::{half_box_tasks, nearest_offsets, resolve_min, run_half_box_task, FixedVec, MinTracker};
use crate::{Error, ExactReal, Limits, Result};

/// An `n x m` matrix of reals; column `j` is the coefficient vector of the
/// `j`-th linear form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFormMatrix {
    n: usize,
    m: usize,
    entries: Vec<ExactReal>,
}

impl LinearFormMatrix {
    /// `entries` in row-major order.
    pub fn new(n: usize, m: usize, entries: Vec<ExactReal>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("matrix dimensions must be positive".into()));
        }
        if entries.len() != n * m {
            return Err(Error::InvalidArgument(format!("expected {} entries, got {}", n * m, entries.len())));
        }
        Ok(LinearFormMatrix { n, m, entries })
    }

    pub fn from_columns(cols: &[Vec<ExactReal>]) -> Result<Self> {
        let m = cols.len();
        let n = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::InvalidArgument("columns differ in length".into()));
        }
        let mut e = Vec::with_capacity(n * m);
        for i in 0..n {
            for c in cols {
                e.push(c[i].clone());
            }
        }
        Self::new(n, m, e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> &ExactReal {
        &self.entries[i * self.m + j]
    }

    pub fn column(&self, j: usize) -> Vec<ExactReal> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[ExactReal] {
        &self.entries
    }

    pub fn transpose(&self) -> LinearFormMatrix {
        let mut e = Vec::with_capacity(self.entries.len());
        for j in 0..self.m {
            for i in 0..self.n {
                e.push(self.get(i, j).clone());
            }
        }
        LinearFormMatrix { n: self.m, m: self.n, entries: e }
    }
}

/// `(p, q)` and the exact value `max_j |q . xi_j + p_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub p: Vec<i64>,
    pub q: Vec<i64>,
    pub value: ExactReal,
}

/// Tie-break order among equal values: smaller sup-norm of `q`, then smaller
/// l1-norm, then lexicographically larger `q`, then smaller `p`. Among the
/// shortest vectors this prefers mass in the leading coordinates, so
/// `xi = 0` yields `q = (1, 0, ..., 0)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TieKey {
    sup: i64,
    l1: i64,
    rev: Reverse<Vec<i64>>,
    extra: Vec<i64>,
}

impl TieKey {
    pub fn new(q: &[i64], extra: Vec<i64>) -> TieKey {
        TieKey {
            sup: q.iter().map(|x| x.abs()).max().unwrap_or(0),
            l1: q.iter().map(|x| x.abs()).sum(),
            rev: Reverse(q.to_vec()),
            extra,
        }
    }

    pub fn q(&self) -> &[i64] {
        &self.rev.0
    }

    pub fn extra(&self) -> &[i64] {
        &self.extra
    }
}

fn check_box(n: usize, big_q: u64, limits: &Limits) -> Result<Vec<i64>> {
    if big_q == 0 {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    let side = 2 * big_q as u128 + 1;
    let mut total = 1u128;
    for _ in 0..n {
        total = total.saturating_mul(side);
    }
    limits.check_work(total)?;
    Ok(vec![big_q as i64; n])
}

fn form_value(col: &[ExactReal], q: &[i64], p: i64) -> ExactReal {
    let mut acc = ExactReal::from_int(p);
    for (x, k) in col.iter().zip(q) {
        if *k != 0 {
            acc = acc.add_ref(&x.mul_int(*k));
        }
    }
    acc
}

/// Minimizes `max_j |q . xi_j + p_j|` over `0 < |q| <= Q` (half box).
pub fn system_witness(xi: &LinearFormMatrix, big_q: u64, limits: &Limits) -> Result<Witness> {
    let w = check_box(xi.n, big_q, limits)?;
    let cap = limits.precision_bits;
    let fx = common_scale_columns(xi, big_q, cap)?;
    let exact = fx.iter().all(|f| f.exact);
    let tracker = half_box_tasks(&w)
        .into_par_iter()
        .map(|task| {
            let mut tr = MinTracker::new();
            let mut combos: Vec<(Vec<i64>, i128, i128)> = Vec::new();
            run_half_box_task(&w, task, |q| {
                combos.clear();
                combos.push((Vec::with_capacity(xi.m), i128::MIN, i128::MIN));
                for f in &fx {
                    let (lo, hi) = f.dot(q);
                    let (c, k) = nearest_offsets(lo, hi, f.scale);
                    if k == 1 {
                        for cb in combos.iter_mut() {
                            cb.0.push(c[0].0);
                            cb.1 = cb.1.max(c[0].1);
                            cb.2 = cb.2.max(c[0].2);
                        }
                    } else {
                        let prev = std::mem::take(&mut combos);
                        for cb in prev {
                            for &(p, a, b) in &c[..k] {
                                let mut v = cb.0.clone();
                                v.push(p);
                                combos.push((v, cb.1.max(a), cb.2.max(b)));
                            }
                        }
                    }
                }
                for (p, lo, hi) in combos.drain(..) {
                    if lo <= tr.best_hi() {
                        tr.push(TieKey::new(q, p), lo, hi);
                    }
                }
            });
            tr
        })
        .reduce(MinTracker::new, MinTracker::merge);
    let value = |k: &TieKey| -> Result<ExactReal> {
        let mut best: Option<ExactReal> = None;
        for j in 0..xi.m {
            let v = form_value(&xi.column(j), k.q(), k.extra()[j]).abs_with(cap)?;
            best = Some(match best {
                None => v,
                Some(b) => b.max_with(&v, cap)?,
            });
        }
        Ok(best.unwrap())
    };
    let (k, v) = resolve_min(tracker.finish(), exact, value, cap)?.expect("nonempty box");
    Ok(Witness { p: k.extra().to_vec(), q: k.q().to_vec(), value: v })
}

/// Minimizes `|q . xi + p|` over `0 < |q| <= Q`.
pub fn one_form_witness(xi: &[ExactReal], big_q: u64, limits: &Limits) -> Result<Witness> {
    let m = LinearFormMatrix::new(xi.len(), 1, xi.to_vec())?;
    system_witness(&m, big_q, limits)
}

/// `Q^n * min |q . xi + p|`.
pub fn one_form_profile(xi: &[ExactReal], big_q: u64, limits: &Limits) -> Result<ExactReal> {
    let w = one_form_witness(xi, big_q, limits)?;
    Ok(w.value.mul_ref(&q_pow(big_q, xi.len())))
}

fn q_pow(big_q: u64, n: usize) -> ExactReal {
    ExactReal::from_bigint(num_traits::pow(BigInt::from(big_q), n))
}

/// Witness of the joint minimum: the column `j` attaining
/// `min_q min_j min_p |q . xi_j + p|`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointWitness {
    pub q: Vec<i64>,
    pub column: usize,
    pub p: i64,
    pub value: ExactReal,
}

pub fn joint_witness(xi: &LinearFormMatrix, big_q: u64, limits: &Limits) -> Result<JointWitness> {
    let w = check_box(xi.n, big_q, limits)?;
    let cap = limits.precision_bits;
    let fx = common_scale_columns(xi, big_q, cap)?;
    let exact = fx.iter().all(|f| f.exact);
    let tracker = half_box_tasks(&w)
        .into_par_iter()
        .map(|task| {
            let mut tr = MinTracker::new();
            run_half_box_task(&w, task, |q| {
                for (j, f) in fx.iter().enumerate() {
                    let (lo, hi) = f.dot(q);
                    let (c, k) = nearest_offsets(lo, hi, f.scale);
                    for &(p, a, b) in &c[..k] {
                        tr.push(TieKey::new(q, vec![j as i64, p]), a, b);
                    }
                }
            });
            tr
        })
        .reduce(MinTracker::new, MinTracker::merge);
    let value = |k: &TieKey| form_value(&xi.column(k.extra()[0] as usize), k.q(), k.extra()[1]).abs_with(cap);
    let (k, v) = resolve_min(tracker.finish(), exact, value, cap)?.expect("nonempty box");
    Ok(JointWitness { q: k.q().to_vec(), column: k.extra()[0] as usize, p: k.extra()[1], value: v })
}

/// Images every column on one common scale so that values from different
/// columns are directly comparable.
fn common_scale_columns(xi: &LinearFormMatrix, big_q: u64, cap: u32) -> Result<Vec<FixedVec>> {
    let all: Vec<ExactReal> = (0..xi.m).flat_map(|j| xi.column(j)).collect();
    let w = vec![big_q; all.len()];
    let f = FixedVec::new(&all, &w, 2, cap)?;
    Ok((0..xi.m)
        .map(|j| {
            let r = j * xi.n..(j + 1) * xi.n;
            let wid = f.wid[r.clone()].to_vec();
            FixedVec { lo: f.lo[r].to_vec(), exact: wid.iter().all(|x| *x == 0), wid, scale: f.scale }
        })
        .collect())
}

/// `Q^n * min_q min_j min_p |q . xi_j + p|`.
pub fn joint_profile(xi: &LinearFormMatrix, big_q: u64, limits: &Limits) -> Result<ExactReal> {
    let w = joint_witness(xi, big_q, limits)?;
    Ok(w.value.mul_ref(&q_pow(big_q, xi.n)))
}

/// `xi` lies in `B_n(Q, kappa')` iff its profile is at least `kappa'`.
pub fn in_b_n(xi: &[ExactReal], big_q: u64, kappa: &ExactReal, limits: &Limits) -> Result<bool> {
    let p = one_form_profile(xi, big_q, limits)?;
    Ok(p.cmp_with(kappa, limits.precision_bits)? != Ordering::Less)
}

/// The Dirichlet bound `Q^{-n/m}` as a float.
pub fn dirichlet_bound(n: usize, m: usize, big_q: u64) -> f64 {
    (big_q as f64).powf(-(n as f64) / (m as f64))
}

// ------------------------------------------------------------ effective bounds

/// Approximation functions. With `phi = psi^m`:
/// `Power`: `phi(q) = q^{-n-eps}`; `Log`: `phi(q) = q^{-n} (1 + ln q)^{-1-eps}`.
/// For one form (`m = 1`) `phi = psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiFamily {
    Power,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundVariant {
    /// Lower bound for `Prob(B_n(Q, kappa'))`.
    Mum2 { n: u32, big_q: u64, kappa: BigRational },
    /// Effective Khintchine–Groshev bound for one linear form.
    Ekg { n: u32, kappa: f64, family: PsiFamily, eps: f64 },
    /// Effective Khintchine–Groshev bound for `m` forms.
    Eff { n: u32, m: u32, kappa: f64, family: PsiFamily, eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// The lower bound on the probability (may be negative, i.e. vacuous).
    pub value: f64,
    /// Exact value when the bound is rational (`Mum2`).
    pub exact: Option<BigRational>,
    /// `sum_{q <= T} (2q+1)^{n-1} phi(q)` and the bound on the rest.
    pub truncated_sum: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

pub const DEFAULT_TRUNCATION: u64 = 1_000_000;

fn phi(family: PsiFamily, n: u32, eps: f64, q: f64) -> f64 {
    match family {
        PsiFamily::Power => q.powf(-(n as f64) - eps),
        PsiFamily::Log => q.powi(-(n as i32)) * (1.0 + q.ln()).powf(-1.0 - eps),
    }
}

/// Upper bound on `sum_{q > T} (2q+1)^{n-1} phi(q)`: on `q > T`,
/// `(2q+1)^{n-1} <= (2q)^{n-1} (1 + 1/(2T+2))^{n-1}`, and the remaining
/// decreasing summand is bounded by its integral from `T`.
pub fn tail_bound(family: PsiFamily, n: u32, eps: f64, t: u64) -> f64 {
    let t = t as f64;
    let lead = 2f64.powi(n as i32 - 1) * (1.0 + 1.0 / (2.0 * t + 2.0)).powi(n as i32 - 1);
    let integral = match family {
        PsiFamily::Power => t.powf(-eps) / eps,
        PsiFamily::Log => (1.0 + t.ln()).powf(-eps) / eps,
    };
    lead * integral * (1.0 + 1e-12)
}

/// Conservative upper bound on `sum_{q >= 1} (2q+1)^{n-1} phi(q)`.
pub fn kg_series(family: PsiFamily, n: u32, eps: f64, terms: u64) -> Result<(f64, f64)> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::DivergentSeries(format!("eps = {eps} must be positive")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let (mut s, mut c) = (0f64, 0f64);
    for q in 1..=terms {
        let qf = q as f64;
        let v = (2.0 * qf + 1.0).powi(n as i32 - 1) * phi(family, n, eps, qf);
        // Neumaier summation.
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    let sum = (s + c) * (1.0 + 1e-12);
    Ok((sum, tail_bound(family, n, eps, terms)))
}

pub fn effective_lower_bound(variant: &BoundVariant) -> Result<BoundReport> {
    effective_lower_bound_with(variant, DEFAULT_TRUNCATION)
}

pub fn effective_lower_bound_with(variant: &BoundVariant, terms: u64) -> Result<BoundReport> {
    match variant {
        BoundVariant::Mum2 { n, big_q, kappa } => {
            if *n == 0 || *big_q == 0 {
                return Err(Error::InvalidArgument("n and Q must be at least 1".into()));
            }
            let one = BigRational::one();
            let q = BigRational::from_integer(BigInt::from(*big_q));
            let a = &one + (&one / (BigRational::from_integer(2.into()) * &q));
            let b = &one + (&one / &q);
            let two_n = BigRational::from_integer(num_traits::pow(BigInt::from(2), *n as usize));
            let exact = &one - two_n * kappa * num_traits::pow(a, *n as usize - 1) * b;
            Ok(BoundReport {
                value: exact.to_f64().unwrap_or(f64::NAN),
                exact: Some(exact),
                truncated_sum: 0.0,
                tail_bound: 0.0,
                terms: 0,
            })
        }
        BoundVariant::Ekg { n, kappa, family, eps } => {
            if *kappa == 0.0 {
                return Ok(BoundReport { value: 1.0, exact: Some(BigRational::one()), truncated_sum: 0.0, tail_bound: 0.0, terms: 0 });
            }
            let (s, tail) = kg_series(*family, *n, *eps, terms)?;
            Ok(BoundReport { value: 1.0 - 4.0 * *n as f64 * kappa * (s + tail), exact: None, truncated_sum: s, tail_bound: tail, terms })
        }
        BoundVariant::Eff { n, m, kappa, family, eps } => {
            if *m == 0 {
                return Err(Error::InvalidArgument("m must be at least 1".into()));
            }
            if *kappa == 0.0 {
                return Ok(BoundReport { value: 1.0, exact: Some(BigRational::one()), truncated_sum: 0.0, tail_bound: 0.0, terms: 0 });
            }
            let (s, tail) = kg_series(*family, *n, *eps, terms)?;
            let c = 2f64.powi(*m as i32) * *n as f64 * kappa.powi(*m as i32);
            Ok(BoundReport { value: 1.0 - c * (s + tail), exact: None, truncated_sum: s, tail_bound: tail, terms })
        }
    }
}

/// `psi(q)` itself for the system variant: `phi(q)^{1/m}`.
pub fn psi(family: PsiFamily, n: u32, m: u32, eps: f64, q: f64) -> f64 {
    phi(family, n, eps, q).powf(1.0 / m as f64)
}
