//! Shared machinery for exhaustive searches over integer boxes.
//!
//! Coefficients are imaged into fixed point (`i128` numerators over a common
//! `scale`) so that candidate values can be enclosed cheaply. Candidates whose
//! enclosures cannot be separated from the running minimum are kept and
//! resolved at the end by exact comparison, with a caller-supplied key as the
//! tie-break. The result is therefore exact whatever the fixed-point
//! precision, and independent of how the box was partitioned.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::ExactReal;
use crate::{Error, Result};

/// Fixed-point image of a coefficient vector: `c_j` lies in
/// `[lo_j, lo_j + wid_j] / scale`.
#[derive(Debug, Clone)]
pub struct FixedVec {
    pub lo: Vec<i128>,
    pub wid: Vec<i128>,
    pub scale: i128,
    /// All widths are zero: values are exact multiples of `1 / scale`.
    pub exact: bool,
}

const HEADROOM_BITS: f64 = 118.0;

impl FixedVec {
    /// `weights[j]` bounds `|a_j|` for every multiplier vector that will be
    /// evaluated; `extra` bounds any additional integer offset (in units).
    pub fn new(coeffs: &[ExactReal], weights: &[u64], extra: u64, cap: u32) -> Result<FixedVec> {
        assert_eq!(coeffs.len(), weights.len());
        let mut mag = extra as f64 + 2.0;
        for (c, w) in coeffs.iter().zip(weights) {
            mag += (*w as f64) * (c.to_f64().abs() + 1.0);
        }
        let log_mag = mag.log2().ceil();

        let rats: Option<Vec<_>> = coeffs.iter().map(|c| c.as_rational()).collect();
        if let Some(rats) = rats {
            let mut den = BigInt::one();
            for r in &rats {
                den = den.lcm(r.denom());
            }
            if (den.bits() as f64) + log_mag <= HEADROOM_BITS {
                let scale = den.to_i128().unwrap();
                let lo = rats.iter().map(|r| (r.numer() * (&den / r.denom())).to_i128().unwrap()).collect();
                return Ok(FixedVec { lo, wid: vec![0; coeffs.len()], scale, exact: true });
            }
        }

        let prec = (HEADROOM_BITS - log_mag).min(100.0);
        if prec < 4.0 {
            return Err(Error::InvalidArgument("coefficients too large for fixed-point search".into()));
        }
        let prec = prec as u32;
        let mut lo = Vec::with_capacity(coeffs.len());
        let mut wid = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            let e = c.enclose_tight(prec, cap)?;
            let (l, h) = e.to_i128_pair().ok_or_else(|| Error::InvalidArgument("fixed-point overflow".into()))?;
            lo.push(l);
            wid.push(h - l);
        }
        let exact = wid.iter().all(|w| *w == 0);
        Ok(FixedVec { lo, wid, scale: 1i128 << prec, exact })
    }

    /// Enclosure `[lo, hi]` of `sum a_j c_j`, scaled.
    #[inline]
    pub fn dot(&self, a: &[i64]) -> (i128, i128) {
        let mut s = 0i128;
        let mut neg = 0i128;
        let mut pos = 0i128;
        for ((x, l), w) in a.iter().zip(&self.lo).zip(&self.wid) {
            let x = *x as i128;
            s += x * l;
            if x > 0 {
                pos += x * w;
            } else {
                neg -= x * w;
            }
        }
        (s - neg, s + pos)
    }
}

/// Enclosure of `|v|` for `v` in `[a, b]`.
#[inline]
pub fn abs_interval(a: i128, b: i128) -> (i128, i128) {
    if a >= 0 {
        (a, b)
    } else if b <= 0 {
        (-b, -a)
    } else {
        (0, (-a).max(b))
    }
}

/// Integers `p` that may minimize `|v + p|` for `v` in `[lo, hi] / scale`,
/// each with an enclosure of `|v + p|` (scaled). Returns `(buffer, count)`.
#[inline]
pub fn nearest_offsets(lo: i128, hi: i128, scale: i128) -> ([(i64, i128, i128); 3], usize) {
    let mid = lo + (hi - lo) / 2;
    let k = (mid + scale / 2).div_euclid(scale);
    let mut cand = [(0i64, 0i128, 0i128); 3];
    let mut best_hi = i128::MAX;
    for (i, p) in [-k - 1, -k, -k + 1].into_iter().enumerate() {
        let (a, b) = abs_interval(lo + p * scale, hi + p * scale);
        cand[i] = (p as i64, a, b);
        best_hi = best_hi.min(b);
    }
    let mut out = [(0i64, 0i128, 0i128); 3];
    let mut n = 0;
    for c in cand {
        if c.1 <= best_hi {
            out[n] = c;
            n += 1;
        }
    }
    (out, n)
}

/// Keeps every candidate that might attain the minimum.
#[derive(Debug, Clone)]
pub struct MinTracker<K> {
    best_hi: i128,
    items: Vec<(K, i128, i128)>,
}

impl<K> Default for MinTracker<K> {
    fn default() -> Self {
        MinTracker { best_hi: i128::MAX, items: Vec::new() }
    }
}

impl<K> MinTracker<K> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn best_hi(&self) -> i128 {
        self.best_hi
    }

    #[inline]
    pub fn push(&mut self, key: K, lo: i128, hi: i128) {
        if lo > self.best_hi {
            return;
        }
        if hi < self.best_hi {
            self.best_hi = hi;
        }
        self.items.push((key, lo, hi));
        if self.items.len() >= 1 << 14 {
            self.prune();
        }
    }

    fn prune(&mut self) {
        let b = self.best_hi;
        self.items.retain(|(_, lo, _)| *lo <= b);
    }

    pub fn merge(mut self, other: MinTracker<K>) -> Self {
        self.best_hi = self.best_hi.min(other.best_hi);
        self.items.extend(other.items);
        self.prune();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn finish(mut self) -> Vec<(K, i128, i128)> {
        self.prune();
        self.items
    }
}

/// Picks the candidate with the least exact value, breaking ties by key.
/// `value` must return the exact (non-negative) quantity whose enclosure was
/// tracked. When `exact` is set the enclosures are the values themselves.
pub fn resolve_min<K: Ord + Clone>(
    mut items: Vec<(K, i128, i128)>,
    exact: bool,
    value: impl Fn(&K) -> Result<ExactReal>,
    cap: u32,
) -> Result<Option<(K, ExactReal)>> {
    if items.is_empty() {
        return Ok(None);
    }
    if exact || items.iter().all(|(_, lo, hi)| lo == hi) {
        let m = items.iter().map(|(_, lo, _)| *lo).min().unwrap();
        let key = items.into_iter().filter(|(_, lo, _)| *lo == m).map(|(k, _, _)| k).min().unwrap();
        let v = value(&key)?;
        return Ok(Some((key, v)));
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut it = items.into_iter();
    let (k0, _, _) = it.next().unwrap();
    let mut best = (k0.clone(), value(&k0)?);
    for (k, _, _) in it {
        let v = value(&k)?;
        if v.cmp_with(&best.1, cap)? == Ordering::Less {
            best = (k, v);
        }
    }
    Ok(Some(best))
}

/// Number of points in the half box (first nonzero coordinate positive).
pub fn half_box_size(w: &[i64]) -> u128 {
    let full = w.iter().fold(1u128, |acc, x| acc.saturating_mul(2 * (*x as u128) + 1));
    (full - 1) / 2
}

/// One slice of the half box: coordinates before `lead` are zero and
/// coordinate `lead` equals `value > 0`.
#[derive(Debug, Clone, Copy)]
pub struct HalfBoxTask {
    pub lead: usize,
    pub value: i64,
}

pub fn half_box_tasks(w: &[i64]) -> Vec<HalfBoxTask> {
    let mut t = Vec::new();
    for (lead, &wl) in w.iter().enumerate() {
        for value in 1..=wl {
            t.push(HalfBoxTask { lead, value });
        }
    }
    t
}

/// Visits every vector of one half-box slice in lexicographic order.
pub fn run_half_box_task(w: &[i64], task: HalfBoxTask, mut f: impl FnMut(&[i64])) {
    let n = w.len();
    let mut a = vec![0i64; n];
    a[task.lead] = task.value;
    for j in task.lead + 1..n {
        a[j] = -w[j];
    }
    loop {
        f(&a);
        let mut j = n;
        loop {
            if j == task.lead + 1 {
                return;
            }
            j -= 1;
            if a[j] < w[j] {
                a[j] += 1;
                break;
            }
            a[j] = -w[j];
        }
    }
}

/// Visits every vector of the full box `prod [0, w_j]` in lexicographic order.
pub fn for_each_digit_tuple(w: &[i64], mut f: impl FnMut(&[i64])) {
    let n = w.len();
    let mut a = vec![0i64; n];
    loop {
        f(&a);
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if a[j] < w[j] {
                a[j] += 1;
                break;
            }
            a[j] = 0;
        }
    }
}
