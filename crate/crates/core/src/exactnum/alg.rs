//! Elements of a multi-quadratic field `Q(sqrt p1, ..., sqrt pk)`, stored as
//! `sum c_r * sqrt(r)` over distinct squarefree radicands `r` (with `r = 1`
//! for the rational part). Distinct square roots of squarefree integers are
//! linearly independent over the rationals, so a value is zero exactly when
//! every coefficient is zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::fixed::Fx;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Alg {
    terms: BTreeMap<u64, BigRational>,
}

/// Splits `d > 0` into `(s, f)` with `d = s^2 * f` and `f` squarefree.
pub fn squarefree_split(mut d: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut f = 1u64;
    let mut p = 2u64;
    while p * p <= d {
        let mut e = 0;
        while d % p == 0 {
            d /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            f *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    (s, f * d)
}

fn smallest_prime_factor(d: u64) -> u64 {
    let mut p = 2u64;
    while p * p <= d {
        if d % p == 0 {
            return p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    d
}

impl Alg {
    pub fn zero() -> Alg {
        Alg::default()
    }

    pub fn rational(r: BigRational) -> Alg {
        let mut a = Alg::zero();
        a.add_term(1, r);
        a
    }

    pub fn int(v: i64) -> Alg {
        Alg::rational(BigRational::from_integer(BigInt::from(v)))
    }

    /// `c * sqrt(d)` for any `d >= 0`, normalized to a squarefree radicand.
    pub fn sqrt_term(c: BigRational, d: u64) -> Alg {
        if d == 0 {
            return Alg::zero();
        }
        let (s, f) = squarefree_split(d);
        let mut a = Alg::zero();
        a.add_term(f, c * BigRational::from_integer(BigInt::from(s)));
        a
    }

    fn add_term(&mut self, r: u64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(r).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&r);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.terms.iter().map(|(r, c)| (*r, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&1).is_some_and(|c| c.is_one())
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&1).cloned(),
            _ => None,
        }
    }

    /// Radicands other than 1 that occur with nonzero coefficient.
    pub fn radicands(&self) -> Vec<u64> {
        self.terms.keys().copied().filter(|&r| r != 1).collect()
    }

    pub fn add(&self, o: &Alg) -> Alg {
        let mut a = self.clone();
        for (r, c) in &o.terms {
            a.add_term(*r, c.clone());
        }
        a
    }

    pub fn neg(&self) -> Alg {
        Alg { terms: self.terms.iter().map(|(r, c)| (*r, -c)).collect() }
    }

    pub fn sub(&self, o: &Alg) -> Alg {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &BigRational) -> Alg {
        if k.is_zero() {
            return Alg::zero();
        }
        Alg { terms: self.terms.iter().map(|(r, c)| (*r, c * k)).collect() }
    }

    pub fn mul(&self, o: &Alg) -> Alg {
        let mut a = Alg::zero();
        for (r, c) in &self.terms {
            for (s, d) in &o.terms {
                // sqrt(r) sqrt(s) = g sqrt((r/g)(s/g)) with g = gcd(r, s).
                let g = r.gcd(s);
                let rad = (r / g).checked_mul(s / g).expect("radicand overflow");
                a.add_term(rad, c * d * BigRational::from_integer(BigInt::from(g)));
            }
        }
        a
    }

    /// Multiplicative inverse by repeated conjugation over one prime at a time.
    pub fn inv(&self) -> Result<Alg> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Alg::rational(r.recip()));
        }
        let big = *self.terms.keys().next_back().unwrap();
        let p = smallest_prime_factor(big);
        // x = A + B sqrt(p); conj = A - B sqrt(p); x * conj = A^2 - p B^2.
        let conj = Alg {
            terms: self
                .terms
                .iter()
                .map(|(r, c)| (*r, if r % p == 0 { -c } else { c.clone() }))
                .collect(),
        };
        let norm = self.mul(&conj);
        debug_assert!(norm.terms.keys().all(|r| r % p != 0));
        Ok(conj.mul(&norm.inv()?))
    }

    pub fn enclose(&self, prec: u32) -> Fx {
        let mut acc = Fx::zero(prec);
        for (r, c) in &self.terms {
            let term = if *r == 1 {
                Fx::from_rational(c, prec)
            } else {
                Fx::sqrt_int(*r, prec).scale_rational(c)
            };
            acc = acc.add(&term);
        }
        acc
    }

    /// Exact sign. Terminates for every value because a nonzero element has a
    /// nonzero enclosure at sufficient precision; `cap` bounds the effort.
    pub fn sign(&self, cap: u32) -> Result<i8> {
        if self.is_zero() {
            return Ok(0);
        }
        if let Some(r) = self.as_rational() {
            return Ok(if r.is_positive() { 1 } else { -1 });
        }
        let mut prec = 64u32;
        loop {
            if let Some(s) = self.enclose(prec).sign() {
                return Ok(s);
            }
            if prec >= cap {
                return Err(Error::PrecisionCap { bits: cap });
            }
            prec = (prec * 2).min(cap);
        }
    }

    /// Common positive denominator and the integer numerators per radicand.
    pub fn integer_form(&self) -> (BigInt, Vec<(u64, BigInt)>) {
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let nums = self
            .terms
            .iter()
            .map(|(r, c)| (*r, c.numer() * (&den / c.denom())))
            .collect();
        (den, nums)
    }
}
