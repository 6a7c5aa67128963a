//! Rational functions in seeded draws with multi-quadratic coefficients.
//! A value is zero exactly when its numerator polynomial is identically zero;
//! that makes equalities such as `x*y - y*x = 0` decidable for draws.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::alg::Alg;
use super::draw::Var;
use super::fixed::Fx;
use crate::{Error, Result};

/// Sorted list of `(variable, nonzero exponent)`; exponents may be negative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub Vec<(Var, i32)>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Monomial {
        Monomial(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let mut m: BTreeMap<Var, i32> = self.0.iter().copied().collect();
        for (v, e) in &o.0 {
            *m.entry(*v).or_insert(0) += e;
        }
        Monomial(m.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(v, e)| (*v, -e)).collect())
    }

    fn enclose(&self, prec: u32, cache: &mut HashMap<Var, Fx>) -> Fx {
        let mut acc = Fx::exact_int(&One::one(), prec);
        for (v, e) in &self.0 {
            let base = cache.entry(*v).or_insert_with(|| v.enclose(prec)).clone();
            // Draws are positive, so negative powers are always defined.
            acc = acc.mul(&base.powi(*e).expect("draw enclosure excludes zero"));
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Alg>,
}

impl Poly {
    pub fn constant(a: Alg) -> Poly {
        let mut p = Poly::default();
        if !a.is_zero() {
            p.terms.insert(Monomial::one(), a);
        }
        p
    }

    pub fn monomial(m: Monomial, a: Alg) -> Poly {
        let mut p = Poly::default();
        if !a.is_zero() {
            p.terms.insert(m, a);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Alg> {
        match self.terms.len() {
            0 => Some(Alg::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Alg)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    fn add_term(&mut self, m: Monomial, a: Alg) {
        if a.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(old) => old.add(&a),
            None => a,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, a) in &o.terms {
            p.add_term(m.clone(), a.clone());
        }
        p
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, a)| (m.clone(), a.neg())).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::default();
        for (m1, a1) in &self.terms {
            for (m2, a2) in &o.terms {
                p.add_term(m1.mul(m2), a1.mul(a2));
            }
        }
        p
    }

    pub fn mul_term(&self, m: &Monomial, a: &Alg) -> Poly {
        let mut p = Poly::default();
        for (m1, a1) in &self.terms {
            p.add_term(m1.mul(m), a1.mul(a));
        }
        p
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> =
            self.terms.keys().flat_map(|m| m.0.iter().map(|(x, _)| *x)).collect();
        v.sort();
        v.dedup();
        v
    }

    fn enclose(&self, prec: u32, cache: &mut HashMap<Var, Fx>) -> Fx {
        let mut acc = Fx::zero(prec);
        for (m, a) in &self.terms {
            acc = acc.add(&m.enclose(prec, cache).mul(&a.enclose(prec)));
        }
        acc
    }
}

/// `num / den` with `den` never the zero polynomial. When the denominator is a
/// single term it is folded into the numerator, so products and quotients of
/// draws stay as Laurent polynomials over a unit denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn constant(a: Alg) -> RatFunc {
        RatFunc { num: Poly::constant(a), den: Poly::constant(Alg::int(1)) }
    }

    pub fn var(v: Var) -> RatFunc {
        RatFunc { num: Poly::monomial(Monomial::var(v), Alg::int(1)), den: Poly::constant(Alg::int(1)) }
    }

    fn normalized(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::constant(Alg::zero()));
        }
        if let Some((m, a)) = den.single_term() {
            let num = num.mul_term(&m.inv(), &a.inv()?);
            return Ok(RatFunc { num, den: Poly::constant(Alg::int(1)) });
        }
        Ok(RatFunc { num, den })
    }

    pub fn has_unit_den(&self) -> bool {
        self.den.as_constant().is_some_and(|a| a.is_one())
    }

    pub fn as_alg(&self) -> Option<Alg> {
        if self.has_unit_den() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::normalized(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        RatFunc::normalized(num, self.den.mul(&o.den)).unwrap()
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::normalized(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }

    pub fn recip(&self) -> Result<RatFunc> {
        RatFunc::normalized(self.den.clone(), self.num.clone())
    }

    pub fn scale(&self, k: &BigRational) -> RatFunc {
        if k.is_zero() {
            return RatFunc::constant(Alg::zero());
        }
        let num = Poly { terms: self.num.terms.iter().map(|(m, a)| (m.clone(), a.scale(k))).collect() };
        RatFunc { num, den: self.den.clone() }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v.sort();
        v.dedup();
        v
    }

    /// Enclosure at `prec` bits, or `None` if the denominator enclosure
    /// contains zero at this precision.
    pub fn enclose(&self, prec: u32) -> Option<Fx> {
        let mut cache = HashMap::new();
        let guard = prec + 32;
        let n = self.num.enclose(guard, &mut cache);
        if self.has_unit_den() {
            return Some(n.round_to(prec));
        }
        let d = self.den.enclose(guard, &mut cache);
        Some(n.mul(&d.recip()?).round_to(prec))
    }

    pub fn sign(&self, cap: u32) -> Result<i8> {
        if self.num.is_zero() {
            return Ok(0);
        }
        if let (Some(n), Some(d)) = (self.num.as_constant(), self.den.as_constant()) {
            let big = cap.max(1 << 22);
            return Ok(n.sign(big)? * d.sign(big)?);
        }
        let mut prec = 64u32;
        let mut cache = HashMap::new();
        loop {
            cache.clear();
            let n = self.num.enclose(prec, &mut cache).sign();
            let d = self.den.enclose(prec, &mut cache).sign();
            if let (Some(a), Some(b)) = (n, d) {
                if b != 0 {
                    return Ok(a * b);
                }
            }
            if prec >= cap {
                return Err(Error::PrecisionCap { bits: cap });
            }
            prec = (prec * 2).min(cap);
        }
    }
}
