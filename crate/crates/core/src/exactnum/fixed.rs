//! Fixed-point interval enclosures: a value `x` is enclosed as
//! `lo / 2^prec <= x <= hi / 2^prec` with big-integer endpoints.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fx {
    pub lo: BigInt,
    pub hi: BigInt,
    pub prec: u32,
}

fn floor_shr(x: &BigInt, s: u32) -> BigInt {
    // BigInt >> rounds toward negative infinity.
    x >> s as usize
}

fn ceil_shr(x: &BigInt, s: u32) -> BigInt {
    -((-x) >> s as usize)
}

impl Fx {
    pub fn exact_int(v: &BigInt, prec: u32) -> Fx {
        let x = v << prec as usize;
        Fx { lo: x.clone(), hi: x, prec }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Fx {
        let n = r.numer() << prec as usize;
        let (lo, rem) = n.div_mod_floor(r.denom());
        let hi = if rem.is_zero() { lo.clone() } else { &lo + 1 };
        Fx { lo, hi, prec }
    }

    /// Enclosure of `sqrt(r)` for a non-negative integer `r`.
    pub fn sqrt_int(r: u64, prec: u32) -> Fx {
        let scaled = BigUint::from(r) << (2 * prec as usize);
        let s = scaled.sqrt();
        let exact = &s * &s == scaled;
        let lo = BigInt::from_biguint(Sign::Plus, s);
        let hi = if exact { lo.clone() } else { &lo + 1 };
        Fx { lo, hi, prec }
    }

    /// Enclosure of a number in `[0, 1)` given its leading `prec` binary digits.
    pub fn from_digits(m: BigInt, prec: u32) -> Fx {
        let hi = &m + 1;
        Fx { lo: m, hi, prec }
    }

    pub fn zero(prec: u32) -> Fx {
        Fx { lo: BigInt::zero(), hi: BigInt::zero(), prec }
    }

    pub fn add(&self, o: &Fx) -> Fx {
        debug_assert_eq!(self.prec, o.prec);
        Fx { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi, prec: self.prec }
    }

    pub fn neg(&self) -> Fx {
        Fx { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn sub(&self, o: &Fx) -> Fx {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Fx) -> Fx {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let mn = c.iter().min().unwrap();
        let mx = c.iter().max().unwrap();
        Fx { lo: floor_shr(mn, self.prec), hi: ceil_shr(mx, self.prec), prec: self.prec }
    }

    pub fn scale_rational(&self, r: &BigRational) -> Fx {
        self.mul(&Fx::from_rational(r, self.prec))
    }

    /// Reciprocal; `None` when the enclosure contains zero.
    pub fn recip(&self) -> Option<Fx> {
        if self.lo.sign() != Sign::Plus && self.hi.sign() != Sign::Minus {
            return None;
        }
        let one = BigInt::one() << (2 * self.prec as usize);
        // 1/x is decreasing on either half-line.
        let lo = one.div_floor(&self.hi);
        let hi = one.div_ceil(&self.lo);
        Some(Fx { lo, hi, prec: self.prec })
    }

    pub fn powi(&self, e: i32) -> Option<Fx> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = Fx::exact_int(&BigInt::one(), self.prec);
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Some(acc)
    }

    /// Certified sign, or `None` when the enclosure straddles zero.
    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn width(&self) -> BigInt {
        &self.hi - &self.lo
    }

    pub fn lo_f64(&self) -> f64 {
        to_f64_scaled(&self.lo, self.prec)
    }

    pub fn hi_f64(&self) -> f64 {
        to_f64_scaled(&self.hi, self.prec)
    }

    pub fn mid_f64(&self) -> f64 {
        to_f64_scaled(&(&self.lo + &self.hi), self.prec + 1)
    }

    /// Rescale to a lower precision, rounding outward.
    pub fn round_to(&self, prec: u32) -> Fx {
        if prec >= self.prec {
            let s = (prec - self.prec) as usize;
            return Fx { lo: &self.lo << s, hi: &self.hi << s, prec };
        }
        let s = self.prec - prec;
        Fx { lo: floor_shr(&self.lo, s), hi: ceil_shr(&self.hi, s), prec }
    }

    /// Converts both endpoints to `i128` at this precision, if they fit.
    pub fn to_i128_pair(&self) -> Option<(i128, i128)> {
        Some((bigint_to_i128(&self.lo)?, bigint_to_i128(&self.hi)?))
    }
}

pub(crate) fn bigint_to_i128(x: &BigInt) -> Option<i128> {
    use num_traits::ToPrimitive;
    x.to_i128()
}

/// `x / 2^prec` as an `f64` (correct to about 60 bits before rounding).
pub fn to_f64_scaled(x: &BigInt, prec: u32) -> f64 {
    use num_traits::ToPrimitive;
    if x.is_zero() {
        return 0.0;
    }
    let drop = x.bits().saturating_sub(64);
    let top = (x >> drop as usize).to_f64().unwrap_or(f64::NAN);
    let exp = (drop as i64 - prec as i64).clamp(i32::MIN as i64 / 2, i32::MAX as i64 / 2);
    libm::ldexp(top, exp as i32)
}
