use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::alg::Alg;
use super::draw::Var;
use super::fixed::Fx;
use super::ratfunc::RatFunc;
use crate::{Error, Limits, Result};

/// A real number with certified comparisons.
///
/// Rationals, quadratic surds, decimal literals and sums/products/quotients of
/// them are exact; a seeded draw `rand:<stream>:<index>` is a symbolic variable
/// whose binary digits are expanded on demand. Equality of two values is
/// decided structurally, so it never needs numerical refinement; signs of
/// nonzero values involving draws are certified by doubling precision up to
/// the cap.
#[derive(Clone)]
pub struct ExactReal {
    f: RatFunc,
    /// Original literal for values parsed from `dec:`.
    dec: Option<String>,
}

impl PartialEq for ExactReal {
    fn eq(&self, o: &Self) -> bool {
        self.sub_ref(o).is_zero()
    }
}

impl Eq for ExactReal {}

impl fmt::Debug for ExactReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl ExactReal {
    fn from_f(f: RatFunc) -> ExactReal {
        ExactReal { f, dec: None }
    }

    pub fn zero() -> ExactReal {
        ExactReal::from_int(0)
    }

    pub fn one() -> ExactReal {
        ExactReal::from_int(1)
    }

    pub fn from_int(v: i64) -> ExactReal {
        ExactReal::from_alg(Alg::int(v))
    }

    pub fn from_bigint(v: BigInt) -> ExactReal {
        ExactReal::from_rational(BigRational::from_integer(v))
    }

    pub fn from_rational(r: BigRational) -> ExactReal {
        ExactReal::from_alg(Alg::rational(r))
    }

    pub fn ratio(n: i64, d: i64) -> ExactReal {
        ExactReal::from_rational(BigRational::new(n.into(), d.into()))
    }

    pub fn from_alg(a: Alg) -> ExactReal {
        ExactReal::from_f(RatFunc::constant(a))
    }

    /// `sqrt(d)` for `d >= 0`.
    pub fn sqrt_int(d: u64) -> ExactReal {
        ExactReal::from_alg(Alg::sqrt_term(BigRational::one(), d))
    }

    /// `(a + b sqrt(d)) / c`.
    pub fn surd(a: i64, b: i64, d: u64, c: i64) -> Result<ExactReal> {
        if c == 0 {
            return Err(Error::DivisionByZero);
        }
        let num = Alg::int(a).add(&Alg::sqrt_term(BigRational::from_integer(b.into()), d));
        Ok(ExactReal::from_alg(num.scale(&BigRational::new(1.into(), c.into()))))
    }

    /// The golden ratio `(1 + sqrt 5) / 2`.
    pub fn golden() -> ExactReal {
        ExactReal::surd(1, 1, 5, 2).unwrap()
    }

    pub fn draw(stream: u64, index: u64) -> ExactReal {
        ExactReal::from_f(RatFunc::var(Var::new(stream, index)))
    }

    /// True when the value involves no seeded draws.
    pub fn is_algebraic(&self) -> bool {
        self.f.as_alg().is_some()
    }

    pub fn as_alg(&self) -> Option<Alg> {
        self.f.as_alg()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        self.f.as_alg()?.as_rational()
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        let r = self.as_rational()?;
        r.is_integer().then(|| r.to_integer())
    }

    /// The draw this value is, if it is a bare draw.
    pub fn as_draw(&self) -> Option<Var> {
        if !self.f.has_unit_den() {
            return None;
        }
        let (m, a) = self.f.num.single_term()?;
        (a.is_one() && m.0.len() == 1 && m.0[0].1 == 1).then(|| m.0[0].0)
    }

    pub fn draws(&self) -> Vec<Var> {
        self.f.vars()
    }

    /// Structural zero test; exact for every representable value.
    pub fn is_zero(&self) -> bool {
        self.f.is_zero()
    }

    pub fn add_ref(&self, o: &ExactReal) -> ExactReal {
        ExactReal::from_f(self.f.add(&o.f))
    }

    pub fn sub_ref(&self, o: &ExactReal) -> ExactReal {
        ExactReal::from_f(self.f.add(&o.f.neg()))
    }

    pub fn mul_ref(&self, o: &ExactReal) -> ExactReal {
        ExactReal::from_f(self.f.mul(&o.f))
    }

    pub fn div_ref(&self, o: &ExactReal) -> Result<ExactReal> {
        Ok(self.mul_ref(&o.recip()?))
    }

    pub fn recip(&self) -> Result<ExactReal> {
        Ok(ExactReal::from_f(self.f.recip()?))
    }

    pub fn neg_ref(&self) -> ExactReal {
        ExactReal::from_f(self.f.neg())
    }

    pub fn mul_int(&self, k: i64) -> ExactReal {
        self.scale(&BigRational::from_integer(k.into()))
    }

    pub fn scale(&self, k: &BigRational) -> ExactReal {
        ExactReal::from_f(self.f.scale(k))
    }

    pub fn add_int(&self, k: &BigInt) -> ExactReal {
        self.add_ref(&ExactReal::from_bigint(k.clone()))
    }

    pub fn powi(&self, e: i32) -> Result<ExactReal> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut acc = ExactReal::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul_ref(&base);
        }
        Ok(acc)
    }

    /// Certified sign with the default precision cap.
    pub fn sign(&self) -> Result<i8> {
        self.sign_with(Limits::DEFAULT_PRECISION_BITS)
    }

    pub fn sign_with(&self, cap: u32) -> Result<i8> {
        self.f.sign(cap)
    }

    pub fn cmp_with(&self, o: &ExactReal, cap: u32) -> Result<Ordering> {
        Ok(self.sub_ref(o).sign_with(cap)?.cmp(&0))
    }

    pub fn cmp_exact(&self, o: &ExactReal) -> Result<Ordering> {
        self.cmp_with(o, Limits::DEFAULT_PRECISION_BITS)
    }

    pub fn abs_with(&self, cap: u32) -> Result<ExactReal> {
        Ok(if self.sign_with(cap)? < 0 { self.neg_ref() } else { self.clone() })
    }

    pub fn min_with(&self, o: &ExactReal, cap: u32) -> Result<ExactReal> {
        Ok(if self.cmp_with(o, cap)? == Ordering::Greater { o.clone() } else { self.clone() })
    }

    pub fn max_with(&self, o: &ExactReal, cap: u32) -> Result<ExactReal> {
        Ok(if self.cmp_with(o, cap)? == Ordering::Less { o.clone() } else { self.clone() })
    }

    /// Enclosure at `prec` fractional bits. Only fails for a rational function
    /// whose denominator cannot be separated from zero at this precision.
    pub fn enclose(&self, prec: u32) -> Option<Fx> {
        self.f.enclose(prec)
    }

    /// Enclosure refined until its width is at most one unit at `prec` bits.
    pub fn enclose_tight(&self, prec: u32, cap: u32) -> Result<Fx> {
        if let Some(a) = self.f.as_alg() {
            if let Some(r) = a.as_rational() {
                return Ok(Fx::from_rational(&r, prec));
            }
        }
        let mut p = prec;
        loop {
            if let Some(e) = self.enclose(p) {
                let e = e.round_to(prec);
                if e.width() <= BigInt::from(2) {
                    return Ok(e);
                }
            }
            if p >= cap.max(prec) {
                return Err(Error::PrecisionCap { bits: cap });
            }
            p = (p * 2).min(cap.max(prec));
        }
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(r) = self.as_rational() {
            return r.to_f64().unwrap_or(f64::NAN);
        }
        match self.enclose_tight(80, 1024) {
            Ok(e) => e.mid_f64(),
            Err(_) => f64::NAN,
        }
    }

    /// Certified floor.
    pub fn floor_with(&self, cap: u32) -> Result<BigInt> {
        if let Some(r) = self.as_rational() {
            return Ok(r.floor().to_integer());
        }
        let mut prec = 64u32;
        loop {
            if let Some(e) = self.enclose(prec) {
                let one = BigInt::one() << prec as usize;
                let fl = e.lo.div_floor(&one);
                let fh = e.hi.div_floor(&one);
                if fl == fh {
                    return Ok(fl);
                }
                if &fh - &fl == BigInt::one() {
                    let s = self.sub_ref(&ExactReal::from_bigint(fh.clone())).sign_with(cap)?;
                    return Ok(if s >= 0 { fh } else { fl });
                }
            }
            if prec >= cap {
                return Err(Error::PrecisionCap { bits: cap });
            }
            prec = (prec * 2).min(cap);
        }
    }

    /// Nearest integer, rounding exact halves down.
    pub fn round_half_down_with(&self, cap: u32) -> Result<BigInt> {
        let half = ExactReal::ratio(1, 2);
        let k = self.add_ref(&half).floor_with(cap)?;
        // x + 1/2 an exact integer means x is a half: take the lower neighbour.
        if self.add_ref(&half).sub_ref(&ExactReal::from_bigint(k.clone())).is_zero() {
            Ok(k - 1)
        } else {
            Ok(k)
        }
    }

    pub fn with_decimal_hint(mut self, lit: String) -> ExactReal {
        self.dec = Some(lit);
        self
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:ident) => {
        impl $tr<&ExactReal> for &ExactReal {
            type Output = ExactReal;
            fn $m(self, o: &ExactReal) -> ExactReal {
                self.$body(o)
            }
        }
        impl $tr<ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $m(self, o: ExactReal) -> ExactReal {
                (&self).$body(&o)
            }
        }
        impl $tr<&ExactReal> for ExactReal {
            type Output = ExactReal;
            fn $m(self, o: &ExactReal) -> ExactReal {
                (&self).$body(o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl Div<&ExactReal> for &ExactReal {
    type Output = ExactReal;
    /// Panics on division by zero; use [`ExactReal::div_ref`] to handle it.
    fn div(self, o: &ExactReal) -> ExactReal {
        self.div_ref(o).expect("division by zero")
    }
}

impl Div<ExactReal> for ExactReal {
    type Output = ExactReal;
    fn div(self, o: ExactReal) -> ExactReal {
        &self / &o
    }
}

impl Neg for ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        self.neg_ref()
    }
}

impl Neg for &ExactReal {
    type Output = ExactReal;
    fn neg(self) -> ExactReal {
        self.neg_ref()
    }
}

impl From<i64> for ExactReal {
    fn from(v: i64) -> Self {
        ExactReal::from_int(v)
    }
}

// ---------------------------------------------------------------- display

fn fmt_alg(a: &Alg) -> String {
    if let Some(r) = a.as_rational() {
        return format!("rat:{}/{}", r.numer(), r.denom());
    }
    let (den, nums) = a.integer_form();
    let a0 = nums.iter().find(|(r, _)| *r == 1).map(|(_, c)| c.clone()).unwrap_or_default();
    let rest: Vec<String> =
        nums.iter().filter(|(r, _)| *r != 1).map(|(r, c)| format!("{c}*sqrt{r}")).collect();
    let tag = if rest.len() == 1 { "surd" } else { "alg" };
    format!("{tag}:({a0}+{})/{den}", rest.join("+"))
}

fn fmt_poly(p: &super::ratfunc::Poly) -> String {
    let mut parts = Vec::new();
    for (m, a) in &p.terms {
        let mut factors = vec![fmt_alg(a)];
        for (v, e) in &m.0 {
            if *e == 1 {
                factors.push(format!("rand:{}:{}", v.stream, v.index));
            } else {
                factors.push(format!("rand:{}:{}^{}", v.stream, v.index, e));
            }
        }
        parts.push(factors.join("*"));
    }
    if parts.is_empty() {
        "rat:0/1".into()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for ExactReal {
    /// Grammar form for algebraic values (`rat:`, `surd:`, `alg:`, `dec:`) and
    /// bare draws (`rand:`); other expressions in draws print as a
    /// human-readable `expr:` string that is not parsed back.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(lit) = &self.dec {
            return write!(f, "dec:{lit}");
        }
        if let Some(a) = self.f.as_alg() {
            return write!(f, "{}", fmt_alg(&a));
        }
        if let Some(v) = self.as_draw() {
            return write!(f, "rand:{}:{}", v.stream, v.index);
        }
        if self.f.has_unit_den() {
            write!(f, "expr:({})", fmt_poly(&self.f.num))
        } else {
            write!(f, "expr:({})/({})", fmt_poly(&self.f.num), fmt_poly(&self.f.den))
        }
    }
}

// ---------------------------------------------------------------- parsing

fn perr(s: &str, why: &str) -> Error {
    Error::Parse(format!("`{s}`: {why}"))
}

fn parse_int(s: &str, ctx: &str) -> Result<BigInt> {
    let t = s.trim();
    let ok = !t.is_empty()
        && t.strip_prefix('-').unwrap_or(t).chars().all(|c| c.is_ascii_digit())
        && t != "-";
    if !ok {
        return Err(perr(ctx, "expected an integer"));
    }
    t.parse::<BigInt>().map_err(|_| perr(ctx, "expected an integer"))
}

fn parse_ratio(s: &str, ctx: &str) -> Result<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let d = parse_int(d, ctx)?;
            if d.is_zero() {
                return Err(perr(ctx, "zero denominator"));
            }
            Ok(BigRational::new(parse_int(n, ctx)?, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s, ctx)?)),
    }
}

/// Parses `[+-]digits[.digits][e[+-]digits]` exactly.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let ctx = s;
    let t = s.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], parse_int(&t[i + 1..].replace('+', ""), ctx)?),
        None => (t, BigInt::zero()),
    };
    let (neg, body) = match mant.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(perr(ctx, "malformed decimal"));
    }
    let digits: BigInt = format!("0{ip}{fp}").parse().unwrap();
    let exp = exp.to_i64().ok_or_else(|| perr(ctx, "exponent out of range"))? - fp.len() as i64;
    if exp.unsigned_abs() > 10_000 {
        return Err(perr(ctx, "exponent out of range"));
    }
    let ten = BigInt::from(10);
    let mut r = if exp >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, exp as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-exp) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

fn parse_radical_sum(inner: &str, den: &str, ctx: &str) -> Result<Alg> {
    let den = parse_int(den, ctx)?;
    if den.is_zero() {
        return Err(perr(ctx, "zero denominator"));
    }
    let mut parts = inner.split('+');
    let a0 = parse_int(parts.next().unwrap_or(""), ctx)?;
    let mut acc = Alg::rational(BigRational::from_integer(a0));
    let mut count = 0;
    for p in parts {
        let (b, d) = p.split_once("*sqrt").ok_or_else(|| perr(ctx, "expected <int>*sqrt<int>"))?;
        let b = parse_int(b, ctx)?;
        let d = parse_int(d, ctx)?;
        let d = d.to_u64().ok_or_else(|| perr(ctx, "radicand must be a non-negative 64-bit integer"))?;
        acc = acc.add(&Alg::sqrt_term(BigRational::from_integer(b), d));
        count += 1;
    }
    if count == 0 {
        return Err(perr(ctx, "missing radical term"));
    }
    Ok(acc.scale(&BigRational::new(BigInt::one(), den)))
}

fn split_paren(body: &str, ctx: &str) -> Result<(String, String)> {
    let b = body.strip_prefix('(').ok_or_else(|| perr(ctx, "expected `(`"))?;
    let (inner, den) = b.rsplit_once(")/").ok_or_else(|| perr(ctx, "expected `)/<int>`"))?;
    Ok((inner.replace(' ', ""), den.to_string()))
}

impl FromStr for ExactReal {
    type Err = Error;

    /// Accepts `rat:<int>/<int>`, `surd:(<int>+<int>*sqrt<int>)/<int>`,
    /// `alg:(<int>+<int>*sqrt<int>+...)/<int>`, `dec:<decimal>`,
    /// `rand:<stream>:<index>`, and the bare shorthands `<int>`, `<int>/<int>`
    /// and `<decimal>` for rationals.
    fn from_str(s: &str) -> Result<ExactReal> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("rat:") {
            return Ok(ExactReal::from_rational(parse_ratio(body, s)?));
        }
        if let Some(body) = s.strip_prefix("surd:") {
            let (inner, den) = split_paren(body, s)?;
            if inner.matches("*sqrt").count() != 1 {
                return Err(perr(s, "a surd has exactly one radical"));
            }
            return Ok(ExactReal::from_alg(parse_radical_sum(&inner, &den, s)?));
        }
        if let Some(body) = s.strip_prefix("alg:") {
            let (inner, den) = split_paren(body, s)?;
            return Ok(ExactReal::from_alg(parse_radical_sum(&inner, &den, s)?));
        }
        if let Some(body) = s.strip_prefix("dec:") {
            let r = parse_decimal(body)?;
            return Ok(ExactReal::from_rational(r).with_decimal_hint(body.trim().to_string()));
        }
        if let Some(body) = s.strip_prefix("rand:") {
            let (a, b) = body.split_once(':').ok_or_else(|| perr(s, "expected rand:<stream>:<index>"))?;
            let a = a.trim().parse::<u64>().map_err(|_| perr(s, "bad stream"))?;
            let b = b.trim().parse::<u64>().map_err(|_| perr(s, "bad index"))?;
            return Ok(ExactReal::draw(a, b));
        }
        if s.contains('.') || s.contains(['e', 'E']) {
            return Ok(ExactReal::from_rational(parse_decimal(s)?));
        }
        Ok(ExactReal::from_rational(parse_ratio(s, s)?))
    }
}
