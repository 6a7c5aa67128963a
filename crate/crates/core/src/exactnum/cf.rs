use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ExactReal;
use crate::{Limits, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfExpansion {
    /// Partial quotients `a_0, a_1, ...`.
    pub quotients: Vec<BigInt>,
    /// True when the input is rational and the expansion ended early.
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub k: usize,
    pub p: BigInt,
    pub q: BigInt,
}

/// Partial quotients `a_0..=a_depth` of `xi`, stopping early for rationals.
pub fn cf_expand(xi: &ExactReal, depth: usize, limits: &Limits) -> Result<CfExpansion> {
    let cap = limits.precision_bits;
    let mut x = xi.clone();
    let mut quotients = Vec::with_capacity(depth + 1);
    for _ in 0..=depth {
        let a = x.floor_with(cap)?;
        let frac = x.sub_ref(&ExactReal::from_bigint(a.clone()));
        quotients.push(a);
        if frac.is_zero() {
            return Ok(CfExpansion { quotients, terminated: true });
        }
        x = frac.recip()?;
    }
    Ok(CfExpansion { quotients, terminated: false })
}

/// Convergents `p_k / q_k` of a list of partial quotients.
pub fn convergents(quotients: &[BigInt]) -> Vec<Convergent> {
    let (mut p_prev, mut q_prev) = (BigInt::zero(), BigInt::one());
    let (mut p, mut q) = (BigInt::one(), BigInt::zero());
    let mut out = Vec::with_capacity(quotients.len());
    for (k, a) in quotients.iter().enumerate() {
        let pn = a * &p + &p_prev;
        let qn = a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, pn);
        q_prev = std::mem::replace(&mut q, qn);
        out.push(Convergent { k, p: p.clone(), q: q.clone() });
    }
    out
}
