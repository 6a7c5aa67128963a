use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use super::cf::{cf_expand, convergents};
use super::search::{nearest_offsets, resolve_min, FixedVec, MinTracker};
use super::ExactReal;
use crate::{Error, Limits, Result};

/// A pair `(p, q)` with `1 <= q <= Q` and the exact distance `|q xi - p|`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletWitness {
    pub p: BigInt,
    pub q: u64,
    pub distance: ExactReal,
}

fn distance(xi: &ExactReal, q: u64, p: i64, cap: u32) -> Result<ExactReal> {
    xi.mul_int(q as i64).sub_ref(&ExactReal::from_int(p)).abs_with(cap)
}

fn check_q(q: u64, limits: &Limits) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidArgument("Q must be at least 1".into()));
    }
    limits.check_work(q as u128)
}

/// The pair minimizing `|q xi - p|` over `1 <= q <= Q`, ties to the smallest
/// `q` and then the smallest `p`. By Dirichlet's theorem the minimum is
/// strictly below `1/Q`.
pub fn dirichlet_approx(xi: &ExactReal, big_q: u64, limits: &Limits) -> Result<DirichletWitness> {
    check_q(big_q, limits)?;
    let cap = limits.precision_bits;
    let fx = FixedVec::new(std::slice::from_ref(xi), &[big_q], big_q + 1, cap)?;
    let mut tr = MinTracker::new();
    for q in 1..=big_q {
        let (lo, hi) = fx.dot(&[q as i64]);
        let (cands, n) = nearest_offsets(lo, hi, fx.scale);
        for &(off, a, b) in &cands[..n] {
            // |q xi + off| with off = -p.
            tr.push((q, -off), a, b);
        }
    }
    let ((q, p), d) = resolve_min(tr.finish(), fx.exact, |&(q, p)| distance(xi, q, p, cap), cap)?
        .expect("nonempty search");
    Ok(DirichletWitness { p: BigInt::from(p), q, distance: d })
}

/// `theta(xi, Q) = Q * min |q xi - p|`.
pub fn dirichlet_profile(xi: &ExactReal, big_q: u64, limits: &Limits) -> Result<ExactReal> {
    let w = dirichlet_approx(xi, big_q, limits)?;
    Ok(w.distance.mul_int(big_q as i64))
}

/// `dirichlet_approx(xi, Q)` for every `Q` in `1..=q_max`, in one pass: the
/// minimizer for `Q` is a running minimum over `q <= Q`.
pub fn dirichlet_sweep(xi: &ExactReal, q_max: u64, limits: &Limits) -> Result<Vec<DirichletWitness>> {
    check_q(q_max, limits)?;
    let cap = limits.precision_bits;
    let fx = FixedVec::new(std::slice::from_ref(xi), &[q_max], q_max + 1, cap)?;
    let mut out: Vec<DirichletWitness> = Vec::with_capacity(q_max as usize);
    let mut best: Option<((u64, i64), i128, i128, ExactReal)> = None;
    for q in 1..=q_max {
        let (lo, hi) = fx.dot(&[q as i64]);
        let (cands, n) = nearest_offsets(lo, hi, fx.scale);
        for &(off, a, b) in &cands[..n] {
            let key = (q, -off);
            let better = match &best {
                None => true,
                Some((bkey, blo, bhi, bval)) => {
                    let ord = if fx.exact {
                        a.cmp(blo)
                    } else if a > *bhi {
                        Ordering::Greater
                    } else if b < *blo {
                        Ordering::Less
                    } else {
                        distance(xi, q, key.1, cap)?.cmp_with(bval, cap)?
                    };
                    ord.then(key.cmp(bkey)) == Ordering::Less
                }
            };
            if better {
                best = Some((key, a, b, distance(xi, q, key.1, cap)?));
            }
        }
        let (key, _, _, v) = best.as_ref().unwrap();
        out.push(DirichletWitness { p: BigInt::from(key.1), q: key.0, distance: v.clone() });
    }
    Ok(out)
}

/// `min_{1 <= q <= Q, p} q^2 |xi - p/q| = min q |q xi - p|`, a finite-depth
/// estimate of the badly-approximable constant of `xi`.
///
/// For algebraic inputs the candidates are convergent denominators: any `q`
/// with `q |q xi - p| < 1/2` is one (Legendre). If the minimum over
/// convergents is not below `1/2`, or the input involves draws, every `q` is
/// scanned.
pub fn bad_constant_lower(xi: &ExactReal, big_q: u64, limits: &Limits) -> Result<ExactReal> {
    check_q(big_q, limits)?;
    let cap = limits.precision_bits;
    let value = |q: u64, p: i64| -> Result<ExactReal> { Ok(distance(xi, q, p, cap)?.mul_int(q as i64)) };
    let half = ExactReal::ratio(1, 2);
    if xi.is_algebraic() {
        let mut best: Option<ExactReal> = None;
        let mut depth = 8;
        loop {
            let cf = cf_expand(xi, depth, limits)?;
            let conv = convergents(&cf.quotients);
            let last_q = conv.last().map(|c| c.q.clone()).unwrap_or_else(BigInt::one);
            if cf.terminated || last_q > BigInt::from(big_q) {
                for c in &conv {
                    let Some(q) = c.q.to_u64() else { break };
                    if q > big_q {
                        break;
                    }
                    let Some(p) = c.p.to_i64() else { break };
                    let v = value(q, p)?;
                    best = Some(match best {
                        None => v,
                        Some(b) => b.min_with(&v, cap)?,
                    });
                }
                break;
            }
            depth *= 2;
        }
        if let Some(b) = best {
            if b.cmp_with(&half, cap)? == Ordering::Less {
                return Ok(b);
            }
        }
    }
    let fx = FixedVec::new(std::slice::from_ref(xi), &[big_q], big_q + 1, cap)?;
    let mut tr = MinTracker::new();
    for q in 1..=big_q {
        let (lo, hi) = fx.dot(&[q as i64]);
        let (cands, n) = nearest_offsets(lo, hi, fx.scale);
        for &(off, a, b) in &cands[..n] {
            let qq = q as i128;
            tr.push((q, -off), a.saturating_mul(qq), b.saturating_mul(qq));
        }
    }
    let (_, v) = resolve_min(tr.finish(), fx.exact, |&(q, p)| value(q, p), cap)?.expect("nonempty search");
    Ok(v)
}
