//! Seeded uniform draws in (0, 1). The binary digits of draw `(stream, index)`
//! are the 64-bit words of a ChaCha8 generator seeded with `stream` and set to
//! word stream `index`, most significant word first. Digits are recomputed on
//! demand, so there is no shared mutable state.

use num_bigint::{BigInt, BigUint, Sign};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fixed::Fx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub stream: u64,
    pub index: u64,
}

impl Var {
    pub fn new(stream: u64, index: u64) -> Var {
        Var { stream, index }
    }

    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.stream);
        rng.set_stream(self.index);
        rng
    }

    /// The leading `prec` binary digits as an integer `m`, so the draw lies in
    /// `[m, m + 1] / 2^prec`.
    pub fn digits(&self, prec: u32) -> BigInt {
        let words = prec.div_ceil(64).max(1) as usize;
        let mut rng = self.rng();
        let mut acc = BigUint::default();
        for _ in 0..words {
            acc = (acc << 64usize) + BigUint::from(rng.next_u64());
        }
        let extra = words as u32 * 64 - prec;
        BigInt::from_biguint(Sign::Plus, acc >> extra as usize)
    }

    pub fn enclose(&self, prec: u32) -> Fx {
        Fx::from_digits(self.digits(prec), prec)
    }

    /// Leading 53 bits as an `f64`; the draw lies in `[x, x + 2^-53)`.
    pub fn to_f64(&self) -> f64 {
        let w = self.rng().next_u64();
        (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
