/// Resource limits shared by every search and certification routine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of box points an exhaustive search may visit.
    pub work: u64,
    /// Maximum working precision, in bits, for sign certification.
    pub precision_bits: u32,
}

impl Limits {
    pub const DEFAULT_WORK: u64 = 100_000_000;
    pub const DEFAULT_PRECISION_BITS: u32 = 4096;

    pub fn with_work(mut self, work: u64) -> Self {
        self.work = work;
        self
    }

    pub fn with_precision(mut self, bits: u32) -> Self {
        self.precision_bits = bits;
        self
    }

    /// Fails with [`crate::Error::WorkLimit`] when `required` exceeds the work limit.
    pub fn check_work(&self, required: u128) -> crate::Result<()> {
        if required > self.work as u128 {
            Err(crate::Error::WorkLimit { required, limit: self.work })
        } else {
            Ok(())
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits { work: Self::DEFAULT_WORK, precision_bits: Self::DEFAULT_PRECISION_BITS }
    }
}
