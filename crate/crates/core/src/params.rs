//! Problem instance and the split coefficients `(a, b)`.
//!
//! For `k = ⌊log₂ n⌋` there are integers `0 ≤ a, b ≤ 2^(k+1)` with
//! `a + b(n − 1) = 2^(2k+1)`. Powers of two take `a = b = 2^(k+1)`; every
//! other `n` takes the remainder and quotient of `2^(2k+1)` divided by `n − 1`.
//!
//! Everything here is exact `u64` arithmetic. [`MAX_SIDES`] keeps
//! `2^(2k+1)` below `2^64`.

use thiserror::Error;

/// Largest supported number of sides, `2^31`. With `k ≤ 31`, `2^(2k+1) ≤ 2^63`.
pub const MAX_SIDES: u64 = 1 << 31;

/// Rejected die sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParamError {
    /// A die needs at least one side.
    #[error("a die must have at least one side")]
    Zero,
    /// `n` exceeds [`MAX_SIDES`].
    #[error("n = {n} is outside the supported range 1..={max}", max = MAX_SIDES)]
    OutOfRange {
        /// The rejected side count.
        n: u64,
    },
}

/// Returns the unique `k` with `2^k ≤ n < 2^(k+1)`.
pub fn floor_log2(n: u64) -> Result<u32, ParamError> {
    if n == 0 {
        return Err(ParamError::Zero);
    }
    Ok(u64::BITS - 1 - n.leading_zeros())
}

/// An `n`-sided die together with `k = ⌊log₂ n⌋` and `m = n − 2^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DieParams {
    n: u64,
    k: u32,
    m: u64,
}

impl DieParams {
    /// Validates `1 ≤ n ≤ MAX_SIDES`.
    pub fn new(n: u64) -> Result<Self, ParamError> {
        let k = floor_log2(n)?;
        if n > MAX_SIDES {
            return Err(ParamError::OutOfRange { n });
        }
        Ok(DieParams { n, k, m: n - (1 << k) })
    }

    /// Number of sides.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// `⌊log₂ n⌋`.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// `n − 2^k`; zero iff `n` is a power of two.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// `2^k`.
    pub fn low_span(&self) -> u64 {
        1 << self.k
    }

    /// `n = 2^k`.
    pub fn is_power_of_two(&self) -> bool {
        self.m == 0
    }

    /// Fair flips fed to the first stage: `k + 1`.
    pub fn scaled_stage_flips(&self) -> usize {
        self.k as usize + 1
    }

    /// Fair flips fed to the second stage: `2k`.
    pub fn die_stage_flips(&self) -> usize {
        2 * self.k as usize
    }

    /// Total fair flips per roll: `3k + 1`.
    pub fn fair_budget(&self) -> usize {
        3 * self.k as usize + 1
    }

    /// `2^(2k+1)`, the right-hand side of the split identity.
    pub fn split_target(&self) -> u64 {
        1 << (2 * self.k + 1)
    }
}

/// The pair `(a, b)` with `a + b(n − 1) = 2^(2k+1)` and `0 ≤ a, b ≤ 2^(k+1)`.
///
/// A first-stage word `d < 2^(k+1)` yields heads when the (1/n)-coin shows
/// heads and `d < a`, or tails and `d < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplitCoefficients {
    /// Acceptance threshold when the (1/n)-coin shows heads.
    pub a: u64,
    /// Acceptance threshold when the (1/n)-coin shows tails.
    pub b: u64,
}

/// Computes `(a, b)` for `params`.
///
/// `n = 1` falls in the power-of-two branch and yields `a = b = 2`.
pub fn split_coefficients(params: &DieParams) -> SplitCoefficients {
    if params.is_power_of_two() {
        let both = 1 << (params.k + 1);
        return SplitCoefficients { a: both, b: both };
    }
    let target = params.split_target();
    let divisor = params.n - 1;
    SplitCoefficients {
        a: target % divisor,
        b: target / divisor,
    }
}
