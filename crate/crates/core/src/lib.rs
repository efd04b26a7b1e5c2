//! Simulating a fair n-sided die with one flip of a (1/n)-coin and
//! `3⌊log₂ n⌋ + 1` flips of a fair coin.
//!
//! The pipeline has two stages. The first turns the (1/n)-coin flip and
//! `k + 1` fair flips into a flip of a coin with bias `2^k / n`
//! ([`kernel::simulate_scaled_coin`]). The second turns that scaled flip and
//! `2k` more fair flips into a uniform value in `[0, n)`
//! ([`kernel::simulate_die_given_scaled`]). [`oracle`] enumerates every coin
//! outcome with exact rational weights to check both stages for concrete `n`.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod kernel;
pub mod oracle;
pub mod params;
pub mod sources;

pub use kernel::{roll, Branch, Die, Flip, FlipTranscript, Roll, RollError, RollTrace, Rule, SourceRole, TwoCoinRule};
pub use oracle::{ExactDistribution, Oracle, OracleError, Verdict};
pub use params::{floor_log2, split_coefficients, DieParams, ParamError, SplitCoefficients, MAX_SIDES};
pub use sources::{Bias, CoinSource, Counting, FairCoin, InverseNCoin, Scripted, SourceError};
