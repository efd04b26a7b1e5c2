//! Coin sources: streams of flips with a declared probability of heads.
//!
//! * [`FairCoin`] wraps any [`RngCore`]; [`FairCoin::seeded`] uses ChaCha8
//!   seeded through `seed_from_u64`, which is stable across platforms.
//! * [`InverseNCoin`] builds an exact (1/n)-coin from a fair source.
//! * [`Scripted`] replays a fixed sequence and fails once it runs out.
//! * [`Counting`] counts successful draws of any source.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_rational::Ratio;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::kernel::Flip;
use crate::params::ParamError;

/// Exact probability of heads.
pub type Bias = Ratio<u64>;

/// Failure to produce a flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SourceError {
    /// A scripted source has no flips left.
    #[error("script exhausted after {consumed} flips")]
    Exhausted {
        /// Flips successfully drawn before the failure.
        consumed: usize,
    },
}

/// A stream of coin flips.
pub trait CoinSource {
    /// Declared probability of heads, in `(0, 1]`.
    fn bias(&self) -> Bias;

    /// Draws the next flip.
    fn draw(&mut self) -> Result<Flip, SourceError>;
}

impl<S: CoinSource + ?Sized> CoinSource for &mut S {
    fn bias(&self) -> Bias {
        (**self).bias()
    }

    fn draw(&mut self) -> Result<Flip, SourceError> {
        (**self).draw()
    }
}

impl<S: CoinSource + ?Sized> CoinSource for Box<S> {
    fn bias(&self) -> Bias {
        (**self).bias()
    }

    fn draw(&mut self) -> Result<Flip, SourceError> {
        (**self).draw()
    }
}

/// Fair coin backed by a random number generator, one bit per flip.
#[derive(Debug, Clone)]
pub struct FairCoin<R> {
    rng: R,
    buffer: u64,
    available: u32,
}

impl<R: RngCore> FairCoin<R> {
    /// Uses `rng` as the bit supply. Bits are taken from `next_u64`, least
    /// significant first.
    pub fn from_rng(rng: R) -> Self {
        FairCoin {
            rng,
            buffer: 0,
            available: 0,
        }
    }

    /// Next flip; a fair coin never runs out.
    #[inline]
    pub fn next_flip(&mut self) -> Flip {
        if self.available == 0 {
            self.buffer = self.rng.next_u64();
            self.available = 64;
        }
        let bit = self.buffer & 1 == 1;
        self.buffer >>= 1;
        self.available -= 1;
        Flip::from_bit(bit)
    }
}

impl FairCoin<ChaCha8Rng> {
    /// Deterministic fair coin: ChaCha8 on stream 0.
    pub fn seeded(seed: u64) -> Self {
        Self::seeded_stream(seed, 0)
    }

    /// Deterministic fair coin on an independent ChaCha8 stream. Distinct
    /// streams under one seed do not overlap.
    pub fn seeded_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::from_rng(rng)
    }
}

impl<R: RngCore> CoinSource for FairCoin<R> {
    fn bias(&self) -> Bias {
        Ratio::new(1, 2)
    }

    #[inline]
    fn draw(&mut self) -> Result<Flip, SourceError> {
        Ok(self.next_flip())
    }
}

/// Exact (1/n)-coin simulated with fair flips.
///
/// Draws fair bits as the binary expansion of a uniform `U ∈ [0, 1)` and
/// compares them, bit by bit, against the expansion of `1/n` produced by long
/// division. The first differing bit decides: heads iff `U`'s bit is the
/// smaller one, i.e. `U < 1/n`. If the expansion of `1/n` terminates while
/// still tied, the rest of it is zeros and the answer is tails.
///
/// For `n = 1` long division yields `0.111…₂`, so every draw is heads. The
/// expected number of fair flips per draw is at most 2.
#[derive(Debug, Clone)]
pub struct InverseNCoin<S> {
    n: u64,
    fair: S,
}

impl<S: CoinSource> InverseNCoin<S> {
    /// A (1/n)-coin drawing from `fair`.
    pub fn new(n: u64, fair: S) -> Result<Self, ParamError> {
        if n == 0 {
            return Err(ParamError::Zero);
        }
        Ok(InverseNCoin { n, fair })
    }

    /// The fair source.
    pub fn fair(&self) -> &S {
        &self.fair
    }

    /// Releases the fair source.
    pub fn into_inner(self) -> S {
        self.fair
    }
}

impl<S: CoinSource> CoinSource for InverseNCoin<S> {
    fn bias(&self) -> Bias {
        Ratio::new(1, self.n)
    }

    fn draw(&mut self) -> Result<Flip, SourceError> {
        let n = u128::from(self.n);
        let mut remainder: u128 = 1;
        loop {
            remainder <<= 1;
            let target_bit = remainder >= n;
            if target_bit {
                remainder -= n;
            }
            let drawn_bit = self.fair.draw()?.bit();
            match (drawn_bit, target_bit) {
                (false, true) => return Ok(Flip::Heads),
                (true, false) => return Ok(Flip::Tails),
                _ if remainder == 0 => return Ok(Flip::Tails),
                _ => {}
            }
        }
    }
}

/// Invalid character in a flip script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("invalid flip symbol {symbol:?} at position {position}; expected H or T")]
pub struct ScriptError {
    /// Offending character.
    pub symbol: char,
    /// Character index in the input.
    pub position: usize,
}

/// Parses a flip script: `H`/`T` in either case, whitespace ignored.
pub fn parse_script(script: &str) -> Result<Vec<Flip>, ScriptError> {
    script
        .chars()
        .enumerate()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(position, symbol)| match symbol {
            'H' | 'h' => Ok(Flip::Heads),
            'T' | 't' => Ok(Flip::Tails),
            _ => Err(ScriptError { symbol, position }),
        })
        .collect()
}

/// Replays a fixed sequence of flips.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scripted {
    sequence: Vec<Flip>,
    cursor: usize,
    bias: Bias,
}

impl Scripted {
    /// Replays `sequence`, declaring `bias`.
    pub fn new(sequence: Vec<Flip>, bias: Bias) -> Self {
        Scripted {
            sequence,
            cursor: 0,
            bias,
        }
    }

    /// Parses `script` with [`parse_script`].
    pub fn from_script(script: &str, bias: Bias) -> Result<Self, ScriptError> {
        Ok(Self::new(parse_script(script)?, bias))
    }

    /// The full script.
    pub fn sequence(&self) -> &[Flip] {
        &self.sequence
    }

    /// Flips drawn so far.
    pub fn consumed(&self) -> usize {
        self.cursor
    }

    /// Flips left.
    pub fn remaining(&self) -> usize {
        self.sequence.len() - self.cursor
    }
}

impl CoinSource for Scripted {
    fn bias(&self) -> Bias {
        self.bias
    }

    fn draw(&mut self) -> Result<Flip, SourceError> {
        let flip = *self
            .sequence
            .get(self.cursor)
            .ok_or(SourceError::Exhausted { consumed: self.cursor })?;
        self.cursor += 1;
        Ok(flip)
    }
}

/// Counts the draws delegated to `inner`. Failed draws are not counted.
#[derive(Debug, Clone)]
pub struct Counting<S> {
    inner: S,
    count: u64,
}

impl<S> Counting<S> {
    /// Starts counting at zero.
    pub fn new(inner: S) -> Self {
        Counting { inner, count: 0 }
    }

    /// Successful draws so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// The wrapped source.
    pub fn inner(&self) -> &S {
        &self.inner
    }

    /// Releases the wrapped source.
    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: CoinSource> CoinSource for Counting<S> {
    fn bias(&self) -> Bias {
        self.inner.bias()
    }

    fn draw(&mut self) -> Result<Flip, SourceError> {
        let flip = self.inner.draw()?;
        self.count += 1;
        Ok(flip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_traits::{One, Zero};
    use proptest::prelude::*;
    use Flip::{Heads as H, Tails as T};

    fn draws<S: CoinSource>(s: &mut S, count: usize) -> Vec<Flip> {
        (0..count).map(|_| s.draw().unwrap()).collect()
    }

    #[test]
    fn seeded_fair_coin_is_reproducible() {
        let a = draws(&mut FairCoin::seeded(42), 1000);
        let b = draws(&mut FairCoin::seeded(42), 1000);
        assert_eq!(a, b);
        assert_ne!(a, draws(&mut FairCoin::seeded(43), 1000));
        assert_ne!(a, draws(&mut FairCoin::seeded_stream(42, 1), 1000));
        assert_eq!(FairCoin::seeded(42).bias(), Ratio::new(1, 2));
    }

    #[test]
    fn seeded_fair_coin_prefix_is_pinned() {
        // Guards the documented generator: ChaCha8, seed_from_u64, stream 0, LSB first.
        let first = ChaCha8Rng::seed_from_u64(42).next_u64();
        let expect: Vec<Flip> = (0..8).map(|i| Flip::from_bit(first >> i & 1 == 1)).collect();
        assert_eq!(draws(&mut FairCoin::seeded(42), 8), expect);
    }

    #[test]
    fn seeded_fair_coin_is_balanced() {
        let mut coin = FairCoin::seeded(7);
        let heads = (0..1_000_000).filter(|_| coin.next_flip() == H).count();
        let fraction = heads as f64 / 1e6;
        assert!((0.497..=0.503).contains(&fraction), "{fraction}");
    }

    #[test]
    fn scripted_replays_then_fails() {
        let mut s = Scripted::from_script("HT", Ratio::new(1, 2)).unwrap();
        assert_eq!(draws(&mut s, 2), vec![H, T]);
        assert_eq!(s.draw(), Err(SourceError::Exhausted { consumed: 2 }));
        assert_eq!(s.draw(), Err(SourceError::Exhausted { consumed: 2 }));

        let mut empty = Scripted::from_script("", Ratio::new(1, 2)).unwrap();
        assert_eq!(empty.draw(), Err(SourceError::Exhausted { consumed: 0 }));
    }

    #[test]
    fn script_format() {
        assert_eq!(parse_script("hT tH\n\tH").unwrap(), vec![H, T, T, H, H]);
        assert_eq!(parse_script("   ").unwrap(), vec![]);
        assert_eq!(
            parse_script("HTx"),
            Err(ScriptError { symbol: 'x', position: 2 })
        );
        assert_eq!(
            parse_script("H 1"),
            Err(ScriptError { symbol: '1', position: 2 })
        );
    }

    #[test]
    fn counting_counts_successes_only() {
        let mut c = Counting::new(Scripted::from_script("HHTHT", Ratio::new(1, 2)).unwrap());
        assert_eq!(c.count(), 0);
        draws(&mut c, 5);
        assert_eq!(c.count(), 5);
        assert!(c.draw().is_err());
        assert_eq!(c.count(), 5);
    }

    #[test]
    fn inverse_coin_rejects_zero() {
        assert_eq!(InverseNCoin::new(0, FairCoin::seeded(1)).unwrap_err(), ParamError::Zero);
    }

    #[test]
    fn inverse_coin_for_one_is_always_heads() {
        let mut coin = InverseNCoin::new(1, Counting::new(FairCoin::seeded(3))).unwrap();
        assert_eq!(coin.bias(), Ratio::one());
        assert!(draws(&mut coin, 1000).iter().all(|&f| f == H));
        // A tails bit ends each draw; a heads bit continues.
        let mut scripted = InverseNCoin::new(1, Scripted::from_script("HHT T", Ratio::new(1, 2)).unwrap()).unwrap();
        assert_eq!(scripted.draw(), Ok(H));
        assert_eq!(scripted.fair().consumed(), 3);
        assert_eq!(scripted.draw(), Ok(H));
        assert_eq!(scripted.draw(), Err(SourceError::Exhausted { consumed: 4 }));
    }

    #[test]
    fn inverse_coin_for_two_uses_one_flip() {
        let mut coin = InverseNCoin::new(2, Scripted::from_script("THHT", Ratio::new(1, 2)).unwrap()).unwrap();
        assert_eq!(draws(&mut coin, 4), vec![H, T, T, H]);
        assert_eq!(coin.fair().consumed(), 4);
    }

    #[test]
    fn inverse_coin_for_three_follows_expansion() {
        // 1/3 = 0.010101…₂
        let run = |script: &str| {
            let mut c = InverseNCoin::new(3, Scripted::from_script(script, Ratio::new(1, 2)).unwrap()).unwrap();
            (c.draw().unwrap(), c.fair().consumed())
        };
        assert_eq!(run("H"), (T, 1));
        assert_eq!(run("TT"), (H, 2));
        assert_eq!(run("THH"), (T, 3));
        assert_eq!(run("THTT"), (H, 4));
    }

    /// Exact P(heads) of the comparison process, from its Markov chain over
    /// long-division remainders. Each state `r` (meaning the rest of the
    /// target expansion is `r/n`) has `P_r = c_r + P_{next(r)}/2`, where
    /// `c_r = 1/2` when the target bit is 1 and 0 otherwise; a remainder of
    /// zero ends the chain with tails. The chain is eventually periodic, so
    /// the series sums in closed form over the tail cycle.
    fn chain_heads_probability(n: u64) -> Ratio<u128> {
        let n = n as u128;
        let half = Ratio::new(1u128, 2);
        let mut remainders = vec![];
        let mut contributions = vec![];
        let mut r = 1u128;
        let cycle_start = loop {
            if let Some(pos) = remainders.iter().position(|&x| x == r) {
                break Some(pos);
            }
            remainders.push(r);
            let doubled = r * 2;
            let bit = doubled >= n;
            contributions.push(if bit { half } else { Ratio::zero() });
            r = if bit { doubled - n } else { doubled };
            if r == 0 {
                break None;
            }
        };
        // Value at state index i: sum of c_j / 2^(j-i) over the path from i.
        let prefix_sum = |from: usize, to: usize| {
            let mut total = Ratio::zero();
            let mut scale = Ratio::one();
            for c in &contributions[from..to] {
                total += *c * scale;
                scale *= half;
            }
            (total, scale)
        };
        match cycle_start {
            None => prefix_sum(0, contributions.len()).0,
            Some(start) => {
                let (head, head_scale) = prefix_sum(0, start);
                let (cycle, cycle_scale) = prefix_sum(start, contributions.len());
                let cycle_value = cycle / (Ratio::one() - cycle_scale);
                head + head_scale * cycle_value
            }
        }
    }

    #[test]
    fn inverse_coin_chain_oracle_gives_exact_bias() {
        assert_eq!(chain_heads_probability(3), Ratio::new(1, 3));
        for n in 1..=64u64 {
            assert_eq!(chain_heads_probability(n), Ratio::new(1, n as u128), "n = {n}");
        }
    }

    /// Exhaustively runs the coin on every fair prefix of length `depth`.
    /// Resolved prefixes contribute exact mass; the undecided remainder is at
    /// most `2^-depth`.
    fn enumerate_inverse_coin(n: u64, depth: u32) -> (Ratio<u128>, Ratio<u128>) {
        let mut heads = Ratio::zero();
        let mut undecided = Ratio::zero();
        for bits in 0..1u64 << depth {
            let flips: Vec<Flip> = (0..depth).map(|i| Flip::from_bit(bits >> i & 1 == 1)).collect();
            let mut coin = InverseNCoin::new(n, Scripted::new(flips, Ratio::new(1, 2))).unwrap();
            let weight = Ratio::new(1u128, 1u128 << depth);
            match coin.draw() {
                Ok(H) => heads += weight,
                Ok(T) => {}
                Err(_) => undecided += weight,
            }
        }
        (heads, undecided)
    }

    #[test]
    fn inverse_coin_enumeration_brackets_exact_bias() {
        for n in 1..=40u64 {
            let (heads, undecided) = enumerate_inverse_coin(n, 14);
            let target = chain_heads_probability(n);
            assert!(heads <= target && target <= heads + undecided, "n = {n}");
            assert!(undecided <= Ratio::new(1, 1 << 13), "n = {n}");
        }
    }

    #[test]
    fn inverse_coin_uses_at_most_two_flips_on_average() {
        for n in [1u64, 2, 3, 5, 6, 7, 100, 1023, 1 << 31] {
            let mut coin = InverseNCoin::new(n, Counting::new(FairCoin::seeded(n))).unwrap();
            let draws = 100_000;
            for _ in 0..draws {
                coin.draw().unwrap();
            }
            let mean = coin.fair().count() as f64 / draws as f64;
            assert!(mean <= 2.05, "n = {n}: {mean}");
        }
    }

    proptest! {
        #[test]
        fn script_round_trips(flips in proptest::collection::vec(any::<bool>().prop_map(Flip::from_bit), 0..200)) {
            let text: alloc::string::String = flips.iter().map(|f| f.symbol()).collect();
            prop_assert_eq!(parse_script(&text).unwrap(), flips.clone());
            let mut s = Scripted::new(flips.clone(), Ratio::new(1, 2));
            prop_assert_eq!(draws(&mut s, flips.len()), flips);
            prop_assert_eq!(s.remaining(), 0);
            prop_assert!(s.draw().is_err());
        }
    }
}
