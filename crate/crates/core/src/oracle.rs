//! Exact output distributions by exhaustive enumeration.
//!
//! Every weight is an arbitrary-precision rational, so the results are exact
//! and uniformity is checked with rational equality, never a tolerance.
//!
//! Cost model for an `n`-sided die with `k = ⌊log₂ n⌋`:
//!
//! | query                                   | rule evaluations   | default bound |
//! |-----------------------------------------|--------------------|---------------|
//! | [`Oracle::scaled_coin_distribution`]    | `2 · 2^(k+1)`      | `n ≤ 4096`    |
//! | [`Oracle::die_distribution`]            | `2 · 2^(k+1) + 2 · 2^(2k)` | `n ≤ 1024` |
//! | [`Oracle::joint_die_distribution`]      | `2 · 2^(3k+1)` full rolls | `n ≤ 64` |
//!
//! The factored enumeration treats the first-stage and second-stage flip
//! groups separately, which is valid because they are independent; the joint
//! enumeration replays every complete transcript through [`Die::roll_with`]
//! and exists to check that factoring.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::kernel::{Die, Flip, Rule, TwoCoinRule};
use crate::params::{split_coefficients, DieParams, ParamError};
use crate::sources::{Bias, Scripted};

/// Largest `n` each enumeration accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBound {
    /// Bound for the first-stage coin distribution.
    pub scaled_coin_max_n: u64,
    /// Bound for the factored die distribution.
    pub die_max_n: u64,
    /// Bound for the joint die distribution.
    pub joint_max_n: u64,
}

impl Default for EnumerationBound {
    fn default() -> Self {
        EnumerationBound {
            scaled_coin_max_n: 4096,
            die_max_n: 1024,
            joint_max_n: 64,
        }
    }
}

/// Oracle failures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    /// Bad die size.
    #[error(transparent)]
    Params(#[from] ParamError),
    /// Enumeration would exceed the configured bound.
    #[error("n = {n} exceeds the enumeration bound {max}")]
    TooLarge {
        /// Requested size.
        n: u64,
        /// Configured bound.
        max: u64,
    },
}

/// Exact distribution of the simulated `(2^k/n)`-coin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoinDistribution {
    /// P(heads).
    pub heads: BigRational,
    /// P(tails).
    pub tails: BigRational,
}

impl CoinDistribution {
    /// Probability of `flip`.
    pub fn probability(&self, flip: Flip) -> &BigRational {
        match flip {
            Flip::Heads => &self.heads,
            Flip::Tails => &self.tails,
        }
    }
}

/// Exact distribution over die values. Values with probability zero are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExactDistribution {
    entries: BTreeMap<u64, BigRational>,
}

impl ExactDistribution {
    /// Probability of `value`; zero when absent.
    pub fn probability(&self, value: u64) -> BigRational {
        self.entries.get(&value).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonzero entries in ascending value order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.entries.iter().map(|(v, p)| (*v, p))
    }

    /// Number of values with nonzero probability.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True if no value has positive probability.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all probabilities.
    pub fn total(&self) -> BigRational {
        self.entries.values().fold(BigRational::zero(), |acc, p| acc + p)
    }

    fn add(&mut self, value: u64, mass: BigRational) {
        if mass.is_zero() {
            return;
        }
        let slot = self.entries.entry(value).or_insert_with(BigRational::zero);
        *slot += mass;
    }
}

/// Result of a uniformity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Every value in `[0, n)` has probability exactly `1/n`.
    Pass,
    /// The smallest value whose probability is not `1/n` (or, past `n − 1`,
    /// not zero).
    Fail {
        /// Offending value.
        value: u64,
        /// Its exact probability.
        probability: BigRational,
    },
}

impl Verdict {
    /// True for [`Verdict::Pass`].
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

fn ratio(numer: u64, denom: u64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

fn pow2(exp: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << exp as usize)
}

/// Weight of each (1/n)-coin outcome.
fn biased_weights(n: u64) -> [(Flip, BigRational); 2] {
    [(Flip::Heads, ratio(1, n)), (Flip::Tails, ratio(n - 1, n))]
}

/// `(1/n)(a/2^(k+1)) + ((n−1)/n)(b/2^(k+1))`, the first-stage heads
/// probability written directly in terms of the split coefficients.
pub fn scaled_coin_closed_form(n: u64) -> Result<BigRational, ParamError> {
    let params = DieParams::new(n)?;
    let c = split_coefficients(&params);
    let word_space = 1u64 << (params.k() + 1);
    Ok(ratio(1, n) * ratio(c.a, word_space) + ratio(n - 1, n) * ratio(c.b, word_space))
}

/// Enumeration engine over a decision [`Rule`].
#[derive(Debug, Clone, Default)]
pub struct Oracle<R = TwoCoinRule> {
    rule: R,
    bound: EnumerationBound,
}

impl Oracle<TwoCoinRule> {
    /// Oracle for the two-coin construction with default bounds.
    pub fn new() -> Self {
        Self::default()
    }
}

impl<R: Rule> Oracle<R> {
    /// Oracle for an arbitrary rule with default bounds.
    pub fn with_rule(rule: R) -> Self {
        Oracle {
            rule,
            bound: EnumerationBound::default(),
        }
    }

    /// Replaces the enumeration bounds.
    pub fn with_bound(mut self, bound: EnumerationBound) -> Self {
        self.bound = bound;
        self
    }

    /// Current bounds.
    pub fn bound(&self) -> &EnumerationBound {
        &self.bound
    }

    fn die(&self, n: u64, max: u64) -> Result<Die, OracleError> {
        let params = DieParams::new(n)?;
        if n > max {
            return Err(OracleError::TooLarge { n, max });
        }
        Ok(Die::from_params(params))
    }

    /// Exact distribution of the first-stage coin: both (1/n)-coin outcomes
    /// against all `2^(k+1)` fair words.
    pub fn scaled_coin_distribution(&self, n: u64) -> Result<CoinDistribution, OracleError> {
        let die = self.die(n, self.bound.scaled_coin_max_n)?;
        Ok(self.scaled_coin(&die))
    }

    fn scaled_coin(&self, die: &Die) -> CoinDistribution {
        let words = 1u64 << die.params().scaled_stage_flips();
        let mut heads = BigRational::zero();
        let mut tails = BigRational::zero();
        for (biased, weight) in biased_weights(die.params().n()) {
            let heads_words = (0..words)
                .filter(|&d| self.rule.scaled_coin(biased, d, die.coefficients()) == Flip::Heads)
                .count() as u64;
            heads += &weight * ratio(heads_words, words);
            tails += weight * ratio(words - heads_words, words);
        }
        CoinDistribution { heads, tails }
    }

    /// Exact die distribution by factored enumeration: the first-stage coin
    /// distribution, then all `2^(2k)` second-stage words against each
    /// scaled outcome.
    pub fn die_distribution(&self, n: u64) -> Result<ExactDistribution, OracleError> {
        let die = self.die(n, self.bound.die_max_n)?;
        let params = *die.params();
        let coin = self.scaled_coin(&die);
        let span = params.low_span();
        let words = span * span;

        let mut dist = ExactDistribution::default();
        for scaled in [Flip::Heads, Flip::Tails] {
            let mut counts = vec![0u64; params.n() as usize];
            let mut stray: BTreeMap<u64, u64> = BTreeMap::new();
            for d in 0..span {
                for d_prime in 0..span {
                    let value = self.rule.die_value(scaled, d, d_prime, &params);
                    match counts.get_mut(value as usize) {
                        Some(c) => *c += 1,
                        None => *stray.entry(value).or_insert(0) += 1,
                    }
                }
            }
            let weight = coin.probability(scaled);
            let tallies = counts
                .into_iter()
                .enumerate()
                .map(|(v, c)| (v as u64, c))
                .chain(stray);
            for (value, count) in tallies {
                if count > 0 {
                    dist.add(value, weight * ratio(count, words));
                }
            }
        }
        Ok(dist)
    }

    /// Exact die distribution by replaying all `2 · 2^(3k+1)` complete
    /// transcripts through scripted sources.
    pub fn joint_die_distribution(&self, n: u64) -> Result<ExactDistribution, OracleError> {
        let die = self.die(n, self.bound.joint_max_n)?;
        let budget = die.params().fair_budget() as u32;
        let outcomes = 1u64 << budget;
        let biased_bias = Bias::new(1, n);
        let fair_bias = Bias::new(1, 2);

        let mut dist = ExactDistribution::default();
        for (biased, weight) in biased_weights(n) {
            let mut tallies: BTreeMap<u64, u64> = BTreeMap::new();
            for word in 0..outcomes {
                let fair: Vec<Flip> = (0..budget).map(|i| Flip::from_bit(word >> i & 1 == 1)).collect();
                let mut biased_source = Scripted::new(vec![biased], biased_bias);
                let mut fair_source = Scripted::new(fair, fair_bias);
                let roll = die
                    .roll_with(&self.rule, &mut biased_source, &mut fair_source)
                    .expect("a complete transcript always yields a roll");
                *tallies.entry(roll.value).or_insert(0) += 1;
            }
            for (value, count) in tallies {
                dist.add(value, &weight * ratio(count, outcomes));
            }
        }
        Ok(dist)
    }

    /// Checks that every value in `[0, n)` has probability exactly `1/n`.
    pub fn verify_uniform(&self, n: u64) -> Result<Verdict, OracleError> {
        let dist = self.die_distribution(n)?;
        Ok(uniformity_verdict(n, &dist))
    }
}

/// Compares `dist` against the uniform distribution on `[0, n)`.
pub fn uniformity_verdict(n: u64, dist: &ExactDistribution) -> Verdict {
    let target = ratio(1, n);
    for value in 0..n {
        let probability = dist.probability(value);
        if probability != target {
            return Verdict::Fail { value, probability };
        }
    }
    match dist.iter().find(|(v, _)| *v >= n) {
        Some((value, p)) => Verdict::Fail {
            value,
            probability: p.clone(),
        },
        None => Verdict::Pass,
    }
}

/// [`Oracle::scaled_coin_distribution`] for the two-coin construction.
pub fn exact_scaled_coin_distribution(n: u64) -> Result<CoinDistribution, OracleError> {
    Oracle::new().scaled_coin_distribution(n)
}

/// [`Oracle::die_distribution`] for the two-coin construction.
pub fn exact_die_distribution(n: u64) -> Result<ExactDistribution, OracleError> {
    Oracle::new().die_distribution(n)
}

/// [`Oracle::verify_uniform`] for the two-coin construction.
pub fn verify_uniform(n: u64) -> Result<Verdict, OracleError> {
    Oracle::new().verify_uniform(n)
}

/// `2^k / n` for an `n`-sided die.
pub fn scaled_coin_target(params: &DieParams) -> BigRational {
    pow2(params.k()) / BigRational::from_integer(BigInt::from(params.n()))
}
