//! The two simulation stages and their composition into a full roll.
//!
//! A roll draws, in this order: one flip of the (1/n)-coin, `k + 1` fair flips
//! for the scaled coin, then `2k` fair flips for the die value (the first `k`
//! form `d`, the last `k` form `d′`). Every flip is drawn even when the outcome
//! is already decided, so each roll consumes exactly `1` biased and `3k + 1`
//! fair flips.
//!
//! Flip `i` of a block carries weight `2^(i−1)`: the first flip is the least
//! significant bit.

use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::params::{split_coefficients, DieParams, ParamError, SplitCoefficients};
use crate::sources::{Bias, CoinSource, SourceError};

/// Outcome of one coin flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flip {
    /// Heads, bit value 1.
    Heads,
    /// Tails, bit value 0.
    Tails,
}

impl Flip {
    /// `Heads` for `true`.
    pub fn from_bit(bit: bool) -> Flip {
        if bit {
            Flip::Heads
        } else {
            Flip::Tails
        }
    }

    /// `true` for heads.
    pub fn bit(self) -> bool {
        self == Flip::Heads
    }

    /// `'H'` or `'T'`.
    pub fn symbol(self) -> char {
        match self {
            Flip::Heads => 'H',
            Flip::Tails => 'T',
        }
    }
}

impl fmt::Display for Flip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Integer encoded by a block of flips, one bit per flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitWord {
    /// Encoded value, always below `2^width`.
    pub value: u64,
    /// Number of flips encoded.
    pub width: u32,
}

/// Reads `flips` as a binary number, first flip least significant.
///
/// # Panics
///
/// If more than 64 flips are given.
pub fn bits_to_word(flips: &[Flip]) -> BitWord {
    assert!(flips.len() <= 64, "bit word wider than 64 flips");
    let value = flips
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, f)| acc | (u64::from(f.bit()) << i));
    BitWord {
        value,
        width: flips.len() as u32,
    }
}

/// Which output the second stage selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Scaled coin tails: output `d`.
    Low,
    /// Scaled coin heads and `d ≥ m`: output `d′`.
    Redraw,
    /// Scaled coin heads and `d < m`: output `2^k + d`.
    High,
}

impl Branch {
    /// Short label used in traces.
    pub fn label(self) -> &'static str {
        match self {
            Branch::Low => "d",
            Branch::Redraw => "d'",
            Branch::High => "2^k+d",
        }
    }
}

/// First stage on an already-encoded word `d < 2^(k+1)`.
#[inline]
pub fn scaled_coin_from_word(biased: Flip, d: u64, coeffs: &SplitCoefficients) -> Flip {
    let threshold = match biased {
        Flip::Heads => coeffs.a,
        Flip::Tails => coeffs.b,
    };
    Flip::from_bit(d < threshold)
}

/// Second-stage branch selection on an already-encoded `d < 2^k`.
#[inline]
pub fn select_branch(scaled: Flip, d: u64, params: &DieParams) -> Branch {
    match scaled {
        Flip::Tails => Branch::Low,
        Flip::Heads if d >= params.m() => Branch::Redraw,
        Flip::Heads => Branch::High,
    }
}

/// Second stage on already-encoded words `d, d′ < 2^k`.
#[inline]
pub fn die_from_words(scaled: Flip, d: u64, d_prime: u64, params: &DieParams) -> u64 {
    branch_value(select_branch(scaled, d, params), d, d_prime, params)
}

#[inline]
fn branch_value(branch: Branch, d: u64, d_prime: u64, params: &DieParams) -> u64 {
    match branch {
        Branch::Low => d,
        Branch::Redraw => d_prime,
        Branch::High => params.low_span() + d,
    }
}

/// Simulates one flip of the `(2^k/n)`-coin.
///
/// # Panics
///
/// If `fair_flips` does not hold exactly `k + 1` flips.
pub fn simulate_scaled_coin(
    biased: Flip,
    fair_flips: &[Flip],
    params: &DieParams,
    coeffs: &SplitCoefficients,
) -> Flip {
    assert_eq!(
        fair_flips.len(),
        params.scaled_stage_flips(),
        "scaled coin for n = {} needs exactly k + 1 fair flips",
        params.n()
    );
    scaled_coin_from_word(biased, bits_to_word(fair_flips).value, coeffs)
}

/// Turns a scaled-coin flip and `2k` fair flips into a value in `[0, n)`.
///
/// # Panics
///
/// If `fair_flips` does not hold exactly `2k` flips.
pub fn simulate_die_given_scaled(scaled: Flip, fair_flips: &[Flip], params: &DieParams) -> u64 {
    assert_eq!(
        fair_flips.len(),
        params.die_stage_flips(),
        "die stage for n = {} needs exactly 2k fair flips",
        params.n()
    );
    let (low, high) = fair_flips.split_at(params.k() as usize);
    die_from_words(scaled, bits_to_word(low).value, bits_to_word(high).value, params)
}

/// The decision rules of both stages.
///
/// [`TwoCoinRule`] is the construction itself. The trait exists so the
/// oracle can be pointed at altered rules and shown to reject them.
pub trait Rule {
    /// First stage: scaled-coin outcome for biased flip `biased` and word `d < 2^(k+1)`.
    fn scaled_coin(&self, biased: Flip, d: u64, coeffs: &SplitCoefficients) -> Flip;

    /// Second stage branch for scaled outcome `scaled` and `d < 2^k`.
    fn branch(&self, scaled: Flip, d: u64, params: &DieParams) -> Branch;

    /// Second stage output.
    #[inline]
    fn die_value(&self, scaled: Flip, d: u64, d_prime: u64, params: &DieParams) -> u64 {
        branch_value(self.branch(scaled, d, params), d, d_prime, params)
    }
}

/// The two-coin construction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TwoCoinRule;

impl Rule for TwoCoinRule {
    #[inline]
    fn scaled_coin(&self, biased: Flip, d: u64, coeffs: &SplitCoefficients) -> Flip {
        scaled_coin_from_word(biased, d, coeffs)
    }

    #[inline]
    fn branch(&self, scaled: Flip, d: u64, params: &DieParams) -> Branch {
        select_branch(scaled, d, params)
    }
}

impl<R: Rule + ?Sized> Rule for &R {
    fn scaled_coin(&self, biased: Flip, d: u64, coeffs: &SplitCoefficients) -> Flip {
        (**self).scaled_coin(biased, d, coeffs)
    }

    fn branch(&self, scaled: Flip, d: u64, params: &DieParams) -> Branch {
        (**self).branch(scaled, d, params)
    }
}

/// Every flip consumed by one roll, in draw order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FlipTranscript {
    /// Flips of the (1/n)-coin.
    pub biased: Vec<Flip>,
    /// Flips of the fair coin.
    pub fair: Vec<Flip>,
}

/// Intermediate values of one roll.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RollTrace {
    /// The (1/n)-coin flip.
    pub biased: Flip,
    /// First-stage word.
    pub scaled_word: BitWord,
    /// Outcome of the simulated `(2^k/n)`-coin.
    pub scaled: Flip,
    /// Second-stage word `d` from the first `k` die flips.
    pub d: BitWord,
    /// Second-stage word `d′` from the last `k` die flips.
    pub d_prime: BitWord,
    /// Which output rule applied.
    pub branch: Branch,
    /// The die value.
    pub value: u64,
}

/// Result of a roll.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Roll {
    /// Value in `[0, n)`.
    pub value: u64,
    /// Flips consumed.
    pub transcript: FlipTranscript,
    /// Intermediate values.
    pub trace: RollTrace,
}

/// Which of the two sources a roll error concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceRole {
    /// The (1/n)-coin.
    Biased,
    /// The fair coin.
    Fair,
}

impl fmt::Display for SourceRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceRole::Biased => "biased",
            SourceRole::Fair => "fair",
        })
    }
}

/// Failures while rolling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RollError {
    /// Bad die size.
    #[error(transparent)]
    Params(#[from] ParamError),
    /// A source declared the wrong bias.
    #[error("{role} source declares bias {declared}, expected {expected}")]
    BiasMismatch {
        /// Offending source.
        role: SourceRole,
        /// Bias it declared.
        declared: Bias,
        /// Bias the roll requires.
        expected: Bias,
    },
    /// A source failed to produce a flip.
    #[error("{role} source: {source}")]
    Source {
        /// Offending source.
        role: SourceRole,
        /// Underlying failure.
        source: SourceError,
    },
}

/// An `n`-sided die with its split coefficients precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Die {
    params: DieParams,
    coeffs: SplitCoefficients,
}

impl Die {
    /// Builds the die for `n` sides.
    pub fn new(n: u64) -> Result<Die, ParamError> {
        Ok(Die::from_params(DieParams::new(n)?))
    }

    /// Builds the die for validated parameters.
    pub fn from_params(params: DieParams) -> Die {
        Die {
            params,
            coeffs: split_coefficients(&params),
        }
    }

    /// Die parameters.
    pub fn params(&self) -> &DieParams {
        &self.params
    }

    /// Split coefficients.
    pub fn coefficients(&self) -> &SplitCoefficients {
        &self.coeffs
    }

    /// Rolls once, drawing from `biased` (bias `1/n`) and `fair` (bias `1/2`).
    pub fn roll<B, F>(&self, biased: &mut B, fair: &mut F) -> Result<Roll, RollError>
    where
        B: CoinSource + ?Sized,
        F: CoinSource + ?Sized,
    {
        self.roll_with(&TwoCoinRule, biased, fair)
    }

    /// [`Die::roll`] under an arbitrary rule.
    pub fn roll_with<R, B, F>(&self, rule: &R, biased: &mut B, fair: &mut F) -> Result<Roll, RollError>
    where
        R: Rule + ?Sized,
        B: CoinSource + ?Sized,
        F: CoinSource + ?Sized,
    {
        check_bias(SourceRole::Biased, biased.bias(), Ratio::new(1, self.params.n()))?;
        check_bias(SourceRole::Fair, fair.bias(), Ratio::new(1, 2))?;

        let first = biased
            .draw()
            .map_err(|source| RollError::Source { role: SourceRole::Biased, source })?;
        let mut fair_flips = Vec::with_capacity(self.params.fair_budget());
        for _ in 0..self.params.fair_budget() {
            let flip = fair
                .draw()
                .map_err(|source| RollError::Source { role: SourceRole::Fair, source })?;
            fair_flips.push(flip);
        }

        let trace = self.evaluate_with(rule, first, &fair_flips);
        Ok(Roll {
            value: trace.value,
            transcript: FlipTranscript {
                biased: alloc::vec![first],
                fair: fair_flips,
            },
            trace,
        })
    }

    /// Runs both stages on a complete set of flips.
    ///
    /// # Panics
    ///
    /// If `fair` does not hold exactly `3k + 1` flips.
    pub fn evaluate(&self, biased: Flip, fair: &[Flip]) -> RollTrace {
        self.evaluate_with(&TwoCoinRule, biased, fair)
    }

    /// [`Die::evaluate`] under an arbitrary rule.
    pub fn evaluate_with<R: Rule + ?Sized>(&self, rule: &R, biased: Flip, fair: &[Flip]) -> RollTrace {
        let p = &self.params;
        assert_eq!(
            fair.len(),
            p.fair_budget(),
            "a roll of a {}-sided die needs exactly 3k + 1 fair flips",
            p.n()
        );
        let (stage_one, stage_two) = fair.split_at(p.scaled_stage_flips());
        let (low, high) = stage_two.split_at(p.k() as usize);

        let scaled_word = bits_to_word(stage_one);
        let scaled = rule.scaled_coin(biased, scaled_word.value, &self.coeffs);
        let d = bits_to_word(low);
        let d_prime = bits_to_word(high);
        let branch = rule.branch(scaled, d.value, p);
        RollTrace {
            biased,
            scaled_word,
            scaled,
            d,
            d_prime,
            branch,
            value: rule.die_value(scaled, d.value, d_prime.value, p),
        }
    }

    /// Recomputes the value of a recorded roll.
    ///
    /// # Panics
    ///
    /// If the transcript does not hold exactly one biased and `3k + 1` fair flips.
    pub fn replay(&self, transcript: &FlipTranscript) -> u64 {
        assert_eq!(transcript.biased.len(), 1, "a roll consumes exactly one biased flip");
        self.evaluate(transcript.biased[0], &transcript.fair).value
    }
}

fn check_bias(role: SourceRole, declared: Bias, expected: Bias) -> Result<(), RollError> {
    if declared == expected {
        Ok(())
    } else {
        Err(RollError::BiasMismatch { role, declared, expected })
    }
}

/// Rolls an `n`-sided die once.
pub fn roll<B, F>(n: u64, biased: &mut B, fair: &mut F) -> Result<Roll, RollError>
where
    B: CoinSource + ?Sized,
    F: CoinSource + ?Sized,
{
    Die::new(n)?.roll(biased, fair)
}
