//! Chi-square uniformity checks and flip-budget benchmarks.
//!
//! Seeded runs draw from independent ChaCha8 streams of one seed:
//! [`KERNEL_STREAM`] feeds the die's fair flips, [`COIN_STREAM`] feeds the
//! simulated (1/n)-coin and [`BASELINE_STREAM`] feeds the rejection sampler.

use statrs::function::gamma::gamma_ur;
use thiserror::Error;
use twocoin_core::kernel::{bits_to_word, Die, RollError};
use twocoin_core::params::{DieParams, ParamError};
use twocoin_core::sources::{CoinSource, Counting, FairCoin, InverseNCoin, SourceError};

/// ChaCha8 stream for the fair flips of the die.
pub const KERNEL_STREAM: u64 = 0;
/// ChaCha8 stream behind the simulated (1/n)-coin.
pub const COIN_STREAM: u64 = 1;
/// ChaCha8 stream for the rejection baseline.
pub const BASELINE_STREAM: u64 = 2;

/// Expected count per cell must be at least this for a chi-square run.
pub const MIN_SAMPLES_PER_SIDE: u64 = 10;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("{samples} samples is too few for a {n}-sided die; need at least {min}")]
    TooFewSamples { n: u64, samples: u64, min: u64 },
    #[error("at least one sample is required")]
    NoSamples,
    #[error(transparent)]
    Roll(#[from] RollError),
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// Goodness of fit of observed die values against the uniform distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareReport {
    pub n: u64,
    pub samples: u64,
    pub counts: Vec<u64>,
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    pub p_value: f64,
}

impl ChiSquareReport {
    /// Builds the report for `counts`, one cell per die value.
    pub fn from_counts(counts: Vec<u64>) -> Self {
        let statistic = chi_square_statistic(&counts);
        let degrees_of_freedom = counts.len().saturating_sub(1) as u64;
        ChiSquareReport {
            n: counts.len() as u64,
            samples: counts.iter().sum(),
            p_value: chi_square_p_value(statistic, degrees_of_freedom),
            statistic,
            degrees_of_freedom,
            counts,
        }
    }

    /// Expected count per cell.
    pub fn expected(&self) -> f64 {
        self.samples as f64 / self.n as f64
    }
}

/// Pearson's statistic against equal expected counts.
pub fn chi_square_statistic(counts: &[u64]) -> f64 {
    if counts.is_empty() {
        return 0.0;
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    if expected == 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .map(|&c| {
            let diff = c as f64 - expected;
            diff * diff / expected
        })
        .sum()
}

/// Upper tail probability `Q(df/2, statistic/2)`. A single cell has no
/// freedom and always gives 1.
pub fn chi_square_p_value(statistic: f64, degrees_of_freedom: u64) -> f64 {
    if degrees_of_freedom == 0 || statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(degrees_of_freedom as f64 / 2.0, statistic / 2.0)
}

fn check_samples(n: u64, samples: u64) -> Result<(), StatsError> {
    let min = n.saturating_mul(MIN_SAMPLES_PER_SIDE);
    if samples < min {
        return Err(StatsError::TooFewSamples { n, samples, min });
    }
    Ok(())
}

/// Rolls `samples` times with a seeded fair coin and a simulated (1/n)-coin
/// and tests the counts for uniformity.
pub fn chi_square_uniformity(n: u64, samples: u64, seed: u64) -> Result<ChiSquareReport, StatsError> {
    let die = Die::new(n)?;
    check_samples(n, samples)?;
    let mut fair = FairCoin::seeded_stream(seed, KERNEL_STREAM);
    let mut biased = InverseNCoin::new(n, FairCoin::seeded_stream(seed, COIN_STREAM))?;
    let mut counts = vec![0u64; n as usize];
    for _ in 0..samples {
        let roll = die.roll(&mut biased, &mut fair)?;
        counts[roll.value as usize] += 1;
    }
    Ok(ChiSquareReport::from_counts(counts))
}

/// Fair-coin-only sampler: draws `k + 1` bits until the word is below `n`.
/// Returns the value and the number of fair flips consumed.
pub fn rejection_baseline_roll<S>(n: u64, fair: &mut S) -> Result<(u64, u64), StatsError>
where
    S: CoinSource + ?Sized,
{
    let params = DieParams::new(n)?;
    let width = params.scaled_stage_flips();
    let mut block = Vec::with_capacity(width);
    let mut consumed = 0u64;
    loop {
        block.clear();
        for _ in 0..width {
            block.push(fair.draw()?);
        }
        consumed += width as u64;
        let word = bits_to_word(&block).value;
        if word < n {
            return Ok((word, consumed));
        }
    }
}

/// Expected fair flips of [`rejection_baseline_roll`]: `(k + 1)·2^(k+1)/n`.
pub fn rejection_expected_flips(params: &DieParams) -> f64 {
    let width = params.scaled_stage_flips() as f64;
    width * (1u64 << params.scaled_stage_flips()) as f64 / params.n() as f64
}

/// Chi-square check of the rejection baseline.
pub fn rejection_chi_square(n: u64, samples: u64, seed: u64) -> Result<ChiSquareReport, StatsError> {
    DieParams::new(n)?;
    check_samples(n, samples)?;
    let mut fair = FairCoin::seeded_stream(seed, BASELINE_STREAM);
    let mut counts = vec![0u64; n as usize];
    for _ in 0..samples {
        let (value, _) = rejection_baseline_roll(n, &mut fair)?;
        counts[value as usize] += 1;
    }
    Ok(ChiSquareReport::from_counts(counts))
}

/// How a benchmark row obtained its randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// One (1/n)-coin flip plus `3k + 1` fair flips.
    TwoCoin,
    /// The same, with the (1/n)-coin itself simulated from fair flips.
    TwoCoinSimulatedCoin,
    /// Fair-coin rejection sampling.
    Rejection,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::TwoCoin => "two-coin",
            Method::TwoCoinSimulatedCoin => "two-coin+simulated-coin",
            Method::Rejection => "rejection",
        }
    }
}

/// Per-roll randomness consumption of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport {
    pub n: u64,
    pub k: u32,
    pub method: Method,
    pub samples: u64,
    /// Mean (1/n)-coin flips per roll.
    pub biased_per_roll: f64,
    /// Mean fair flips per roll drawn by the sampler itself.
    pub fair_per_roll: f64,
    pub fair_min: u64,
    pub fair_max: u64,
    pub fair_variance: f64,
    /// Mean fair flips per roll spent simulating the (1/n)-coin, when it is simulated.
    pub coin_fair_per_roll: Option<f64>,
}

impl BudgetReport {
    /// All fair flips per roll, including any spent on the (1/n)-coin.
    pub fn total_fair_per_roll(&self) -> f64 {
        self.fair_per_roll + self.coin_fair_per_roll.unwrap_or(0.0)
    }
}

#[derive(Default)]
struct Tally {
    rolls: u64,
    sum: u64,
    sum_sq: u128,
    min: u64,
    max: u64,
}

impl Tally {
    fn push(&mut self, x: u64) {
        if self.rolls == 0 {
            self.min = x;
            self.max = x;
        }
        self.rolls += 1;
        self.sum += x;
        self.sum_sq += u128::from(x) * u128::from(x);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.rolls as f64
    }

    fn variance(&self) -> f64 {
        if self.min == self.max {
            return 0.0;
        }
        let mean = self.mean();
        (self.sum_sq as f64 / self.rolls as f64 - mean * mean).max(0.0)
    }
}

/// Measures flips per roll for the two-coin construction (with a physical and
/// a simulated (1/n)-coin) and for the rejection baseline.
pub fn benchmark_budgets(n: u64, samples: u64, seed: u64) -> Result<Vec<BudgetReport>, StatsError> {
    let die = Die::new(n)?;
    let params = *die.params();
    if samples == 0 {
        return Err(StatsError::NoSamples);
    }

    let mut fair = Counting::new(FairCoin::seeded_stream(seed, KERNEL_STREAM));
    let mut biased = Counting::new(InverseNCoin::new(
        n,
        Counting::new(FairCoin::seeded_stream(seed, COIN_STREAM)),
    )?);
    let (mut kernel_fair, mut kernel_biased, mut coin_fair) = (Tally::default(), Tally::default(), Tally::default());
    for _ in 0..samples {
        let before = (fair.count(), biased.count(), biased.inner().fair().count());
        die.roll(&mut biased, &mut fair)?;
        kernel_fair.push(fair.count() - before.0);
        kernel_biased.push(biased.count() - before.1);
        coin_fair.push(biased.inner().fair().count() - before.2);
    }

    let mut baseline_source = FairCoin::seeded_stream(seed, BASELINE_STREAM);
    let mut baseline = Tally::default();
    for _ in 0..samples {
        let (_, flips) = rejection_baseline_roll(n, &mut baseline_source)?;
        baseline.push(flips);
    }

    let row = |method, biased_per_roll, fair: &Tally, coin_fair_per_roll| BudgetReport {
        n,
        k: params.k(),
        method,
        samples,
        biased_per_roll,
        fair_per_roll: fair.mean(),
        fair_min: fair.min,
        fair_max: fair.max,
        fair_variance: fair.variance(),
        coin_fair_per_roll,
    };
    Ok(vec![
        row(Method::TwoCoin, kernel_biased.mean(), &kernel_fair, None),
        row(Method::TwoCoinSimulatedCoin, 0.0, &kernel_fair, Some(coin_fair.mean())),
        row(Method::Rejection, 0.0, &baseline, None),
    ])
}
