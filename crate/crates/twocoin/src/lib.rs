//! Std companion to `twocoin-core`: OS-entropy coins, chi-square and budget
//! statistics, report formats and the `twocoin` command line.

pub mod cli;
pub mod report;
pub mod stats;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use twocoin_core::sources::FairCoin;

pub use stats::{BASELINE_STREAM, COIN_STREAM, KERNEL_STREAM};
pub use twocoin_core::{kernel, oracle, params, sources};

/// Fair coin on ChaCha8 stream `stream` of `seed`, or seeded from the
/// operating system when `seed` is `None`.
pub fn make_fair_source(seed: Option<u64>, stream: u64) -> FairCoin<ChaCha8Rng> {
    match seed {
        Some(seed) => FairCoin::seeded_stream(seed, stream),
        None => FairCoin::from_rng(ChaCha8Rng::from_os_rng()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use twocoin_core::sources::CoinSource;

    #[test]
    fn unseeded_source_is_fair() {
        let mut coin = make_fair_source(None, KERNEL_STREAM);
        let heads = (0..1_000_000).filter(|_| coin.draw().unwrap().bit()).count();
        let fraction = heads as f64 / 1e6;
        assert!((0.497..=0.503).contains(&fraction), "{fraction}");
    }

    #[test]
    fn seeded_source_matches_core() {
        let mut a = make_fair_source(Some(42), 0);
        let mut b = FairCoin::seeded(42);
        for _ in 0..256 {
            assert_eq!(a.draw(), b.draw());
        }
    }
}
