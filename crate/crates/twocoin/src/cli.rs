//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or range error,
//! 3 a scripted source ran out of flips.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use twocoin_core::kernel::{Die, RollError};
use twocoin_core::oracle::{Oracle, OracleError};
use twocoin_core::sources::{Bias, CoinSource, InverseNCoin, Scripted, SourceError};

use crate::report;
use crate::stats::{self, StatsError};
use crate::{make_fair_source, COIN_STREAM, KERNEL_STREAM};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXHAUSTED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "twocoin", version, about = "Fair n-sided dice from one (1/n)-coin flip and 3k+1 fair flips")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print k, m and the split coefficients a, b.
    Params { n: u64 },
    /// Roll the die.
    Roll(RollArgs),
    /// Check exact uniformity by enumeration.
    Verify(VerifyArgs),
    /// Chi-square uniformity test on seeded rolls.
    Stats(SampleArgs),
    /// Flips consumed per roll, against a rejection-sampling baseline.
    Bench(SampleArgs),
}

#[derive(Debug, Args)]
pub struct RollArgs {
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Seed for the fair coin and the simulated (1/n)-coin; OS entropy if absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// H/T script for the (1/n)-coin.
    #[arg(long, conflicts_with = "biased_script_file")]
    pub biased_script: Option<String>,
    #[arg(long)]
    pub biased_script_file: Option<PathBuf>,
    /// H/T script for the fair coin.
    #[arg(long, conflicts_with = "fair_script_file")]
    pub fair_script: Option<String>,
    #[arg(long)]
    pub fair_script_file: Option<PathBuf>,
    /// Show the flips and intermediate values of each roll.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct VerifyArgs {
    pub n: Option<u64>,
    /// Inclusive range `lo..hi` (or `lo..=hi`).
    #[arg(long)]
    pub range: Option<SideRange>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub n: u64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Inclusive range of die sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SideRange(pub RangeInclusive<u64>);

impl FromStr for SideRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once("..=")
            .or_else(|| s.split_once(".."))
            .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
        let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
        if lo > hi {
            return Err(format!("range {lo}..{hi} is empty"));
        }
        Ok(SideRange(lo..=hi))
    }
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

impl From<StatsError> for Failure {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::Source(SourceError::Exhausted { .. }) => Failure {
                code: EXIT_EXHAUSTED,
                message: e.to_string(),
            },
            StatsError::Roll(RollError::Source { .. }) => Failure {
                code: EXIT_EXHAUSTED,
                message: e.to_string(),
            },
            other => Failure::usage(other),
        }
    }
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(rendered.as_bytes())
            } else {
                out.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Params { n } => {
            let die = Die::new(*n).map_err(Failure::usage)?;
            match cli.format {
                Format::Text => out.write_all(report::params_text(&die).as_bytes())?,
                Format::Json => writeln_json(out, &report::params_json(&die))?,
            }
            Ok(EXIT_OK)
        }
        Command::Roll(args) => cmd_roll(args, cli.format, out),
        Command::Verify(args) => cmd_verify(args, cli.format, out),
        Command::Stats(args) => {
            let seed = args.seed.unwrap_or_else(rand_seed);
            let r = stats::chi_square_uniformity(args.n, args.samples, seed)?;
            match cli.format {
                Format::Text => out.write_all(report::chi_square_text(&r).as_bytes())?,
                Format::Json => writeln_json(out, &report::chi_square_json(&r))?,
            }
            Ok(EXIT_OK)
        }
        Command::Bench(args) => {
            let seed = args.seed.unwrap_or_else(rand_seed);
            let rows = stats::benchmark_budgets(args.n, args.samples, seed)?;
            match cli.format {
                Format::Text => out.write_all(report::budget_text(&rows).as_bytes())?,
                Format::Json => writeln_json(out, &report::budget_json(&rows))?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn writeln_json(out: &mut dyn Write, value: &Value) -> io::Result<()> {
    writeln!(out, "{value}")
}

fn rand_seed() -> u64 {
    use rand_core::{OsRng, TryRngCore};
    OsRng.try_next_u64().expect("OS entropy unavailable")
}

fn load_script(inline: &Option<String>, file: &Option<PathBuf>) -> Result<Option<String>, Failure> {
    match (inline, file) {
        (Some(s), _) => Ok(Some(s.clone())),
        (None, Some(path)) => fs::read_to_string(path)
            .map(Some)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display()))),
        (None, None) => Ok(None),
    }
}

fn scripted(script: &str, bias: Bias) -> Result<Box<dyn CoinSource>, Failure> {
    Ok(Box::new(Scripted::from_script(script, bias).map_err(Failure::usage)?))
}

fn cmd_roll(args: &RollArgs, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let die = Die::new(args.n).map_err(Failure::usage)?;
    let seed = args.seed;

    let mut biased: Box<dyn CoinSource> = match load_script(&args.biased_script, &args.biased_script_file)? {
        Some(s) => scripted(&s, Bias::new(1, args.n))?,
        None => Box::new(
            InverseNCoin::new(args.n, make_fair_source(seed, COIN_STREAM)).map_err(Failure::usage)?,
        ),
    };
    let mut fair: Box<dyn CoinSource> = match load_script(&args.fair_script, &args.fair_script_file)? {
        Some(s) => scripted(&s, Bias::new(1, 2))?,
        None => Box::new(make_fair_source(seed, KERNEL_STREAM)),
    };

    for i in 1..=args.count {
        let roll = match die.roll(&mut biased, &mut fair) {
            Ok(roll) => roll,
            Err(e @ RollError::Source { .. }) => {
                out.flush()?;
                return Err(Failure {
                    code: EXIT_EXHAUSTED,
                    message: format!("roll {i}: {e}"),
                });
            }
            Err(e) => return Err(Failure::usage(e)),
        };
        match format {
            Format::Text => out.write_all(report::roll_text(&die, &roll, args.trace).as_bytes())?,
            Format::Json => writeln_json(out, &report::roll_json(&die, &roll, args.trace))?,
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(args: &VerifyArgs, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let oracle = Oracle::new();
    let sizes = match (&args.n, &args.range) {
        (Some(n), _) => *n..=*n,
        (None, Some(r)) => r.0.clone(),
        (None, None) => unreachable!("clap requires n or --range"),
    };
    // Reject the whole request before enumerating anything.
    for n in [*sizes.start(), *sizes.end()] {
        if n == 0 || n > oracle.bound().die_max_n {
            let e = match twocoin_core::params::DieParams::new(n) {
                Err(e) => OracleError::Params(e),
                Ok(_) => OracleError::TooLarge {
                    n,
                    max: oracle.bound().die_max_n,
                },
            };
            return Err(Failure::usage(e));
        }
    }

    let (mut passed, mut total) = (0u64, 0u64);
    for n in sizes {
        let dist = oracle.die_distribution(n).map_err(Failure::usage)?;
        let verdict = twocoin_core::oracle::uniformity_verdict(n, &dist);
        total += 1;
        let shown = if verdict.is_pass() {
            passed += 1;
            None
        } else {
            Some(&dist)
        };
        match format {
            Format::Text => out.write_all(report::verdict_text(n, &verdict, shown).as_bytes())?,
            Format::Json => writeln_json(out, &report::verdict_json(n, &verdict, shown))?,
        }
    }
    if format == Format::Text && total > 1 {
        writeln!(out, "{passed}/{total} pass")?;
    }
    Ok(if passed == total { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
