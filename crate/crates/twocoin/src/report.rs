//! JSON and plain-text renderings of parameters, rolls, verdicts and reports.
//!
//! Exact probabilities are always written as `"numerator/denominator"`
//! strings, including integers (`"1/1"`, `"0/1"`).

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Map, Value};
use twocoin_core::kernel::{Die, Flip, Roll};
use twocoin_core::oracle::{ExactDistribution, Verdict};

use crate::stats::{BudgetReport, ChiSquareReport};

/// `p/q` in lowest terms.
pub fn fraction(p: &BigRational) -> String {
    format!("{}/{}", p.numer(), p.denom())
}

/// Parses a string produced by [`fraction`].
pub fn parse_fraction(s: &str) -> Option<BigRational> {
    let (numer, denom) = s.split_once('/')?;
    let denom: BigInt = denom.parse().ok()?;
    if denom == BigInt::from(0) {
        return None;
    }
    Some(BigRational::new(numer.parse().ok()?, denom))
}

fn flips(seq: &[Flip]) -> String {
    seq.iter().map(|f| f.symbol()).collect()
}

pub fn params_json(die: &Die) -> Value {
    let (p, c) = (die.params(), die.coefficients());
    json!({ "n": p.n(), "k": p.k(), "m": p.m(), "a": c.a, "b": c.b })
}

pub fn params_text(die: &Die) -> String {
    let (p, c) = (die.params(), die.coefficients());
    format!("n={} k={} m={} a={} b={}\n", p.n(), p.k(), p.m(), c.a, c.b)
}

pub fn roll_json(die: &Die, roll: &Roll, trace: bool) -> Value {
    if !trace {
        return json!({ "value": roll.value });
    }
    let t = &roll.trace;
    let fair = &roll.transcript.fair;
    let stage_one = die.params().scaled_stage_flips();
    json!({
        "value": roll.value,
        "trace": {
            "biased": flips(&roll.transcript.biased),
            "fair": flips(fair),
            "scaled_flips": flips(&fair[..stage_one]),
            "word": t.scaled_word.value,
            "scaled": t.scaled.symbol().to_string(),
            "d": t.d.value,
            "d_prime": t.d_prime.value,
            "branch": t.branch.label(),
        }
    })
}

/// One line per roll. With `trace`, the fair flips are shown split into the
/// first-stage block, the `d` block and the `d′` block.
pub fn roll_text(die: &Die, roll: &Roll, trace: bool) -> String {
    if !trace {
        return format!("{}\n", roll.value);
    }
    let t = &roll.trace;
    let fair = &roll.transcript.fair;
    let p = die.params();
    let (stage_one, rest) = fair.split_at(p.scaled_stage_flips());
    let (low, high) = rest.split_at(p.k() as usize);
    format!(
        "{} biased={} fair={}|{}|{} word={} scaled={} d={} d'={} branch={}\n",
        roll.value,
        flips(&roll.transcript.biased),
        flips(stage_one),
        flips(low),
        flips(high),
        t.scaled_word.value,
        t.scaled,
        t.d.value,
        t.d_prime.value,
        t.branch.label(),
    )
}

pub fn distribution_json(dist: &ExactDistribution) -> Value {
    let entries: Map<String, Value> = dist
        .iter()
        .map(|(v, p)| (v.to_string(), Value::String(fraction(p))))
        .collect();
    Value::Object(entries)
}

/// Verdict as JSON; failures carry the full distribution when given.
pub fn verdict_json(n: u64, verdict: &Verdict, dist: Option<&ExactDistribution>) -> Value {
    match verdict {
        Verdict::Pass => json!({ "n": n, "verdict": "pass" }),
        Verdict::Fail { value, probability } => {
            let mut v = json!({
                "n": n,
                "verdict": "fail",
                "value": value,
                "probability": fraction(probability),
                "expected": format!("1/{n}"),
            });
            if let Some(dist) = dist {
                v["distribution"] = distribution_json(dist);
            }
            v
        }
    }
}

pub fn verdict_text(n: u64, verdict: &Verdict, dist: Option<&ExactDistribution>) -> String {
    match verdict {
        Verdict::Pass => format!("n={n} pass\n"),
        Verdict::Fail { value, probability } => {
            let mut out = format!(
                "n={n} FAIL: P({value}) = {} (expected 1/{n})\n",
                fraction(probability)
            );
            if let Some(dist) = dist {
                for (v, p) in dist.iter() {
                    let _ = writeln!(out, "  {v:>6}  {}", fraction(p));
                }
            }
            out
        }
    }
}

pub fn chi_square_json(report: &ChiSquareReport) -> Value {
    json!({
        "n": report.n,
        "samples": report.samples,
        "counts": report.counts,
        "expected": report.expected(),
        "statistic": report.statistic,
        "degrees_of_freedom": report.degrees_of_freedom,
        "p_value": report.p_value,
    })
}

pub fn chi_square_text(report: &ChiSquareReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>8}  {:>12}  {:>14}", "value", "count", "expected");
    for (v, c) in report.counts.iter().enumerate() {
        let _ = writeln!(out, "{v:>8}  {c:>12}  {:>14.3}", report.expected());
    }
    let _ = writeln!(out, "samples            {}", report.samples);
    let _ = writeln!(out, "chi-square         {:.6}", report.statistic);
    let _ = writeln!(out, "degrees of freedom {}", report.degrees_of_freedom);
    let _ = writeln!(out, "p-value            {:.6}", report.p_value);
    out
}

pub fn budget_json(rows: &[BudgetReport]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "n": r.n,
                    "k": r.k,
                    "method": r.method.name(),
                    "samples": r.samples,
                    "biased_per_roll": r.biased_per_roll,
                    "fair_per_roll": r.fair_per_roll,
                    "fair_min": r.fair_min,
                    "fair_max": r.fair_max,
                    "fair_variance": r.fair_variance,
                    "coin_fair_per_roll": r.coin_fair_per_roll,
                    "total_fair_per_roll": r.total_fair_per_roll(),
                })
            })
            .collect(),
    )
}

pub fn budget_text(rows: &[BudgetReport]) -> String {
    let mut out = String::new();
    if let Some(first) = rows.first() {
        let _ = writeln!(out, "n={} k={} samples={}", first.n, first.k, first.samples);
    }
    let _ = writeln!(
        out,
        "{:<24} {:>9} {:>10} {:>8} {:>8} {:>10} {:>13} {:>11}",
        "method", "biased", "fair", "min", "max", "variance", "coin fair", "total fair"
    );
    for r in rows {
        let coin = r
            .coin_fair_per_roll
            .map(|c| format!("{c:.4}"))
            .unwrap_or_else(|| "-".to_owned());
        let _ = writeln!(
            out,
            "{:<24} {:>9.4} {:>10.4} {:>8} {:>8} {:>10.4} {:>13} {:>11.4}",
            r.method.name(),
            r.biased_per_roll,
            r.fair_per_roll,
            r.fair_min,
            r.fair_max,
            r.fair_variance,
            coin,
            r.total_fair_per_roll()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use twocoin_core::oracle::exact_die_distribution;

    #[test]
    fn fractions_are_explicit() {
        let one = BigRational::from_integer(BigInt::from(1));
        assert_eq!(fraction(&one), "1/1");
        assert_eq!(fraction(&BigRational::new(4.into(), 6.into())), "2/3");
        assert_eq!(parse_fraction("2/3"), Some(BigRational::new(2.into(), 3.into())));
        assert_eq!(parse_fraction("1/0"), None);
        assert_eq!(parse_fraction("0.5"), None);
    }

    #[test]
    fn params_rendering() {
        let die = Die::new(6).unwrap();
        assert_eq!(params_json(&die), json!({"n": 6, "k": 2, "m": 2, "a": 2, "b": 6}));
        assert_eq!(params_text(&Die::new(4).unwrap()), "n=4 k=2 m=0 a=8 b=8\n");
    }

    #[test]
    fn distribution_rendering_round_trips() {
        let dist = exact_die_distribution(6).unwrap();
        let json = distribution_json(&dist);
        let obj = json.as_object().unwrap();
        assert_eq!(obj.len(), 6);
        for (v, p) in dist.iter() {
            assert_eq!(parse_fraction(obj[&v.to_string()].as_str().unwrap()).as_ref(), Some(p));
        }
    }
}
