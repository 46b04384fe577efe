//! Whole-election simulation: run a scenario deterministically end to end,
//! or chart how attack cost scales against a published election.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use edv_core::files;
use edv_core::model::PublishedLists;
use edv_core::pow::{block_digest, leading_zero_bits};
use edv_core::sim::{deterrence_curve, run, Scenario};
use edv_cli::{load_json, save_json_pretty};

#[derive(Parser)]
#[command(name = "sim", about = "simulate elections and chart attack costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write the full report.
    Run {
        /// Scenario JSON.
        #[arg(long)]
        scenario: PathBuf,
        /// Where to write the report JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Chart the forgeable fraction of a published election against a
    /// range of adversary hash rates. CSV columns: hashrate, fraction.
    Deterrence {
        /// Directory holding the published list files.
        #[arg(long)]
        published: PathBuf,
        /// Comma-separated hash rates, hashes per second.
        #[arg(long)]
        hashrates: String,
        /// Attack duration in seconds.
        #[arg(long)]
        seconds: u64,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, out } => run_scenario(scenario, out),
        Command::Deterrence { published, hashrates, seconds, out } => {
            run_deterrence(published, hashrates, seconds, out)
        }
    }
}

fn run_scenario(scenario: PathBuf, out: PathBuf) -> ExitCode {
    let scenario: Scenario = match load_json(&scenario) {
        Ok(s) => s,
        Err(err) => {
            eprintln!("{err:#}");
            return ExitCode::FAILURE;
        }
    };
    let report = match run(&scenario) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("invalid scenario: {err}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(err) = save_json_pretty(&out, &report) {
        eprintln!("{err:#}");
        return ExitCode::FAILURE;
    }
    let accepted = report.per_voter.iter().filter(|v| v.accepted).count();
    println!(
        "{} of {} votes accepted; audit {}",
        accepted,
        report.per_voter.len(),
        if report.audit_report.passed { "passed" } else { "FAILED" },
    );
    for (choice, count) in &report.ground_truth_tally {
        println!("  {choice}: {count}");
    }
    let adv = &report.adversary_outcome;
    if adv.attempted > 0 {
        println!(
            "adversary: {} attempted, {} succeeded, detected: {}",
            adv.attempted, adv.succeeded, adv.detected
        );
    }
    ExitCode::SUCCESS
}

fn run_deterrence(
    published: PathBuf,
    hashrates: String,
    seconds: u64,
    out: Option<PathBuf>,
) -> ExitCode {
    let units = match files::load_published(&published) {
        Ok(u) => u,
        Err(err) => {
            eprintln!("{}: {err}", err.code());
            return ExitCode::FAILURE;
        }
    };
    let rates: Vec<u64> = match hashrates
        .split(',')
        .map(|s| s.trim().parse::<u64>())
        .collect::<Result<_, _>>()
    {
        Ok(rates) => rates,
        Err(err) => {
            eprintln!("bad --hashrates: {err}");
            return ExitCode::FAILURE;
        }
    };
    let histogram = zeros_histogram(&units);
    let curve = deterrence_curve(&histogram, &rates, seconds);
    let mut csv = String::from("hashrate,fraction\n");
    for (rate, fraction) in &curve {
        let value = *fraction.numer() as f64 / *fraction.denom() as f64;
        csv.push_str(&format!("{rate},{value}\n"));
    }
    match out {
        Some(path) => {
            if let Err(err) = std::fs::write(&path, csv) {
                eprintln!("writing {}: {err}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}

/// Achieved proof sizes of all published blocks that re-encode, bucketed
/// by leading-zero count.
fn zeros_histogram(units: &[PublishedLists]) -> BTreeMap<u32, u64> {
    let mut histogram = BTreeMap::new();
    for block in units.iter().flat_map(|unit| &unit.list_b) {
        let Ok(prefix) = edv_core::model::encode_block_preimage_raw(
            &block.receipt.platform_stamp.election_id,
            edv_core::pow::HashAlgorithm::Sha256,
            &block.vote,
            &block.receipt,
        ) else {
            continue;
        };
        let zeros = leading_zero_bits(&block_digest(&prefix, block.nonce));
        *histogram.entry(zeros).or_insert(0) += 1;
    }
    histogram
}
