//! Third-party audit of a published election: recompute every proof, check
//! every signature, and size up what a given hash budget could have forged.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use edv_core::audit::{audit, forgery_budget};
use edv_core::files::{self, FileError};
use edv_core::keys::PublicKey;
use edv_core::model::{ElectionConfig, PublishedLists};
use edv_core::pow::{block_digest, leading_zero_bits};
use edv_cli::{load_json, save_json_pretty};

#[derive(Parser)]
#[command(name = "audit", about = "independently verify a published election")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Re-verify everything that was published and write a report.
    Run {
        /// Directory holding the published list files.
        #[arg(long)]
        published: PathBuf,
        /// Issuing authority's public key, hex.
        #[arg(long)]
        authority_pk: String,
        /// Platform's public key, hex.
        #[arg(long)]
        platform_pk: String,
        /// Election config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Upper bound on issued mandates, if the authority disclosed one.
        #[arg(long)]
        eligible: Option<u64>,
        /// Where to write the audit report JSON.
        #[arg(long)]
        report: PathBuf,
    },
    /// Estimate how many published blocks a hash budget could replace.
    Forgery {
        /// Directory holding the published list files.
        #[arg(long)]
        published: PathBuf,
        /// Adversary hash rate, hashes per second.
        #[arg(long)]
        hashrate: u64,
        /// Attack duration in seconds.
        #[arg(long)]
        seconds: u64,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { published, authority_pk, platform_pk, config, eligible, report } => {
            run_audit(published, authority_pk, platform_pk, config, eligible, report)
        }
        Command::Forgery { published, hashrate, seconds } => {
            run_forgery(published, hashrate, seconds)
        }
    }
}

fn run_audit(
    published: PathBuf,
    authority_pk: String,
    platform_pk: String,
    config: PathBuf,
    eligible: Option<u64>,
    report_path: PathBuf,
) -> ExitCode {
    let units = match load_units(&published) {
        Ok(units) => units,
        Err(code) => return code,
    };
    let authority_key = match PublicKey::from_hex(&authority_pk) {
        Ok(k) => k,
        Err(err) => {
            eprintln!("bad --authority-pk: {err}");
            return ExitCode::FAILURE;
        }
    };
    let platform_key = match PublicKey::from_hex(&platform_pk) {
        Ok(k) => k,
        Err(err) => {
            eprintln!("bad --platform-pk: {err}");
            return ExitCode::FAILURE;
        }
    };
    let config: ElectionConfig = match load_json(&config) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("{err:#}");
            return ExitCode::FAILURE;
        }
    };
    let report = audit(&units, &authority_key, &platform_key, &config, eligible);
    if let Err(err) = save_json_pretty(&report_path, &report) {
        eprintln!("{err:#}");
        return ExitCode::FAILURE;
    }
    println!(
        "{}: {} mandates, {} blocks, {} failures, total work {}",
        if report.passed { "PASSED" } else { "FAILED" },
        report.counts.list_a,
        report.counts.list_b,
        report.failures.len(),
        report.total_work,
    );
    for failure in &report.failures {
        println!("  {} at {}: {}", failure.kind, failure.locator, failure.detail);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run_forgery(published: PathBuf, hashrate: u64, seconds: u64) -> ExitCode {
    let units = match load_units(&published) {
        Ok(units) => units,
        Err(code) => return code,
    };
    let zeros = achieved_zeros(&units);
    let assessment = forgery_budget(&zeros, hashrate, seconds);
    match serde_json::to_string_pretty(&assessment) {
        Ok(json) => {
            println!("{json}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{err}");
            ExitCode::FAILURE
        }
    }
}

fn load_units(dir: &std::path::Path) -> Result<Vec<PublishedLists>, ExitCode> {
    files::load_published(dir).map_err(|err| {
        eprintln!("{}: {err}", err.code());
        match err {
            FileError::Io(_) => ExitCode::FAILURE,
            _ => ExitCode::from(2),
        }
    })
}

/// Proof sizes actually achieved by the published blocks, recomputed from
/// the blocks themselves. Blocks that do not re-encode are skipped; `run`
/// is the command that reports those as failures.
fn achieved_zeros(units: &[PublishedLists]) -> Vec<u32> {
    units
        .iter()
        .flat_map(|unit| &unit.list_b)
        .filter_map(|block| {
            let prefix = edv_core::model::encode_block_preimage_raw(
                &block.receipt.platform_stamp.election_id,
                edv_core::pow::HashAlgorithm::Sha256,
                &block.vote,
                &block.receipt,
            )
            .ok()?;
            Some(leading_zero_bits(&block_digest(&prefix, block.nonce)))
        })
        .collect()
}
