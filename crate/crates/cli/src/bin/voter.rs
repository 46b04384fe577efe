//! Voter-side client: mine and cast a vote against a running platform, and
//! later check the saved receipt against the published lists.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use edv_core::model::{ElectionConfig, Mandate};
use edv_core::pow::MiningBudget;
use edv_core::voter::{cast, self_verify, ReceiptFile};
use edv_core::files;
use edv_cli::http::{cast_error_code, HttpPlatformClient};
use edv_cli::load_json;

#[derive(Parser)]
#[command(name = "voter", about = "cast votes and verify their publication")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a vote block and submit it to the platform.
    Cast {
        /// Election config JSON.
        #[arg(long)]
        election: PathBuf,
        /// Mandate JSON from the authority.
        #[arg(long)]
        mandate: PathBuf,
        /// Chosen ballot option, verbatim.
        #[arg(long)]
        vote: String,
        /// Mining budget in milliseconds of wall time.
        #[arg(long)]
        budget_ms: u64,
        /// Platform base URL, e.g. http://127.0.0.1:8080.
        #[arg(long)]
        platform: String,
        /// Where to save the receipt (created with owner-only permissions).
        #[arg(long)]
        receipt_out: PathBuf,
    },
    /// Check that a receipt's block appears in the published lists intact.
    Verify {
        /// Receipt file written by `voter cast`.
        #[arg(long)]
        receipt: PathBuf,
        /// Directory holding the published list files.
        #[arg(long)]
        published: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Cast { election, mandate, vote, budget_ms, platform, receipt_out } => {
            run_cast(election, mandate, vote, budget_ms, platform, receipt_out)
        }
        Command::Verify { receipt, published } => run_verify(receipt, published),
    }
}

fn run_cast(
    election: PathBuf,
    mandate: PathBuf,
    vote: String,
    budget_ms: u64,
    platform: String,
    receipt_out: PathBuf,
) -> ExitCode {
    let config: ElectionConfig = match load_json(&election) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("{err:#}");
            return ExitCode::FAILURE;
        }
    };
    let mandate: Mandate = match load_json(&mandate) {
        Ok(m) => m,
        Err(err) => {
            eprintln!("{err:#}");
            return ExitCode::FAILURE;
        }
    };
    let client = HttpPlatformClient::new(&platform);
    let budget = MiningBudget::WallTimeMs(budget_ms);
    match cast(&config, &mandate, &vote, budget, &client) {
        Ok(receipt) => {
            if let Err(err) = receipt.save(&receipt_out) {
                eprintln!("saving receipt: {err}");
                return ExitCode::FAILURE;
            }
            println!(
                "accepted: {} leading zero bits (floor {})",
                receipt.achieved_zeros, config.work_floor
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}: {err}", cast_error_code(&err));
            ExitCode::FAILURE
        }
    }
}

fn run_verify(receipt: PathBuf, published: PathBuf) -> ExitCode {
    let receipt = match ReceiptFile::load(&receipt) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("loading receipt: {err}");
            return ExitCode::FAILURE;
        }
    };
    let units = match files::load_published(&published) {
        Ok(u) => u,
        Err(err) => {
            eprintln!("{}: {err}", err.code());
            return ExitCode::FAILURE;
        }
    };
    if self_verify(&receipt, &units) {
        println!("verified: the vote block is published intact");
        ExitCode::SUCCESS
    } else {
        eprintln!("NOT_VERIFIED: the receipt's block is absent or altered in the published lists");
        ExitCode::FAILURE
    }
}
