//! Mandate-issuing authority: key management and one-per-citizen issuance
//! backed by an append-only JSON-lines log.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use edv_core::authority::{Authority, AuthorityError, IssuanceEntry};
use edv_core::files;
use edv_core::keys::Keypair;
use edv_cli::{load_keypair, parse_election_id, save_json_pretty, save_keypair, wall_clock};
use rand::rngs::OsRng;

#[derive(Parser)]
#[command(name = "authority", about = "issue one-time voting mandates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signing keypair and print the public half.
    Keygen {
        /// Where to write the keypair file (owner-readable only).
        #[arg(long)]
        out: PathBuf,
    },
    /// Issue a mandate to a citizen, appending to the issuance log.
    Issue {
        /// Election id as 32 hex digits.
        #[arg(long)]
        election: String,
        /// Opaque citizen reference; one mandate per reference per election.
        #[arg(long)]
        citizen: String,
        /// Keypair file from `authority keygen`.
        #[arg(long)]
        key: PathBuf,
        /// Append-only issuance log (created on first use).
        #[arg(long, default_value = "issuance.jsonl")]
        log: PathBuf,
        /// Write the mandate here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the public key of a keypair file.
    Pubkey {
        #[arg(long)]
        key: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err:#}");
            ExitCode::FAILURE
        }
    }
}

/// The log is append-only: issuance adds one line, nothing is rewritten.
fn append_log_line(log: &std::path::Path, entry: &IssuanceEntry) -> anyhow::Result<()> {
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(log)?;
    writeln!(file, "{}", serde_json::to_string(entry)?)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Keygen { out } => {
            let keypair = Keypair::generate(&mut OsRng);
            save_keypair(&out, &keypair)?;
            println!("{}", keypair.public_key().to_hex());
        }
        Command::Issue { election, citizen, key, log, out } => {
            let election_id = parse_election_id(&election)?;
            let keypair = load_keypair(&key)?;
            let existing: Vec<IssuanceEntry> = if log.exists() {
                files::read_jsonl(&log).map_err(|e| anyhow::anyhow!("{}: {e}", e.code()))?
            } else {
                Vec::new()
            };
            let authority = Authority::from_log(keypair, existing);
            let mandate = match authority.issue_mandate(&election_id, &citizen, wall_clock()) {
                Ok(m) => m,
                Err(AuthorityError::AlreadyIssued { .. }) => {
                    eprintln!("ALREADY_ISSUED: citizen {citizen:?} holds a mandate already");
                    std::process::exit(1);
                }
            };
            let entries = authority.log_entries();
            let newest = entries.last().expect("issuance just appended");
            append_log_line(&log, newest)?;
            match out {
                Some(path) => save_json_pretty(&path, &mandate)?,
                None => println!("{}", serde_json::to_string_pretty(&mandate)?),
            }
        }
        Command::Pubkey { key } => {
            println!("{}", load_keypair(&key)?.public_key().to_hex());
        }
    }
    Ok(())
}
