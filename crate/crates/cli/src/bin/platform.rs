//! Collection platform service: stamps, submissions, and publication over
//! HTTP, with published lists mirrored to disk as JSON-lines files.
//!
//! Publication is automatic: a background task releases each chunk once its
//! epoch closes and the final unit once the window ends. Accepted
//! submissions are appended to a platform-private log; only the shuffled
//! lists are public.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use clap::{Parser, Subcommand};
use edv_core::files;
use edv_core::keys::{Keypair, PublicKey};
use edv_core::model::{ElectionConfig, Submission};
use edv_core::platform::{Platform, PublishError, SubmitError};
use edv_cli::http::{status_for, ErrorBody, PubkeyBody};
use edv_cli::{load_json, load_keypair, save_keypair, wall_clock};
use rand::rngs::OsRng;

#[derive(Parser)]
#[command(name = "platform", about = "collect, validate, and publish vote blocks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signing keypair and print the public half.
    Keygen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the election over HTTP until killed.
    Serve {
        /// Election config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Keypair file from `platform keygen`.
        #[arg(long)]
        key: PathBuf,
        /// Authority public key, hex.
        #[arg(long)]
        authority_pk: String,
        /// Bind address, e.g. 127.0.0.1:0 to pick a free port.
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: String,
        /// Directory that receives the public list files.
        #[arg(long)]
        publish_dir: PathBuf,
        /// Platform-private append-only log of accepted submissions.
        #[arg(long)]
        accepted_log: Option<PathBuf>,
    },
}

struct App {
    platform: Platform,
    publish_dir: PathBuf,
    accepted_log: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Keygen { out } => {
            let keypair = Keypair::generate(&mut OsRng);
            if let Err(err) = save_keypair(&out, &keypair) {
                eprintln!("{err:#}");
                return ExitCode::FAILURE;
            }
            println!("{}", keypair.public_key().to_hex());
            ExitCode::SUCCESS
        }
        Command::Serve { config, key, authority_pk, listen, publish_dir, accepted_log } => {
            match serve(config, key, authority_pk, listen, publish_dir, accepted_log) {
                Ok(()) => ExitCode::SUCCESS,
                Err(err) => {
                    eprintln!("{err:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}

#[tokio::main]
async fn serve(
    config: PathBuf,
    key: PathBuf,
    authority_pk: String,
    listen: String,
    publish_dir: PathBuf,
    accepted_log: Option<PathBuf>,
) -> anyhow::Result<()> {
    let config: ElectionConfig = load_json(&config)?;
    let keypair = load_keypair(&key)?;
    let authority_key = PublicKey::from_hex(&authority_pk)
        .map_err(|e| anyhow::anyhow!("bad --authority-pk: {e}"))?;
    let platform = Platform::new(keypair, config, authority_key)
        .map_err(|e| anyhow::anyhow!("invalid config: {e}"))?;
    std::fs::create_dir_all(&publish_dir)?;
    let app = Arc::new(App { platform, publish_dir, accepted_log });

    let router = Router::new()
        .route("/stamp", post(stamp))
        .route("/submit", post(submit))
        .route("/published", get(published))
        .route("/pubkey", get(pubkey))
        .with_state(app.clone());

    tokio::spawn(publisher(app));

    let listener = tokio::net::TcpListener::bind(&listen).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router).await?;
    Ok(())
}

/// Releases chunks as their epochs close and the final unit once the window
/// ends, mirroring every published unit to the public directory.
async fn publisher(app: Arc<App>) {
    let mut done = false;
    loop {
        tokio::time::sleep(std::time::Duration::from_millis(500)).await;
        if done {
            continue;
        }
        let now = wall_clock();
        let config = app.platform.config();
        let mut newly_published = false;
        if config.chunk_interval.is_some() {
            let horizon = config.epoch_at(now.min(config.voting_window.end));
            for epoch in 0..=horizon {
                match app.platform.publish_chunk(epoch, now) {
                    Ok(_) => newly_published = true,
                    Err(PublishError::AlreadyPublished | PublishError::EpochOpen { .. }) => {}
                    Err(err) => eprintln!("publish chunk {epoch}: {err}"),
                }
            }
        }
        match app.platform.publish_final(now) {
            Ok(_) => {
                newly_published = true;
                done = true;
            }
            Err(PublishError::ElectionOpen) => {}
            Err(PublishError::AlreadyPublished) => done = true,
            Err(err) => eprintln!("publish final: {err}"),
        }
        if newly_published {
            if let Err(err) = files::save_published(&app.publish_dir, &app.platform.published()) {
                eprintln!("writing published lists: {err}");
            }
        }
    }
}

async fn stamp(State(app): State<Arc<App>>) -> Response {
    match app.platform.issue_stamp(wall_clock()) {
        Ok(stamp) => Json(stamp).into_response(),
        Err(e) => rejection(status_for(e.code), e.code.to_string(), e.detail),
    }
}

async fn submit(State(app): State<Arc<App>>, Json(submission): Json<Submission>) -> Response {
    let now = wall_clock();
    match app.platform.submit(&submission, now) {
        Ok(ack) => {
            if let Some(log) = &app.accepted_log {
                let record = edv_core::platform::AcceptedSubmission { submission, received_at: now };
                if let Err(err) = append_line(log, &record) {
                    eprintln!("appending accepted log: {err}");
                }
            }
            Json(ack).into_response()
        }
        Err(SubmitError::Rejected(e)) => {
            rejection(status_for(e.code), e.code.to_string(), e.detail)
        }
        Err(SubmitError::ChallengeRefused) => rejection(
            428,
            "CHALLENGE_REFUSED".into(),
            "the submission challenge was not satisfied".into(),
        ),
    }
}

async fn published(State(app): State<Arc<App>>) -> Response {
    Json(app.platform.published()).into_response()
}

async fn pubkey(State(app): State<Arc<App>>) -> Response {
    Json(PubkeyBody { public_key: app.platform.public_key().to_hex() }).into_response()
}

fn rejection(status: u16, code: String, detail: String) -> Response {
    let status = StatusCode::from_u16(status).expect("status table is valid");
    (status, Json(ErrorBody { code, detail })).into_response()
}

fn append_line<T: serde::Serialize>(path: &std::path::Path, record: &T) -> anyhow::Result<()> {
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(file, "{}", serde_json::to_string(record)?)?;
    Ok(())
}
