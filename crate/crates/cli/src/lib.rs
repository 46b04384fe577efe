//! Shared plumbing for the command-line tools: key files, JSON loading,
//! wall-clock time, and the HTTP wire format between voter and platform.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use edv_core::keys::Keypair;
use edv_core::model::ElectionId;
use edv_core::Timestamp;

pub mod http;

/// Current UTC time in whole seconds.
pub fn wall_clock() -> Timestamp {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .expect("clock after 1970")
        .as_secs()
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn save_json_pretty<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// A 16-octet election id from its 32-hex-digit form.
pub fn parse_election_id(s: &str) -> anyhow::Result<ElectionId> {
    let bytes = hex::decode(s).context("election id must be hex")?;
    bytes
        .as_slice()
        .try_into()
        .map_err(|_| anyhow::anyhow!("election id must be exactly 16 octets (32 hex digits)"))
}

/// Writes a keypair file readable only by its owner and returns nothing;
/// the public half is the caller's to print.
pub fn save_keypair(path: &Path, keypair: &Keypair) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(&keypair.to_stored())?;
    #[cfg(unix)]
    {
        use std::io::Write;
        use std::os::unix::fs::OpenOptionsExt;
        let mut file = std::fs::OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(true)
            .mode(0o600)
            .open(path)
            .with_context(|| format!("creating {}", path.display()))?;
        file.write_all(json.as_bytes())?;
        file.write_all(b"\n")?;
    }
    #[cfg(not(unix))]
    std::fs::write(path, json + "\n").with_context(|| format!("creating {}", path.display()))?;
    Ok(())
}

pub fn load_keypair(path: &Path) -> anyhow::Result<Keypair> {
    let stored: edv_core::keys::StoredKeypair = load_json(path)?;
    Ok(stored.into_keypair())
}
