//! Canonical protocol types and their bit-exact wire encodings.
//!
//! Everything every role must agree on byte-for-byte lives here: the election
//! configuration, mandates, stamps, vote blocks, the canonical block preimage
//! that gets mined, and the verification predicates any third party can run
//! from public data alone.
//!
//! Two encodings exist side by side. The **canonical octet layout** is what
//! gets hashed — fixed field order, big-endian integers, UTF-8 votes — and is
//! reproduced exactly by [`encode_block_preimage`]. The **JSON forms** carry
//! the same data in files and over HTTP, with octet fields hex-encoded
//! lowercase and integers as plain numbers.

use serde::{Deserialize, Serialize};

use crate::hexutil;
use crate::keys::{PublicKey, Signature};
use crate::pow::{self, Digest, HashAlgorithm, Nonce};
use crate::Timestamp;

pub type ElectionId = [u8; 16];
/// Hash commitment to a voter-held secret; the voter's half of the receipt.
pub type VoterStamp = [u8; 32];

pub const VOTE_LEN_MAX: usize = u16::MAX as usize;

/// Magic prefix of every canonical block preimage.
pub const PREIMAGE_MAGIC: &[u8; 4] = b"EDV1";

/// Everything a participant must know about one election before acting in it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionConfig {
    #[serde(with = "hexutil")]
    pub election_id: ElectionId,
    pub ballot_choices: Vec<String>,
    #[serde(rename = "hash_algorithm_id", with = "alg_id")]
    pub hash_algorithm: HashAlgorithm,
    /// Minimum leading zero bits for an acceptable block.
    pub work_floor: u32,
    pub voting_window: VotingWindow,
    /// Seconds a platform stamp stays usable after its epoch begins.
    pub stamp_ttl: u64,
    /// Seconds per publication chunk; `None` publishes once, after the end.
    pub chunk_interval: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotingWindow {
    pub start: Timestamp,
    pub end: Timestamp,
}

mod alg_id {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(alg: &HashAlgorithm, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(alg.id())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<HashAlgorithm, D::Error> {
        let id = u8::deserialize(d)?;
        HashAlgorithm::from_id(id)
            .ok_or_else(|| serde::de::Error::custom(format!("unassigned hash algorithm id {id}")))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("voting window must satisfy start < end")]
    EmptyWindow,
    #[error("work floor {0} outside 1..=64")]
    FloorOutOfRange(u32),
    #[error("ballot needs at least two choices")]
    TooFewChoices,
    #[error("ballot choice {0:?} duplicated")]
    DuplicateChoice(String),
    #[error("ballot choices must be non-empty and at most {VOTE_LEN_MAX} octets")]
    BadChoiceLength,
    #[error("stamp ttl must be positive")]
    ZeroTtl,
    #[error("chunk interval must be positive when set")]
    ZeroChunkInterval,
}

impl ElectionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.voting_window.start >= self.voting_window.end {
            return Err(ConfigError::EmptyWindow);
        }
        if !(1..=64).contains(&self.work_floor) {
            return Err(ConfigError::FloorOutOfRange(self.work_floor));
        }
        if self.ballot_choices.len() < 2 {
            return Err(ConfigError::TooFewChoices);
        }
        let mut seen = std::collections::HashSet::new();
        for choice in &self.ballot_choices {
            if choice.is_empty() || choice.len() > VOTE_LEN_MAX {
                return Err(ConfigError::BadChoiceLength);
            }
            if !seen.insert(choice.as_str()) {
                return Err(ConfigError::DuplicateChoice(choice.clone()));
            }
        }
        if self.stamp_ttl == 0 {
            return Err(ConfigError::ZeroTtl);
        }
        if self.chunk_interval == Some(0) {
            return Err(ConfigError::ZeroChunkInterval);
        }
        Ok(())
    }

    /// Both window edges are inside the election.
    pub fn in_window(&self, now: Timestamp) -> bool {
        (self.voting_window.start..=self.voting_window.end).contains(&now)
    }

    /// Publication-chunk index for a wall-clock instant: elapsed window time
    /// divided by the chunk interval, clamped at the edges. Final-only
    /// elections have the single epoch 0.
    pub fn epoch_at(&self, now: Timestamp) -> u32 {
        let Some(interval) = self.chunk_interval else { return 0 };
        let elapsed = now.saturating_sub(self.voting_window.start);
        u32::try_from(elapsed / interval).unwrap_or(u32::MAX)
    }

    /// The instant epoch `epoch` begins, or `None` if no such epoch exists in
    /// this election. Epoch times never precede the window start, so a stamp
    /// cannot even express a pre-window issuance instant.
    pub fn epoch_time(&self, epoch: u32) -> Option<Timestamp> {
        match self.chunk_interval {
            None => (epoch == 0).then_some(self.voting_window.start),
            Some(interval) => {
                let offset = u64::from(epoch).checked_mul(interval)?;
                let t = self.voting_window.start.checked_add(offset)?;
                (t <= self.voting_window.end).then_some(t)
            }
        }
    }

    /// Last instant of epoch `epoch`, capped at the window end.
    pub fn epoch_end(&self, epoch: u32) -> Option<Timestamp> {
        let begin = self.epoch_time(epoch)?;
        match self.chunk_interval {
            None => Some(self.voting_window.end),
            Some(interval) => Some(
                begin
                    .saturating_add(interval)
                    .saturating_sub(1)
                    .min(self.voting_window.end),
            ),
        }
    }
}

/// A one-time voting pass: random token signed by the authority together with
/// the election it is valid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mandate {
    #[serde(with = "hexutil")]
    pub token: [u8; 32],
    #[serde(with = "hexutil")]
    pub election_id: ElectionId,
    pub authority_signature: Signature,
}

impl Mandate {
    pub fn signed_payload(token: &[u8; 32], election_id: &ElectionId) -> [u8; 48] {
        let mut m = [0u8; 48];
        m[..32].copy_from_slice(token);
        m[32..].copy_from_slice(election_id);
        m
    }

    /// True iff the authority's signature covers this token and election.
    pub fn verify(&self, authority: &PublicKey) -> bool {
        authority.verify(
            &Self::signed_payload(&self.token, &self.election_id),
            &self.authority_signature,
        )
    }
}

/// The list-A record: a mandate as published, stripped to token + signature.
/// The election id is implied by the list it appears in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotedMandate {
    #[serde(with = "hexutil")]
    pub token: [u8; 32],
    pub authority_signature: Signature,
}

impl VotedMandate {
    pub fn verify(&self, authority: &PublicKey, election_id: &ElectionId) -> bool {
        authority.verify(
            &Mandate::signed_payload(&self.token, election_id),
            &self.authority_signature,
        )
    }
}

impl From<&Mandate> for VotedMandate {
    fn from(m: &Mandate) -> Self {
        VotedMandate { token: m.token, authority_signature: m.authority_signature }
    }
}

/// Freshness anchor issued by the platform at request time; mining over it
/// proves the work happened after issuance, not stockpiled in advance.
///
/// Canonical layout, exactly 100 octets:
/// `election_id (16) || epoch (4, big-endian) || fresh (16) || signature (64)`
/// with the signature over the first 36.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlatformStamp {
    #[serde(with = "hexutil")]
    pub election_id: ElectionId,
    pub epoch: u32,
    #[serde(with = "hexutil")]
    pub fresh: [u8; 16],
    pub platform_signature: Signature,
}

impl PlatformStamp {
    pub const LEN: usize = 100;
    const PAYLOAD_LEN: usize = 36;

    pub fn signed_payload(
        election_id: &ElectionId,
        epoch: u32,
        fresh: &[u8; 16],
    ) -> [u8; Self::PAYLOAD_LEN] {
        let mut m = [0u8; Self::PAYLOAD_LEN];
        m[..16].copy_from_slice(election_id);
        m[16..20].copy_from_slice(&epoch.to_be_bytes());
        m[20..].copy_from_slice(fresh);
        m
    }

    pub fn to_octets(&self) -> [u8; Self::LEN] {
        let mut b = [0u8; Self::LEN];
        b[..36].copy_from_slice(&Self::signed_payload(&self.election_id, self.epoch, &self.fresh));
        b[36..].copy_from_slice(&self.platform_signature.0);
        b
    }

    pub fn from_octets(b: &[u8]) -> Result<Self, EncodingError> {
        if b.len() != Self::LEN {
            return Err(EncodingError::Malformed("platform stamp must be 100 octets"));
        }
        let mut sig = [0u8; 64];
        sig.copy_from_slice(&b[36..]);
        Ok(PlatformStamp {
            election_id: b[..16].try_into().unwrap(),
            epoch: u32::from_be_bytes(b[16..20].try_into().unwrap()),
            fresh: b[20..36].try_into().unwrap(),
            platform_signature: Signature(sig),
        })
    }

    /// Third-party stamp check from public data: platform signature, election
    /// match, and an epoch that maps into `[window start, now]` and is still
    /// within the ttl at `now`. The platform itself additionally checks its
    /// private issuance records; this predicate is what auditors get.
    pub fn verify(&self, platform: &PublicKey, config: &ElectionConfig, now: Timestamp) -> bool {
        if self.election_id != config.election_id {
            return false;
        }
        if !platform.verify(
            &Self::signed_payload(&self.election_id, self.epoch, &self.fresh),
            &self.platform_signature,
        ) {
            return false;
        }
        match config.epoch_time(self.epoch) {
            Some(t) => t <= now && now - t <= config.stamp_ttl,
            None => false,
        }
    }
}

/// The 32 random octets only the voter holds. Its hash is published; the
/// secret itself surfaces only when the voter proves ownership of a block.
#[derive(Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterSecret(#[serde(with = "hexutil")] pub [u8; 32]);

impl VoterSecret {
    pub fn generate<R: rand::CryptoRng + rand::RngCore>(rng: &mut R) -> Self {
        let mut s = [0u8; 32];
        rng.fill_bytes(&mut s);
        VoterSecret(s)
    }
}

impl std::fmt::Debug for VoterSecret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("VoterSecret(..)")
    }
}

/// The two freshness/ownership anchors mined into every block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    #[serde(flatten)]
    pub platform_stamp: PlatformStamp,
    #[serde(with = "hexutil")]
    pub voter_stamp: VoterStamp,
}

/// One list-B record: the vote, its receipt, and the mined nonce. Flat JSON
/// form: `vote`, `election_id`, `epoch`, `fresh`, `platform_signature`,
/// `voter_stamp`, `nonce`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteBlock {
    pub vote: String,
    #[serde(flatten)]
    pub receipt: Receipt,
    pub nonce: Nonce,
}

/// What a voter sends: the mandate travels alongside the block, never inside
/// it, so publication can sever the pairing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub mandate: Mandate,
    pub block: VoteBlock,
}

/// Platform's signed proof that it accepted a specific block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acknowledgment {
    #[serde(with = "hexutil")]
    pub block_digest: Digest,
    pub platform_signature: Signature,
}

impl Acknowledgment {
    pub fn signed_payload(block_digest: &Digest) -> [u8; 35] {
        let mut m = [0u8; 35];
        m[..3].copy_from_slice(b"ACK");
        m[3..].copy_from_slice(block_digest);
        m
    }

    pub fn verify(&self, platform: &PublicKey) -> bool {
        platform.verify(&Self::signed_payload(&self.block_digest), &self.platform_signature)
    }
}

/// One published unit: voted mandates and vote blocks, independently
/// shuffled, with nothing linking a row of one list to a row of the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublishedLists {
    pub list_a: Vec<VotedMandate>,
    pub list_b: Vec<VoteBlock>,
    pub chunk_index: Option<u32>,
}

/// Rejection codes a submission can earn, one per failed check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ValidationCode {
    BadMandateSignature,
    DuplicateMandate,
    UnknownStamp,
    StaleStamp,
    UsedStamp,
    DuplicateVoterStamp,
    InsufficientWork,
    InvalidChoice,
    OutsideWindow,
}

impl ValidationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationCode::BadMandateSignature => "BAD_MANDATE_SIGNATURE",
            ValidationCode::DuplicateMandate => "DUPLICATE_MANDATE",
            ValidationCode::UnknownStamp => "UNKNOWN_STAMP",
            ValidationCode::StaleStamp => "STALE_STAMP",
            ValidationCode::UsedStamp => "USED_STAMP",
            ValidationCode::DuplicateVoterStamp => "DUPLICATE_VOTER_STAMP",
            ValidationCode::InsufficientWork => "INSUFFICIENT_WORK",
            ValidationCode::InvalidChoice => "INVALID_CHOICE",
            ValidationCode::OutsideWindow => "OUTSIDE_WINDOW",
        }
    }
}

impl std::fmt::Display for ValidationCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rejected submission: exactly one code plus a human-readable detail.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("{code}: {detail}")]
pub struct ValidationError {
    pub code: ValidationCode,
    pub detail: String,
}

impl ValidationError {
    pub fn new(code: ValidationCode, detail: impl Into<String>) -> Self {
        ValidationError { code, detail: detail.into() }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EncodingError {
    #[error("vote is not one of the ballot choices")]
    InvalidChoice,
    #[error("vote of {len} octets exceeds the {VOTE_LEN_MAX}-octet field")]
    VoteTooLong { len: usize },
    #[error("platform stamp belongs to a different election")]
    ForeignStamp,
    #[error("malformed canonical encoding: {0}")]
    Malformed(&'static str),
}

/// Canonical preimage layout without ballot validation: exactly the octets
/// the given fields imply. Auditors use this to reproduce the digest of a
/// published block verbatim — even one whose vote was tampered out of the
/// ballot — so work recomputation stays independent of semantic checks.
pub fn encode_block_preimage_raw(
    election_id: &ElectionId,
    algorithm: HashAlgorithm,
    vote: &str,
    receipt: &Receipt,
) -> Result<Vec<u8>, EncodingError> {
    let vote_len = vote.len();
    if vote_len > VOTE_LEN_MAX {
        return Err(EncodingError::VoteTooLong { len: vote_len });
    }
    let mut out = Vec::with_capacity(4 + 1 + 16 + 2 + vote_len + PlatformStamp::LEN + 32);
    out.extend_from_slice(PREIMAGE_MAGIC);
    out.push(algorithm.id());
    out.extend_from_slice(election_id);
    out.extend_from_slice(&(vote_len as u16).to_be_bytes());
    out.extend_from_slice(vote.as_bytes());
    out.extend_from_slice(&receipt.platform_stamp.to_octets());
    out.extend_from_slice(&receipt.voter_stamp);
    Ok(out)
}

/// The canonical preimage an honest participant mines and hashes:
/// `"EDV1" || algorithm id || election id || vote length (2, big-endian) ||
/// vote || platform stamp (100) || voter stamp (32)`, with the nonce appended
/// separately by mining and verification. The mandate is deliberately absent:
/// an octet of it anywhere in here would re-link the two published lists.
pub fn encode_block_preimage(
    config: &ElectionConfig,
    vote: &str,
    receipt: &Receipt,
) -> Result<Vec<u8>, EncodingError> {
    if !config.ballot_choices.iter().any(|c| c == vote) {
        return Err(EncodingError::InvalidChoice);
    }
    if receipt.platform_stamp.election_id != config.election_id {
        return Err(EncodingError::ForeignStamp);
    }
    encode_block_preimage_raw(&config.election_id, config.hash_algorithm, vote, receipt)
}

/// Strict inverse of [`encode_block_preimage`]: accepts exactly the octet
/// sequences that encoder emits for this config, and nothing else.
pub fn decode_block_preimage(
    config: &ElectionConfig,
    bytes: &[u8],
) -> Result<(String, Receipt), EncodingError> {
    let fixed = 4 + 1 + 16 + 2;
    if bytes.len() < fixed {
        return Err(EncodingError::Malformed("truncated header"));
    }
    if &bytes[..4] != PREIMAGE_MAGIC {
        return Err(EncodingError::Malformed("bad magic"));
    }
    if bytes[4] != config.hash_algorithm.id() {
        return Err(EncodingError::Malformed("hash algorithm mismatch"));
    }
    let election_id: ElectionId = bytes[5..21].try_into().unwrap();
    if election_id != config.election_id {
        return Err(EncodingError::Malformed("election id mismatch"));
    }
    let vote_len = u16::from_be_bytes(bytes[21..23].try_into().unwrap()) as usize;
    let expected = fixed + vote_len + PlatformStamp::LEN + 32;
    if bytes.len() != expected {
        return Err(EncodingError::Malformed("length does not match layout"));
    }
    let vote = std::str::from_utf8(&bytes[23..23 + vote_len])
        .map_err(|_| EncodingError::Malformed("vote is not UTF-8"))?
        .to_owned();
    if !config.ballot_choices.iter().any(|c| c == &vote) {
        return Err(EncodingError::InvalidChoice);
    }
    let stamp_end = 23 + vote_len + PlatformStamp::LEN;
    let platform_stamp = PlatformStamp::from_octets(&bytes[23 + vote_len..stamp_end])?;
    if platform_stamp.election_id != config.election_id {
        return Err(EncodingError::ForeignStamp);
    }
    let voter_stamp: VoterStamp = bytes[stamp_end..].try_into().unwrap();
    Ok((vote, Receipt { platform_stamp, voter_stamp }))
}

/// The public commitment to a voter secret: its hash.
pub fn make_voter_stamp(secret: &VoterSecret) -> VoterStamp {
    pow::hash_block(&secret.0)
}

/// Collection accountability: only the secret's holder can claim the block.
pub fn check_ownership(secret: &VoterSecret, block: &VoteBlock) -> bool {
    make_voter_stamp(secret) == block.receipt.voter_stamp
}
