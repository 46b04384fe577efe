//! The voter's client: fetch a stamp, commit to a fresh secret, mine, submit,
//! keep the receipt, and later check the published lists with it.
//!
//! Casting is all-or-nothing: the caller either gets a [`ReceiptFile`] whose
//! acknowledgment has been verified against the platform's key, or a typed
//! error — never a half-cast vote. The receipt holds the only copy of the
//! voter's secret; nothing sent over the wire or published contains it.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::hexutil;
use crate::keys::PublicKey;
use crate::model::{
    check_ownership, encode_block_preimage, encode_block_preimage_raw, make_voter_stamp,
    Acknowledgment, ElectionConfig, ElectionId, Mandate, PlatformStamp, PublishedLists, Receipt,
    Submission, ValidationCode, ValidationError, VoteBlock, VoterSecret,
};
use crate::platform::{Platform, SubmitError};
use crate::pow::{self, HashAlgorithm, MiningBudget, Nonce, PowError};
use crate::Timestamp;

/// What `cast` leaves on the voter's device: everything needed to later find
/// and prove their own record on the published lists, and nothing anyone
/// else could use to do the same.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiptFile {
    #[serde(with = "hexutil")]
    pub election_id: ElectionId,
    pub vote: String,
    pub voter_secret: VoterSecret,
    pub platform_stamp: PlatformStamp,
    pub nonce: Nonce,
    pub achieved_zeros: u32,
    pub acknowledgment: Acknowledgment,
}

impl ReceiptFile {
    /// The block this receipt claims was published, rebuilt from scratch.
    pub fn reconstruct_block(&self) -> VoteBlock {
        VoteBlock {
            vote: self.vote.clone(),
            receipt: Receipt {
                platform_stamp: self.platform_stamp,
                voter_stamp: make_voter_stamp(&self.voter_secret),
            },
            nonce: self.nonce,
        }
    }

    /// Writes the receipt as one JSON document readable only by its owner.
    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("receipt serializes");
        #[cfg(unix)]
        {
            use std::io::Write;
            use std::os::unix::fs::OpenOptionsExt;
            let mut f = std::fs::OpenOptions::new()
                .write(true)
                .create(true)
                .truncate(true)
                .mode(0o600)
                .open(path)?;
            f.write_all(json.as_bytes())?;
            f.write_all(b"\n")
        }
        #[cfg(not(unix))]
        std::fs::write(path, json + "\n")
    }

    pub fn load(path: &std::path::Path) -> std::io::Result<Self> {
        let json = std::fs::read_to_string(path)?;
        serde_json::from_str(&json)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// The voter's view of a platform: stamp issuance, submission, the platform
/// key for acknowledgment checks, and the clock the platform lives on.
pub trait PlatformClient {
    fn now(&self) -> Timestamp;
    fn fetch_stamp(&self) -> Result<PlatformStamp, CastError>;
    fn submit(&self, submission: &Submission) -> Result<Acknowledgment, CastError>;
    fn platform_key(&self) -> Result<PublicKey, CastError>;
}

/// In-process client: talks to a [`Platform`] directly at a caller-fixed
/// instant. The simulator and tests drive elections through this.
pub struct LocalClient<'a> {
    platform: &'a Platform,
    now: Timestamp,
}

impl<'a> LocalClient<'a> {
    pub fn new(platform: &'a Platform, now: Timestamp) -> Self {
        LocalClient { platform, now }
    }
}

impl PlatformClient for LocalClient<'_> {
    fn now(&self) -> Timestamp {
        self.now
    }

    fn fetch_stamp(&self) -> Result<PlatformStamp, CastError> {
        self.platform.issue_stamp(self.now).map_err(CastError::Rejected)
    }

    fn submit(&self, submission: &Submission) -> Result<Acknowledgment, CastError> {
        self.platform.submit(submission, self.now).map_err(|e| match e {
            SubmitError::Rejected(v) => CastError::Rejected(v),
            SubmitError::ChallengeRefused => CastError::ChallengeRefused,
        })
    }

    fn platform_key(&self) -> Result<PublicKey, CastError> {
        Ok(self.platform.public_key())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CastError {
    /// The platform (or a local pre-check) refused the submission.
    #[error(transparent)]
    Rejected(#[from] ValidationError),
    #[error("the platform's human challenge refused the submission")]
    ChallengeRefused,
    /// The acknowledgment signature did not verify — evidence the platform
    /// is not who it claims, or is signing garbage.
    #[error("platform acknowledgment failed signature verification")]
    AckInvalid,
    #[error("mining failed: {0}")]
    Mining(#[from] PowError),
    /// Could not reach the platform at all.
    #[error("transport: {0}")]
    Transport(String),
}

/// Casts one vote end to end and returns the receipt. The voter's secret is
/// generated here from OS entropy and leaves only inside the returned value.
pub fn cast<C: PlatformClient>(
    config: &ElectionConfig,
    mandate: &Mandate,
    vote: &str,
    budget: MiningBudget,
    client: &C,
) -> Result<ReceiptFile, CastError> {
    cast_with_rng(config, mandate, vote, budget, client, &mut ChaCha20Rng::from_entropy())
}

/// [`cast`] with a caller-supplied randomness source, for reproducible runs.
pub fn cast_with_rng<C: PlatformClient>(
    config: &ElectionConfig,
    mandate: &Mandate,
    vote: &str,
    budget: MiningBudget,
    client: &C,
    rng: &mut ChaCha20Rng,
) -> Result<ReceiptFile, CastError> {
    // Refuse off-ballot votes before spending any work or even a stamp.
    if !config.ballot_choices.iter().any(|c| c == vote) {
        return Err(CastError::Rejected(ValidationError::new(
            ValidationCode::InvalidChoice,
            "vote is not one of the ballot choices",
        )));
    }

    let platform_stamp = client.fetch_stamp()?;
    let voter_secret = VoterSecret::generate(rng);
    let receipt = Receipt { platform_stamp, voter_stamp: make_voter_stamp(&voter_secret) };
    let prefix = encode_block_preimage(config, vote, &receipt).map_err(|_| {
        CastError::Rejected(ValidationError::new(
            ValidationCode::UnknownStamp,
            "the issued stamp does not fit this election's config",
        ))
    })?;

    let mined = pow::mine(&prefix, budget, config.work_floor)?;

    let submission = Submission {
        mandate: *mandate,
        block: VoteBlock { vote: vote.to_owned(), receipt, nonce: mined.best_nonce },
    };
    let acknowledgment = client.submit(&submission)?;

    // Check the acknowledgment on the spot: it must carry the platform's
    // signature over exactly the digest we mined.
    if acknowledgment.block_digest != mined.digest
        || !acknowledgment.verify(&client.platform_key()?)
    {
        return Err(CastError::AckInvalid);
    }

    Ok(ReceiptFile {
        election_id: config.election_id,
        vote: vote.to_owned(),
        voter_secret,
        platform_stamp,
        nonce: mined.best_nonce,
        achieved_zeros: mined.best_zeros,
        acknowledgment,
    })
}

/// Scans the published lists for the voter's own block: one that their secret
/// owns, carrying their vote and nonce, with the claimed work intact. `false`
/// means the record was omitted or altered — the acknowledgment in the
/// receipt is the voter's counter-evidence.
pub fn self_verify(receipt: &ReceiptFile, published: &[PublishedLists]) -> bool {
    published.iter().flat_map(|unit| &unit.list_b).any(|block| {
        check_ownership(&receipt.voter_secret, block)
            && block.vote == receipt.vote
            && block.nonce == receipt.nonce
            && encode_block_preimage_raw(
                &receipt.election_id,
                HashAlgorithm::Sha256,
                &block.vote,
                &block.receipt,
            )
            .map(|prefix| pow::verify_work(&prefix, block.nonce, receipt.achieved_zeros))
            .unwrap_or(false)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authority::Authority;
    use crate::keys::Keypair;
    use crate::model::VotingWindow;

    const START: Timestamp = 50_000;
    const NOW: Timestamp = 50_010;

    fn config() -> ElectionConfig {
        ElectionConfig {
            election_id: [0xE2; 16],
            ballot_choices: vec!["yes".into(), "no".into()],
            hash_algorithm: HashAlgorithm::Sha256,
            work_floor: 8,
            voting_window: VotingWindow { start: START, end: START + 1_000 },
            stamp_ttl: 600,
            chunk_interval: None,
        }
    }

    fn setup() -> (Authority, Platform) {
        let authority = Authority::with_rng(
            Keypair::from_seed(&[0x01; 32]),
            ChaCha20Rng::seed_from_u64(21),
        );
        let platform = Platform::with_rng(
            Keypair::from_seed(&[0x02; 32]),
            config(),
            authority.public_key(),
            ChaCha20Rng::seed_from_u64(22),
        )
        .unwrap();
        (authority, platform)
    }

    fn cast_seeded(
        platform: &Platform,
        mandate: &Mandate,
        vote: &str,
        seed: u64,
    ) -> Result<ReceiptFile, CastError> {
        let client = LocalClient::new(platform, NOW);
        cast_with_rng(
            &config(),
            mandate,
            vote,
            MiningBudget::MaxAttempts(1),
            &client,
            &mut ChaCha20Rng::seed_from_u64(seed),
        )
    }

    #[test]
    fn honest_cast_produces_a_sound_receipt() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        let receipt = cast_seeded(&platform, &mandate, "yes", 1).unwrap();

        assert!(receipt.achieved_zeros >= config().work_floor);
        assert!(receipt.acknowledgment.verify(&platform.public_key()));

        // The receipt alone reproduces the digest the platform signed.
        let block = receipt.reconstruct_block();
        let prefix = encode_block_preimage(&config(), &block.vote, &block.receipt).unwrap();
        assert_eq!(
            pow::block_digest(&prefix, block.nonce),
            receipt.acknowledgment.block_digest
        );
    }

    #[test]
    fn off_ballot_votes_fail_before_any_contact() {
        struct Unreachable;
        impl PlatformClient for Unreachable {
            fn now(&self) -> Timestamp {
                NOW
            }
            fn fetch_stamp(&self) -> Result<PlatformStamp, CastError> {
                panic!("cast must not fetch a stamp for an off-ballot vote")
            }
            fn submit(&self, _: &Submission) -> Result<Acknowledgment, CastError> {
                panic!("cast must not submit an off-ballot vote")
            }
            fn platform_key(&self) -> Result<PublicKey, CastError> {
                panic!("no key needed")
            }
        }
        let mandate = Mandate {
            token: [0u8; 32],
            election_id: config().election_id,
            authority_signature: crate::keys::Signature([0u8; 64]),
        };
        let err = cast(&config(), &mandate, "maybe", MiningBudget::MaxAttempts(1), &Unreachable)
            .unwrap_err();
        match err {
            CastError::Rejected(e) => assert_eq!(e.code, ValidationCode::InvalidChoice),
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn recasting_a_spent_mandate_surfaces_the_duplicate() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        cast_seeded(&platform, &mandate, "yes", 2).unwrap();
        let err = cast_seeded(&platform, &mandate, "no", 3).unwrap_err();
        match err {
            CastError::Rejected(e) => assert_eq!(e.code, ValidationCode::DuplicateMandate),
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn tampered_acknowledgments_are_caught_at_cast_time() {
        struct TamperingClient<'a>(LocalClient<'a>);
        impl PlatformClient for TamperingClient<'_> {
            fn now(&self) -> Timestamp {
                self.0.now()
            }
            fn fetch_stamp(&self) -> Result<PlatformStamp, CastError> {
                self.0.fetch_stamp()
            }
            fn submit(&self, s: &Submission) -> Result<Acknowledgment, CastError> {
                let mut ack = self.0.submit(s)?;
                ack.platform_signature.0[0] ^= 1;
                Ok(ack)
            }
            fn platform_key(&self) -> Result<PublicKey, CastError> {
                self.0.platform_key()
            }
        }
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        let client = TamperingClient(LocalClient::new(&platform, NOW));
        let err = cast_with_rng(
            &config(),
            &mandate,
            "yes",
            MiningBudget::MaxAttempts(1),
            &client,
            &mut ChaCha20Rng::seed_from_u64(4),
        )
        .unwrap_err();
        assert_eq!(err, CastError::AckInvalid);
    }

    #[test]
    fn self_verification_finds_exactly_the_voters_own_record() {
        let (authority, platform) = setup();
        let m1 = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        let m2 = authority.issue_mandate(&config().election_id, "c2", NOW).unwrap();
        let r1 = cast_seeded(&platform, &m1, "yes", 5).unwrap();
        let r2 = cast_seeded(&platform, &m2, "no", 6).unwrap();

        let published = vec![platform.publish_final(START + 1_001).unwrap()];
        assert!(self_verify(&r1, &published));
        assert!(self_verify(&r2, &published));

        // A receipt only ever matches its own record.
        let mut stolen = r1.clone();
        stolen.vote = r2.vote.clone();
        stolen.nonce = r2.nonce;
        assert!(!self_verify(&stolen, &published));
    }

    #[test]
    fn altered_or_foreign_lists_fail_self_verification() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        let receipt = cast_seeded(&platform, &mandate, "yes", 7).unwrap();
        let honest = vec![platform.publish_final(START + 1_001).unwrap()];
        assert!(self_verify(&receipt, &honest));

        // One character of the published vote flipped: ownership still
        // matches, the vote no longer does.
        let mut altered = honest.clone();
        altered[0].list_b[0].vote = "no".into();
        assert!(!self_verify(&receipt, &altered));

        // Someone else's election: no block is ours.
        assert!(!self_verify(&receipt, &[]));
        let (other_authority, other_platform) = {
            let a = Authority::with_rng(
                Keypair::from_seed(&[0x0A; 32]),
                ChaCha20Rng::seed_from_u64(31),
            );
            let mut c = config();
            c.election_id = [0xF0; 16];
            let p = Platform::with_rng(
                Keypair::from_seed(&[0x0B; 32]),
                c,
                a.public_key(),
                ChaCha20Rng::seed_from_u64(32),
            )
            .unwrap();
            (a, p)
        };
        let mut other_config = config();
        other_config.election_id = [0xF0; 16];
        let om = other_authority
            .issue_mandate(&other_config.election_id, "c9", NOW)
            .unwrap();
        let client = LocalClient::new(&other_platform, NOW);
        cast_with_rng(
            &other_config,
            &om,
            "yes",
            MiningBudget::MaxAttempts(1),
            &client,
            &mut ChaCha20Rng::seed_from_u64(8),
        )
        .unwrap();
        let foreign = vec![other_platform.publish_final(START + 1_001).unwrap()];
        assert!(!self_verify(&receipt, &foreign));
    }

    #[test]
    fn the_secret_never_leaves_the_receipt() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        let receipt = cast_seeded(&platform, &mandate, "yes", 9).unwrap();
        let secret_hex = hex::encode(receipt.voter_secret.0);

        // Scan everything that crossed the wire or got published.
        let accepted = serde_json::to_string(&platform.accepted()).unwrap();
        assert!(!accepted.contains(&secret_hex));
        let published = serde_json::to_string(&platform.publish_final(START + 1_001).unwrap()).unwrap();
        assert!(!published.contains(&secret_hex));

        // The receipt naturally contains it — that file stays with the voter.
        let receipt_json = serde_json::to_string(&receipt).unwrap();
        assert!(receipt_json.contains(&secret_hex));
    }

    #[test]
    fn receipts_round_trip_through_disk_with_owner_only_access() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", NOW).unwrap();
        let receipt = cast_seeded(&platform, &mandate, "no", 10).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("receipt.json");
        receipt.save(&path).unwrap();
        assert_eq!(ReceiptFile::load(&path).unwrap(), receipt);

        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            let mode = std::fs::metadata(&path).unwrap().permissions().mode();
            assert_eq!(mode & 0o777, 0o600);
        }
    }
}
