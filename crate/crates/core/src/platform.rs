//! The voting platform: issues freshness stamps, validates submissions under
//! a strict single-use regime, and publishes the two severed lists.
//!
//! Everything the platform privately knows — which stamp went out when, which
//! token arrived with which block — lives behind one mutex and is destroyed
//! at publication time by independently shuffling each list. A submission is
//! judged in one critical section, so no interleaving of concurrent callers
//! can spend a mandate, a stamp, or a voter stamp twice.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::keys::{Keypair, PublicKey};
use crate::model::{
    encode_block_preimage, Acknowledgment, ConfigError, ElectionConfig, PlatformStamp,
    PublishedLists, Submission, ValidationCode, ValidationError, VoteBlock, VotedMandate,
};
use crate::pow;
use crate::Timestamp;

/// Pre-validation gate for human-verification integrations. The default
/// admits everyone; a real deployment would put a CAPTCHA-style check here.
pub type ChallengeHook = Box<dyn Fn(&Submission) -> bool + Send + Sync>;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SubmitError {
    #[error(transparent)]
    Rejected(#[from] ValidationError),
    #[error("human challenge refused the submission")]
    ChallengeRefused,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PublishError {
    #[error("these records were already published")]
    AlreadyPublished,
    #[error("epoch {epoch} has not closed yet")]
    EpochOpen { epoch: u32 },
    #[error("the voting window has not closed yet")]
    ElectionOpen,
    #[error("epoch {epoch} does not exist in this election")]
    NoSuchEpoch { epoch: u32 },
}

/// An accepted submission with its arrival time; the platform's private
/// store, persisted only to platform-local files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptedSubmission {
    pub submission: Submission,
    pub received_at: Timestamp,
}

struct StampRecord {
    epoch: u32,
    issued_at: Timestamp,
    used: bool,
}

struct State {
    rng: ChaCha20Rng,
    issued_stamps: HashMap<[u8; 16], StampRecord>,
    used_tokens: HashSet<[u8; 32]>,
    seen_voter_stamps: HashSet<[u8; 32]>,
    accepted: Vec<AcceptedRecord>,
    published_epochs: HashSet<u32>,
    published_units: Vec<PublishedLists>,
    final_published: bool,
}

struct AcceptedRecord {
    submission: Submission,
    received_at: Timestamp,
    published: bool,
}

pub struct Platform {
    keypair: Keypair,
    config: ElectionConfig,
    authority_key: PublicKey,
    challenge: ChallengeHook,
    state: Mutex<State>,
}

impl Platform {
    pub fn new(
        keypair: Keypair,
        config: ElectionConfig,
        authority_key: PublicKey,
    ) -> Result<Self, ConfigError> {
        Self::with_rng(keypair, config, authority_key, ChaCha20Rng::from_entropy())
    }

    /// Deterministic stamp octets and shuffles, for reproducible runs.
    pub fn with_rng(
        keypair: Keypair,
        config: ElectionConfig,
        authority_key: PublicKey,
        rng: ChaCha20Rng,
    ) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Platform {
            keypair,
            config,
            authority_key,
            challenge: Box::new(|_| true),
            state: Mutex::new(State {
                rng,
                issued_stamps: HashMap::new(),
                used_tokens: HashSet::new(),
                seen_voter_stamps: HashSet::new(),
                accepted: Vec::new(),
                published_epochs: HashSet::new(),
                published_units: Vec::new(),
                final_published: false,
            }),
        })
    }

    pub fn with_challenge(mut self, hook: ChallengeHook) -> Self {
        self.challenge = hook;
        self
    }

    pub fn config(&self) -> &ElectionConfig {
        &self.config
    }

    pub fn public_key(&self) -> PublicKey {
        self.keypair.public_key()
    }

    /// Hands out a signed freshness anchor for the current epoch. Refused
    /// outside the voting window — in particular, never before it opens, so
    /// no one can start mining against a stamp ahead of the election.
    pub fn issue_stamp(&self, now: Timestamp) -> Result<PlatformStamp, ValidationError> {
        if !self.config.in_window(now) {
            return Err(ValidationError::new(
                ValidationCode::OutsideWindow,
                "stamps are only issued during the voting window",
            ));
        }
        let epoch = self.config.epoch_at(now);
        let mut state = self.state.lock().unwrap();
        let fresh = loop {
            let mut f = [0u8; 16];
            state.rng.fill_bytes(&mut f);
            if !state.issued_stamps.contains_key(&f) {
                break f;
            }
        };
        state
            .issued_stamps
            .insert(fresh, StampRecord { epoch, issued_at: now, used: false });
        drop(state);
        let signature = self
            .keypair
            .sign(&PlatformStamp::signed_payload(&self.config.election_id, epoch, &fresh));
        Ok(PlatformStamp {
            election_id: self.config.election_id,
            epoch,
            fresh,
            platform_signature: signature,
        })
    }

    /// Validates and stores one submission, spending its mandate token, its
    /// platform stamp, and its voter stamp forever. Checks run in a fixed
    /// order — window, mandate signature, token, stamp, voter stamp, choice,
    /// work — and the whole check-and-mark is a single critical section.
    pub fn submit(&self, submission: &Submission, now: Timestamp) -> Result<Acknowledgment, SubmitError> {
        if !(self.challenge)(submission) {
            return Err(SubmitError::ChallengeRefused);
        }
        let reject = |code, detail: &str| {
            Err(SubmitError::Rejected(ValidationError::new(code, detail)))
        };

        if !self.config.in_window(now) {
            return reject(ValidationCode::OutsideWindow, "submission outside the voting window");
        }

        let mandate = &submission.mandate;
        if mandate.election_id != self.config.election_id
            || !mandate.verify(&self.authority_key)
        {
            return reject(
                ValidationCode::BadMandateSignature,
                "mandate is not validly signed for this election",
            );
        }

        let block = &submission.block;
        let stamp = &block.receipt.platform_stamp;

        let mut state = self.state.lock().unwrap();

        if state.used_tokens.contains(&mandate.token) {
            return reject(ValidationCode::DuplicateMandate, "mandate token already spent");
        }

        // The stamp must be one of ours, octet for octet: recorded under its
        // fresh value, same epoch, same election, carrying our signature.
        let known = state.issued_stamps.get(&stamp.fresh).map(|r| (r.epoch, r.issued_at, r.used));
        let Some((epoch, issued_at, used)) = known else {
            return reject(ValidationCode::UnknownStamp, "platform stamp was never issued");
        };
        if stamp.epoch != epoch
            || stamp.election_id != self.config.election_id
            || !self.keypair.public_key().verify(
                &PlatformStamp::signed_payload(&stamp.election_id, stamp.epoch, &stamp.fresh),
                &stamp.platform_signature,
            )
        {
            return reject(ValidationCode::UnknownStamp, "stamp does not match any issued stamp");
        }
        if now.saturating_sub(issued_at) > self.config.stamp_ttl {
            return reject(ValidationCode::StaleStamp, "platform stamp has expired");
        }
        if used {
            return reject(ValidationCode::UsedStamp, "platform stamp already spent");
        }

        if state.seen_voter_stamps.contains(&block.receipt.voter_stamp) {
            return reject(
                ValidationCode::DuplicateVoterStamp,
                "voter stamp already appears in an accepted block",
            );
        }

        if !self.config.ballot_choices.iter().any(|c| c == &block.vote) {
            return reject(ValidationCode::InvalidChoice, "vote is not one of the ballot choices");
        }

        // Choice and stamp origin are already checked, so encoding succeeds.
        let prefix = encode_block_preimage(&self.config, &block.vote, &block.receipt)
            .expect("validated submission must encode");
        let digest = pow::block_digest(&prefix, block.nonce);
        let zeros = pow::leading_zero_bits(&digest);
        if zeros < self.config.work_floor {
            return Err(SubmitError::Rejected(ValidationError::new(
                ValidationCode::InsufficientWork,
                format!("{zeros} leading zero bits, floor is {}", self.config.work_floor),
            )));
        }

        state.used_tokens.insert(mandate.token);
        state.issued_stamps.get_mut(&stamp.fresh).unwrap().used = true;
        state.seen_voter_stamps.insert(block.receipt.voter_stamp);
        state.accepted.push(AcceptedRecord {
            submission: submission.clone(),
            received_at: now,
            published: false,
        });
        drop(state);

        let signature = self.keypair.sign(&Acknowledgment::signed_payload(&digest));
        Ok(Acknowledgment { block_digest: digest, platform_signature: signature })
    }

    /// Publishes one closed epoch's records: the voted mandates and the vote
    /// blocks of submissions that ARRIVED during that epoch, each list
    /// independently shuffled so row positions carry no pairing.
    pub fn publish_chunk(&self, epoch: u32, now: Timestamp) -> Result<PublishedLists, PublishError> {
        let mut state = self.state.lock().unwrap();
        let Some(epoch_end) = self.config.epoch_end(epoch) else {
            return Err(PublishError::NoSuchEpoch { epoch });
        };
        if state.final_published || state.published_epochs.contains(&epoch) {
            return Err(PublishError::AlreadyPublished);
        }
        if now <= epoch_end {
            return Err(PublishError::EpochOpen { epoch });
        }
        let lists = Self::take_unit(
            &self.config,
            &mut state,
            Some(epoch),
            |config, record| config.epoch_at(record.received_at) == epoch,
        );
        state.published_epochs.insert(epoch);
        state.published_units.push(lists.clone());
        Ok(lists)
    }

    /// Publishes everything not yet published. In final-only mode this is the
    /// single publication event; in chunked mode it sweeps the remainder.
    pub fn publish_final(&self, now: Timestamp) -> Result<PublishedLists, PublishError> {
        let mut state = self.state.lock().unwrap();
        if now <= self.config.voting_window.end {
            return Err(PublishError::ElectionOpen);
        }
        if state.final_published {
            return Err(PublishError::AlreadyPublished);
        }
        let lists = Self::take_unit(&self.config, &mut state, None, |_, _| true);
        state.final_published = true;
        state.published_units.push(lists.clone());
        Ok(lists)
    }

    /// Every unit published so far, in publication order.
    pub fn published(&self) -> Vec<PublishedLists> {
        self.state.lock().unwrap().published_units.clone()
    }

    /// Snapshot of the platform-private acceptance store.
    pub fn accepted(&self) -> Vec<AcceptedSubmission> {
        self.state
            .lock()
            .unwrap()
            .accepted
            .iter()
            .map(|r| AcceptedSubmission {
                submission: r.submission.clone(),
                received_at: r.received_at,
            })
            .collect()
    }

    fn take_unit(
        config: &ElectionConfig,
        state: &mut State,
        chunk_index: Option<u32>,
        belongs: impl Fn(&ElectionConfig, &AcceptedRecord) -> bool,
    ) -> PublishedLists {
        let mut list_a: Vec<VotedMandate> = Vec::new();
        let mut list_b: Vec<VoteBlock> = Vec::new();
        for record in state.accepted.iter_mut() {
            if !record.published && belongs(config, record) {
                record.published = true;
                list_a.push(VotedMandate::from(&record.submission.mandate));
                list_b.push(record.submission.block.clone());
            }
        }
        // Two draws from the CSPRNG: the permutations are independent, so
        // matching row positions across lists reveal nothing.
        list_a.shuffle(&mut state.rng);
        list_b.shuffle(&mut state.rng);
        PublishedLists { list_a, list_b, chunk_index }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authority::Authority;
    use crate::model::{make_voter_stamp, Mandate, Receipt, VoterSecret, VotingWindow};
    use crate::pow::{HashAlgorithm, MiningBudget};

    const START: Timestamp = 10_000;
    const END: Timestamp = 20_000;

    fn config() -> ElectionConfig {
        ElectionConfig {
            election_id: [0xE1; 16],
            ballot_choices: vec!["yes".into(), "no".into()],
            hash_algorithm: HashAlgorithm::Sha256,
            work_floor: 8,
            voting_window: VotingWindow { start: START, end: END },
            stamp_ttl: 600,
            chunk_interval: None,
        }
    }

    fn setup() -> (Authority, Platform) {
        let authority = Authority::with_rng(
            Keypair::from_seed(&[0xAA; 32]),
            ChaCha20Rng::seed_from_u64(1),
        );
        let platform = Platform::with_rng(
            Keypair::from_seed(&[0xBB; 32]),
            config(),
            authority.public_key(),
            ChaCha20Rng::seed_from_u64(2),
        )
        .unwrap();
        (authority, platform)
    }

    /// Builds an honest submission: fresh mandate, fresh stamp, first nonce
    /// clearing the floor.
    fn honest(
        authority: &Authority,
        platform: &Platform,
        citizen: &str,
        vote: &str,
        now: Timestamp,
    ) -> Submission {
        let mandate = authority
            .issue_mandate(&platform.config().election_id, citizen, now)
            .unwrap();
        let stamp = platform.issue_stamp(now).unwrap();
        submission_with(platform, mandate, stamp, citizen, vote)
    }

    fn submission_with(
        platform: &Platform,
        mandate: Mandate,
        stamp: PlatformStamp,
        secret_seed: &str,
        vote: &str,
    ) -> Submission {
        let mut secret = [0u8; 32];
        secret[..secret_seed.len().min(32)].copy_from_slice(
            &secret_seed.as_bytes()[..secret_seed.len().min(32)],
        );
        let receipt = Receipt {
            platform_stamp: stamp,
            voter_stamp: make_voter_stamp(&VoterSecret(secret)),
        };
        let prefix = encode_block_preimage(platform.config(), vote, &receipt).unwrap();
        let mined = pow::mine(&prefix, MiningBudget::MaxAttempts(1), platform.config().work_floor)
            .unwrap();
        Submission {
            mandate,
            block: VoteBlock { vote: vote.into(), receipt, nonce: mined.best_nonce },
        }
    }

    fn rejection(err: SubmitError) -> ValidationCode {
        match err {
            SubmitError::Rejected(e) => e.code,
            SubmitError::ChallengeRefused => panic!("expected a validation rejection"),
        }
    }

    #[test]
    fn honest_submission_earns_a_verifiable_acknowledgment() {
        let (authority, platform) = setup();
        let s = honest(&authority, &platform, "c1", "yes", START + 5);
        let ack = platform.submit(&s, START + 6).unwrap();
        assert!(ack.verify(&platform.public_key()));

        let prefix = encode_block_preimage(platform.config(), &s.block.vote, &s.block.receipt).unwrap();
        assert_eq!(ack.block_digest, pow::block_digest(&prefix, s.block.nonce));
        assert_eq!(platform.accepted().len(), 1);
    }

    #[test]
    fn a_mandate_spends_exactly_once() {
        let (authority, platform) = setup();
        let s = honest(&authority, &platform, "c1", "yes", START + 5);
        platform.submit(&s, START + 6).unwrap();

        // Same mandate, brand-new stamp, block, and voter stamp.
        let retry = submission_with(
            &platform,
            s.mandate,
            platform.issue_stamp(START + 7).unwrap(),
            "other-secret",
            "no",
        );
        let err = platform.submit(&retry, START + 8).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::DuplicateMandate);
        assert_eq!(platform.accepted().len(), 1);
    }

    #[test]
    fn work_below_the_floor_is_rejected() {
        let (authority, platform) = setup();
        let mut s = honest(&authority, &platform, "c1", "yes", START + 5);
        // Replace the nonce with one whose digest has exactly floor − 1 zeros.
        let prefix = encode_block_preimage(platform.config(), "yes", &s.block.receipt).unwrap();
        let floor = platform.config().work_floor;
        s.block.nonce = (0..)
            .find(|&n| pow::leading_zero_bits(&pow::block_digest(&prefix, n)) == floor - 1)
            .unwrap();
        let err = platform.submit(&s, START + 6).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::InsufficientWork);
    }

    #[test]
    fn unissued_stamps_are_unknown_even_with_a_valid_signature() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", START + 5).unwrap();

        // Correctly signed by the platform key, but never recorded as issued.
        let keypair = Keypair::from_seed(&[0xBB; 32]);
        let fresh = [0x11; 16];
        let forged = PlatformStamp {
            election_id: config().election_id,
            epoch: 0,
            fresh,
            platform_signature: keypair
                .sign(&PlatformStamp::signed_payload(&config().election_id, 0, &fresh)),
        };
        let s = submission_with(&platform, mandate, forged, "precompute", "yes");
        let err = platform.submit(&s, START + 6).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::UnknownStamp);
    }

    #[test]
    fn reissued_stamp_fields_must_match_the_issuance_record() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", START + 5).unwrap();
        let mut stamp = platform.issue_stamp(START + 5).unwrap();
        stamp.epoch = 3; // tampered; signature no longer covers the octets
        let s = submission_with(&platform, mandate, stamp, "tamper", "yes");
        let err = platform.submit(&s, START + 6).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::UnknownStamp);
    }

    #[test]
    fn expired_stamps_are_stale() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", START + 5).unwrap();
        let stamp = platform.issue_stamp(START + 5).unwrap();
        let s = submission_with(&platform, mandate, stamp, "slow", "yes");
        // ttl is 600; submit 601 seconds after issuance, still in the window.
        let err = platform.submit(&s, START + 5 + 601).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::StaleStamp);
    }

    #[test]
    fn a_stamp_spends_exactly_once() {
        let (authority, platform) = setup();
        let stamp = platform.issue_stamp(START + 5).unwrap();
        let m1 = authority.issue_mandate(&config().election_id, "c1", START + 5).unwrap();
        let m2 = authority.issue_mandate(&config().election_id, "c2", START + 5).unwrap();

        platform
            .submit(&submission_with(&platform, m1, stamp, "first", "yes"), START + 6)
            .unwrap();
        let err = platform
            .submit(&submission_with(&platform, m2, stamp, "second", "no"), START + 7)
            .unwrap_err();
        assert_eq!(rejection(err), ValidationCode::UsedStamp);
    }

    #[test]
    fn a_voter_stamp_appears_at_most_once() {
        let (authority, platform) = setup();
        let m1 = authority.issue_mandate(&config().election_id, "c1", START + 5).unwrap();
        let m2 = authority.issue_mandate(&config().election_id, "c2", START + 5).unwrap();
        let s1 = submission_with(&platform, m1, platform.issue_stamp(START + 5).unwrap(), "same", "yes");
        let s2 = submission_with(&platform, m2, platform.issue_stamp(START + 5).unwrap(), "same", "no");
        platform.submit(&s1, START + 6).unwrap();
        let err = platform.submit(&s2, START + 7).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::DuplicateVoterStamp);
    }

    #[test]
    fn off_ballot_votes_are_rejected() {
        let (authority, platform) = setup();
        let mandate = authority.issue_mandate(&config().election_id, "c1", START + 5).unwrap();
        let stamp = platform.issue_stamp(START + 5).unwrap();

        // Mine over a receipt as if "maybe" were on the ballot.
        let receipt = Receipt {
            platform_stamp: stamp,
            voter_stamp: make_voter_stamp(&VoterSecret([1u8; 32])),
        };
        let prefix = crate::model::encode_block_preimage_raw(
            &config().election_id,
            HashAlgorithm::Sha256,
            "maybe",
            &receipt,
        )
        .unwrap();
        let mined = pow::mine(&prefix, MiningBudget::MaxAttempts(1), 8).unwrap();
        let s = Submission {
            mandate,
            block: VoteBlock { vote: "maybe".into(), receipt, nonce: mined.best_nonce },
        };
        let err = platform.submit(&s, START + 6).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::InvalidChoice);
    }

    #[test]
    fn nothing_happens_outside_the_window() {
        let (authority, platform) = setup();
        assert_eq!(
            platform.issue_stamp(START - 1).unwrap_err().code,
            ValidationCode::OutsideWindow
        );
        assert_eq!(
            platform.issue_stamp(END + 1).unwrap_err().code,
            ValidationCode::OutsideWindow
        );
        assert!(platform.issue_stamp(START).is_ok());
        assert!(platform.issue_stamp(END).is_ok());

        let s = honest(&authority, &platform, "c1", "yes", START + 5);
        let err = platform.submit(&s, END + 1).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::OutsideWindow);
    }

    #[test]
    fn foreign_mandates_fail_the_signature_check() {
        let (_, platform) = setup();
        let other_authority = Authority::with_rng(
            Keypair::from_seed(&[0xCC; 32]),
            ChaCha20Rng::seed_from_u64(9),
        );
        let foreign = other_authority
            .issue_mandate(&config().election_id, "c1", START + 5)
            .unwrap();
        let stamp = platform.issue_stamp(START + 5).unwrap();
        let s = submission_with(&platform, foreign, stamp, "x", "yes");
        let err = platform.submit(&s, START + 6).unwrap_err();
        assert_eq!(rejection(err), ValidationCode::BadMandateSignature);

        // A mandate validly signed for a different election also fails here.
        let authority = Authority::with_rng(
            Keypair::from_seed(&[0xAA; 32]),
            ChaCha20Rng::seed_from_u64(1),
        );
        let cross = authority.issue_mandate(&[0x99; 16], "c1", START + 5).unwrap();
        let s2 = submission_with(&platform, cross, platform.issue_stamp(START + 5).unwrap(), "y", "yes");
        let err2 = platform.submit(&s2, START + 6).unwrap_err();
        assert_eq!(rejection(err2), ValidationCode::BadMandateSignature);
    }

    #[test]
    fn concurrent_duplicates_admit_exactly_one() {
        let (authority, platform) = setup();
        let s = honest(&authority, &platform, "c1", "yes", START + 5);
        let outcomes: Vec<bool> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..16)
                .map(|_| scope.spawn(|| platform.submit(&s, START + 6).is_ok()))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(outcomes.iter().filter(|ok| **ok).count(), 1);
        assert_eq!(platform.accepted().len(), 1);
    }

    #[test]
    fn stamps_are_unique_and_immediately_valid() {
        let (_, platform) = setup();
        let a = platform.issue_stamp(START + 1).unwrap();
        let b = platform.issue_stamp(START + 1).unwrap();
        assert_ne!(a.fresh, b.fresh);
        assert!(a.verify(&platform.public_key(), platform.config(), START + 1));
    }

    #[test]
    fn final_publication_sweeps_everything_once() {
        let (authority, platform) = setup();
        for (i, vote) in ["yes", "no", "yes"].iter().enumerate() {
            let s = honest(&authority, &platform, &format!("c{i}"), vote, START + 5);
            platform.submit(&s, START + 6).unwrap();
        }
        assert_eq!(platform.publish_final(END), Err(PublishError::ElectionOpen));

        let lists = platform.publish_final(END + 1).unwrap();
        assert_eq!(lists.list_a.len(), 3);
        assert_eq!(lists.list_b.len(), 3);
        assert_eq!(lists.chunk_index, None);
        for block in &lists.list_b {
            let prefix = encode_block_preimage(platform.config(), &block.vote, &block.receipt).unwrap();
            assert!(pow::verify_work(&prefix, block.nonce, platform.config().work_floor));
        }
        assert_eq!(platform.publish_final(END + 2), Err(PublishError::AlreadyPublished));
        assert_eq!(platform.published(), vec![lists]);
    }

    #[test]
    fn chunked_publication_buckets_by_arrival_epoch() {
        let authority = Authority::with_rng(
            Keypair::from_seed(&[0xAA; 32]),
            ChaCha20Rng::seed_from_u64(1),
        );
        let mut cfg = config();
        cfg.chunk_interval = Some(5_000); // epoch 0: 10000..=14999, epoch 1: 15000..=20000
        let platform = Platform::with_rng(
            Keypair::from_seed(&[0xBB; 32]),
            cfg,
            authority.public_key(),
            ChaCha20Rng::seed_from_u64(2),
        )
        .unwrap();

        let early = honest(&authority, &platform, "early", "yes", START + 10);
        platform.submit(&early, START + 11).unwrap();
        let late = honest(&authority, &platform, "late", "no", START + 6_000);
        platform.submit(&late, START + 6_001).unwrap();

        assert_eq!(
            platform.publish_chunk(0, START + 100),
            Err(PublishError::EpochOpen { epoch: 0 })
        );
        let chunk0 = platform.publish_chunk(0, START + 5_000).unwrap();
        assert_eq!(chunk0.list_a.len(), 1);
        assert_eq!(chunk0.chunk_index, Some(0));
        assert_eq!(platform.publish_chunk(0, START + 5_001), Err(PublishError::AlreadyPublished));
        assert_eq!(platform.publish_chunk(7, END + 1), Err(PublishError::NoSuchEpoch { epoch: 7 }));

        // The final sweep picks up epoch 1's record.
        let rest = platform.publish_final(END + 1).unwrap();
        assert_eq!(rest.list_a.len(), 1);
        assert_eq!(rest.list_b[0].vote, "no");
        assert_eq!(platform.published().len(), 2);
    }

    #[test]
    fn published_units_conserve_content_regardless_of_order() {
        let (authority, platform) = setup();
        let mut sent_tokens = HashSet::new();
        let mut sent_stamps = HashSet::new();
        for i in 0..5 {
            let s = honest(&authority, &platform, &format!("c{i}"), "yes", START + 5);
            sent_tokens.insert(s.mandate.token);
            sent_stamps.insert(s.block.receipt.voter_stamp);
            platform.submit(&s, START + 6).unwrap();
        }
        let lists = platform.publish_final(END + 1).unwrap();
        let got_tokens: HashSet<_> = lists.list_a.iter().map(|m| m.token).collect();
        let got_stamps: HashSet<_> = lists.list_b.iter().map(|b| b.receipt.voter_stamp).collect();
        assert_eq!(got_tokens, sent_tokens);
        assert_eq!(got_stamps, sent_stamps);
    }

    #[test]
    fn challenge_hook_gates_submission() {
        let (authority, platform) = setup();
        let s = honest(&authority, &platform, "c1", "yes", START + 5);
        let authority_key = authority.public_key();
        let gated = Platform::with_rng(
            Keypair::from_seed(&[0xBB; 32]),
            config(),
            authority_key,
            ChaCha20Rng::seed_from_u64(3),
        )
        .unwrap()
        .with_challenge(Box::new(|_| false));
        assert_eq!(gated.submit(&s, START + 6), Err(SubmitError::ChallengeRefused));
        assert!(gated.accepted().is_empty());
    }
}
