//! Independent verification of a published election: re-derive everything
//! from the public artifacts, price what tampering would have cost, and trust
//! no one's arithmetic but your own.
//!
//! The auditor's entire worldview is the published lists, the two public
//! keys, and the election config — the same inputs any citizen has. Work is
//! recomputed from the canonical encoding, never read off a claimed field;
//! signatures are re-checked; counts are compared; and the final report says
//! what fraction of the outcome a given adversary could have rewritten.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::keys::PublicKey;
use crate::model::{encode_block_preimage_raw, ElectionConfig, PublishedLists, VoteBlock};
use crate::pow::{self, total_work, WorkEstimate};

/// Where in the published artifacts a failure sits: which list, which
/// published unit, which record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RecordLocator {
    pub list: ListSide,
    pub unit: u32,
    pub index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ListSide {
    A,
    B,
}

impl std::fmt::Display for RecordLocator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.list {
            ListSide::A => 'a',
            ListSide::B => 'b',
        };
        write!(f, "unit {} list_{side}[{}]", self.unit, self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuditFailureKind {
    BadMandateSignature,
    DuplicateToken,
    InsufficientWork,
    StampInvalid,
    InvalidChoice,
    DuplicateVoterStamp,
}

impl AuditFailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BadMandateSignature => "BAD_MANDATE_SIGNATURE",
            Self::DuplicateToken => "DUPLICATE_TOKEN",
            Self::InsufficientWork => "INSUFFICIENT_WORK",
            Self::StampInvalid => "STAMP_INVALID",
            Self::InvalidChoice => "INVALID_CHOICE",
            Self::DuplicateVoterStamp => "DUPLICATE_VOTER_STAMP",
        }
    }
}

impl std::fmt::Display for AuditFailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditFailure {
    pub locator: RecordLocator,
    pub kind: AuditFailureKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditCounts {
    pub list_a: u64,
    pub list_b: u64,
    pub eligible: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub counts: AuditCounts,
    /// Sorted by locator; empty in an honest election.
    pub failures: Vec<AuditFailure>,
    /// Sum of 2^z over every recomputed block difficulty — the hashing the
    /// published outcome is backed by.
    pub total_work: WorkEstimate,
    /// Votes per ballot choice, zero-filled, counting only blocks whose
    /// per-record checks passed.
    pub tally: BTreeMap<String, u64>,
    pub passed: bool,
}

/// How much of the election a given adversary could have silently rewritten.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeryAssessment {
    /// hashrate × seconds, exact.
    pub adversary_hash_budget: WorkEstimate,
    pub forgeable_count: u64,
    /// forgeable_count over the number of published blocks, exact.
    #[serde(with = "ratio_serde")]
    pub forgeable_fraction: Ratio<u64>,
}

mod ratio_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wire {
        numerator: u64,
        denominator: u64,
    }

    pub fn serialize<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
        Wire { numerator: *r.numer(), denominator: *r.denom() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u64>, D::Error> {
        let w = Wire::deserialize(d)?;
        if w.denominator == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Ratio::new(w.numerator, w.denominator))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AuditError {
    #[error("vote {0:?} is not a ballot choice")]
    UnknownChoice(String),
}

/// Re-derives the election outcome from published artifacts alone.
///
/// Every list-A record gets its authority signature checked and its token
/// scanned for duplicates. Every list-B block is re-encoded canonically, its
/// digest and leading zeros recomputed (the first check, so any mutation of
/// any field collapses into missing work), its stamp re-verified at the
/// stamp's own epoch, its vote checked against the ballot, and its voter
/// stamp scanned for duplicates. `eligible`, when the authority discloses
/// it, bounds how many voted mandates may exist at all.
pub fn audit(
    published: &[PublishedLists],
    authority_key: &PublicKey,
    platform_key: &PublicKey,
    config: &ElectionConfig,
    eligible: Option<u64>,
) -> AuditReport {
    let mut failures: Vec<AuditFailure> = Vec::new();
    let mut tally: BTreeMap<String, u64> =
        config.ballot_choices.iter().map(|c| (c.clone(), 0)).collect();
    let mut recomputed_zeros: Vec<u32> = Vec::new();
    let mut count_a: u64 = 0;
    let mut count_b: u64 = 0;
    let mut seen_tokens: HashMap<[u8; 32], RecordLocator> = HashMap::new();
    let mut seen_voter_stamps: HashMap<[u8; 32], RecordLocator> = HashMap::new();

    for (unit_idx, unit) in published.iter().enumerate() {
        for (idx, mandate) in unit.list_a.iter().enumerate() {
            count_a += 1;
            let locator = RecordLocator {
                list: ListSide::A,
                unit: unit_idx as u32,
                index: idx as u32,
            };
            if !mandate.verify(authority_key, &config.election_id) {
                failures.push(AuditFailure {
                    locator,
                    kind: AuditFailureKind::BadMandateSignature,
                    detail: "authority signature does not verify for this election".into(),
                });
            }
            if let Some(first) = seen_tokens.get(&mandate.token) {
                failures.push(AuditFailure {
                    locator,
                    kind: AuditFailureKind::DuplicateToken,
                    detail: format!("token already published at {first}"),
                });
            } else {
                seen_tokens.insert(mandate.token, locator);
            }
        }

        for (idx, block) in unit.list_b.iter().enumerate() {
            count_b += 1;
            let locator = RecordLocator {
                list: ListSide::B,
                unit: unit_idx as u32,
                index: idx as u32,
            };
            if let Some(kind_detail) = check_block(block, platform_key, config, &mut recomputed_zeros)
            {
                failures.push(AuditFailure {
                    locator,
                    kind: kind_detail.0,
                    detail: kind_detail.1,
                });
            } else {
                *tally.get_mut(&block.vote).expect("choice-checked vote") += 1;
            }
            if let Some(first) = seen_voter_stamps.get(&block.receipt.voter_stamp) {
                failures.push(AuditFailure {
                    locator,
                    kind: AuditFailureKind::DuplicateVoterStamp,
                    detail: format!("voter stamp already published at {first}"),
                });
            } else {
                seen_voter_stamps.insert(block.receipt.voter_stamp, locator);
            }
        }
    }

    failures.sort_by_key(|f| f.locator);
    let passed = failures.is_empty()
        && count_a == count_b
        && eligible.is_none_or(|e| count_a <= e);

    AuditReport {
        counts: AuditCounts { list_a: count_a, list_b: count_b, eligible },
        failures,
        total_work: total_work(recomputed_zeros).expect("zeros come from 256-bit digests"),
        tally,
        passed,
    }
}

/// The per-block checks in audit order; `Some` is the first failure. The
/// recomputed difficulty is recorded for every block that encodes, failed or
/// not — total work reflects the artifacts as published.
fn check_block(
    block: &VoteBlock,
    platform_key: &PublicKey,
    config: &ElectionConfig,
    recomputed_zeros: &mut Vec<u32>,
) -> Option<(AuditFailureKind, String)> {
    let Ok(prefix) = encode_block_preimage_raw(
        &config.election_id,
        config.hash_algorithm,
        &block.vote,
        &block.receipt,
    ) else {
        return Some((
            AuditFailureKind::InvalidChoice,
            "vote does not fit the canonical encoding".into(),
        ));
    };
    let zeros = pow::leading_zero_bits(&pow::block_digest(&prefix, block.nonce));
    recomputed_zeros.push(zeros);
    if zeros < config.work_floor {
        return Some((
            AuditFailureKind::InsufficientWork,
            format!("recomputed {zeros} leading zero bits, floor is {}", config.work_floor),
        ));
    }

    // Freshness is judged at the stamp's own epoch: the auditor can verify
    // the work was anchored in-window, not when the audit happens to run.
    let stamp = &block.receipt.platform_stamp;
    let stamp_ok = config
        .epoch_time(stamp.epoch)
        .is_some_and(|t| stamp.verify(platform_key, config, t));
    if !stamp_ok {
        return Some((
            AuditFailureKind::StampInvalid,
            "platform stamp fails signature or epoch validation".into(),
        ));
    }

    if !config.ballot_choices.iter().any(|c| c == &block.vote) {
        return Some((
            AuditFailureKind::InvalidChoice,
            format!("vote {:?} is not on the ballot", block.vote),
        ));
    }
    None
}

/// Exact per-choice counts over blocks, every ballot choice present.
pub fn tally(
    blocks: &[VoteBlock],
    config: &ElectionConfig,
) -> Result<BTreeMap<String, u64>, AuditError> {
    let mut counts: BTreeMap<String, u64> =
        config.ballot_choices.iter().map(|c| (c.clone(), 0)).collect();
    for block in blocks {
        match counts.get_mut(&block.vote) {
            Some(n) => *n += 1,
            None => return Err(AuditError::UnknownChoice(block.vote.clone())),
        }
    }
    Ok(counts)
}

/// Prices a rewrite attack: an adversary with `hashrate` hashes/second for
/// `seconds` replaces published blocks, re-mining each to its original
/// difficulty so the audit trail stays intact. Cheapest blocks first
/// maximizes how many fit in the budget, so the greedy count is the true
/// optimum.
pub fn forgery_budget(zeros_list: &[u32], hashrate: u64, seconds: u64) -> ForgeryAssessment {
    let budget = BigUint::from(hashrate) * BigUint::from(seconds);
    let mut costs: Vec<u32> = zeros_list.to_vec();
    costs.sort_unstable();

    let mut spent = BigUint::default();
    let mut forgeable_count: u64 = 0;
    for z in costs {
        let cost = pow::work_estimate(z).expect("zeros come from 256-bit digests");
        if &spent + cost.hash_count() > budget {
            break;
        }
        spent += cost.hash_count();
        forgeable_count += 1;
    }

    let forgeable_fraction = if zeros_list.is_empty() {
        Ratio::new(0, 1)
    } else {
        Ratio::new(forgeable_count, zeros_list.len() as u64)
    };
    ForgeryAssessment {
        adversary_hash_budget: WorkEstimate::from(budget),
        forgeable_count,
        forgeable_fraction,
    }
}

/// Exhaustive reference for small inputs: the largest subset of blocks whose
/// total re-mining cost fits the budget. Exponential; exists to pin the
/// greedy implementation against in tests.
#[cfg(test)]
pub(crate) fn forgeable_count_exhaustive(zeros_list: &[u32], budget: &BigUint) -> u64 {
    let n = zeros_list.len();
    assert!(n <= 16, "exhaustive oracle is exponential");
    let mut best = 0u64;
    for mask in 0u32..(1 << n) {
        let mut cost = BigUint::default();
        for (i, &z) in zeros_list.iter().enumerate() {
            if mask & (1 << i) != 0 {
                cost += BigUint::from(1u8) << z;
            }
        }
        if cost <= *budget {
            best = best.max(u64::from(mask.count_ones()));
        }
    }
    best
}
