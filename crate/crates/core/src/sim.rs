//! Deterministic in-process election harness: a seeded population of voters
//! with heterogeneous mining budgets, one of several adversaries, and a full
//! publish–audit–self-verify cycle at the end.
//!
//! Everything runs against the real modules through their public operations —
//! no private-state shortcuts — so every scenario doubles as an integration
//! test. Time is virtual: the scenario's voting window is driven by injected
//! timestamps, never the wall clock. One seed, one report: reruns are
//! byte-identical in sequential mode.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::audit::{audit, forgery_budget, AuditReport};
use crate::authority::Authority;
use crate::keys::Keypair;
use crate::model::{
    encode_block_preimage, make_voter_stamp, ConfigError, ElectionConfig, Mandate, PlatformStamp,
    PublishedLists, Receipt, Submission, ValidationCode, VoteBlock, VoterSecret,
};
use crate::platform::{Platform, SubmitError};
use crate::pow::{self, MiningBudget};
use crate::voter::{cast_with_rng, CastError, LocalClient, ReceiptFile};
use crate::Timestamp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub n_voters: u32,
    /// Probability of each ballot choice; must cover only real choices and
    /// sum to 1.
    pub vote_distribution: BTreeMap<String, f64>,
    /// Relative weights over mining budgets; sampled independently per voter.
    pub budget_distribution: Vec<WeightedBudget>,
    pub config: ElectionConfig,
    pub adversary: Adversary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBudget {
    pub budget: MiningBudget,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Adversary {
    /// Everyone is honest.
    None,
    /// Work stockpiled before the election: blocks mined over stamps the
    /// platform never issued, plus stamps obtained early and submitted after
    /// their ttl.
    Precompute,
    /// Every voter re-submits their mandate a second time.
    MandateReuse,
    /// Random bit flips in the published vote blocks, after publication.
    TamperPublished { bits_to_flip: u32 },
    /// A corrupt authority mints unlogged mandates and votes them properly.
    ThrowIn { extra_mandates: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Votes per choice among honest accepted submissions — what the count
    /// should be, independent of anything published.
    pub ground_truth_tally: BTreeMap<String, u64>,
    pub audit_report: AuditReport,
    pub per_voter: Vec<VoterOutcome>,
    pub adversary_outcome: AdversaryOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterOutcome {
    pub accepted: bool,
    /// Rejection code name when the cast failed, e.g. "DUPLICATE_MANDATE".
    pub error: Option<String>,
    /// 0 when the cast never produced an accepted block.
    pub achieved_zeros: u32,
    pub self_verified: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryOutcome {
    pub attempted: u64,
    pub succeeded: u64,
    /// Submission-time adversaries count as detected when every attempt was
    /// rejected with the expected code; publication-time adversaries when
    /// the audit fails.
    pub detected: bool,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario needs at least one voter")]
    NoVoters,
    #[error("vote probabilities must sum to 1 (got {0})")]
    BadProbabilitySum(f64),
    #[error("vote distribution names {0:?}, which is not a ballot choice")]
    UnknownChoice(String),
    #[error("budget distribution must be non-empty with non-negative weights summing above 0")]
    BadBudgetWeights,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.config.validate()?;
        if self.n_voters == 0 {
            return Err(ScenarioError::NoVoters);
        }
        let sum: f64 = self.vote_distribution.values().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(ScenarioError::BadProbabilitySum(sum));
        }
        for choice in self.vote_distribution.keys() {
            if !self.config.ballot_choices.contains(choice) {
                return Err(ScenarioError::UnknownChoice(choice.clone()));
            }
        }
        let weights = &self.budget_distribution;
        if weights.is_empty()
            || weights.iter().any(|w| w.weight < 0.0)
            || weights.iter().map(|w| w.weight).sum::<f64>() <= 0.0
        {
            return Err(ScenarioError::BadBudgetWeights);
        }
        Ok(())
    }
}

/// A voter's cast as the simulator remembers it: enough to self-verify and to
/// replay the mandate.
struct CastRecord {
    receipt: ReceiptFile,
    mandate: Mandate,
    cast_at: Timestamp,
}

/// Runs one full election under the scenario: issue, cast, attack, publish,
/// audit, self-verify. Reproducible — the seed fixes every key, stamp, vote,
/// budget, nonce search, and shuffle.
pub fn run(scenario: &Scenario) -> Result<SimReport, ScenarioError> {
    scenario.validate()?;
    let config = &scenario.config;
    let eid = config.election_id;
    let start = config.voting_window.start;
    let end = config.voting_window.end;
    let span = end - start; // ≥ 1 after validation

    // Independent deterministic streams, derived in fixed order.
    let mut master = ChaCha20Rng::seed_from_u64(scenario.seed);
    let authority = Authority::with_rng(
        Keypair::from_seed(&master.gen()),
        ChaCha20Rng::from_seed(master.gen()),
    );
    let platform = Platform::with_rng(
        Keypair::from_seed(&master.gen()),
        config.clone(),
        authority.public_key(),
        ChaCha20Rng::from_seed(master.gen()),
    )?;
    let mut plan_rng = ChaCha20Rng::from_seed(master.gen());
    let mut adversary_rng = ChaCha20Rng::from_seed(master.gen());

    // Sample each voter's plan up front from one stream.
    let choices: Vec<&String> = scenario.vote_distribution.keys().collect();
    let vote_weights: Vec<f64> = scenario.vote_distribution.values().copied().collect();
    let vote_index = WeightedIndex::new(&vote_weights).expect("validated weights");
    let budget_index =
        WeightedIndex::new(scenario.budget_distribution.iter().map(|w| w.weight))
            .expect("validated weights");

    struct Plan {
        vote: String,
        budget: MiningBudget,
        cast_at: Timestamp,
        rng: ChaCha20Rng,
    }
    let plans: Vec<Plan> = (0..scenario.n_voters)
        .map(|i| Plan {
            vote: choices[vote_index.sample(&mut plan_rng)].clone(),
            budget: scenario.budget_distribution[budget_index.sample(&mut plan_rng)].budget,
            cast_at: start + u64::from(i) % span,
            rng: ChaCha20Rng::from_seed(plan_rng.gen()),
        })
        .collect();

    // Honest casts.
    let mut per_voter = Vec::with_capacity(plans.len());
    let mut casts: Vec<Option<CastRecord>> = Vec::with_capacity(plans.len());
    let mut ground_truth_tally: BTreeMap<String, u64> =
        config.ballot_choices.iter().map(|c| (c.clone(), 0)).collect();
    for (i, mut plan) in plans.into_iter().enumerate() {
        let mandate = authority
            .issue_mandate(&eid, &format!("citizen-{i:06}"), plan.cast_at)
            .expect("distinct citizen refs");
        let client = LocalClient::new(&platform, plan.cast_at);
        match cast_with_rng(config, &mandate, &plan.vote, plan.budget, &client, &mut plan.rng) {
            Ok(receipt) => {
                per_voter.push(VoterOutcome {
                    accepted: true,
                    error: None,
                    achieved_zeros: receipt.achieved_zeros,
                    self_verified: false, // filled in after publication
                });
                *ground_truth_tally.get_mut(&plan.vote).expect("validated choice") += 1;
                casts.push(Some(CastRecord { receipt, mandate, cast_at: plan.cast_at }));
            }
            Err(err) => {
                per_voter.push(VoterOutcome {
                    accepted: false,
                    error: Some(cast_error_name(&err)),
                    achieved_zeros: 0,
                    self_verified: false,
                });
                casts.push(None);
            }
        }
    }

    // Submission-time adversaries act while the window is open.
    let mut attempted: u64 = 0;
    let mut succeeded: u64 = 0;
    let mut rejections_as_expected = true;
    match scenario.adversary {
        Adversary::Precompute => {
            let attempts = (scenario.n_voters / 10).max(1);
            for k in 0..attempts {
                let mandate = authority
                    .issue_mandate(&eid, &format!("precomputer-{k:06}"), start)
                    .expect("distinct citizen refs");
                // Odd attempts replay a real stamp after its ttl; if the
                // window is too short to outlive the ttl, fall back to
                // fabrication.
                let stale_at = start + config.stamp_ttl + 1;
                let (stamp, submit_at) = if k % 2 == 1 && stale_at <= end {
                    (platform.issue_stamp(start).expect("window open"), stale_at)
                } else {
                    let forged_key = Keypair::from_seed(&adversary_rng.gen());
                    let fresh: [u8; 16] = adversary_rng.gen();
                    let stamp = PlatformStamp {
                        election_id: eid,
                        epoch: 0,
                        fresh,
                        platform_signature: forged_key
                            .sign(&PlatformStamp::signed_payload(&eid, 0, &fresh)),
                    };
                    (stamp, start)
                };
                attempted += 1;
                match submit_mined_block(
                    &platform,
                    config,
                    mandate,
                    &config.ballot_choices[0],
                    stamp,
                    submit_at,
                    &mut adversary_rng,
                ) {
                    Ok(()) => succeeded += 1,
                    Err(Some(
                        ValidationCode::UnknownStamp | ValidationCode::StaleStamp,
                    )) => {}
                    Err(_) => rejections_as_expected = false,
                }
            }
        }
        Adversary::MandateReuse => {
            for record in casts.iter().flatten() {
                let submission = Submission {
                    mandate: record.mandate,
                    block: record.receipt.reconstruct_block(),
                };
                attempted += 1;
                match platform.submit(&submission, record.cast_at) {
                    Ok(_) => succeeded += 1,
                    Err(SubmitError::Rejected(e))
                        if e.code == ValidationCode::DuplicateMandate => {}
                    Err(_) => rejections_as_expected = false,
                }
            }
        }
        Adversary::ThrowIn { extra_mandates } => {
            for _ in 0..extra_mandates {
                let mandate = authority.mint_unlogged(&eid);
                let vote = choices[vote_index.sample(&mut adversary_rng)].clone();
                let stamp = platform.issue_stamp(start).expect("window open");
                attempted += 1;
                if submit_mined_block(
                    &platform,
                    config,
                    mandate,
                    &vote,
                    stamp,
                    start,
                    &mut adversary_rng,
                )
                .is_ok()
                {
                    succeeded += 1;
                }
            }
        }
        Adversary::None | Adversary::TamperPublished { .. } => {}
    }

    // Publish everything, then let the publication-time adversary at it.
    let mut published = vec![platform.publish_final(end + 1).expect("window closed")];
    if let Adversary::TamperPublished { bits_to_flip } = scenario.adversary {
        for _ in 0..bits_to_flip {
            flip_published_bit(&mut published, &mut adversary_rng);
            attempted += 1;
        }
    }

    let audit_report = audit(
        &published,
        &authority.public_key(),
        &platform.public_key(),
        config,
        Some(authority.eligible_count(&eid) as u64),
    );

    for (outcome, record) in per_voter.iter_mut().zip(&casts) {
        if let Some(record) = record {
            outcome.self_verified = crate::voter::self_verify(&record.receipt, &published);
        }
    }

    if let Adversary::TamperPublished { .. } = scenario.adversary {
        // Tampering succeeds only by escaping the audit.
        succeeded = if audit_report.passed { attempted } else { 0 };
    }
    let detected = match scenario.adversary {
        Adversary::None => false,
        Adversary::Precompute | Adversary::MandateReuse => {
            attempted > 0 && succeeded == 0 && rejections_as_expected
        }
        Adversary::TamperPublished { .. } | Adversary::ThrowIn { .. } => {
            attempted > 0 && !audit_report.passed
        }
    };

    Ok(SimReport {
        ground_truth_tally,
        audit_report,
        per_voter,
        adversary_outcome: AdversaryOutcome { attempted, succeeded, detected },
    })
}

fn cast_error_name(err: &CastError) -> String {
    match err {
        CastError::Rejected(e) => e.code.to_string(),
        CastError::ChallengeRefused => "CHALLENGE_REFUSED".into(),
        CastError::AckInvalid => "ACK_INVALID".into(),
        CastError::Mining(_) => "BUDGET_TOO_SMALL".into(),
        CastError::Transport(detail) => format!("TRANSPORT: {detail}"),
    }
}

/// Mines a block over the given stamp and submits it; `Err` carries the
/// rejection code (`None` for non-validation failures, which no simulated
/// adversary triggers).
fn submit_mined_block(
    platform: &Platform,
    config: &ElectionConfig,
    mandate: Mandate,
    vote: &str,
    stamp: PlatformStamp,
    submit_at: Timestamp,
    rng: &mut ChaCha20Rng,
) -> Result<(), Option<ValidationCode>> {
    let receipt = Receipt {
        platform_stamp: stamp,
        voter_stamp: make_voter_stamp(&VoterSecret::generate(rng)),
    };
    let prefix = encode_block_preimage(config, vote, &receipt).expect("on-ballot vote");
    let mined = pow::mine(&prefix, MiningBudget::MaxAttempts(1), config.work_floor)
        .expect("attempt budgets below the floor keep mining until it is met");
    let block = VoteBlock { vote: vote.to_string(), receipt, nonce: mined.best_nonce };
    match platform.submit(&Submission { mandate, block }, submit_at) {
        Ok(_) => Ok(()),
        Err(SubmitError::Rejected(e)) => Err(Some(e.code)),
        Err(SubmitError::ChallengeRefused) => Err(None),
    }
}

/// Flips one random bit in one random published vote block, staying inside
/// UTF-8 when the vote text is the target.
fn flip_published_bit(published: &mut [PublishedLists], rng: &mut ChaCha20Rng) {
    let unit_indices: Vec<usize> = published
        .iter()
        .enumerate()
        .filter(|(_, u)| !u.list_b.is_empty())
        .map(|(i, _)| i)
        .collect();
    let Some(&unit) = pick(&unit_indices, rng) else { return };
    let blocks = &mut published[unit].list_b;
    let target = rng.gen_range(0..blocks.len());
    let block = &mut blocks[target];
    match rng.gen_range(0..5u8) {
        0 => {
            let ascii: Vec<usize> = block
                .vote
                .bytes()
                .enumerate()
                .filter(|(_, b)| b.is_ascii())
                .map(|(i, _)| i)
                .collect();
            if let Some(&i) = pick(&ascii, rng) {
                let mut bytes = std::mem::take(&mut block.vote).into_bytes();
                bytes[i] ^= 1 << rng.gen_range(0..7);
                block.vote =
                    String::from_utf8(bytes).expect("low-bit flip of an ascii byte stays ascii");
            } else {
                block.nonce ^= 1 << rng.gen_range(0..64);
            }
        }
        1 => {
            let i = rng.gen_range(0..32);
            block.receipt.voter_stamp[i] ^= 1 << rng.gen_range(0..8);
        }
        2 => {
            let i = rng.gen_range(0..16);
            block.receipt.platform_stamp.fresh[i] ^= 1 << rng.gen_range(0..8);
        }
        3 => {
            let i = rng.gen_range(0..64);
            block.receipt.platform_stamp.platform_signature.0[i] ^= 1 << rng.gen_range(0..8);
        }
        _ => {
            block.nonce ^= 1 << rng.gen_range(0..64);
        }
    }
}

fn pick<'a, T>(items: &'a [T], rng: &mut ChaCha20Rng) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

/// Forgeable fraction of the published blocks across a sweep of adversary
/// hashrates, for plotting how work deters rewrites.
pub fn deterrence_curve(
    zeros_histogram: &BTreeMap<u32, u64>,
    hashrates: &[u64],
    seconds: u64,
) -> Vec<(u64, Ratio<u64>)> {
    let zeros: Vec<u32> = zeros_histogram
        .iter()
        .flat_map(|(&z, &count)| std::iter::repeat_n(z, count as usize))
        .collect();
    hashrates
        .iter()
        .map(|&rate| (rate, forgery_budget(&zeros, rate, seconds).forgeable_fraction))
        .collect()
}
