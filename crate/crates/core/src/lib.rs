//! Work-backed electronic voting protocol.
//!
//! Three roles cooperate without trusting each other: an **authority** issues
//! signed one-time mandates, a **platform** validates submissions and publishes
//! two independently shuffled lists (voted mandates and vote blocks) so the
//! mandate/vote pairing is destroyed, and **voters** mine a proof-of-work nonce
//! over their vote so that altering any published record costs an adversary the
//! same hashing work it originally took. An independent **auditor** re-derives
//! everything from the published artifacts alone and prices tampering in units
//! of hash evaluations.
//!
//! Module map:
//! - [`pow`] — hashing, leading-zero difficulty, nonce mining, work accounting
//! - [`keys`] — Ed25519 keypairs, signatures, key files
//! - [`model`] — canonical wire types and the bit-exact block encoding
//! - [`authority`] — mandate issuance with a one-per-citizen log
//! - [`platform`] — submission validation, single-use enforcement, publication
//! - [`voter`] — casting, receipt files, self-verification against the lists
//! - [`audit`] — trust-nobody verification, tally, forgery-budget analysis
//! - [`sim`] — deterministic end-to-end election harness with adversaries
//! - [`files`] — JSON-lines persistence of published lists and logs

pub mod audit;
pub mod authority;
pub mod files;
mod hexutil;
pub mod keys;
pub mod model;
pub mod platform;
pub mod pow;
pub mod sim;
pub mod voter;

/// UTC wall-clock seconds. All protocol timestamps use this unit.
pub type Timestamp = u64;

pub use audit::{
    audit, forgery_budget, tally, AuditFailure, AuditFailureKind, AuditReport, ForgeryAssessment,
    RecordLocator,
};
pub use authority::{Authority, AuthorityError, IssuanceEntry};
pub use keys::{Keypair, PublicKey, Signature};
pub use model::{
    Acknowledgment, ElectionConfig, ElectionId, Mandate, PlatformStamp, PublishedLists, Receipt,
    Submission, ValidationCode, ValidationError, VoteBlock, VotedMandate, VoterSecret, VoterStamp,
    VotingWindow,
};
pub use platform::{Platform, PublishError, SubmitError};
pub use pow::{
    hash_block, leading_zero_bits, mine, total_work, verify_work, work_estimate, Digest,
    HashAlgorithm, MiningBudget, MiningResult, Nonce, PowError, WorkEstimate,
};
pub use sim::{run, deterrence_curve, Adversary, Scenario, SimReport, WeightedBudget};
pub use voter::{cast, self_verify, CastError, LocalClient, PlatformClient, ReceiptFile};
