//! Proof-of-work primitives: hashing, leading-zero difficulty, nonce mining,
//! and exact work accounting.
//!
//! Mining is "best-effort above a floor": the miner always satisfies the
//! election's minimum difficulty, then keeps improving until its budget runs
//! out and submits the best nonce found. Work is priced in expected hash
//! evaluations — a digest with `z` leading zero bits costs 2^z on average —
//! and all arithmetic is exact big-integer, never floating point.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use std::time::{Duration, Instant};

pub const DIGEST_LEN: usize = 32;
pub const DIGEST_BITS: u32 = (DIGEST_LEN as u32) * 8;

/// Attempt ceiling for mining that would otherwise run unbounded while
/// chasing an unreachable floor. Overridable via [`mine_with_cap`].
pub const DEFAULT_HARD_CAP: u64 = 1 << 32;

pub type Digest = [u8; DIGEST_LEN];
pub type Nonce = u64;

/// Hash function selector carried in election configs and the canonical
/// block encoding. Only SHA-256 is assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HashAlgorithm {
    Sha256,
}

impl HashAlgorithm {
    pub const fn id(self) -> u8 {
        match self {
            HashAlgorithm::Sha256 => 0x01,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0x01 => Some(HashAlgorithm::Sha256),
            _ => None,
        }
    }

    pub const fn digest_len(self) -> usize {
        match self {
            HashAlgorithm::Sha256 => DIGEST_LEN,
        }
    }
}

/// How long a miner is willing to keep hashing. Exactly one dimension
/// applies; the floor can extend either (see [`mine`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiningBudget {
    /// Stop after this many hash evaluations (at least one is always made).
    MaxAttempts(u64),
    /// Stop after this much wall-clock time, in milliseconds.
    WallTimeMs(u64),
}

/// Outcome of a mining run.
///
/// Invariant: hashing `prefix || best_nonce` yields exactly `best_zeros`
/// leading zero bits, so [`verify_work`] at `best_zeros` always passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningResult {
    pub best_nonce: Nonce,
    pub best_zeros: u32,
    /// Hash evaluations performed; ≥ 1.
    pub attempts: u64,
    pub digest: Digest,
}

/// Expected hashing cost, exact: 2^z per block with z leading zero bits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct WorkEstimate(BigUint);

impl WorkEstimate {
    pub fn zero() -> Self {
        WorkEstimate(BigUint::zero())
    }

    pub fn hash_count(&self) -> &BigUint {
        &self.0
    }

    pub fn into_hash_count(self) -> BigUint {
        self.0
    }
}

impl From<BigUint> for WorkEstimate {
    fn from(n: BigUint) -> Self {
        WorkEstimate(n)
    }
}

impl std::fmt::Display for WorkEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

// Decimal strings on the wire: the counts overflow u64 as soon as any block
// clears 64 zero bits, and JSON numbers lose integer precision past 2^53.
impl Serialize for WorkEstimate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0.to_str_radix(10))
    }
}

impl<'de> Deserialize<'de> for WorkEstimate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        BigUint::parse_bytes(s.as_bytes(), 10)
            .map(WorkEstimate)
            .ok_or_else(|| serde::de::Error::custom("expected a decimal integer string"))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PowError {
    #[error(
        "budget exhausted after {attempts} attempts without reaching the work floor \
         of {floor} bits (best found: {best_zeros})"
    )]
    BudgetTooSmall { floor: u32, best_zeros: u32, attempts: u64 },
    #[error("{zeros} leading zero bits is out of range for a {DIGEST_BITS}-bit digest")]
    ZerosOutOfRange { zeros: u32 },
}

/// SHA-256 of the full preimage.
pub fn hash_block(preimage: &[u8]) -> Digest {
    debug_assert!(!preimage.is_empty());
    Sha256::digest(preimage).into()
}

/// Digest of `preimage_prefix || nonce` with the nonce appended as 8
/// big-endian octets — the quantity mining maximizes leading zeros of.
pub fn block_digest(preimage_prefix: &[u8], nonce: Nonce) -> Digest {
    let mut h = Sha256::new_with_prefix(preimage_prefix);
    h.update(nonce.to_be_bytes());
    h.finalize().into()
}

/// Consecutive zero bits from the most significant bit of the first octet.
pub fn leading_zero_bits(digest: &Digest) -> u32 {
    let mut bits = 0;
    for &byte in digest {
        if byte == 0 {
            bits += 8;
        } else {
            bits += byte.leading_zeros();
            break;
        }
    }
    bits
}

/// True iff `preimage_prefix || nonce` hashes to at least `claimed_floor`
/// leading zero bits. Pure recomputation; trusts nothing from the claimant.
pub fn verify_work(preimage_prefix: &[u8], nonce: Nonce, claimed_floor: u32) -> bool {
    leading_zero_bits(&block_digest(preimage_prefix, nonce)) >= claimed_floor
}

/// Mines nonces 0, 1, 2, … over `preimage_prefix`, keeping the first nonce
/// that achieves the running-best leading-zero count.
///
/// The budget and the floor interact both ways: mining continues past an
/// exhausted budget until the floor is first met, and continues past a met
/// floor until the budget is exhausted. [`PowError::BudgetTooSmall`] is
/// reported only for attempt-counted budgets that blow through the hard cap
/// ([`DEFAULT_HARD_CAP`]) with the floor still unmet — the signal that this
/// device cannot meet the election's minimum work. Wall-time mining keeps
/// going until the floor is met, however long that takes.
pub fn mine(
    preimage_prefix: &[u8],
    budget: MiningBudget,
    floor: u32,
) -> Result<MiningResult, PowError> {
    mine_with_cap(preimage_prefix, budget, floor, DEFAULT_HARD_CAP)
}

/// [`mine`] with an explicit attempt hard cap.
pub fn mine_with_cap(
    preimage_prefix: &[u8],
    budget: MiningBudget,
    floor: u32,
    hard_cap: u64,
) -> Result<MiningResult, PowError> {
    debug_assert!(floor <= DIGEST_BITS);
    let base = Sha256::new_with_prefix(preimage_prefix);
    let deadline = match budget {
        MiningBudget::MaxAttempts(_) => None,
        MiningBudget::WallTimeMs(ms) => Some(Instant::now() + Duration::from_millis(ms)),
    };
    // Only attempt-counted budgets can prove the floor unreachable.
    let give_up_at = match budget {
        MiningBudget::MaxAttempts(n) => Some(hard_cap.max(n)),
        MiningBudget::WallTimeMs(_) => None,
    };

    let mut best: Option<(Nonce, u32, Digest)> = None;
    let mut attempts: u64 = 0;
    let mut budget_spent = false;
    let mut nonce: Nonce = 0;
    loop {
        let mut h = base.clone();
        h.update(nonce.to_be_bytes());
        let digest: Digest = h.finalize().into();
        attempts += 1;
        let zeros = leading_zero_bits(&digest);
        // Strict > keeps the first nonce reaching any given count.
        if best.is_none_or(|(_, z, _)| zeros > z) {
            best = Some((nonce, zeros, digest));
        }
        let (best_nonce, best_zeros, best_digest) = best.unwrap();

        if !budget_spent {
            budget_spent = match budget {
                MiningBudget::MaxAttempts(n) => attempts >= n.max(1),
                // Amortize the clock read; overshoot is at most 31 hashes.
                MiningBudget::WallTimeMs(_) => {
                    attempts & 31 == 0 && Instant::now() >= deadline.unwrap()
                }
            };
        }
        if budget_spent && best_zeros >= floor {
            return Ok(MiningResult { best_nonce, best_zeros, attempts, digest: best_digest });
        }
        if let Some(cap) = give_up_at {
            if best_zeros < floor && attempts >= cap {
                return Err(PowError::BudgetTooSmall { floor, best_zeros, attempts });
            }
        }
        nonce += 1;
    }
}

/// Expected hash evaluations to find one block with `zeros` leading zero
/// bits: exactly 2^zeros.
pub fn work_estimate(zeros: u32) -> Result<WorkEstimate, PowError> {
    if zeros > DIGEST_BITS {
        return Err(PowError::ZerosOutOfRange { zeros });
    }
    Ok(WorkEstimate(BigUint::one() << zeros))
}

/// Exact sum of 2^z over every block; an empty sequence costs nothing.
pub fn total_work<I: IntoIterator<Item = u32>>(zeros: I) -> Result<WorkEstimate, PowError> {
    let mut acc = BigUint::zero();
    for z in zeros {
        if z > DIGEST_BITS {
            return Err(PowError::ZerosOutOfRange { zeros: z });
        }
        acc += BigUint::one() << z;
    }
    Ok(WorkEstimate(acc))
}
