//! The electoral authority: holds the signing key, hands each citizen at most
//! one mandate per election, and keeps the private issuance log that later
//! bounds how many voted mandates may legitimately appear in public.
//!
//! The log's `citizen_ref` column is the authority's private knowledge of who
//! received what. It exists so issuance can be audited internally; no
//! published artifact — not the mandate, not the public lists — carries it.

use std::collections::HashSet;
use std::sync::Mutex;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::hexutil;
use crate::keys::{Keypair, PublicKey};
use crate::model::{ElectionId, Mandate};
use crate::Timestamp;

/// One line of the private issuance log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuanceEntry {
    #[serde(with = "hexutil")]
    pub election_id: ElectionId,
    #[serde(with = "hexutil")]
    pub token: [u8; 32],
    pub issued_at: Timestamp,
    pub citizen_ref: String,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum AuthorityError {
    #[error("citizen {citizen_ref:?} already holds a mandate for this election")]
    AlreadyIssued { citizen_ref: String },
}

pub struct Authority {
    keypair: Keypair,
    state: Mutex<State>,
}

struct State {
    rng: ChaCha20Rng,
    entries: Vec<IssuanceEntry>,
    issued_to: HashSet<(ElectionId, String)>,
    tokens: HashSet<[u8; 32]>,
}

impl Authority {
    pub fn new(keypair: Keypair) -> Self {
        Self::with_rng(keypair, ChaCha20Rng::from_entropy())
    }

    /// Deterministic token stream for reproducible runs.
    pub fn with_rng(keypair: Keypair, rng: ChaCha20Rng) -> Self {
        Authority {
            keypair,
            state: Mutex::new(State {
                rng,
                entries: Vec::new(),
                issued_to: HashSet::new(),
                tokens: HashSet::new(),
            }),
        }
    }

    /// Rebuilds an authority around a previously persisted log, so duplicate
    /// issuance stays refused across restarts.
    pub fn from_log(keypair: Keypair, entries: Vec<IssuanceEntry>) -> Self {
        let authority = Self::new(keypair);
        {
            let mut state = authority.state.lock().unwrap();
            for e in &entries {
                state.issued_to.insert((e.election_id, e.citizen_ref.clone()));
                state.tokens.insert(e.token);
            }
            state.entries = entries;
        }
        authority
    }

    pub fn public_key(&self) -> PublicKey {
        self.keypair.public_key()
    }

    /// Issues the citizen's one mandate for the election: fresh random token,
    /// signed over `token || election_id`, logged. The check-and-append is a
    /// single critical section, so racing duplicates lose cleanly.
    pub fn issue_mandate(
        &self,
        election_id: &ElectionId,
        citizen_ref: &str,
        now: Timestamp,
    ) -> Result<Mandate, AuthorityError> {
        let mut state = self.state.lock().unwrap();
        let key = (*election_id, citizen_ref.to_owned());
        if state.issued_to.contains(&key) {
            return Err(AuthorityError::AlreadyIssued { citizen_ref: citizen_ref.to_owned() });
        }
        let token = loop {
            let mut t = [0u8; 32];
            state.rng.fill_bytes(&mut t);
            if state.tokens.insert(t) {
                break t;
            }
        };
        state.issued_to.insert(key);
        state.entries.push(IssuanceEntry {
            election_id: *election_id,
            token,
            issued_at: now,
            citizen_ref: citizen_ref.to_owned(),
        });
        drop(state);
        Ok(self.sign_token(token, election_id))
    }

    /// How many mandates the log records for the election — the public bound
    /// an auditor compares the voted-mandate list against.
    pub fn eligible_count(&self, election_id: &ElectionId) -> usize {
        self.state
            .lock()
            .unwrap()
            .entries
            .iter()
            .filter(|e| &e.election_id == election_id)
            .count()
    }

    /// A corrupt authority's move: a validly signed mandate that no log entry
    /// accounts for. Exists so the ballot-stuffing scenario can be exercised;
    /// honest issuance always goes through [`Authority::issue_mandate`].
    pub fn mint_unlogged(&self, election_id: &ElectionId) -> Mandate {
        let mut state = self.state.lock().unwrap();
        let mut token = [0u8; 32];
        state.rng.fill_bytes(&mut token);
        drop(state);
        self.sign_token(token, election_id)
    }

    /// Snapshot of the private log, for persistence.
    pub fn log_entries(&self) -> Vec<IssuanceEntry> {
        self.state.lock().unwrap().entries.clone()
    }

    fn sign_token(&self, token: [u8; 32], election_id: &ElectionId) -> Mandate {
        let signature = self.keypair.sign(&Mandate::signed_payload(&token, election_id));
        Mandate { token, election_id: *election_id, authority_signature: signature }
    }
}
