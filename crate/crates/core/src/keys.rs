//! Ed25519 keypairs shared by the authority and the platform.
//!
//! Signatures are 64 octets, public keys 32 octets, both hex-encoded in every
//! JSON form. Private keys never leave this module except through the explicit
//! [`StoredKeypair`] key-file format.

use ed25519_dalek::{Signer, Verifier};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hexutil;

pub const PUBLIC_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

/// A 64-octet Ed25519 signature.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Signature(pub [u8; SIGNATURE_LEN]);

impl Signature {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl std::fmt::Debug for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Signature({})", self.to_hex())
    }
}

impl Serialize for Signature {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        hexutil::serialize(&self.0, serializer)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Signature(hexutil::deserialize(deserializer)?))
    }
}

/// An Ed25519 verifying key, published on behalf of its holder.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct PublicKey(ed25519_dalek::VerifyingKey);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8; PUBLIC_KEY_LEN]) -> Result<Self, KeyError> {
        ed25519_dalek::VerifyingKey::from_bytes(bytes)
            .map(PublicKey)
            .map_err(|_| KeyError::InvalidPublicKey)
    }

    pub fn from_hex(s: &str) -> Result<Self, KeyError> {
        let bytes: [u8; PUBLIC_KEY_LEN] = hex::decode(s.trim())
            .map_err(|_| KeyError::InvalidPublicKey)?
            .try_into()
            .map_err(|_| KeyError::InvalidPublicKey)?;
        Self::from_bytes(&bytes)
    }

    pub fn to_bytes(&self) -> [u8; PUBLIC_KEY_LEN] {
        self.0.to_bytes()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    /// Checks `signature` over `message`; false on any failure, never panics.
    pub fn verify(&self, message: &[u8], signature: &Signature) -> bool {
        let sig = ed25519_dalek::Signature::from_bytes(&signature.0);
        self.0.verify(message, &sig).is_ok()
    }
}

impl std::fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PublicKey({})", self.to_hex())
    }
}

impl Serialize for PublicKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// A signing keypair. The private half is only exported via [`StoredKeypair`].
pub struct Keypair {
    signing: ed25519_dalek::SigningKey,
}

impl Keypair {
    /// Fresh keypair from a cryptographically secure source.
    pub fn generate<R: CryptoRng + RngCore>(rng: &mut R) -> Self {
        Keypair { signing: ed25519_dalek::SigningKey::generate(rng) }
    }

    /// Deterministic keypair from a 32-octet seed (test use).
    pub fn from_seed(seed: &[u8; 32]) -> Self {
        Keypair { signing: ed25519_dalek::SigningKey::from_bytes(seed) }
    }

    pub fn public_key(&self) -> PublicKey {
        PublicKey(self.signing.verifying_key())
    }

    pub fn sign(&self, message: &[u8]) -> Signature {
        Signature(self.signing.sign(message).to_bytes())
    }

    pub fn to_stored(&self) -> StoredKeypair {
        StoredKeypair {
            public_key: self.public_key(),
            private_key: self.signing.to_bytes(),
        }
    }
}

impl std::fmt::Debug for Keypair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Keypair")
            .field("public_key", &self.public_key().to_hex())
            .finish_non_exhaustive()
    }
}

/// On-disk key-file form. Never include this in a published artifact.
#[derive(Serialize, Deserialize)]
pub struct StoredKeypair {
    pub public_key: PublicKey,
    #[serde(with = "hexutil")]
    pub private_key: [u8; 32],
}

impl StoredKeypair {
    pub fn into_keypair(self) -> Keypair {
        Keypair::from_seed(&self.private_key)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum KeyError {
    #[error("invalid public key encoding")]
    InvalidPublicKey,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn distinct_keys_without_seed() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let a = Keypair::generate(&mut rng);
        let b = Keypair::generate(&mut rng);
        assert_ne!(a.public_key(), b.public_key());
    }

    #[test]
    fn same_seed_same_keypair() {
        let a = Keypair::from_seed(&[7u8; 32]);
        let b = Keypair::from_seed(&[7u8; 32]);
        assert_eq!(a.public_key(), b.public_key());
        assert_eq!(a.sign(b"m"), b.sign(b"m"));
    }

    #[test]
    fn sign_verify_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let kp = Keypair::generate(&mut rng);
        let sig = kp.sign(b"arbitrary message");
        assert!(kp.public_key().verify(b"arbitrary message", &sig));
        assert!(!kp.public_key().verify(b"arbitrary messagf", &sig));
    }

    #[test]
    fn wrong_key_rejects() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let a = Keypair::generate(&mut rng);
        let b = Keypair::generate(&mut rng);
        let sig = a.sign(b"payload");
        assert!(!b.public_key().verify(b"payload", &sig));
    }

    #[test]
    fn stored_round_trip() {
        let kp = Keypair::from_seed(&[9u8; 32]);
        let json = serde_json::to_string(&kp.to_stored()).unwrap();
        let back: StoredKeypair = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_keypair().public_key(), kp.public_key());
    }

    #[test]
    fn public_key_hex_round_trip() {
        let kp = Keypair::from_seed(&[4u8; 32]);
        let pk = PublicKey::from_hex(&kp.public_key().to_hex()).unwrap();
        assert_eq!(pk, kp.public_key());
        assert!(PublicKey::from_hex("zz").is_err());
    }
}
