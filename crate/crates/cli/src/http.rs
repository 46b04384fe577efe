//! The voter↔platform HTTP wire format: status codes per rejection reason,
//! a JSON error body, and a blocking client implementing the voter's
//! platform-facing trait.

use edv_core::keys::PublicKey;
use edv_core::model::{
    Acknowledgment, PlatformStamp, Submission, ValidationCode, ValidationError,
};
use edv_core::voter::{CastError, PlatformClient};
use edv_core::Timestamp;
use serde::{Deserialize, Serialize};

/// Body of every non-2xx platform response.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub detail: String,
}

/// Each rejection reason gets its own HTTP status, so clients can react
/// without parsing the body.
pub fn status_for(code: ValidationCode) -> u16 {
    match code {
        ValidationCode::BadMandateSignature => 401,
        ValidationCode::InsufficientWork => 402,
        ValidationCode::OutsideWindow => 403,
        ValidationCode::UnknownStamp => 404,
        ValidationCode::DuplicateMandate => 409,
        ValidationCode::StaleStamp => 410,
        ValidationCode::DuplicateVoterStamp => 412,
        ValidationCode::InvalidChoice => 422,
        ValidationCode::UsedStamp => 423,
    }
}

/// Response payload of `GET /pubkey`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PubkeyBody {
    pub public_key: String,
}

/// Blocking client for a platform served over HTTP.
pub struct HttpPlatformClient {
    base: String,
    http: reqwest::blocking::Client,
}

impl HttpPlatformClient {
    pub fn new(base_url: &str) -> Self {
        HttpPlatformClient {
            base: base_url.trim_end_matches('/').to_string(),
            http: reqwest::blocking::Client::new(),
        }
    }

    fn parse<T: serde::de::DeserializeOwned>(
        response: reqwest::blocking::Response,
    ) -> Result<T, CastError> {
        let status = response.status();
        if status.is_success() {
            return response
                .json()
                .map_err(|e| CastError::Transport(format!("bad response body: {e}")));
        }
        let body: ErrorBody = response
            .json()
            .map_err(|e| CastError::Transport(format!("http {status} with opaque body: {e}")))?;
        // The code travels as its serialized name; turn it back into the enum.
        match serde_json::from_value::<ValidationCode>(serde_json::Value::String(
            body.code.clone(),
        )) {
            Ok(code) => Err(CastError::Rejected(ValidationError::new(code, body.detail))),
            Err(_) if body.code == "CHALLENGE_REFUSED" => Err(CastError::ChallengeRefused),
            Err(_) => Err(CastError::Transport(format!("http {status}: {}", body.code))),
        }
    }
}

impl PlatformClient for HttpPlatformClient {
    fn now(&self) -> Timestamp {
        crate::wall_clock()
    }

    fn fetch_stamp(&self) -> Result<PlatformStamp, CastError> {
        let response = self
            .http
            .post(format!("{}/stamp", self.base))
            .send()
            .map_err(|e| CastError::Transport(e.to_string()))?;
        Self::parse(response)
    }

    fn submit(&self, submission: &Submission) -> Result<Acknowledgment, CastError> {
        let response = self
            .http
            .post(format!("{}/submit", self.base))
            .json(submission)
            .send()
            .map_err(|e| CastError::Transport(e.to_string()))?;
        Self::parse(response)
    }

    fn platform_key(&self) -> Result<PublicKey, CastError> {
        let response = self
            .http
            .get(format!("{}/pubkey", self.base))
            .send()
            .map_err(|e| CastError::Transport(e.to_string()))?;
        let body: PubkeyBody = Self::parse(response)?;
        PublicKey::from_hex(&body.public_key)
            .map_err(|e| CastError::Transport(format!("bad platform key: {e}")))
    }
}

/// Stable name for a cast failure, for stderr and exit-code reporting.
pub fn cast_error_code(err: &CastError) -> String {
    match err {
        CastError::Rejected(e) => e.code.to_string(),
        CastError::ChallengeRefused => "CHALLENGE_REFUSED".into(),
        CastError::AckInvalid => "ACK_INVALID".into(),
        CastError::Mining(_) => "BUDGET_TOO_SMALL".into(),
        CastError::Transport(_) => "TRANSPORT_ERROR".into(),
    }
}
