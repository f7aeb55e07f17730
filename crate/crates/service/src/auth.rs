use std::collections::HashMap;
use std::sync::Mutex;

use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use chrono::{DateTime, Duration, Utc};
use rand::RngCore;

use crate::ServiceError;

pub const SESSION_TTL_HOURS: i64 = 24;

pub fn hash_password(password: &str) -> Result<String, ServiceError> {
    let mut raw = [0u8; 16];
    rand::rng().fill_bytes(&mut raw);
    let salt = SaltString::encode_b64(&raw).map_err(|e| ServiceError::Internal(e.to_string()))?;
    Argon2::default()
        .hash_password(password.as_bytes(), &salt)
        .map(|h| h.to_string())
        .map_err(|e| ServiceError::Internal(format!("password hashing failed: {e}")))
}

pub fn verify_password(password: &str, phc: &str) -> bool {
    PasswordHash::new(phc)
        .map(|h| Argon2::default().verify_password(password.as_bytes(), &h).is_ok())
        .unwrap_or(false)
}

/// 32 random bytes, hex encoded.
pub fn random_token() -> String {
    let mut bytes = [0u8; 32];
    rand::rng().fill_bytes(&mut bytes);
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
struct Session {
    user_id: String,
    expires_at: DateTime<Utc>,
}

/// In-memory bearer sessions. Tokens do not survive a restart.
#[derive(Debug, Default)]
pub struct Sessions {
    inner: Mutex<HashMap<String, Session>>,
}

impl Sessions {
    pub fn issue(&self, user_id: &str, now: DateTime<Utc>) -> (String, DateTime<Utc>) {
        let token = random_token();
        let expires_at = now + Duration::hours(SESSION_TTL_HOURS);
        let mut map = self.inner.lock().expect("session lock");
        map.retain(|_, s| s.expires_at > now);
        map.insert(
            token.clone(),
            Session {
                user_id: user_id.to_string(),
                expires_at,
            },
        );
        (token, expires_at)
    }

    pub fn resolve(&self, token: &str, now: DateTime<Utc>) -> Result<String, ServiceError> {
        let map = self.inner.lock().expect("session lock");
        match map.get(token) {
            Some(s) if s.expires_at > now => Ok(s.user_id.clone()),
            _ => Err(ServiceError::Unauthenticated),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_round_trip() {
        let h = hash_password("hunter2").unwrap();
        assert!(!h.contains("hunter2"));
        assert!(verify_password("hunter2", &h));
        assert!(!verify_password("hunter3", &h));
        assert!(!verify_password("hunter2", "not a phc string"));
    }

    #[test]
    fn sessions_expire() {
        let s = Sessions::default();
        let t0 = Utc::now();
        let (tok, exp) = s.issue("u1", t0);
        assert_eq!(exp - t0, Duration::hours(24));
        assert_eq!(s.resolve(&tok, t0).unwrap(), "u1");
        assert!(s.resolve(&tok, exp).is_err());
        assert!(s.resolve("nope", t0).is_err());
    }
}
