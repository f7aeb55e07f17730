use std::sync::{Mutex, RwLock};

use chrono::{DateTime, NaiveDate, Utc};
use photoguide_core::guidance::{
    frame_guidance, suggestions_from_scores, FrameGuidance, GuidanceConfig, SuggestionCatalog,
};
use photoguide_core::image::{decode, RasterImage};
use photoguide_core::model::{AestheticNet, AestheticScores, ModelError};
use serde::Serialize;

use crate::auth::{hash_password, random_token, verify_password, Sessions};
use crate::store::{photo_id, PhotoRecord, RankingEntry, Store, UserRecord};
use crate::ServiceError;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Returns a settable instant; every call to `now` then advances it by `step`.
pub struct FixedClock {
    now: Mutex<DateTime<Utc>>,
    step: chrono::Duration,
}

impl FixedClock {
    pub fn new(start: DateTime<Utc>, step: chrono::Duration) -> Self {
        Self {
            now: Mutex::new(start),
            step,
        }
    }

    pub fn set(&self, t: DateTime<Utc>) {
        *self.now.lock().expect("clock lock") = t;
    }
}

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        let mut now = self.now.lock().expect("clock lock");
        let t = *now;
        *now = t + self.step;
        t
    }
}

/// Produces aesthetic scores for an uploaded or streamed image.
pub trait Scorer: Send + Sync {
    fn score(&self, img: &RasterImage) -> Result<AestheticScores, ModelError>;
}

impl Scorer for AestheticNet {
    fn score(&self, img: &RasterImage) -> Result<AestheticScores, ModelError> {
        self.forward_score(img)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub guidance: GuidanceConfig,
    pub catalog: SuggestionCatalog,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuidanceResult {
    #[serde(flatten)]
    pub frame: FrameGuidance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<AestheticScores>,
}

/// All service operations, independent of the HTTP layer.
pub struct Service {
    store: RwLock<Store>,
    sessions: Sessions,
    scorer: Box<dyn Scorer>,
    clock: Box<dyn Clock>,
    config: ServiceConfig,
}

impl Service {
    pub fn new(store: Store, scorer: Box<dyn Scorer>, clock: Box<dyn Clock>, config: ServiceConfig) -> Self {
        Self {
            store: RwLock::new(store),
            sessions: Sessions::default(),
            scorer,
            clock,
            config,
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    fn read(&self) -> std::sync::RwLockReadGuard<'_, Store> {
        self.store.read().expect("store lock poisoned")
    }

    fn write(&self) -> std::sync::RwLockWriteGuard<'_, Store> {
        self.store.write().expect("store lock poisoned")
    }

    pub fn create_user(&self, name: &str, password: &str) -> Result<UserRecord, ServiceError> {
        let name = name.trim();
        if name.is_empty() || password.is_empty() {
            return Err(ServiceError::BadRequest("name and password must be non-empty".into()));
        }
        if self.read().user_by_name(name).is_some() {
            return Err(ServiceError::DuplicateName);
        }
        let record = UserRecord {
            user_id: random_token()[..24].to_string(),
            name: name.to_string(),
            password_hash: hash_password(password)?,
            created_at: self.now(),
        };
        self.write().insert_user(record.clone())?;
        Ok(record)
    }

    /// Unknown names and wrong passwords fail identically.
    pub fn login(&self, name: &str, password: &str) -> Result<(String, String, DateTime<Utc>), ServiceError> {
        let user = self.read().user_by_name(name.trim()).cloned();
        match user {
            Some(u) if verify_password(password, &u.password_hash) => {
                let (token, expires) = self.sessions.issue(&u.user_id, self.now());
                Ok((u.user_id, token, expires))
            }
            _ => Err(ServiceError::BadCredentials),
        }
    }

    pub fn authenticate(&self, token: &str) -> Result<String, ServiceError> {
        self.sessions.resolve(token, self.now())
    }

    /// Scores and stores a photo. Returns the record and whether it is new.
    pub fn upload_photo(&self, token: &str, bytes: &[u8]) -> Result<(PhotoRecord, bool), ServiceError> {
        let owner = self.authenticate(token)?;
        let id = photo_id(bytes);
        if let Some(existing) = self.read().photo(&id) {
            return if existing.owner == owner {
                Ok((existing.clone(), false))
            } else {
                Err(ServiceError::PhotoConflict)
            };
        }
        let img = decode(bytes)?;
        let scores = self.scorer.score(&img)?;
        let suggestions = suggestions_from_scores(&scores, &self.config.catalog, &self.config.guidance)
            .into_iter()
            .map(|p| p.token)
            .collect();
        let mut store = self.write();
        // another request may have stored the same bytes while we were scoring
        if let Some(existing) = store.photo(&id) {
            return if existing.owner == owner {
                Ok((existing.clone(), false))
            } else {
                Err(ServiceError::PhotoConflict)
            };
        }
        let uploaded_at = self.now();
        let record = PhotoRecord {
            photo_id: id,
            owner,
            uploaded_at,
            day_bucket: uploaded_at.date_naive(),
            width: img.width(),
            height: img.height(),
            scores,
            suggestions,
        };
        store.insert_photo(record.clone(), bytes)?;
        Ok((record, true))
    }

    pub fn photo(&self, id: &str) -> Result<PhotoRecord, ServiceError> {
        self.read()
            .photo(id)
            .cloned()
            .ok_or_else(|| ServiceError::NotFound(format!("photo {id}")))
    }

    pub fn owner_name(&self, user_id: &str) -> String {
        self.read().user(user_id).map(|u| u.name.clone()).unwrap_or_default()
    }

    pub fn daily_ranking(&self, day: NaiveDate) -> Vec<RankingEntry> {
        self.read().daily_ranking(day)
    }

    pub fn recommendations(&self, limit: usize) -> Result<Vec<RankingEntry>, ServiceError> {
        if limit == 0 {
            return Err(ServiceError::BadRequest("limit must be at least 1".into()));
        }
        Ok(self.read().recommendations(limit))
    }

    pub fn history(&self, token: &str, user_id: &str) -> Result<Vec<PhotoRecord>, ServiceError> {
        if self.authenticate(token)? != user_id {
            return Err(ServiceError::Forbidden);
        }
        Ok(self.read().history(user_id).into_iter().cloned().collect())
    }

    /// Never touches the store.
    pub fn guidance(&self, bytes: &[u8], score: bool) -> Result<GuidanceResult, ServiceError> {
        let img = decode(bytes)?;
        let frame = frame_guidance(&img, &self.config.guidance)?;
        let scores = if score { Some(self.scorer.score(&img)?) } else { None };
        Ok(GuidanceResult { frame, scores })
    }
}
