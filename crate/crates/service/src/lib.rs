//! Community backend: accounts, scored uploads, daily rankings,
//! recommendations, personal history and a stateless guidance endpoint,
//! served as JSON over HTTP.

pub mod api;
pub mod auth;
mod service;
pub mod store;

pub use api::{router, serve, SCHEMA_VERSION};
pub use service::{Clock, FixedClock, GuidanceResult, Scorer, Service, ServiceConfig, SystemClock};
pub use store::{PhotoRecord, RankingEntry, Store, UserRecord};

use photoguide_core::guidance::GuidanceError;
use photoguide_core::image::ImageError;
use photoguide_core::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("missing or expired session")]
    Unauthenticated,
    #[error("invalid name or password")]
    BadCredentials,
    #[error("not allowed")]
    Forbidden,
    #[error("{0} not found")]
    NotFound(String),
    #[error("name already taken")]
    DuplicateName,
    #[error("an identical photo was uploaded by another user")]
    PhotoConflict,
    #[error("image could not be decoded: {0}")]
    Undecodable(String),
    #[error("image too small: {0}")]
    TooSmall(String),
    #[error("store: {0}")]
    Store(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceError {
    /// Stable machine-readable code used in error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::Unauthenticated => "unauthenticated",
            ServiceError::BadCredentials => "bad_credentials",
            ServiceError::Forbidden => "forbidden",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::DuplicateName => "duplicate_name",
            ServiceError::PhotoConflict => "photo_conflict",
            ServiceError::Undecodable(_) => "undecodable",
            ServiceError::TooSmall(_) => "too_small",
            ServiceError::Store(_) | ServiceError::Io(_) => "store_error",
            ServiceError::Internal(_) => "internal",
        }
    }
}

impl From<ImageError> for ServiceError {
    fn from(e: ImageError) -> Self {
        match e {
            ImageError::TooSmall { .. } => ServiceError::TooSmall(e.to_string()),
            ImageError::Io(io) => ServiceError::Io(io),
            other => ServiceError::Undecodable(other.to_string()),
        }
    }
}

impl From<ModelError> for ServiceError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Image(img) => img.into(),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl From<GuidanceError> for ServiceError {
    fn from(e: GuidanceError) -> Self {
        match e {
            GuidanceError::Image(img) => img.into(),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}
