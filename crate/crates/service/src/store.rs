//! Append-only persistence.
//!
//! ```text
//! <root>/users.log        one JSON UserRecord per line
//! <root>/records.log      one JSON PhotoRecord per line
//! <root>/blobs/<id>.bin   uploaded image bytes, named by their SHA-256
//! ```
//!
//! Opening a store replays both logs into memory. A torn final line (no
//! trailing newline, as left by a crash mid-append) is dropped; any other
//! malformed line is an error.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use photoguide_core::model::AestheticScores;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ServiceError;

pub const USERS_LOG: &str = "users.log";
pub const RECORDS_LOG: &str = "records.log";
pub const BLOB_DIR: &str = "blobs";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_id: String,
    pub name: String,
    /// PHC string; never the password itself.
    pub password_hash: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoRecord {
    pub photo_id: String,
    pub owner: String,
    pub uploaded_at: DateTime<Utc>,
    pub day_bucket: NaiveDate,
    pub width: usize,
    pub height: usize,
    pub scores: AestheticScores,
    pub suggestions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingEntry {
    pub rank: usize,
    pub photo_id: String,
    pub display_score: u8,
    pub overall: f64,
    pub owner: String,
    pub owner_name: String,
    pub uploaded_at: DateTime<Utc>,
}

/// Hex SHA-256 of the image bytes.
pub fn photo_id(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Ranking order: overall descending, then earlier upload, then photo id.
pub fn ranking_cmp(a: &PhotoRecord, b: &PhotoRecord) -> std::cmp::Ordering {
    b.scores
        .overall()
        .total_cmp(&a.scores.overall())
        .then(a.uploaded_at.cmp(&b.uploaded_at))
        .then_with(|| a.photo_id.cmp(&b.photo_id))
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    users: BTreeMap<String, UserRecord>,
    names: HashMap<String, String>,
    photos: BTreeMap<String, PhotoRecord>,
}

fn replay_log<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, ServiceError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == lines.len() && !complete => {
                log::warn!("{}: dropping torn final line", path.display());
            }
            Err(e) => {
                return Err(ServiceError::Store(format!("{} line {}: {e}", path.display(), i + 1)));
            }
        }
    }
    Ok(out)
}

fn append_line<T: Serialize>(path: &Path, value: &T) -> Result<(), ServiceError> {
    let mut line = serde_json::to_string(value).map_err(|e| ServiceError::Store(e.to_string()))?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(line.as_bytes())?;
    f.sync_data()?;
    Ok(())
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        let root = root.into();
        fs::create_dir_all(root.join(BLOB_DIR))?;
        let mut store = Store {
            users: BTreeMap::new(),
            names: HashMap::new(),
            photos: BTreeMap::new(),
            root,
        };
        for u in replay_log::<UserRecord>(&store.root.join(USERS_LOG))? {
            store.index_user(u)?;
        }
        for p in replay_log::<PhotoRecord>(&store.root.join(RECORDS_LOG))? {
            if !store.users.contains_key(&p.owner) {
                return Err(ServiceError::Store(format!("photo {} has unknown owner", p.photo_id)));
            }
            store.photos.insert(p.photo_id.clone(), p);
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_user(&mut self, u: UserRecord) -> Result<(), ServiceError> {
        if self.names.contains_key(&u.name) {
            return Err(ServiceError::Store(format!("duplicate user name {:?} in log", u.name)));
        }
        self.names.insert(u.name.clone(), u.user_id.clone());
        self.users.insert(u.user_id.clone(), u);
        Ok(())
    }

    pub fn user(&self, user_id: &str) -> Option<&UserRecord> {
        self.users.get(user_id)
    }

    pub fn user_by_name(&self, name: &str) -> Option<&UserRecord> {
        self.names.get(name).and_then(|id| self.users.get(id))
    }

    pub fn insert_user(&mut self, u: UserRecord) -> Result<(), ServiceError> {
        if self.names.contains_key(&u.name) {
            return Err(ServiceError::DuplicateName);
        }
        append_line(&self.root.join(USERS_LOG), &u)?;
        self.index_user(u)
    }

    pub fn photo(&self, photo_id: &str) -> Option<&PhotoRecord> {
        self.photos.get(photo_id)
    }

    pub fn blob_path(&self, photo_id: &str) -> PathBuf {
        self.root.join(BLOB_DIR).join(format!("{photo_id}.bin"))
    }

    /// Writes the blob (if absent) and then the record line.
    pub fn insert_photo(&mut self, record: PhotoRecord, bytes: &[u8]) -> Result<(), ServiceError> {
        let blob = self.blob_path(&record.photo_id);
        if !blob.exists() {
            let tmp = blob.with_extension("tmp");
            let mut f = File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &blob)?;
        }
        append_line(&self.root.join(RECORDS_LOG), &record)?;
        self.photos.insert(record.photo_id.clone(), record);
        Ok(())
    }

    pub fn photos(&self) -> impl Iterator<Item = &PhotoRecord> {
        self.photos.values()
    }

    fn rank<'a>(&self, mut photos: Vec<&'a PhotoRecord>) -> Vec<RankingEntry> {
        photos.sort_by(|a, b| ranking_cmp(a, b));
        photos
            .into_iter()
            .enumerate()
            .map(|(i, p)| RankingEntry {
                rank: i + 1,
                photo_id: p.photo_id.clone(),
                display_score: p.scores.display_overall(),
                overall: p.scores.overall(),
                owner: p.owner.clone(),
                owner_name: self.users.get(&p.owner).map(|u| u.name.clone()).unwrap_or_default(),
                uploaded_at: p.uploaded_at,
            })
            .collect()
    }

    pub fn daily_ranking(&self, day: NaiveDate) -> Vec<RankingEntry> {
        self.rank(self.photos.values().filter(|p| p.day_bucket == day).collect())
    }

    pub fn recommendations(&self, limit: usize) -> Vec<RankingEntry> {
        let mut all = self.rank(self.photos.values().collect());
        all.truncate(limit);
        all
    }

    /// Newest first; equal timestamps fall back to photo id.
    pub fn history(&self, user_id: &str) -> Vec<&PhotoRecord> {
        let mut v: Vec<_> = self.photos.values().filter(|p| p.owner == user_id).collect();
        v.sort_by(|a, b| b.uploaded_at.cmp(&a.uploaded_at).then_with(|| a.photo_id.cmp(&b.photo_id)));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn user(id: &str, name: &str) -> UserRecord {
        UserRecord {
            user_id: id.into(),
            name: name.into(),
            password_hash: "x".into(),
            created_at: Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap(),
        }
    }

    fn photo(id: &str, overall: f64, secs: i64) -> PhotoRecord {
        let at = Utc.with_ymd_and_hms(2026, 3, 4, 10, 0, 0).unwrap() + chrono::Duration::seconds(secs);
        PhotoRecord {
            photo_id: id.into(),
            owner: "u1".into(),
            uploaded_at: at,
            day_bucket: at.date_naive(),
            width: 16,
            height: 16,
            scores: AestheticScores::new(overall, [0.5; 6]).unwrap(),
            suggestions: vec![],
        }
    }

    #[test]
    fn ranking_order_and_ties() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path()).unwrap();
        s.insert_user(user("u1", "ada")).unwrap();
        for p in [photo("c", 0.7, 0), photo("b", 0.9, 5), photo("a", 0.8, 1), photo("d", 0.8, 0)] {
            s.insert_photo(p, b"bytes").unwrap();
        }
        let day = NaiveDate::from_ymd_opt(2026, 3, 4).unwrap();
        let ids: Vec<_> = s.daily_ranking(day).into_iter().map(|e| e.photo_id).collect();
        assert_eq!(ids, ["b", "d", "a", "c"]);
        assert!(s.daily_ranking(NaiveDate::from_ymd_opt(2026, 3, 5).unwrap()).is_empty());
        assert_eq!(s.recommendations(2).len(), 2);
        let hist: Vec<_> = s.history("u1").into_iter().map(|p| p.photo_id.as_str()).collect();
        assert_eq!(hist, ["b", "a", "c", "d"]);
    }

    #[test]
    fn torn_tail_is_dropped_but_corruption_is_not() {
        let dir = tempfile::tempdir().unwrap();
        {
            let mut s = Store::open(dir.path()).unwrap();
            s.insert_user(user("u1", "ada")).unwrap();
        }
        let log = dir.path().join(USERS_LOG);
        let mut text = fs::read_to_string(&log).unwrap();
        text.push_str("{\"user_id\":\"u2\",\"na");
        fs::write(&log, &text).unwrap();
        let s = Store::open(dir.path()).unwrap();
        assert!(s.user_by_name("ada").is_some());
        fs::write(&log, format!("garbage\n{text}\n")).unwrap();
        assert!(Store::open(dir.path()).is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Store::open(dir.path()).unwrap();
        s.insert_user(user("u1", "ada")).unwrap();
        assert!(matches!(s.insert_user(user("u2", "ada")), Err(ServiceError::DuplicateName)));
    }
}
