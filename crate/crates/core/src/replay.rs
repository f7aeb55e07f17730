//! Recomputes the user-study summary figures from the transcribed tables and
//! checks them against the figures quoted in the accompanying prose.
//!
//! Table 1 CSV: `group,subject,before,after,diff` (scores 0-100, `diff` as
//! printed). Table 2 CSV: `group,subject,ad_photographer,graduate,teacher`,
//! where 1 means that professional picked the guided photo of the pair.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TABLE1_CSV: &str = include_str!("../data/table1.csv");
pub const TABLE2_CSV: &str = include_str!("../data/table2.csv");
pub const CLAIMS_TOML: &str = include_str!("../data/claims.toml");

pub const PROFESSIONALS: [&str; 3] = ["ad_photographer", "graduate", "teacher"];

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("table parse error: {0}")]
    Parse(String),
    #[error("claims file: {0}")]
    Claims(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub group: u32,
    pub subject: u32,
    pub before: i64,
    pub after: i64,
    pub diff: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Row {
    pub group: u32,
    pub subject: u32,
    pub ad_photographer: u8,
    pub graduate: u8,
    pub teacher: u8,
}

impl Table2Row {
    pub fn picks(&self) -> [bool; 3] {
        [self.ad_photographer == 1, self.graduate == 1, self.teacher == 1]
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(reader: impl Read) -> Result<Vec<T>, ReplayError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| ReplayError::Parse(format!("row {}: {e}", i + 2))))
        .collect()
}

pub fn read_table1(reader: impl Read) -> Result<Vec<Table1Row>, ReplayError> {
    read_rows(reader)
}

pub fn read_table2(reader: impl Read) -> Result<Vec<Table2Row>, ReplayError> {
    let rows: Vec<Table2Row> = read_rows(reader)?;
    for r in &rows {
        if [r.ad_photographer, r.graduate, r.teacher].iter().any(|&v| v > 1) {
            return Err(ReplayError::Parse(format!("subject {}: picks must be 0 or 1", r.subject)));
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectDiff {
    pub subject: u32,
    pub before: i64,
    pub after: i64,
    pub diff: i64,
    /// The printed diff disagrees with `after - before`.
    pub printed_mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Stats {
    pub n: usize,
    pub diffs: Vec<SubjectDiff>,
    pub mean_diff: f64,
    pub max_diff: i64,
    /// Subjects whose score strictly increased.
    pub improved: usize,
    pub improved_frac: f64,
}

pub fn table1_stats(rows: &[Table1Row]) -> Result<Table1Stats, ReplayError> {
    if rows.is_empty() {
        return Err(ReplayError::Parse("table 1 has no rows".into()));
    }
    let diffs: Vec<SubjectDiff> = rows
        .iter()
        .map(|r| SubjectDiff {
            subject: r.subject,
            before: r.before,
            after: r.after,
            diff: r.after - r.before,
            printed_mismatch: r.after - r.before != r.diff,
        })
        .collect();
    let n = diffs.len();
    let improved = diffs.iter().filter(|d| d.diff > 0).count();
    Ok(Table1Stats {
        n,
        mean_diff: diffs.iter().map(|d| d.diff as f64).sum::<f64>() / n as f64,
        max_diff: diffs.iter().map(|d| d.diff).max().unwrap_or(0),
        improved,
        improved_frac: improved as f64 / n as f64,
        diffs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub professional: String,
    pub count: usize,
    pub n: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table2Stats {
    pub per_professional: Vec<Agreement>,
    /// Pooled over all professionals and pairs.
    pub overall: Agreement,
}

pub fn table2_stats(rows: &[Table2Row]) -> Result<Table2Stats, ReplayError> {
    if rows.is_empty() {
        return Err(ReplayError::Parse("table 2 has no rows".into()));
    }
    let n = rows.len();
    let per_professional: Vec<Agreement> = PROFESSIONALS
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let count = rows.iter().filter(|r| r.picks()[i]).count();
            Agreement {
                professional: name.to_string(),
                count,
                n,
                rate: count as f64 / n as f64,
            }
        })
        .collect();
    let total: usize = per_professional.iter().map(|a| a.count).sum();
    let pooled = n * PROFESSIONALS.len();
    Ok(Table2Stats {
        per_professional,
        overall: Agreement {
            professional: "overall".into(),
            count: total,
            n: pooled,
            rate: total as f64 / pooled as f64,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub id: String,
    pub text: String,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSet {
    pub version: u32,
    #[serde(rename = "claim")]
    pub claims: Vec<Claim>,
}

impl ClaimSet {
    pub fn parse(text: &str) -> Result<Self, ReplayError> {
        toml::from_str(text).map_err(|e| ReplayError::Claims(e.to_string()))
    }
}

impl Default for ClaimSet {
    fn default() -> Self {
        Self::parse(CLAIMS_TOML).expect("bundled claims parse")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub id: String,
    pub text: String,
    pub claimed: f64,
    /// `None` when no table supplies this quantity.
    pub computed: Option<f64>,
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub table1: Option<Table1Stats>,
    pub table2: Option<Table2Stats>,
    pub claims: Vec<ClaimCheck>,
}

impl StatsReport {
    pub fn claim(&self, id: &str) -> Option<&ClaimCheck> {
        self.claims.iter().find(|c| c.id == id)
    }

    pub fn inconsistent(&self) -> impl Iterator<Item = &ClaimCheck> {
        self.claims.iter().filter(|c| c.consistent == Some(false))
    }
}

fn computed_values(t1: Option<&Table1Stats>, t2: Option<&Table2Stats>) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    if let Some(t) = t1 {
        m.insert("table1.mean_diff".into(), t.mean_diff);
        m.insert("table1.improved_frac".into(), t.improved_frac);
        m.insert("table1.max_diff".into(), t.max_diff as f64);
        m.insert("table1.improved".into(), t.improved as f64);
    }
    if let Some(t) = t2 {
        for a in t.per_professional.iter().chain([&t.overall]) {
            m.insert(format!("table2.{}.count", a.professional), a.count as f64);
            m.insert(format!("table2.{}.rate", a.professional), a.rate);
        }
    }
    m
}

pub fn replay(
    table1: Option<&[Table1Row]>,
    table2: Option<&[Table2Row]>,
    claims: &ClaimSet,
) -> Result<StatsReport, ReplayError> {
    let t1 = table1.map(table1_stats).transpose()?;
    let t2 = table2.map(table2_stats).transpose()?;
    let values = computed_values(t1.as_ref(), t2.as_ref());
    let checks = claims
        .claims
        .iter()
        .map(|c| {
            let computed = values.get(&c.id).copied();
            ClaimCheck {
                id: c.id.clone(),
                text: c.text.clone(),
                claimed: c.value,
                computed,
                consistent: computed.map(|v| (v - c.value).abs() <= c.tolerance),
            }
        })
        .collect();
    Ok(StatsReport {
        table1: t1,
        table2: t2,
        claims: checks,
    })
}

/// Replay over the bundled transcriptions and claims.
pub fn replay_bundled() -> StatsReport {
    let t1 = read_table1(TABLE1_CSV.as_bytes()).expect("bundled table 1 parses");
    let t2 = read_table2(TABLE2_CSV.as_bytes()).expect("bundled table 2 parses");
    replay(Some(&t1), Some(&t2), &ClaimSet::default()).expect("bundled tables are non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_subject_diff() {
        let r = replay_bundled();
        let d = &r.table1.as_ref().unwrap().diffs[0];
        assert_eq!((d.subject, d.before, d.after, d.diff), (1, 63, 72, 9));
        assert!(r.table1.unwrap().diffs.iter().all(|d| !d.printed_mismatch));
    }

    #[test]
    fn small_tables() {
        let t1 = read_table1("group,subject,before,after,diff\n1,1,50,60,10\n1,2,60,50,-10\n1,3,5,5,1\n".as_bytes()).unwrap();
        let s = table1_stats(&t1).unwrap();
        assert_eq!((s.improved, s.max_diff), (1, 10));
        assert_eq!(s.mean_diff, 0.0);
        assert!(s.diffs[2].printed_mismatch);
        let t2 = read_table2("group,subject,ad_photographer,graduate,teacher\n1,1,1,0,1\n1,2,0,0,1\n".as_bytes()).unwrap();
        let s = table2_stats(&t2).unwrap();
        assert_eq!(s.per_professional[2].count, 2);
        assert_eq!((s.overall.count, s.overall.n), (3, 6));
        assert!(read_table2("group,subject,ad_photographer,graduate,teacher\n1,1,2,0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn claims_without_a_table_are_unchecked() {
        let t2 = read_table2(TABLE2_CSV.as_bytes()).unwrap();
        let r = replay(None, Some(&t2), &ClaimSet::default()).unwrap();
        let c = r.claim("table1.mean_diff").unwrap();
        assert_eq!((c.computed, c.consistent), (None, None));
    }
}
