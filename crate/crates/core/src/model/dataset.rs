use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AestheticScores, Attribute, ModelError};

pub const MANIFEST_HEADER: [&str; 8] = [
    "path",
    "overall",
    "balanced_elements",
    "color_harmony",
    "object_emphasis",
    "good_lighting",
    "rule_of_thirds",
    "vivid_color",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    /// Image or precomputed feature-map file, resolved against the manifest's
    /// directory when relative.
    pub path: PathBuf,
    pub targets: AestheticScores,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetManifest {
    pub records: Vec<DatasetRecord>,
    /// Rows that failed to parse while reading the manifest.
    pub skipped_rows: usize,
}

#[derive(Debug, Deserialize)]
struct Row {
    path: PathBuf,
    overall: f64,
    balanced_elements: f64,
    color_harmony: f64,
    object_emphasis: f64,
    good_lighting: f64,
    rule_of_thirds: f64,
    vivid_color: f64,
}

impl DatasetManifest {
    pub fn new(records: Vec<DatasetRecord>) -> Self {
        Self {
            records,
            skipped_rows: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Parses CSV. Rows with malformed or out-of-range labels are counted in
    /// `skipped_rows`; a wrong header is an error. Relative paths are joined
    /// onto `base`.
    pub fn read_csv(reader: impl Read, base: &Path) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| ModelError::Manifest(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
            return Err(ModelError::Manifest(format!(
                "expected header {}, got {}",
                MANIFEST_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut out = Self::default();
        for (line, row) in rdr.deserialize::<Row>().enumerate() {
            let parsed = row.map_err(|e| e.to_string()).and_then(|r| {
                let attrs = [
                    r.balanced_elements,
                    r.color_harmony,
                    r.object_emphasis,
                    r.good_lighting,
                    r.rule_of_thirds,
                    r.vivid_color,
                ];
                AestheticScores::new(r.overall, attrs)
                    .map(|targets| DatasetRecord {
                        path: if r.path.is_absolute() { r.path } else { base.join(r.path) },
                        targets,
                    })
                    .map_err(|e| e.to_string())
            });
            match parsed {
                Ok(rec) => out.records.push(rec),
                Err(e) => {
                    log::warn!("manifest row {}: {e}", line + 2);
                    out.skipped_rows += 1;
                }
            }
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::read_csv(std::io::BufReader::new(file), base)
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<(), ModelError> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| ModelError::Manifest(e.to_string());
        w.write_record(MANIFEST_HEADER).map_err(err)?;
        for r in &self.records {
            let mut fields = vec![r.path.to_string_lossy().into_owned(), r.targets.overall().to_string()];
            fields.extend(Attribute::ALL.iter().map(|&a| r.targets.attribute(a).to_string()));
            w.write_record(&fields).map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Records `[n_train..]` after a seeded shuffle; the same split `train` uses.
    pub fn split(&self, ratio: f64, seed: u64) -> (Vec<&DatasetRecord>, Vec<&DatasetRecord>) {
        let order = super::train::shuffled_order(self.records.len(), seed);
        let n_train = train_count(self.records.len(), ratio);
        let mut recs: Vec<&DatasetRecord> = order.iter().map(|&i| &self.records[i]).collect();
        let test = recs.split_off(n_train);
        (recs, test)
    }
}

/// `round(ratio * n)` clamped so both sides are non-empty when `n >= 2`.
pub fn train_count(n: usize, ratio: f64) -> usize {
    if n < 2 {
        return n;
    }
    ((ratio * n as f64).round() as usize).clamp(1, n - 1)
}

/// Affine map of a label from `[lo, hi]` into [0,1], clamped. AADB attribute
/// labels live in [-1, 1].
pub fn rescale_label(value: f64, lo: f64, hi: f64) -> f64 {
    ((value - lo) / (hi - lo)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "path,overall,balanced_elements,color_harmony,object_emphasis,good_lighting,rule_of_thirds,vivid_color
a.png,0.5,0.1,0.2,0.3,0.4,0.5,0.6
b.png,1.5,0.1,0.2,0.3,0.4,0.5,0.6
c.png,0.5,x,0.2,0.3,0.4,0.5,0.6
/abs/d.png,0,0,0,0,0,0,1
";

    #[test]
    fn parses_and_counts_bad_rows() {
        let m = DatasetManifest::read_csv(CSV.as_bytes(), Path::new("/data")).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.skipped_rows, 2);
        assert_eq!(m.records[0].path, Path::new("/data/a.png"));
        assert_eq!(m.records[1].path, Path::new("/abs/d.png"));
        assert_eq!(m.records[0].targets.attribute(Attribute::VividColor), 0.6);
    }

    #[test]
    fn wrong_header_is_an_error() {
        let bad = "path,overall\na.png,0.5\n";
        assert!(matches!(
            DatasetManifest::read_csv(bad.as_bytes(), Path::new(".")),
            Err(ModelError::Manifest(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let m = DatasetManifest::read_csv(CSV.as_bytes(), Path::new("/data")).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = DatasetManifest::read_csv(&buf[..], Path::new("/elsewhere")).unwrap();
        assert_eq!(back.records, m.records);
    }

    #[test]
    fn split_sizes() {
        assert_eq!(train_count(10, 0.9), 9);
        assert_eq!(train_count(2, 0.9), 1);
        assert_eq!(train_count(8, 0.9), 7);
        assert_eq!(train_count(100, 0.9), 90);
        assert_eq!(rescale_label(0.0, -1.0, 1.0), 0.5);
    }
}
