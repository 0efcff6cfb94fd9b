//! Line-oriented interchange files.
//!
//! JSONL readers skip blank lines and lines starting with `#`, and report
//! errors with 1-based physical line numbers.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gadvoice_core::dataset::{ManifestEntry, GAD7_MAX};
use gadvoice_core::embedding::EmbeddingSet;
use gadvoice_core::features::{registry, Annotation, FEATURE_DIM};
use gadvoice_core::metrics::Curve;
use gadvoice_core::FeatureVector;
use serde::Deserialize;

use crate::{Error, Result};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `(line number, content)` for every record line.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn malformed(path: &Path, line: usize, e: impl ToString) -> Error {
    Error::MalformedLine {
        path: path.into(),
        line,
        msg: e.to_string(),
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, rec) in records(&text) {
        let entry: ManifestEntry = serde_json::from_str(rec).map_err(|e| malformed(path, line, e))?;
        if !(0..=GAD7_MAX).contains(&entry.gad7) {
            return Err(Error::ScoreOutOfRange {
                path: path.into(),
                line,
                score: entry.gad7,
            });
        }
        if !seen.insert(entry.id.clone()) {
            return Err(Error::DuplicateId {
                path: path.into(),
                line,
                id: entry.id,
            });
        }
        out.push(entry);
    }
    if out.is_empty() {
        return Err(Error::EmptyFile(path.into()));
    }
    Ok(out)
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut s = String::new();
    for e in entries {
        s.push_str(&serde_json::to_string(e).expect("manifest entries serialize"));
        s.push('\n');
    }
    write_string(path.as_ref(), &s)
}

#[derive(Deserialize)]
struct RawEmbedding {
    id: String,
    vector: Vec<f64>,
}

#[derive(Deserialize)]
struct LenientEmbedding {
    vector: Vec<Option<f64>>,
}

/// Distinguishes NaN/Infinity tokens and overflowing literals from other
/// syntax errors.
fn is_non_finite_line(rec: &str, err: &serde_json::Error) -> bool {
    if err.to_string().contains("number out of range") {
        return true;
    }
    let patched = rec.replace("-Infinity", "null").replace("Infinity", "null").replace("NaN", "null");
    serde_json::from_str::<LenientEmbedding>(&patched).is_ok_and(|r| r.vector.iter().any(Option::is_none))
}

/// Each line is `{"id": string, "vector": [reals]}`. The dimension is taken
/// from the first record.
pub fn load_embedding_file(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut set: Option<EmbeddingSet> = None;
    for (line, rec) in records(&text) {
        let raw: RawEmbedding = serde_json::from_str(rec).map_err(|e| {
            if is_non_finite_line(rec, &e) {
                Error::NonFiniteValue { path: path.into(), line }
            } else {
                malformed(path, line, e)
            }
        })?;
        let set = match &mut set {
            Some(s) => s,
            None => set.insert(EmbeddingSet::new(raw.vector.len()).map_err(|e| malformed(path, line, e))?),
        };
        if raw.vector.len() != set.dimension() {
            return Err(Error::DimensionMismatch {
                path: path.into(),
                line,
                expected: set.dimension(),
                found: raw.vector.len(),
            });
        }
        set.insert(raw.id.clone(), raw.vector).map_err(|e| match e {
            gadvoice_core::Error::DuplicateId(id) => Error::DuplicateId { path: path.into(), line, id },
            gadvoice_core::Error::NonFiniteValue => Error::NonFiniteValue { path: path.into(), line },
            other => malformed(path, line, other),
        })?;
    }
    set.ok_or_else(|| Error::EmptyFile(path.into()))
}

/// Writes one record per line with 9 significant digits per value, preceded
/// by `header` lines turned into `#` comments.
pub fn write_embedding_file(path: impl AsRef<Path>, set: &EmbeddingSet, header: &[&str]) -> Result<()> {
    let mut s = String::new();
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    for r in set.records() {
        s.push_str("{\"id\":");
        s.push_str(&serde_json::to_string(&r.id).expect("strings serialize"));
        s.push_str(",\"vector\":[");
        for (j, v) in r.vector.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:.8e}");
        }
        s.push_str("]}\n");
    }
    write_string(path.as_ref(), &s)
}

#[derive(Deserialize)]
struct RawAnnotation {
    id: String,
    #[serde(flatten)]
    annotation: Annotation,
}

/// Each line is `{"id", "emotion", "sentiment"}`.
pub fn load_annotations(path: impl AsRef<Path>) -> Result<BTreeMap<String, Annotation>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    let mut out = BTreeMap::new();
    for (line, rec) in records(&text) {
        let raw: RawAnnotation = serde_json::from_str(rec).map_err(|e| malformed(path, line, e))?;
        if out.insert(raw.id.clone(), raw.annotation).is_some() {
            return Err(Error::DuplicateId {
                path: path.into(),
                line,
                id: raw.id,
            });
        }
    }
    Ok(out)
}

pub fn write_annotations(path: impl AsRef<Path>, annotations: &BTreeMap<String, Annotation>) -> Result<()> {
    let mut s = String::new();
    for (id, a) in annotations {
        let v = serde_json::json!({ "id": id, "emotion": a.emotion, "sentiment": a.sentiment });
        s.push_str(&v.to_string());
        s.push('\n');
    }
    write_string(path.as_ref(), &s)
}

/// Header `id,<registry names>`, then one row per recording. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_features_csv(path: impl AsRef<Path>, rows: &[(String, FeatureVector)]) -> Result<()> {
    let path = path.as_ref();
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["id".to_string()];
    header.extend(registry());
    w.write_record(&header).map_err(csv_err)?;
    for (id, fv) in rows {
        let mut rec = vec![id.clone()];
        rec.extend(fv.values().iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a features CSV into a set keyed by id. The header must list the
/// current registry exactly.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let header: Vec<String> = r.headers().map_err(|e| malformed(path, 1, e))?.iter().map(String::from).collect();
    let mut expected = vec!["id".to_string()];
    expected.extend(registry());
    if header != expected {
        return Err(malformed(path, 1, "header does not match the feature registry"));
    }
    let mut set = EmbeddingSet::new(FEATURE_DIM)?;
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { len, .. } => Error::DimensionMismatch {
                path: path.into(),
                line,
                expected: FEATURE_DIM,
                found: (*len as usize).saturating_sub(1),
            },
            _ => malformed(path, line, e),
        })?;
        let values = rec
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>().map_err(|e| malformed(path, line, e)))
            .collect::<Result<Vec<f64>>>()?;
        let id = rec.get(0).unwrap_or_default().to_string();
        set.insert(id.clone(), values).map_err(|e| match e {
            gadvoice_core::Error::DuplicateId(id) => Error::DuplicateId { path: path.into(), line, id },
            gadvoice_core::Error::NonFiniteValue => Error::NonFiniteValue { path: path.into(), line },
            other => malformed(path, line, other),
        })?;
    }
    if set.is_empty() {
        return Err(Error::EmptyFile(path.into()));
    }
    Ok(set)
}

/// `threshold,x,y` rows; the ROC origin's threshold is written as `inf`.
pub fn curve_csv(curve: &Curve) -> String {
    let mut s = String::from("threshold,x,y\n");
    for p in &curve.points {
        let _ = writeln!(s, "{},{},{}", p.threshold, p.x, p.y);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use gadvoice_core::features::{Emotion, Sentiment};

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn manifest_lines_and_errors() {
        let d = tempfile::tempdir().unwrap();
        let ok = write(
            &d,
            "m.jsonl",
            "# corpus\n{\"id\":\"a\",\"gad7\":0}\n\n{\"id\":\"b\",\"gad7\":21,\"split\":\"test\"}\n{\"id\":\"c\",\"gad7\":7,\"audio_path\":\"c.wav\"}\n",
        );
        let m = load_manifest(&ok).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m[2].audio_path.as_deref(), Some("c.wav"));

        let bad = write(&d, "bad.jsonl", "{\"id\":\"a\",\"gad7\":22}\n");
        assert!(matches!(load_manifest(&bad), Err(Error::ScoreOutOfRange { line: 1, score: 22, .. })));
        let dup = write(&d, "dup.jsonl", "{\"id\":\"a\",\"gad7\":1}\n{\"id\":\"a\",\"gad7\":2}\n");
        assert!(matches!(load_manifest(&dup), Err(Error::DuplicateId { line: 2, .. })));
        let junk = write(&d, "junk.jsonl", "{\"id\":\"a\",\"gad7\":1}\n{oops\n");
        assert!(matches!(load_manifest(&junk), Err(Error::MalformedLine { line: 2, .. })));

        let back = d.path().join("back.jsonl");
        write_manifest(&back, &m).unwrap();
        assert_eq!(load_manifest(&back).unwrap(), m);
    }

    #[test]
    fn embedding_file_contract() {
        let d = tempfile::tempdir().unwrap();
        let two = write(&d, "e.jsonl", "{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[4,5,6]}\n");
        let set = load_embedding_file(&two).unwrap();
        assert_eq!((set.dimension(), set.len()), (3, 2));

        let mism = write(&d, "m.jsonl", "{\"id\":\"a\",\"vector\":[1,2,3]}\n{\"id\":\"b\",\"vector\":[4,5,6,7]}\n");
        assert!(matches!(
            load_embedding_file(&mism),
            Err(Error::DimensionMismatch { line: 2, expected: 3, found: 4, .. })
        ));
        let dup = write(&d, "d.jsonl", "{\"id\":\"a\",\"vector\":[1]}\n{\"id\":\"a\",\"vector\":[2]}\n");
        assert!(matches!(load_embedding_file(&dup), Err(Error::DuplicateId { line: 2, .. })));
        let nan = write(&d, "n.jsonl", "{\"id\":\"a\",\"vector\":[1, NaN]}\n");
        assert!(matches!(load_embedding_file(&nan), Err(Error::NonFiniteValue { line: 1, .. })));
        let big = write(&d, "b.jsonl", "{\"id\":\"a\",\"vector\":[1e999]}\n");
        assert!(matches!(load_embedding_file(&big), Err(Error::NonFiniteValue { line: 1, .. })));
        let empty = write(&d, "z.jsonl", "# header only\n");
        assert!(matches!(load_embedding_file(&empty), Err(Error::EmptyFile(_))));
    }

    #[test]
    fn embedding_round_trip_with_nine_digits() {
        let d = tempfile::tempdir().unwrap();
        let mut set = EmbeddingSet::new(4).unwrap();
        set.insert("x\"1", vec![0.1, -123456789.0, 1.5e-300, 0.0]).unwrap();
        set.insert("y", vec![9.87654321e7, 2.0, -0.000123456789, 1.0]).unwrap();
        let p = d.path().join("rt.jsonl");
        write_embedding_file(&p, &set, &["model: synthetic"]).unwrap();
        assert_eq!(load_embedding_file(&p).unwrap(), set);
        assert!(fs::read_to_string(&p).unwrap().starts_with("# model: synthetic\n"));
    }

    #[test]
    fn annotations_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let p = write(&d, "a.jsonl", "{\"id\":\"r1\",\"emotion\":\"love\",\"sentiment\":\"positive\"}\n");
        let a = load_annotations(&p).unwrap();
        assert_eq!(a["r1"], Annotation { emotion: Emotion::Love, sentiment: Sentiment::Positive });
        let bad = write(&d, "b.jsonl", "{\"id\":\"r1\",\"emotion\":\"boredom\",\"sentiment\":\"positive\"}\n");
        assert!(matches!(load_annotations(&bad), Err(Error::MalformedLine { line: 1, .. })));
        let out = d.path().join("o.jsonl");
        write_annotations(&out, &a).unwrap();
        assert_eq!(load_annotations(&out).unwrap(), a);
    }

    #[test]
    fn features_csv_round_trip() {
        let d = tempfile::tempdir().unwrap();
        let rows: Vec<(String, FeatureVector)> = (0..3)
            .map(|i| {
                let v = (0..FEATURE_DIM).map(|j| (i * 100 + j) as f64 / 7.0).collect();
                (format!("r{i}"), FeatureVector::new(v, true).unwrap())
            })
            .collect();
        let p = d.path().join("f.csv");
        write_features_csv(&p, &rows).unwrap();
        let set = load_features_csv(&p).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.get("r2").unwrap(), rows[2].1.values());
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("id,F0_semitone_mean,"));

        let short = write(&d, "s.csv", &text.replacen(",", ";", 1));
        assert!(matches!(load_features_csv(&short), Err(Error::MalformedLine { line: 1, .. })));
    }
}
