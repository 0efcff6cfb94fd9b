//! Precomputed embedding vectors: sets keyed by recording id, pooling,
//! text/speech fusion and alignment with a manifest.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{sample_weight, ManifestEntry};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: String,
    pub vector: Vec<f64>,
}

/// Vectors of one fixed dimension keyed by unique id; iteration follows
/// insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dimension: usize,
    records: Vec<EmbeddingRecord>,
    index: BTreeMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidInput("embedding dimension must be positive".into()));
        }
        Ok(Self {
            dimension,
            records: Vec::new(),
            index: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue);
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.index.insert(id.clone(), self.records.len());
        self.records.push(EmbeddingRecord { id, vector });
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.index.get(id).map(|&i| self.records[i].vector.as_slice())
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    /// Per-id concatenation `[text | speech]` over ids present in both sets,
    /// in `text` order.
    pub fn fuse(text: &EmbeddingSet, speech: &EmbeddingSet) -> Result<EmbeddingSet> {
        let mut fused = EmbeddingSet::new(text.dimension + speech.dimension)?;
        for r in &text.records {
            if let Some(s) = speech.get(&r.id) {
                fused.insert(r.id.clone(), concat(&r.vector, s)?)?;
            }
        }
        Ok(fused)
    }
}

/// Column-wise mean of a `T x D` frame sequence.
pub fn mean_pool(frames: &Matrix) -> Result<Vec<f64>> {
    if frames.rows() == 0 {
        return Err(Error::EmptySequence);
    }
    let mut acc = alloc::vec![0.0; frames.cols()];
    for row in frames.iter_rows() {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = frames.rows() as f64;
    Ok(acc.into_iter().map(|a| a / n).collect())
}

/// Text components first, then speech.
pub fn concat(text_vec: &[f64], speech_vec: &[f64]) -> Result<Vec<f64>> {
    if text_vec.is_empty() || speech_vec.is_empty() {
        return Err(Error::InvalidInput("cannot concatenate an empty vector".into()));
    }
    let mut out = Vec::with_capacity(text_vec.len() + speech_vec.len());
    out.extend_from_slice(text_vec);
    out.extend_from_slice(speech_vec);
    Ok(out)
}

/// Design matrix and targets aligned to manifest order.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedData {
    pub ids: Vec<String>,
    pub x: Matrix,
    pub labels: Vec<u8>,
    pub scores: Vec<i64>,
    /// Manifest ids absent from the set (only non-zero when not strict).
    pub missing: usize,
}

impl JoinedData {
    pub fn weights(&self) -> Result<Vec<f64>> {
        self.scores.iter().map(|&s| sample_weight(s)).collect()
    }
}

/// Rows follow the manifest order. With `strict`, any id missing from the
/// set is an error; otherwise missing entries are dropped and counted.
pub fn join_with_manifest(set: &EmbeddingSet, manifest: &[ManifestEntry], strict: bool) -> Result<JoinedData> {
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    let mut missing = 0;
    for entry in manifest {
        match set.get(&entry.id) {
            Some(v) => {
                ids.push(entry.id.clone());
                data.extend_from_slice(v);
                labels.push(entry.label()?);
                scores.push(entry.gad7);
            }
            None if strict => return Err(Error::MissingId(entry.id.clone())),
            None => missing += 1,
        }
    }
    let x = Matrix::from_vec(ids.len(), set.dimension, data)?;
    Ok(JoinedData {
        ids,
        x,
        labels,
        scores,
        missing,
    })
}
