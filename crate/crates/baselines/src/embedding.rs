use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;
use tidyup_core::{names::normalize, ObjectName, ReceptacleName, Scenario, Split};

use crate::{data_lines, read_file};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("vector is all zeros")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("no embedding for {0:?}")]
    MissingEmbedding(String),
    #[error("scenario has no seen objects")]
    NoSeenObjects,
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() || u.is_empty() {
        return Err(EmbeddingError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut uu, mut vv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        uu += a * a;
        vv += b * b;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Precomputed name vectors, all of one dimension. Lookup is by normalized
/// name.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new<S: AsRef<str>>(
        entries: impl IntoIterator<Item = (S, Vec<f64>)>,
    ) -> Result<Self, EmbeddingError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (i, (name, v)) in entries.into_iter().enumerate() {
            Self::check(&mut dim, &v).map_err(|message| EmbeddingError::Format {
                line: i + 1,
                message,
            })?;
            vectors.insert(normalize(name.as_ref()), v);
        }
        let dim = dim.ok_or(EmbeddingError::Format {
            line: 0,
            message: "table is empty".into(),
        })?;
        Ok(Self { dim, vectors })
    }

    fn check(dim: &mut Option<usize>, v: &[f64]) -> Result<(), String> {
        if v.is_empty() {
            return Err("empty vector".into());
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(format!("non-finite component {x}"));
        }
        match *dim {
            Some(d) if d != v.len() => Err(format!("expected {d} components, found {}", v.len())),
            _ => {
                *dim = Some(v.len());
                Ok(())
            }
        }
    }

    /// `name<TAB>v1 v2 ...` per line.
    pub fn parse(text: &str) -> Result<Self, EmbeddingError> {
        let mut dim = None;
        let mut vectors = HashMap::new();
        for (line, l) in data_lines(text) {
            let err = |message: String| EmbeddingError::Format { line, message };
            let (name, rest) = l
                .split_once('\t')
                .ok_or_else(|| err("expected name<TAB>vector".into()))?;
            let v = rest
                .split_whitespace()
                .map(str::parse::<f64>)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| err(e.to_string()))?;
            Self::check(&mut dim, &v).map_err(err)?;
            vectors.insert(normalize(name), v);
        }
        let dim = dim.ok_or(EmbeddingError::Format {
            line: 0,
            message: "table is empty".into(),
        })?;
        Ok(Self { dim, vectors })
    }

    pub fn load(path: &Path) -> Result<Self, EmbeddingError> {
        let text = read_file(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, name: &ObjectName) -> Result<&[f64], EmbeddingError> {
        self.vectors
            .get(&name.normalized())
            .map(Vec::as_slice)
            .ok_or_else(|| EmbeddingError::MissingEmbedding(name.to_string()))
    }
}

/// Receptacle of the seen object most cosine-similar to `target`.
pub fn embedding_predict(
    scenario: &Scenario,
    table: &EmbeddingTable,
    target: &ObjectName,
) -> Result<ReceptacleName, EmbeddingError> {
    let t = table.get(target)?;
    let mut best: Option<(f64, &ReceptacleName)> = None;
    for p in scenario.placements(Split::Seen) {
        let s = cosine_similarity(t, table.get(&p.object)?)?;
        if best.is_none_or(|(bs, _)| s > bs) {
            best = Some((s, &p.receptacle));
        }
    }
    best.map(|(_, r)| r.clone()).ok_or(EmbeddingError::NoSeenObjects)
}
