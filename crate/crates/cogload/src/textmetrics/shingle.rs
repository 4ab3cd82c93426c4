//! Token-shingle sets for repeated-text (boilerplate) detection.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use serde::Deserialize;

use crate::error::{Error, Result};

pub const DEFAULT_SHINGLE_K: usize = 8;

/// Which other documents a filing is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceScope {
    /// Other documents filed in the same period (cross-section).
    #[default]
    SamePeriod,
    /// The same firm's earlier filings.
    FirmPrior,
    /// Every other document in the corpus.
    All,
}

/// Hashes of consecutive k-token windows of one document.
#[derive(Debug, Clone)]
pub struct ShingleSet {
    pub document_id: String,
    pub shingles: HashSet<u64>,
    pub k: usize,
}

fn hash_window(window: &[String]) -> u64 {
    let mut hasher = DefaultHasher::new();
    for token in window {
        token.hash(&mut hasher);
        0u8.hash(&mut hasher); // separator so token boundaries matter
    }
    hasher.finish()
}

impl ShingleSet {
    /// Distinct hashes of all k-token windows. Documents shorter than k
    /// tokens produce an empty set.
    pub fn from_tokens(document_id: impl Into<String>, tokens: &[String], k: usize) -> Self {
        let shingles = if k == 0 || tokens.len() < k {
            HashSet::new()
        } else {
            tokens.windows(k).map(hash_window).collect()
        };
        Self {
            document_id: document_id.into(),
            shingles,
            k,
        }
    }

    pub fn len(&self) -> usize {
        self.shingles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shingles.is_empty()
    }
}

/// Fraction of `doc`'s shingles that appear in at least one reference
/// document's shingle set.
pub fn boilerplate_ratio(doc: &ShingleSet, references: &[&ShingleSet]) -> Result<f64> {
    if doc.is_empty() {
        return Err(Error::DegenerateDocument(format!(
            "document {} has no shingles (shorter than k = {} tokens?)",
            doc.document_id, doc.k
        )));
    }
    let shared = doc
        .shingles
        .iter()
        .filter(|h| references.iter().any(|r| r.shingles.contains(h)))
        .count();
    Ok(shared as f64 / doc.len() as f64)
}
