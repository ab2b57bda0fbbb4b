//! Vocabulary construction, tf-idf weighting and cosine similarity.
//!
//! The representation layer: every sentence and query becomes an
//! L2-normalized sparse tf-idf vector over a vocabulary fitted on the
//! training documents only.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

pub const VOCABULARY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum VectorSpaceError {
    #[error("cannot fit a vocabulary: all documents are empty")]
    EmptyCorpus,
    #[error("vocabulary file unreadable: {0}")]
    FileUnreadable(#[from] std::io::Error),
    #[error("vocabulary file malformed: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported vocabulary format version {0}")]
    UnsupportedVersion(u32),
}

/// Term dictionary with document frequencies.
///
/// Ids are dense `0..len()` in order of first appearance across the fitting
/// corpus, which makes fitting deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    term_ids: HashMap<String, u32>,
    doc_freq: Vec<u32>,
    n_docs: usize,
}

impl Vocabulary {
    /// Fits a vocabulary over stem lists, one list per document.
    ///
    /// df(t) counts documents containing t, not occurrences.
    pub fn fit<S: AsRef<str>>(documents: &[Vec<S>]) -> Result<Self, VectorSpaceError> {
        Self::fit_min_df(documents, 1)
    }

    /// Like [`Vocabulary::fit`] but drops terms with df below `min_df`.
    pub fn fit_min_df<S: AsRef<str>>(
        documents: &[Vec<S>],
        min_df: u32,
    ) -> Result<Self, VectorSpaceError> {
        if documents.iter().all(|d| d.is_empty()) {
            return Err(VectorSpaceError::EmptyCorpus);
        }
        let mut counts: HashMap<&str, u32> = HashMap::new();
        let mut order: Vec<&str> = Vec::new();
        for doc in documents {
            let mut seen: HashSet<&str> = HashSet::new();
            for stem in doc {
                let s = stem.as_ref();
                if seen.insert(s) {
                    let c = counts.entry(s).or_insert(0);
                    if *c == 0 {
                        order.push(s);
                    }
                    *c += 1;
                }
            }
        }
        let mut term_ids = HashMap::new();
        let mut doc_freq = Vec::new();
        for term in order {
            let df = counts[term];
            if df >= min_df.max(1) {
                term_ids.insert(term.to_string(), doc_freq.len() as u32);
                doc_freq.push(df);
            }
        }
        Ok(Self {
            term_ids,
            doc_freq,
            n_docs: documents.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.doc_freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_freq.is_empty()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn id_of(&self, term: &str) -> Option<u32> {
        self.term_ids.get(term).copied()
    }

    pub fn df(&self, id: u32) -> u32 {
        self.doc_freq[id as usize]
    }

    pub fn contains(&self, term: &str) -> bool {
        self.term_ids.contains_key(term)
    }

    /// Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1.
    pub fn idf<T: Real>(&self, id: u32) -> T {
        let n = T::from_count(self.n_docs) + T::one();
        let df = T::from_u32(self.doc_freq[id as usize]).unwrap() + T::one();
        (n / df).ln() + T::one()
    }

    /// L2-normalized tf-idf vector of a stem list; OOV stems are dropped.
    pub fn tfidf<T: Real, S: AsRef<str>>(&self, stems: &[S]) -> SparseVector<T> {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for stem in stems {
            if let Some(id) = self.id_of(stem.as_ref()) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        let entries = counts
            .into_iter()
            .map(|(id, tf)| (id, T::from_u32(tf).unwrap() * self.idf::<T>(id)))
            .collect();
        SparseVector::from_sorted(entries).normalized()
    }

    /// Stable content hash over (term, id, df, n_docs), for model/vocab pairing.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut entries: Vec<(&str, u32)> = self
            .term_ids
            .iter()
            .map(|(t, &id)| (t.as_str(), id))
            .collect();
        entries.sort_unstable();
        let mut h = Sha256::new();
        h.update(self.n_docs.to_le_bytes());
        for (term, id) in entries {
            h.update(term.as_bytes());
            h.update([0u8]);
            h.update(id.to_le_bytes());
            h.update(self.doc_freq[id as usize].to_le_bytes());
        }
        hex_string(&h.finalize())
    }

    pub fn to_json(&self) -> String {
        let mut terms: Vec<VocabEntry> = self
            .term_ids
            .iter()
            .map(|(t, &id)| VocabEntry {
                term: t.clone(),
                id,
                df: self.doc_freq[id as usize],
            })
            .collect();
        terms.sort_by_key(|e| e.id);
        let file = VocabFile {
            format_version: VOCABULARY_FORMAT_VERSION,
            n_docs: self.n_docs,
            terms,
        };
        serde_json::to_string_pretty(&file).expect("vocabulary serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, VectorSpaceError> {
        let file: VocabFile = serde_json::from_str(json)?;
        if file.format_version != VOCABULARY_FORMAT_VERSION {
            return Err(VectorSpaceError::UnsupportedVersion(file.format_version));
        }
        let mut term_ids = HashMap::new();
        let mut doc_freq = vec![0u32; file.terms.len()];
        for e in file.terms {
            doc_freq[e.id as usize] = e.df;
            term_ids.insert(e.term, e.id);
        }
        Ok(Self {
            term_ids,
            doc_freq,
            n_docs: file.n_docs,
        })
    }
}

pub(crate) fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    format_version: u32,
    n_docs: usize,
    terms: Vec<VocabEntry>,
}

#[derive(Serialize, Deserialize)]
struct VocabEntry {
    term: String,
    id: u32,
    df: u32,
}

/// Sparse term-weight vector: sorted (term-id, weight) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector<T> {
    entries: Vec<(u32, T)>,
}

impl<T: Real> Default for SparseVector<T> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<T: Real> SparseVector<T> {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Builds from entries already sorted by strictly increasing id.
    pub fn from_sorted(entries: Vec<(u32, T)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { entries }
    }

    /// Builds from unsorted pairs, summing duplicate ids.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, T)>) -> Self {
        let mut map: BTreeMap<u32, T> = BTreeMap::new();
        for (id, w) in pairs {
            *map.entry(id).or_insert_with(T::zero) += w;
        }
        Self {
            entries: map.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> T {
        self.entries
            .iter()
            .map(|&(_, w)| w * w)
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Returns this vector scaled to unit L2 norm; empty stays empty.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n <= T::zero() {
            return Self::empty();
        }
        Self {
            entries: self.entries.iter().map(|&(id, w)| (id, w / n)).collect(),
        }
    }

    /// Sparse dot product by merging the sorted id lists.
    pub fn dot(&self, other: &Self) -> T {
        let mut acc = T::zero();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.entries.len() && j < other.entries.len() {
            let (ia, wa) = self.entries[i];
            let (ib, wb) = other.entries[j];
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Cosine similarity; 0 when either vector is empty.
pub fn cosine<T: Real>(a: &SparseVector<T>, b: &SparseVector<T>) -> T {
    if a.is_empty() || b.is_empty() {
        return T::zero();
    }
    a.dot(b) / (a.norm() * b.norm())
}
