//! From-scratch ROUGE-S and ROUGE-SU with configurable skip distance.
//!
//! A skip-bigram is an ordered token pair (t_i, t_j), i < j, with at most
//! `d_skip` intervening tokens (j - i - 1 <= d_skip). SU variants add the
//! unigram multiset to the unit bag. Matching is multiset intersection:
//! sum over units of min(candidate count, reference count).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum RougeError {
    #[error("reference set is empty")]
    EmptyReferenceSet,
}

/// S counts skip-bigrams only; SU adds unigrams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RougeMode {
    S,
    SU,
}

/// Precision / recall / F1 triple for one candidate-reference pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

impl<T: Real> RougeScore<T> {
    pub fn zero() -> Self {
        Self {
            precision: T::zero(),
            recall: T::zero(),
            f1: T::zero(),
        }
    }

    fn from_counts(matches: u64, cand_total: u64, ref_total: u64) -> Self {
        if cand_total == 0 || ref_total == 0 {
            return Self::zero();
        }
        let m = T::from_u64(matches).unwrap();
        let p = m / T::from_u64(cand_total).unwrap();
        let r = m / T::from_u64(ref_total).unwrap();
        let f1 = if p + r > T::zero() {
            (T::one() + T::one()) * p * r / (p + r)
        } else {
            T::zero()
        };
        Self {
            precision: p,
            recall: r,
            f1,
        }
    }
}

/// Multiset of skip-bigrams plus the unigram multiset.
#[derive(Debug, Clone, Default)]
pub struct SkipBigramBag {
    pub bigrams: HashMap<(String, String), u64>,
    pub unigrams: HashMap<String, u64>,
}

impl SkipBigramBag {
    pub fn unit_total(&self, mode: RougeMode) -> u64 {
        let bi: u64 = self.bigrams.values().sum();
        match mode {
            RougeMode::S => bi,
            RougeMode::SU => bi + self.unigrams.values().sum::<u64>(),
        }
    }
}

/// Collects skip-bigrams and unigrams from one token sequence (one sentence:
/// pairs never cross a call boundary).
pub fn skip_bigrams<S: AsRef<str>>(tokens: &[S], d_skip: usize) -> SkipBigramBag {
    let mut bag = SkipBigramBag::default();
    for (i, t) in tokens.iter().enumerate() {
        *bag.unigrams.entry(t.as_ref().to_string()).or_insert(0) += 1;
        let hi = (i + 1 + d_skip + 1).min(tokens.len());
        for second in &tokens[i + 1..hi] {
            let key = (t.as_ref().to_string(), second.as_ref().to_string());
            *bag.bigrams.entry(key).or_insert(0) += 1;
        }
    }
    bag
}

fn intersect<K: std::hash::Hash + Eq>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> u64 {
    a.iter()
        .map(|(k, &ca)| b.get(k).map_or(0, |&cb| ca.min(cb)))
        .sum()
}

/// Scores a candidate against one reference.
pub fn rouge_su<T: Real, S: AsRef<str>, R: AsRef<str>>(
    candidate: &[S],
    reference: &[R],
    d_skip: usize,
    mode: RougeMode,
) -> RougeScore<T> {
    if candidate.is_empty() || reference.is_empty() {
        return RougeScore::zero();
    }
    let cand = skip_bigrams(candidate, d_skip);
    let refr = skip_bigrams(reference, d_skip);
    let mut matches = intersect(&cand.bigrams, &refr.bigrams);
    if mode == RougeMode::SU {
        matches += intersect(&cand.unigrams, &refr.unigrams);
    }
    RougeScore::from_counts(matches, cand.unit_total(mode), refr.unit_total(mode))
}

/// Multi-reference scoring: the per-reference maximum F1 with its paired
/// precision and recall.
pub fn rouge_su_multi<T: Real, S: AsRef<str>, R: AsRef<str>>(
    candidate: &[S],
    references: &[Vec<R>],
    d_skip: usize,
    mode: RougeMode,
) -> Result<RougeScore<T>, RougeError> {
    if references.is_empty() {
        return Err(RougeError::EmptyReferenceSet);
    }
    let mut best = RougeScore::zero();
    for r in references {
        let s = rouge_su(candidate, r, d_skip, mode);
        if s.f1 > best.f1 {
            best = s;
        }
    }
    Ok(best)
}
