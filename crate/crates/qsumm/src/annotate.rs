//! Converting reference summaries into per-sentence training targets:
//! continuous SU4 scores for regression and binary labels under four
//! strategies for classification.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::QuestionRecord;
use crate::real::Real;
use crate::rouge::{rouge_su_multi, RougeError, RougeMode};
use crate::textproc::stemmed_tokens;
use crate::vectorspace::{cosine, SparseVector, Vocabulary};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error(transparent)]
    Rouge(#[from] RougeError),
    #[error("abstract vectorizes to an empty vector (all stopwords or out of vocabulary)")]
    DegenerateAbstract,
    #[error("no sentences to annotate")]
    EmptyPool,
    #[error("invalid strategy parameters: {0}")]
    InvalidStrategy(String),
}

/// Rule turning per-sentence SU4 scores into binary labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AnnotationStrategy {
    /// The k highest-scoring sentences get label 1.
    TopK { k: usize },
    /// Label 1 iff score strictly exceeds t.
    Threshold { t: f64 },
    /// Membership in the greedy core extract.
    Marcu,
    /// Label 1 above hi, 0 below lo, excluded from training in between.
    DualThreshold { hi: f64, lo: f64 },
}

impl AnnotationStrategy {
    pub fn validate(&self) -> Result<(), AnnotateError> {
        match *self {
            Self::TopK { k } if k < 1 => Err(AnnotateError::InvalidStrategy(
                "top-k requires k >= 1".into(),
            )),
            Self::Threshold { t } if !(0.0..=1.0).contains(&t) => Err(
                AnnotateError::InvalidStrategy("threshold must lie in [0,1]".into()),
            ),
            Self::DualThreshold { hi, lo }
                if !(lo < hi && (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi)) =>
            {
                Err(AnnotateError::InvalidStrategy(
                    "dual threshold requires 0 <= lo < hi <= 1".into(),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Short identifier used in annotation files and run manifests.
    pub fn id(&self) -> String {
        match *self {
            Self::TopK { k } => format!("topk-{k}"),
            Self::Threshold { t } => format!("threshold-{t}"),
            Self::Marcu => "marcu".into(),
            Self::DualThreshold { hi, lo } => format!("dual-{hi}-{lo}"),
        }
    }
}

/// One sentence's training targets. `label == None` means excluded from
/// classification training (dual-threshold middle band); the regression
/// target `su4_f1` is always present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedSentence<T> {
    pub sentence_index: usize,
    pub su4_f1: T,
    pub label: Option<u8>,
}

/// Scores every candidate sentence against the question's ideal answers
/// with F1 ROUGE-SU4 over stemmed, stopword-retained tokens.
pub fn score_sentences<T: Real>(question: &QuestionRecord) -> Result<Vec<T>, AnnotateError> {
    if question.ideal_answers.is_empty() {
        return Err(AnnotateError::Rouge(RougeError::EmptyReferenceSet));
    }
    let references: Vec<Vec<String>> = question
        .ideal_answers
        .iter()
        .map(|a| stemmed_tokens(a))
        .collect();
    question
        .sentences
        .iter()
        .map(|s| {
            let cand = stemmed_tokens(&s.sentence.raw);
            Ok(rouge_su_multi::<T, _, _>(&cand, &references, 4, RougeMode::SU)?.f1)
        })
        .collect()
}

/// Labels the k highest-scoring sentences 1, the rest 0. Ties at the cutoff
/// go to the lower sentence index.
pub fn annotate_topk<T: Real>(scores: &[T], k: usize) -> Vec<u8> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort by descending score keeps lower indices first on ties
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut labels = vec![0u8; scores.len()];
    for &i in order.iter().take(k) {
        labels[i] = 1;
    }
    labels
}

/// Label 1 iff score > t, strict.
pub fn annotate_threshold<T: Real>(scores: &[T], t: T) -> Vec<u8> {
    scores.iter().map(|&s| u8::from(s > t)).collect()
}

/// Label 1 above hi, 0 below lo, `None` (excluded) in between.
pub fn annotate_dual_threshold<T: Real>(scores: &[T], hi: T, lo: T) -> Vec<Option<u8>> {
    scores
        .iter()
        .map(|&s| {
            if s > hi {
                Some(1)
            } else if s < lo {
                Some(0)
            } else {
                None
            }
        })
        .collect()
}

/// Greedy core-extract generation.
///
/// Starting from the full sentence set, repeatedly removes the sentence whose
/// removal maximises cosine similarity between the remaining extract and the
/// abstract, while that removal strictly increases the similarity. Returns
/// the surviving sentence indices; never empty. Argmax ties break to the
/// lowest sentence index.
pub fn marcu_extract<T: Real, S: AsRef<str>>(
    abstract_stems: &[S],
    sentences: &[Vec<S>],
) -> Result<Vec<usize>, AnnotateError> {
    if sentences.is_empty() {
        return Err(AnnotateError::EmptyPool);
    }
    // per-question vocabulary over {abstract, sentences}
    let mut docs: Vec<Vec<&str>> = Vec::with_capacity(sentences.len() + 1);
    docs.push(abstract_stems.iter().map(AsRef::as_ref).collect());
    for s in sentences {
        docs.push(s.iter().map(AsRef::as_ref).collect());
    }
    let vocab = Vocabulary::fit(&docs).map_err(|_| AnnotateError::DegenerateAbstract)?;
    let abstract_vec: SparseVector<T> =
        vocab.tfidf(&abstract_stems.iter().map(AsRef::as_ref).collect::<Vec<_>>());
    if abstract_vec.is_empty() {
        return Err(AnnotateError::DegenerateAbstract);
    }

    let sim_of = |extract: &[usize]| -> T {
        let stems: Vec<&str> = extract
            .iter()
            .flat_map(|&i| sentences[i].iter().map(AsRef::as_ref))
            .collect();
        cosine(&vocab.tfidf::<T, _>(&stems), &abstract_vec)
    };

    let mut extract: Vec<usize> = (0..sentences.len()).collect();
    loop {
        if extract.len() == 1 {
            break;
        }
        let current = sim_of(&extract);
        // best single removal, ties to lowest sentence index
        let mut best: Option<(usize, T)> = None;
        for pos in 0..extract.len() {
            let mut without = extract.clone();
            without.remove(pos);
            let sim = sim_of(&without);
            let better = match best {
                None => true,
                Some((_, b)) => sim > b,
            };
            if better {
                best = Some((pos, sim));
            }
        }
        let (pos, sim) = best.expect("non-empty extract");
        if current < sim {
            extract.remove(pos);
        } else {
            break;
        }
    }
    Ok(extract)
}

/// Labels from extract membership: retained 1, removed 0.
pub fn marcu_labels<T: Real, S: AsRef<str>>(
    abstract_stems: &[S],
    sentences: &[Vec<S>],
) -> Result<Vec<u8>, AnnotateError> {
    let kept = marcu_extract::<T, S>(abstract_stems, sentences)?;
    let mut labels = vec![0u8; sentences.len()];
    for i in kept {
        labels[i] = 1;
    }
    Ok(labels)
}

/// Applies a strategy to one scored question.
///
/// For [`AnnotationStrategy::Marcu`] the abstract is the concatenation of the
/// question's ideal answers; a degenerate abstract falls back to
/// Threshold(0.1), mirroring the documented pipeline behaviour, and the
/// fallback is reported in the second tuple slot.
pub fn annotate_question<T: Real>(
    question: &QuestionRecord,
    strategy: &AnnotationStrategy,
) -> Result<(Vec<AnnotatedSentence<T>>, bool), AnnotateError> {
    strategy.validate()?;
    let scores = score_sentences::<T>(question)?;
    let mut fell_back = false;
    let labels: Vec<Option<u8>> = match *strategy {
        AnnotationStrategy::TopK { k } => annotate_topk(&scores, k).into_iter().map(Some).collect(),
        AnnotationStrategy::Threshold { t } => annotate_threshold(&scores, T::from_f64(t).unwrap())
            .into_iter()
            .map(Some)
            .collect(),
        AnnotationStrategy::DualThreshold { hi, lo } => {
            annotate_dual_threshold(&scores, T::from_f64(hi).unwrap(), T::from_f64(lo).unwrap())
        }
        AnnotationStrategy::Marcu => {
            let tp = crate::textproc::TextProc::default();
            let abstract_stems = tp.stems_of(&question.ideal_answers.join(" "));
            let sentence_stems: Vec<Vec<String>> = question
                .sentences
                .iter()
                .map(|s| s.sentence.stems.clone())
                .collect();
            match marcu_labels::<T, String>(&abstract_stems, &sentence_stems) {
                Ok(labels) => labels.into_iter().map(Some).collect(),
                Err(AnnotateError::DegenerateAbstract) => {
                    fell_back = true;
                    annotate_threshold(&scores, T::from_f64(0.1).unwrap())
                        .into_iter()
                        .map(Some)
                        .collect()
                }
                Err(e) => return Err(e),
            }
        }
    };
    let annotated = scores
        .into_iter()
        .zip(labels)
        .enumerate()
        .map(|(sentence_index, (su4_f1, label))| AnnotatedSentence {
            sentence_index,
            su4_f1,
            label,
        })
        .collect();
    Ok((annotated, fell_back))
}
