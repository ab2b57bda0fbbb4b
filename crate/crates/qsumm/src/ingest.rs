//! Data ingestion: BioASQ training JSON, the local abstract store, candidate
//! pool construction, and the synthetic planted-summary corpus generator.
//!
//! The internal corpus format is JSON lines: a header record first, then one
//! question per line. It is the single interchange format between CLI stages.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::rouge::{rouge_su, RougeMode};
use crate::textproc::{Sentence, TextProc};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    FileUnreadable {
        path: String,
        source: std::io::Error,
    },
    #[error("not a BioASQ training file: missing top-level \"questions\" array")]
    NotBioasqShape,
    #[error("invalid JSON in {path}: {source}")]
    BadJson {
        path: String,
        source: serde_json::Error,
    },
    #[error("corpus file has no header record")]
    MissingHeader,
    #[error("unsupported corpus format version {0}")]
    UnsupportedVersion(u32),
    #[error("invalid synthetic corpus parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot write {path}: {source}")]
    WriteFailed {
        path: String,
        source: std::io::Error,
    },
}

/// One candidate sentence in a question's pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    #[serde(flatten)]
    pub sentence: Sentence,
    /// Source document, when the pool was built from abstracts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
}

/// A query with its reference answers and candidate sentence pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub body: String,
    pub question_type: String,
    pub ideal_answers: Vec<String>,
    pub document_ids: Vec<String>,
    #[serde(default)]
    pub sentences: Vec<SentenceRecord>,
    /// False when the record cannot be used for training or evaluation
    /// (no ideal answer, or empty pool after the join).
    #[serde(default)]
    pub usable: bool,
}

impl QuestionRecord {
    pub fn pool_stem_lists(&self) -> Vec<&[String]> {
        self.sentences
            .iter()
            .map(|s| s.sentence.stems.as_slice())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub format_version: u32,
    pub created_by: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub header: CorpusHeader,
    pub questions: Vec<QuestionRecord>,
}

impl Corpus {
    pub fn new(questions: Vec<QuestionRecord>, seed: Option<u64>) -> Self {
        Self {
            header: CorpusHeader {
                format_version: CORPUS_FORMAT_VERSION,
                created_by: format!("qsumm {}", env!("CARGO_PKG_VERSION")),
                seed,
            },
            questions,
        }
    }

    pub fn usable_questions(&self) -> impl Iterator<Item = &QuestionRecord> {
        self.questions.iter().filter(|q| q.usable)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), IngestError> {
        let wrap = |source| IngestError::WriteFailed {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::fs::File::create(path).map_err(wrap)?;
        writeln!(f, "{}", serde_json::to_string(&self.header).unwrap()).map_err(wrap)?;
        for q in &self.questions {
            writeln!(f, "{}", serde_json::to_string(q).unwrap()).map_err(wrap)?;
        }
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<Self, IngestError> {
        let f = std::fs::File::open(path).map_err(|source| IngestError::FileUnreadable {
            path: path.display().to_string(),
            source,
        })?;
        let mut lines = BufReader::new(f).lines();
        let header_line = lines
            .next()
            .ok_or(IngestError::MissingHeader)?
            .map_err(|source| IngestError::FileUnreadable {
                path: path.display().to_string(),
                source,
            })?;
        let header: CorpusHeader =
            serde_json::from_str(&header_line).map_err(|source| IngestError::BadJson {
                path: path.display().to_string(),
                source,
            })?;
        if header.format_version != CORPUS_FORMAT_VERSION {
            return Err(IngestError::UnsupportedVersion(header.format_version));
        }
        let mut questions = Vec::new();
        for line in lines {
            let line = line.map_err(|source| IngestError::FileUnreadable {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            questions.push(
                serde_json::from_str(&line).map_err(|source| IngestError::BadJson {
                    path: path.display().to_string(),
                    source,
                })?,
            );
        }
        Ok(Self { header, questions })
    }
}

/// Strips a PubMed URL down to its trailing numeric id; bare ids pass through.
pub fn normalize_doc_id(raw: &str) -> String {
    raw.trim_end_matches('/')
        .rsplit('/')
        .next()
        .unwrap_or(raw)
        .to_string()
}

/// Parses a BioASQ Task B training JSON file.
///
/// Malformed question entries are reported in the returned warning list, not
/// fatal. `ideal_answer` is normalized to a list whether the file holds a
/// string or an array.
pub fn parse_bioasq(path: &Path) -> Result<(Vec<QuestionRecord>, Vec<String>), IngestError> {
    let text = std::fs::read_to_string(path).map_err(|source| IngestError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    let root: Value = serde_json::from_str(&text).map_err(|source| IngestError::BadJson {
        path: path.display().to_string(),
        source,
    })?;
    let questions = root
        .get("questions")
        .and_then(Value::as_array)
        .ok_or(IngestError::NotBioasqShape)?;

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, q) in questions.iter().enumerate() {
        let body = match q.get("body").and_then(Value::as_str) {
            Some(b) => b.to_string(),
            None => {
                warnings.push(format!("question {i}: missing body, skipped"));
                continue;
            }
        };
        let id = q
            .get("id")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("q{i}"));
        let question_type = q
            .get("type")
            .and_then(Value::as_str)
            .unwrap_or("unknown")
            .to_string();
        let ideal_answers = match q.get("ideal_answer") {
            Some(Value::String(s)) => vec![s.clone()],
            Some(Value::Array(a)) => a
                .iter()
                .filter_map(Value::as_str)
                .map(str::to_string)
                .collect(),
            _ => {
                warnings.push(format!("question {id}: no ideal_answer"));
                Vec::new()
            }
        };
        let document_ids = match q.get("documents").and_then(Value::as_array) {
            Some(a) => a
                .iter()
                .filter_map(Value::as_str)
                .map(normalize_doc_id)
                .collect(),
            None => {
                warnings.push(format!("question {id}: no documents list"));
                Vec::new()
            }
        };
        records.push(QuestionRecord {
            id,
            body,
            question_type,
            ideal_answers,
            document_ids,
            sentences: Vec::new(),
            usable: false,
        });
    }
    Ok((records, warnings))
}

/// Local store of PubMed abstracts, loaded from a JSON-lines file of
/// `{id, title, abstract}` records.
#[derive(Debug, Default, Clone)]
pub struct AbstractStore {
    entries: HashMap<String, AbstractEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AbstractEntry {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub text: String,
}

impl AbstractStore {
    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let f = std::fs::File::open(path).map_err(|source| IngestError::FileUnreadable {
            path: path.display().to_string(),
            source,
        })?;
        let mut entries = HashMap::new();
        for line in BufReader::new(f).lines() {
            let line = line.map_err(|source| IngestError::FileUnreadable {
                path: path.display().to_string(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let e: AbstractEntry =
                serde_json::from_str(&line).map_err(|source| IngestError::BadJson {
                    path: path.display().to_string(),
                    source,
                })?;
            entries.insert(normalize_doc_id(&e.id), e);
        }
        Ok(Self { entries })
    }

    pub fn insert(&mut self, entry: AbstractEntry) {
        self.entries.insert(normalize_doc_id(&entry.id), entry);
    }

    pub fn get(&self, id: &str) -> Option<&AbstractEntry> {
        self.entries.get(&normalize_doc_id(id))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Builds each question's candidate pool from its resolvable documents.
///
/// Sentences are indexed in (document order, sentence order). Unresolvable
/// document ids are reported as warnings; questions ending up with an empty
/// pool or no ideal answer are flagged unusable.
pub fn build_pools(
    questions: &mut [QuestionRecord],
    store: &AbstractStore,
    include_titles: bool,
    tp: &TextProc,
) -> Vec<String> {
    let mut warnings = Vec::new();
    for q in questions.iter_mut() {
        let mut pool = Vec::new();
        for doc_id in &q.document_ids {
            let Some(entry) = store.get(doc_id) else {
                warnings.push(format!(
                    "question {}: document {} not in store",
                    q.id, doc_id
                ));
                continue;
            };
            let mut spans = Vec::new();
            if include_titles && !entry.title.trim().is_empty() {
                spans.extend(tp.split_sentences(&entry.title));
            }
            spans.extend(tp.split_sentences(&entry.text));
            for raw in spans {
                let index = pool.len();
                pool.push(SentenceRecord {
                    sentence: tp.sentence(index, &raw),
                    doc_id: Some(doc_id.clone()),
                });
            }
        }
        q.usable = !pool.is_empty() && !q.ideal_answers.is_empty();
        if pool.is_empty() {
            warnings.push(format!("question {}: empty candidate pool", q.id));
        }
        q.sentences = pool;
    }
    warnings
}

/// Parameters for [`generate_synthetic`].
#[derive(Debug, Clone, Copy)]
pub struct SyntheticParams {
    pub n_questions: usize,
    pub pool_size: usize,
    pub n_planted: usize,
    pub seed: u64,
}

/// Generates a planted-summary corpus: each question's ideal answer is the
/// verbatim concatenation of `n_planted` pool sentences that share vocabulary
/// with the query, while the remaining sentences come from a disjoint
/// distractor vocabulary. Fully seeded and deterministic.
pub fn generate_synthetic(params: SyntheticParams) -> Result<Corpus, IngestError> {
    let SyntheticParams {
        n_questions,
        pool_size,
        n_planted,
        seed,
    } = params;
    if n_planted > pool_size {
        return Err(IngestError::InvalidParameters(format!(
            "n_planted ({n_planted}) exceeds pool_size ({pool_size})"
        )));
    }
    if n_questions == 0 || pool_size == 0 || n_planted == 0 {
        return Err(IngestError::InvalidParameters(
            "n_questions, pool_size and n_planted must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topic_pool: Vec<String> = (0..30).map(|i| format!("topic{i}")).collect();
    let distractor_pool: Vec<String> = (0..40).map(|i| format!("noise{i}")).collect();
    let tp = TextProc::default();

    let mut questions = Vec::with_capacity(n_questions);
    for qi in 0..n_questions {
        let q = loop {
            let candidate = synth_question(
                qi,
                pool_size,
                n_planted,
                &topic_pool,
                &distractor_pool,
                &tp,
                &mut rng,
            );
            if planted_dominate(&candidate, n_planted) {
                break candidate;
            }
            // extremely unlikely with disjoint vocabularies; redraw
        };
        questions.push(q);
    }
    Ok(Corpus::new(questions, Some(seed)))
}

fn synth_question(
    qi: usize,
    pool_size: usize,
    n_planted: usize,
    topic_pool: &[String],
    distractor_pool: &[String],
    tp: &TextProc,
    rng: &mut ChaCha8Rng,
) -> QuestionRecord {
    let mut topic: Vec<String> = topic_pool.to_vec();
    topic.shuffle(rng);
    topic.truncate(6);

    let body = format!("What is known about {}", topic.join(" "));

    let mut planted_positions: Vec<usize> = (0..pool_size).collect();
    planted_positions.shuffle(rng);
    planted_positions.truncate(n_planted);
    planted_positions.sort_unstable();

    let sentence_text = |words: &[String], rng: &mut ChaCha8Rng| -> String {
        let toks: Vec<&str> = (0..8)
            .map(|_| words[rng.gen_range(0..words.len())].as_str())
            .collect();
        format!("{}.", toks.join(" "))
    };

    let mut sentences = Vec::with_capacity(pool_size);
    let mut planted_raws = Vec::new();
    for index in 0..pool_size {
        let raw = if planted_positions.contains(&index) {
            let raw = sentence_text(&topic, rng);
            planted_raws.push(raw.clone());
            raw
        } else {
            sentence_text(distractor_pool, rng)
        };
        sentences.push(SentenceRecord {
            sentence: tp.sentence(index, &raw),
            doc_id: None,
        });
    }

    QuestionRecord {
        id: format!("synth-{qi}"),
        body,
        question_type: "summary".into(),
        ideal_answers: vec![planted_raws.join(" ")],
        document_ids: Vec::new(),
        sentences,
        usable: true,
    }
}

/// Verifies the synthetic guarantee with the scorer itself: every planted
/// sentence strictly dominates every distractor on SU4 vs the ideal answer,
/// and distractors stay below 0.05.
fn planted_dominate(q: &QuestionRecord, n_planted: usize) -> bool {
    let reference = crate::textproc::stemmed_tokens(&q.ideal_answers[0]);
    let mut scored: Vec<(usize, f64)> = q
        .sentences
        .iter()
        .map(|s| {
            let cand = crate::textproc::stemmed_tokens(&s.sentence.raw);
            let score = rouge_su::<f64, _, _>(&cand, &reference, 4, RougeMode::SU);
            (s.sentence.index, score.f1)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
    let min_planted = scored[n_planted - 1].1;
    let max_distractor = scored.get(n_planted).map_or(0.0, |&(_, f)| f);
    min_planted > max_distractor && max_distractor < 0.05
}
