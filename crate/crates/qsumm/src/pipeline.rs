//! Stage orchestration and the cross-validation experiment harness:
//! pre-process, score or label, select top-n, evaluate with F1 ROUGE-SU4,
//! aggregated per fold and overall.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{annotate_question, AnnotateError, AnnotationStrategy};
use crate::ingest::{Corpus, QuestionRecord};
use crate::models::{
    assemble_features, decision_score, train_svm, train_svr, FeatureVector, Hyperparams,
    LinearModel, ModelError,
};
use crate::rouge::{rouge_su_multi, RougeError, RougeMode};
use crate::textproc::{stemmed_tokens, TextProc};
use crate::vectorspace::{VectorSpaceError, Vocabulary};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("need at least k questions for k folds: {questions} questions, k = {k}")]
    TooFewQuestions { questions: usize, k: usize },
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("corpus has no usable questions")]
    EmptyCorpus,
    #[error("fold partitions differ between runs; compare requires a shared seed and corpus")]
    FoldMismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Rouge(#[from] RougeError),
    #[error(transparent)]
    VectorSpace(#[from] VectorSpaceError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Approach {
    Regression,
    Classification(AnnotationStrategy),
}

impl Approach {
    pub fn id(&self) -> String {
        match self {
            Self::Regression => "regression".into(),
            Self::Classification(s) => format!("classification-{}", s.id()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub approach: Approach,
    pub n_summary_sentences: usize,
    pub k_folds: usize,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub min_df: u32,
}

impl ExperimentConfig {
    pub fn new(approach: Approach) -> Self {
        Self {
            approach,
            n_summary_sentences: 3,
            k_folds: 10,
            hyperparams: Hyperparams::default(),
            seed: 42,
            min_df: 1,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.n_summary_sentences < 1 {
            return Err(PipelineError::InvalidConfig(
                "n_summary_sentences must be >= 1".into(),
            ));
        }
        if self.k_folds < 2 {
            return Err(PipelineError::InvalidConfig("k_folds must be >= 2".into()));
        }
        if let Approach::Classification(s) = &self.approach {
            s.validate()?;
        }
        Ok(())
    }
}

/// Selected sentences of one question, in original document order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub question_id: String,
    pub sentence_indices: Vec<usize>,
    pub text: String,
}

/// Indices of the n highest scores; ties break to the lower index; returned
/// in increasing index order.
pub fn select_top_n<T: crate::real::Real>(scores: &[T], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut picked: Vec<usize> = order.into_iter().take(n).collect();
    picked.sort_unstable();
    picked
}

/// Scores every candidate with the model and emits the top-n summary.
pub fn summarize(
    question: &QuestionRecord,
    model: &LinearModel<f64>,
    vocab: &Vocabulary,
    tp: &TextProc,
    n: usize,
) -> Result<Summary, PipelineError> {
    let features = assemble_features::<f64>(question, vocab, tp);
    let scores: Vec<f64> = features
        .iter()
        .map(|x| decision_score(model, x))
        .collect::<Result<_, _>>()?;
    let indices = select_top_n(&scores, n);
    let text = indices
        .iter()
        .map(|&i| question.sentences[i].sentence.raw.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Summary {
        question_id: question.id.clone(),
        sentence_indices: indices,
        text,
    })
}

/// Question-level k-fold partition: seeded shuffle, fold sizes differing by
/// at most one. Ids are sorted before shuffling so the partition depends only
/// on (ids, k, seed).
pub fn make_folds(
    question_ids: &[String],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<String>>, PipelineError> {
    if k > question_ids.len() {
        return Err(PipelineError::TooFewQuestions {
            questions: question_ids.len(),
            k,
        });
    }
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut ids: Vec<String> = question_ids.to_vec();
    ids.sort_unstable();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let n = ids.len();
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut it = ids.into_iter();
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(it.by_ref().take(size).collect());
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    pub f1_su4: f64,
    pub selected: Vec<usize>,
}

/// Per-fold scores with mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub results: Vec<QuestionResult>,
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Question-weighted: pooled over every test question.
    pub micro_mean: f64,
    pub micro_std: f64,
    /// Fold-weighted: mean and std of the fold means.
    pub macro_mean: f64,
    pub macro_std: f64,
    pub n_questions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub format_version: u32,
    pub config: ExperimentConfig,
    pub approach_id: String,
    /// Question ids per fold; compare requires identical partitions.
    pub fold_partition: Vec<Vec<String>>,
    pub folds: Vec<FoldReport>,
    pub aggregate: Aggregate,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// fold,approach,mean,std rows plus an aggregate row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold,approach,mean_f1_su4,std_f1_su4,n_questions\n");
        for f in &self.folds {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                f.fold,
                self.approach_id,
                f.mean,
                f.std,
                f.results.len()
            ));
        }
        out.push_str(&format!(
            "aggregate,{},{},{},{}\n",
            self.approach_id,
            self.aggregate.micro_mean,
            self.aggregate.micro_std,
            self.aggregate.n_questions
        ));
        out
    }
}

/// Runs the full cross-validation experiment.
///
/// Per fold: fit the vocabulary on training questions only, annotate training
/// sentences per the configured approach, train the model, summarise every
/// test question and score it against the ideal answers with F1 ROUGE-SU4.
pub fn run_experiment(
    corpus: &Corpus,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, PipelineError> {
    run_experiment_with(corpus, config, &TextProc::default())
}

/// [`run_experiment`] with custom word lists.
pub fn run_experiment_with(
    corpus: &Corpus,
    config: &ExperimentConfig,
    tp: &TextProc,
) -> Result<ExperimentReport, PipelineError> {
    config.validate()?;
    let mut warnings = Vec::new();

    let usable: Vec<&QuestionRecord> = corpus.usable_questions().collect();
    for q in &corpus.questions {
        if !q.usable {
            warnings.push(format!(
                "question {}: unusable (empty pool or no ideal answer), excluded",
                q.id
            ));
        }
    }
    if usable.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }

    let ids: Vec<String> = usable.iter().map(|q| q.id.clone()).collect();
    let fold_partition = make_folds(&ids, config.k_folds, config.seed)?;

    let mut folds = Vec::with_capacity(config.k_folds);
    let mut all_scores = Vec::new();
    for (fold_idx, test_ids) in fold_partition.iter().enumerate() {
        let test_set: BTreeSet<&str> = test_ids.iter().map(String::as_str).collect();
        let train: Vec<&QuestionRecord> = usable
            .iter()
            .copied()
            .filter(|q| !test_set.contains(q.id.as_str()))
            .collect();
        let test: Vec<&QuestionRecord> = usable
            .iter()
            .copied()
            .filter(|q| test_set.contains(q.id.as_str()))
            .collect();

        let vocab = fit_fold_vocabulary(&train, tp, config.min_df)?;
        let model = train_fold_model(&train, &vocab, tp, config, fold_idx, &mut warnings)?;

        let mut results = Vec::with_capacity(test.len());
        for q in &test {
            let summary = summarize(q, &model, &vocab, tp, config.n_summary_sentences)?;
            let candidate = stemmed_tokens(&summary.text);
            let references: Vec<Vec<String>> =
                q.ideal_answers.iter().map(|a| stemmed_tokens(a)).collect();
            let f1 = rouge_su_multi::<f64, _, _>(&candidate, &references, 4, RougeMode::SU)?.f1;
            results.push(QuestionResult {
                question_id: q.id.clone(),
                f1_su4: f1,
                selected: summary.sentence_indices,
            });
        }
        let scores: Vec<f64> = results.iter().map(|r| r.f1_su4).collect();
        all_scores.extend_from_slice(&scores);
        let (mean, std) = mean_std(&scores);
        folds.push(FoldReport {
            fold: fold_idx,
            results,
            mean,
            std,
        });
    }

    let (micro_mean, micro_std) = mean_std(&all_scores);
    let fold_means: Vec<f64> = folds.iter().map(|f| f.mean).collect();
    let (macro_mean, macro_std) = mean_std(&fold_means);
    Ok(ExperimentReport {
        format_version: REPORT_FORMAT_VERSION,
        config: config.clone(),
        approach_id: config.approach.id(),
        fold_partition,
        folds,
        aggregate: Aggregate {
            micro_mean,
            micro_std,
            macro_mean,
            macro_std,
            n_questions: all_scores.len(),
        },
        warnings,
    })
}

/// Fitting unit: per training question, the concatenated candidate pool is
/// one document and the query text another. Fold-local, never test questions.
pub fn fit_fold_vocabulary(
    train: &[&QuestionRecord],
    tp: &TextProc,
    min_df: u32,
) -> Result<Vocabulary, PipelineError> {
    let mut docs: Vec<Vec<String>> = Vec::with_capacity(train.len() * 2);
    for q in train {
        let pool: Vec<String> = q
            .sentences
            .iter()
            .flat_map(|s| s.sentence.stems.iter().cloned())
            .collect();
        docs.push(pool);
        docs.push(tp.stems_of(&q.body));
    }
    Ok(Vocabulary::fit_min_df(&docs, min_df)?)
}

fn train_fold_model(
    train: &[&QuestionRecord],
    vocab: &Vocabulary,
    tp: &TextProc,
    config: &ExperimentConfig,
    fold_idx: usize,
    warnings: &mut Vec<String>,
) -> Result<LinearModel<f64>, PipelineError> {
    match &config.approach {
        Approach::Regression => {
            let mut instances: Vec<(FeatureVector<f64>, f64)> = Vec::new();
            for q in train {
                let scores = crate::annotate::score_sentences::<f64>(q)?;
                let features = assemble_features::<f64>(q, vocab, tp);
                instances.extend(features.into_iter().zip(scores));
            }
            Ok(train_svr(&instances, &config.hyperparams)?)
        }
        Approach::Classification(strategy) => {
            let mut instances: Vec<(FeatureVector<f64>, u8)> = Vec::new();
            for q in train {
                let (annotated, fell_back) = annotate_question::<f64>(q, strategy)?;
                if fell_back {
                    warnings.push(format!(
                        "fold {fold_idx}: question {}: degenerate abstract, threshold-0.1 fallback",
                        q.id
                    ));
                }
                let features = assemble_features::<f64>(q, vocab, tp);
                for (x, a) in features.into_iter().zip(annotated) {
                    if let Some(label) = a.label {
                        instances.push((x, label));
                    }
                }
            }
            Ok(train_svm(&instances, &config.hyperparams)?)
        }
    }
}

/// Side-by-side fold table over runs sharing one fold partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub approaches: Vec<String>,
    /// fold x approach matrix of fold means.
    pub fold_means: Vec<Vec<f64>>,
    pub fold_stds: Vec<Vec<f64>>,
    /// Index into `approaches` of the winner of each fold.
    pub fold_winners: Vec<usize>,
    pub aggregate_means: Vec<f64>,
    pub aggregate_stds: Vec<f64>,
}

pub fn compare_runs(reports: &[ExperimentReport]) -> Result<Comparison, PipelineError> {
    let Some(first) = reports.first() else {
        return Err(PipelineError::InvalidConfig("no runs to compare".into()));
    };
    for r in reports {
        if r.fold_partition != first.fold_partition {
            return Err(PipelineError::FoldMismatch);
        }
    }
    let k = first.folds.len();
    let mut fold_means = vec![Vec::with_capacity(reports.len()); k];
    let mut fold_stds = vec![Vec::with_capacity(reports.len()); k];
    for r in reports {
        for f in 0..k {
            fold_means[f].push(r.folds[f].mean);
            fold_stds[f].push(r.folds[f].std);
        }
    }
    let fold_winners = fold_means
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect();
    Ok(Comparison {
        approaches: reports.iter().map(|r| r.approach_id.clone()).collect(),
        fold_means,
        fold_stds,
        fold_winners,
        aggregate_means: reports.iter().map(|r| r.aggregate.micro_mean).collect(),
        aggregate_stds: reports.iter().map(|r| r.aggregate.micro_std).collect(),
    })
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fold");
        for a in &self.approaches {
            out.push_str(&format!(",{a}_mean,{a}_std"));
        }
        out.push_str(",winner\n");
        for (f, (means, stds)) in self.fold_means.iter().zip(&self.fold_stds).enumerate() {
            out.push_str(&f.to_string());
            for (m, s) in means.iter().zip(stds) {
                out.push_str(&format!(",{m},{s}"));
            }
            out.push_str(&format!(",{}\n", self.approaches[self.fold_winners[f]]));
        }
        out.push_str("aggregate");
        for (m, s) in self.aggregate_means.iter().zip(&self.aggregate_stds) {
            out.push_str(&format!(",{m},{s}"));
        }
        out.push('\n');
        out
    }
}
