//! Operator surface: subcommands wiring the pipeline stages into
//! reproducible experiments.
//!
//! Exit codes are a stable contract for scripting: 0 success, 1 user error,
//! 2 internal error.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::annotate::{annotate_question, AnnotationStrategy};
use crate::chart::comparison_chart;
use crate::config::FileConfig;
use crate::ingest::{
    build_pools, generate_synthetic, parse_bioasq, AbstractStore, Corpus, IngestError,
    SyntheticParams,
};
use crate::manifest::{RunManifest, MANIFEST_FILE_NAME};
use crate::models::Hyperparams;
use crate::pipeline::{
    compare_runs, run_experiment_with, Approach, ExperimentConfig, ExperimentReport, PipelineError,
};
use crate::rouge::{rouge_su, RougeMode};
use crate::textproc::{stemmed_tokens, TextProc};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USER_ERROR: i32 = 1;
pub const EXIT_INTERNAL_ERROR: i32 = 2;

#[derive(Debug)]
enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    fn user(e: impl std::fmt::Display) -> Self {
        Self::User(e.to_string())
    }
    fn internal(e: impl std::fmt::Display) -> Self {
        Self::Internal(e.to_string())
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        Self::User(e.to_string())
    }
}

impl From<crate::textproc::TextProcError> for CliError {
    fn from(e: crate::textproc::TextProcError) -> Self {
        Self::User(e.to_string())
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::WriteFailed { .. } => Self::Internal(e.to_string()),
            _ => Self::User(e.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::TooFewQuestions { .. }
            | PipelineError::InvalidConfig(_)
            | PipelineError::EmptyCorpus
            | PipelineError::FoldMismatch => Self::User(e.to_string()),
            _ => Self::Internal(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "qsumm",
    version,
    about = "Query-focused extractive summarisation toolkit"
)]
pub struct Cli {
    /// Config file (key = value); falls back to $QSUMM_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a BioASQ training file and build candidate sentence pools.
    Ingest(IngestArgs),
    /// Generate a synthetic planted-summary corpus.
    Synth(SynthArgs),
    /// Annotate a corpus with SU4 scores and classification labels.
    Annotate(AnnotateArgs),
    /// Run a cross-validation experiment.
    Experiment(ExperimentArgs),
    /// Compare experiment runs sharing one fold partition.
    Compare(CompareArgs),
    /// Score candidate summaries against references with ROUGE-S/SU.
    Rouge(RougeArgs),
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// BioASQ Task B training JSON.
    #[arg(long)]
    bioasq: PathBuf,
    /// Abstract store: JSON lines of {id, title, abstract}.
    #[arg(long)]
    abstracts: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Include article titles in the candidate pool.
    #[arg(long)]
    include_titles: Option<bool>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    questions: usize,
    #[arg(long, default_value_t = 10)]
    pool: usize,
    #[arg(long, default_value_t = 3)]
    planted: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Topk,
    Threshold,
    Marcu,
    Dual,
}

#[derive(Args, Debug)]
struct AnnotateArgs {
    /// Ingested corpus (JSON lines).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Top-k cutoff.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Single threshold.
    #[arg(long, default_value_t = 0.1)]
    t: f64,
    /// Dual-threshold upper bound.
    #[arg(long, default_value_t = 0.7)]
    hi: f64,
    /// Dual-threshold lower bound.
    #[arg(long, default_value_t = 0.3)]
    lo: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApproachArg {
    Regression,
    Classification,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    approach: ApproachArg,
    /// Annotation strategy (classification only).
    #[arg(long, value_enum, default_value_t = StrategyArg::Threshold)]
    strategy: StrategyArg,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 0.1)]
    t: f64,
    #[arg(long, default_value_t = 0.7)]
    hi: f64,
    #[arg(long, default_value_t = 0.3)]
    lo: f64,
    /// Sentences per summary.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Experiment output directories.
    #[arg(long, num_args = 1.., required = true)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    S,
    Su,
}

#[derive(Args, Debug)]
struct RougeArgs {
    /// One summary per line, or a JSON array of strings (*.json).
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    references: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Su)]
    mode: ModeArg,
    #[arg(long, default_value_t = 4)]
    dskip: usize,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses argv and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USER_ERROR,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USER_ERROR
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL_ERROR
        }
    }
}

/// Effective settings after CLI > config file > default precedence.
struct Settings {
    hyper: Hyperparams,
    n_summary_sentences: usize,
    k_folds: usize,
    min_df: u32,
    include_titles: bool,
    stopwords: Option<PathBuf>,
    abbreviations: Option<PathBuf>,
}

impl Settings {
    fn resolve(file: &FileConfig) -> Result<Self, CliError> {
        let defaults = Hyperparams::default();
        Ok(Self {
            hyper: Hyperparams {
                lambda: file
                    .get_parsed("lambda", "float")?
                    .unwrap_or(defaults.lambda),
                epsilon: file
                    .get_parsed("epsilon", "float")?
                    .unwrap_or(defaults.epsilon),
                epochs: file
                    .get_parsed("epochs", "integer")?
                    .unwrap_or(defaults.epochs),
                seed: file.get_parsed("seed", "integer")?.unwrap_or(defaults.seed),
                class_weighting: file
                    .get_parsed("class_weighting", "bool")?
                    .unwrap_or(defaults.class_weighting),
            },
            n_summary_sentences: file
                .get_parsed("n_summary_sentences", "integer")?
                .unwrap_or(3),
            k_folds: file.get_parsed("k_folds", "integer")?.unwrap_or(10),
            min_df: file.get_parsed("min_df", "integer")?.unwrap_or(1),
            include_titles: file.get_parsed("include_titles", "bool")?.unwrap_or(true),
            stopwords: file.get_str("stopwords").map(PathBuf::from),
            abbreviations: file.get_str("abbreviations").map(PathBuf::from),
        })
    }

    fn textproc(&self) -> Result<TextProc, CliError> {
        Ok(TextProc::from_files(
            self.stopwords.as_deref(),
            self.abbreviations.as_deref(),
        )?)
    }

    fn dump(&self, m: &mut RunManifest) {
        m.set("lambda", self.hyper.lambda);
        m.set("epsilon", self.hyper.epsilon);
        m.set("epochs", self.hyper.epochs);
        m.set("seed", self.hyper.seed);
        m.set("class_weighting", self.hyper.class_weighting);
        m.set("n_summary_sentences", self.n_summary_sentences);
        m.set("k_folds", self.k_folds);
        m.set("min_df", self.min_df);
        m.set("include_titles", self.include_titles);
        if let Some(p) = &self.stopwords {
            m.set("stopwords", p.display());
        }
        if let Some(p) = &self.abbreviations {
            m.set("abbreviations", p.display());
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file_config = FileConfig::resolve(cli.config.as_deref())?;
    let settings = Settings::resolve(&file_config)?;
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args, settings),
        Command::Synth(args) => cmd_synth(args, settings),
        Command::Annotate(args) => cmd_annotate(args, settings),
        Command::Experiment(args) => cmd_experiment(args, settings),
        Command::Compare(args) => cmd_compare(args),
        Command::Rouge(args) => cmd_rouge(args),
    }
}

fn write_out(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|e| CliError::internal(format!("cannot write {}: {e}", path.display())))
}

fn sidecar_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_ingest(args: IngestArgs, settings: Settings) -> Result<(), CliError> {
    let include_titles = args.include_titles.unwrap_or(settings.include_titles);
    let tp = settings.textproc()?;
    let (mut questions, warnings) = parse_bioasq(&args.bioasq)?;
    let store = AbstractStore::load(&args.abstracts)?;
    let pool_warnings = build_pools(&mut questions, &store, include_titles, &tp);
    for w in warnings.iter().chain(&pool_warnings) {
        eprintln!("warning: {w}");
    }
    let n = questions.len();
    let usable = questions.iter().filter(|q| q.usable).count();
    let corpus = Corpus::new(questions, None);
    corpus.write_jsonl(&args.out)?;

    let mut m = RunManifest::new("ingest");
    settings.dump(&mut m);
    m.set("include_titles", include_titles);
    m.hash_input("bioasq", &args.bioasq)
        .map_err(CliError::internal)?;
    m.hash_input("abstracts", &args.abstracts)
        .map_err(CliError::internal)?;
    m.write(&sidecar_manifest(&args.out))
        .map_err(CliError::internal)?;

    println!(
        "ingested {n} questions ({usable} usable) -> {}",
        args.out.display()
    );
    Ok(())
}

fn cmd_synth(args: SynthArgs, settings: Settings) -> Result<(), CliError> {
    let seed = args.seed.unwrap_or(settings.hyper.seed);
    let corpus = generate_synthetic(SyntheticParams {
        n_questions: args.questions,
        pool_size: args.pool,
        n_planted: args.planted,
        seed,
    })?;
    corpus.write_jsonl(&args.out)?;

    let mut m = RunManifest::new("synth");
    m.seed = Some(seed);
    m.set("questions", args.questions);
    m.set("pool", args.pool);
    m.set("planted", args.planted);
    m.set("seed", seed);
    m.write(&sidecar_manifest(&args.out))
        .map_err(CliError::internal)?;

    println!(
        "generated {} synthetic questions -> {}",
        args.questions,
        args.out.display()
    );
    Ok(())
}

fn strategy_from(
    which: StrategyArg,
    k: usize,
    t: f64,
    hi: f64,
    lo: f64,
) -> Result<AnnotationStrategy, CliError> {
    let s = match which {
        StrategyArg::Topk => AnnotationStrategy::TopK { k },
        StrategyArg::Threshold => AnnotationStrategy::Threshold { t },
        StrategyArg::Marcu => AnnotationStrategy::Marcu,
        StrategyArg::Dual => AnnotationStrategy::DualThreshold { hi, lo },
    };
    s.validate().map_err(CliError::user)?;
    Ok(s)
}

fn cmd_annotate(args: AnnotateArgs, settings: Settings) -> Result<(), CliError> {
    let strategy = strategy_from(args.strategy, args.k, args.t, args.hi, args.lo)?;
    let corpus = Corpus::read_jsonl(&args.corpus)?;
    let mut lines = String::new();
    let strategy_id = strategy.id();
    for q in corpus.usable_questions() {
        let (annotated, fell_back) =
            annotate_question::<f64>(q, &strategy).map_err(CliError::user)?;
        if fell_back {
            eprintln!(
                "warning: question {}: degenerate abstract, threshold-0.1 fallback",
                q.id
            );
        }
        for a in annotated {
            lines.push_str(&format!(
                "{}\n",
                serde_json::json!({
                    "question_id": q.id,
                    "sentence_index": a.sentence_index,
                    "su4_f1": a.su4_f1,
                    "label": a.label,
                    "strategy": strategy_id,
                })
            ));
        }
    }
    write_out(&args.out, &lines)?;

    let mut m = RunManifest::new("annotate");
    settings.dump(&mut m);
    m.set("strategy", &strategy_id);
    m.hash_input("corpus", &args.corpus)
        .map_err(CliError::internal)?;
    m.write(&sidecar_manifest(&args.out))
        .map_err(CliError::internal)?;

    println!("annotated corpus ({strategy_id}) -> {}", args.out.display());
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs, settings: Settings) -> Result<(), CliError> {
    let approach = match args.approach {
        ApproachArg::Regression => Approach::Regression,
        ApproachArg::Classification => Approach::Classification(strategy_from(
            args.strategy,
            args.k,
            args.t,
            args.hi,
            args.lo,
        )?),
    };
    let mut config = ExperimentConfig::new(approach);
    config.n_summary_sentences = args.n.unwrap_or(settings.n_summary_sentences);
    config.k_folds = args.folds.unwrap_or(settings.k_folds);
    config.hyperparams = settings.hyper;
    if let Some(seed) = args.seed {
        config.hyperparams.seed = seed;
    }
    config.seed = config.hyperparams.seed;
    config.min_df = settings.min_df;
    config.validate().map_err(CliError::user)?;

    let corpus = Corpus::read_jsonl(&args.corpus)?;
    let tp = settings.textproc()?;
    let report = run_experiment_with(&corpus, &config, &tp)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    std::fs::create_dir_all(&args.out_dir).map_err(CliError::internal)?;
    write_out(&args.out_dir.join("report.json"), &report.to_json())?;
    write_out(&args.out_dir.join("report.csv"), &report.to_csv())?;

    let mut m = RunManifest::new("experiment");
    settings.dump(&mut m);
    m.seed = Some(config.seed);
    m.set("approach", report.approach_id.clone());
    m.set("n_summary_sentences", config.n_summary_sentences);
    m.set("k_folds", config.k_folds);
    m.set("seed", config.seed);
    m.hash_input("corpus", &args.corpus)
        .map_err(CliError::internal)?;
    m.write(&args.out_dir.join(MANIFEST_FILE_NAME))
        .map_err(CliError::internal)?;

    println!(
        "{}: micro mean F1 SU4 = {:.4} (std {:.4}) over {} questions -> {}",
        report.approach_id,
        report.aggregate.micro_mean,
        report.aggregate.micro_std,
        report.aggregate.n_questions,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let mut reports = Vec::new();
    for dir in &args.runs {
        let path = dir.join("report.json");
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
        reports.push(
            ExperimentReport::from_json(&text)
                .map_err(|e| CliError::user(format!("{} is not a report: {e}", path.display())))?,
        );
    }
    let cmp = compare_runs(&reports)?;
    std::fs::create_dir_all(&args.out).map_err(CliError::internal)?;
    write_out(&args.out.join("comparison.csv"), &cmp.to_csv())?;
    write_out(&args.out.join("comparison.svg"), &comparison_chart(&cmp))?;

    let mut m = RunManifest::new("compare");
    for (i, dir) in args.runs.iter().enumerate() {
        m.hash_input(&format!("run{i}"), &dir.join("report.json"))
            .map_err(CliError::internal)?;
    }
    m.write(&args.out.join(MANIFEST_FILE_NAME))
        .map_err(CliError::internal)?;

    println!(
        "compared {} runs -> {}",
        cmp.approaches.len(),
        args.out.display()
    );
    Ok(())
}

fn read_summaries(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| {
            CliError::user(format!(
                "{}: expected a JSON array of strings: {e}",
                path.display()
            ))
        })
    } else {
        Ok(text.lines().map(str::to_string).collect())
    }
}

fn cmd_rouge(args: RougeArgs) -> Result<(), CliError> {
    let candidates = read_summaries(&args.candidates)?;
    let references = read_summaries(&args.references)?;
    if candidates.len() != references.len() {
        return Err(CliError::User(format!(
            "candidate/reference count mismatch: {} vs {}",
            candidates.len(),
            references.len()
        )));
    }
    let mode = match args.mode {
        ModeArg::S => RougeMode::S,
        ModeArg::Su => RougeMode::SU,
    };
    let mut csv = String::from("index,precision,recall,f1\n");
    for (i, (c, r)) in candidates.iter().zip(&references).enumerate() {
        let score = rouge_su::<f64, _, _>(&stemmed_tokens(c), &stemmed_tokens(r), args.dskip, mode);
        csv.push_str(&format!(
            "{i},{},{},{}\n",
            score.precision, score.recall, score.f1
        ));
    }
    match &args.out {
        Some(path) => {
            write_out(path, &csv)?;
            let mut m = RunManifest::new("rouge");
            m.set("mode", format!("{:?}", mode));
            m.set("dskip", args.dskip);
            m.hash_input("candidates", &args.candidates)
                .map_err(CliError::internal)?;
            m.hash_input("references", &args.references)
                .map_err(CliError::internal)?;
            m.write(&sidecar_manifest(path))
                .map_err(CliError::internal)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}
