//! `triplesim`: validate triple listings, build similarity matrices, compare
//! vectorization approaches and rank catalog items against a profile.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 model error.

mod config;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use triplesim::recommender::listing_files;
use triplesim::vector_space::document_tokens;
use triplesim::{
    load_catalog, parse_listing_file, rank_items, Backend, EmbeddingStore, Error, NumericMode,
    NumericRanges, SetMode, SimilarityConfig, SimilarityEngine, SimilarityMatrix, TfIdfModel,
    TripleSet, UserProfile, VectorModel, Weights, WordSimPolicy,
};

use crate::config::{parse_weights, FileConfig};

#[derive(Debug, Parser)]
#[command(name = "triplesim", version, about = "Semantic similarity between sets of ontology triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse every listing in a corpus and report counts and vocabulary coverage.
    Validate {
        corpus: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pairwise similarity matrix over a corpus.
    Matrix {
        corpus: PathBuf,
        #[arg(long, value_enum)]
        approach: Option<Approach>,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank corpus items against a profile listing.
    Rank {
        profile: PathBuf,
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        top_k: usize,
        /// User id; defaults to the subject of the profile's first triple.
        #[arg(long)]
        user: Option<String>,
        #[arg(long, value_enum)]
        approach: Option<Approach>,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Side-by-side n1 / n2 / ablation values for every pair of items.
    Compare {
        corpus: PathBuf,
        #[command(flatten)]
        scoring: ScoringArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Approach {
    /// Pre-trained embeddings.
    N1,
    /// TF-IDF fitted on the corpus.
    N2,
    /// Embeddings with the subject weight set to zero.
    Ablation,
}

impl Approach {
    fn name(self) -> &'static str {
        match self {
            Approach::N1 => "n1",
            Approach::N2 => "n2",
            Approach::Ablation => "ablation",
        }
    }

    fn backend(self) -> Backend {
        match self {
            Approach::N2 => Backend::TfIdf,
            Approach::N1 | Approach::Ablation => Backend::Embedding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct WeightFlag(f64, f64, f64);

#[derive(Debug, Args)]
struct ScoringArgs {
    /// Subject, predicate and object weights as `a,b,g`; rescaled to sum to 3.
    #[arg(long, value_parser = |s: &str| parse_weights(s).map(|(a, b, g)| WeightFlag(a, b, g)))]
    weights: Option<WeightFlag>,
    /// `normalized` or `literal`.
    #[arg(long, value_parser = |s: &str| s.parse::<SetMode>())]
    set_mode: Option<SetMode>,
    /// `literal` or `minmax`.
    #[arg(long, value_parser = |s: &str| s.parse::<NumericMode>())]
    numeric_mode: Option<NumericMode>,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Plain-text embedding file.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Model(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Model(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) | Failure::Model(e) => e,
        }
    }
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
    fn model(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into()))
    }

    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Data(e.into()))
    }

    fn model(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Model(e.into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate {
            corpus,
            model,
            output,
        } => cmd_validate(&corpus, &model, &output),
        Command::Matrix {
            corpus,
            approach,
            scoring,
            model,
            output,
        } => cmd_matrix(&corpus, approach, &scoring, &model, &output),
        Command::Rank {
            profile,
            corpus,
            top_k,
            user,
            approach,
            scoring,
            model,
            output,
        } => cmd_rank(&profile, &corpus, top_k, user.as_deref(), approach, &scoring, &model, &output),
        Command::Compare {
            corpus,
            scoring,
            model,
            output,
        } => cmd_compare(&corpus, &scoring, &model, &output),
    }
}

/// Effective settings after merging flags, config file and defaults.
#[derive(Debug, Clone)]
struct Settings {
    approach: Approach,
    weights: Weights,
    set_mode: SetMode,
    numeric_mode: NumericMode,
    embedding_path: Option<PathBuf>,
}

impl Settings {
    fn resolve(approach: Option<Approach>, scoring: &ScoringArgs, model: &ModelArgs) -> Result<Self, Failure> {
        let file = match &model.config {
            Some(path) => FileConfig::load(path).usage()?,
            None => FileConfig::default(),
        };
        let approach = approach.unwrap_or(match file.backend {
            Some(Backend::TfIdf) => Approach::N2,
            _ => Approach::N1,
        });
        let requested = scoring
            .weights
            .map(|WeightFlag(a, b, g)| (a, b, g))
            .or_else(|| file.weights());
        let weights = if approach == Approach::Ablation {
            if scoring.weights.is_some() {
                return Err(Failure::Usage(anyhow!(
                    "--weights cannot be combined with --approach ablation"
                )));
            }
            Weights::subject_ablation()
        } else {
            let (a, b, g) = requested.unwrap_or((1.0, 1.0, 1.0));
            Weights::rescaled(a, b, g).usage()?
        };
        Ok(Settings {
            approach,
            weights,
            set_mode: scoring.set_mode.or(file.set_mode).unwrap_or_default(),
            numeric_mode: scoring.numeric_mode.or(file.numeric_mode).unwrap_or_default(),
            embedding_path: model.embeddings.clone().or(file.embedding_path),
        })
    }

    fn with_approach(&self, approach: Approach) -> Settings {
        let mut next = self.clone();
        next.approach = approach;
        if approach == Approach::Ablation {
            next.weights = Weights::subject_ablation();
        }
        next
    }

    fn similarity_config(&self) -> SimilarityConfig {
        let mut config = SimilarityConfig::new(WordSimPolicy::new(self.approach.backend()));
        config.weights = self.weights;
        config.set_mode = self.set_mode;
        config.numeric_mode = self.numeric_mode;
        config
    }
}

struct LoadedEmbedding {
    store: EmbeddingStore,
    path: PathBuf,
    sha256: String,
}

fn load_embedding(path: Option<&Path>, approach: &str) -> Result<LoadedEmbedding, Failure> {
    let path = path.ok_or_else(|| {
        Failure::Model(anyhow!(
            "approach {approach} needs an embedding file (--embeddings or embedding_path)"
        ))
    })?;
    let bytes = std::fs::read(path)
        .with_context(|| format!("reading embeddings {}", path.display()))
        .model()?;
    let text = std::str::from_utf8(&bytes)
        .with_context(|| format!("{} is not UTF-8", path.display()))
        .model()?;
    let store = EmbeddingStore::parse(text)
        .with_context(|| format!("loading embeddings {}", path.display()))
        .model()?;
    Ok(LoadedEmbedding {
        store,
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Vector model for one approach plus the key/value lines echoed in output.
fn build_model(
    settings: &Settings,
    tfidf_corpus: &[&TripleSet],
    embedding: Option<&LoadedEmbedding>,
) -> Result<(VectorModel, Vec<(String, String)>), Failure> {
    let c = settings.similarity_config();
    let mut echo = vec![
        ("approach".to_string(), settings.approach.name().to_string()),
        ("backend".to_string(), c.policy.backend.to_string()),
        ("alpha".to_string(), c.weights.alpha.to_string()),
        ("beta".to_string(), c.weights.beta.to_string()),
        ("gamma".to_string(), c.weights.gamma.to_string()),
        ("set_mode".to_string(), c.set_mode.to_string()),
        ("numeric_mode".to_string(), c.numeric_mode.to_string()),
        ("alignment".to_string(), c.alignment.to_string()),
        ("clamp_negative".to_string(), c.policy.clamp_negative.to_string()),
    ];
    let model = match settings.approach.backend() {
        Backend::Embedding => {
            let loaded = embedding.ok_or_else(|| {
                Failure::Model(anyhow!("approach {} needs an embedding file", settings.approach.name()))
            })?;
            echo.push(("embedding_path".into(), loaded.path.display().to_string()));
            echo.push(("embedding_sha256".into(), loaded.sha256.clone()));
            VectorModel::Embedding(loaded.store.clone())
        }
        Backend::TfIdf => {
            let model = TfIdfModel::fit(tfidf_corpus.iter().copied()).data()?;
            echo.push(("tfidf_documents".into(), model.document_count().to_string()));
            VectorModel::TfIdf(model)
        }
    };
    Ok((model, echo))
}

fn engine<'m>(
    model: &'m VectorModel,
    settings: &Settings,
    range_sets: &[&TripleSet],
) -> Result<SimilarityEngine<'m>, Failure> {
    let engine = SimilarityEngine::new(model, settings.similarity_config()).model()?;
    Ok(match settings.numeric_mode {
        NumericMode::MinMax => engine.with_ranges(NumericRanges::from_sets(range_sets.iter().copied())),
        NumericMode::Literal => engine,
    })
}

fn maybe_embedding(settings: &Settings) -> Result<Option<LoadedEmbedding>, Failure> {
    match settings.approach.backend() {
        Backend::Embedding => {
            load_embedding(settings.embedding_path.as_deref(), settings.approach.name()).map(Some)
        }
        Backend::TfIdf => Ok(None),
    }
}

fn comment_header(echo: &[(String, String)]) -> String {
    echo.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

fn with_echo(mut value: Value, echo: &[(String, String)]) -> Value {
    let config: Map<String, Value> = echo
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    if let Value::Object(map) = &mut value {
        map.insert("config".into(), Value::Object(config));
    }
    value
}

fn to_json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    text
}

fn emit(text: &str, output: &OutputArgs) -> Result<(), Failure> {
    match &output.output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .data(),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .context("writing to standard output")
                .data()
        }
    }
}

fn load_corpus(corpus: &Path) -> Result<Vec<TripleSet>, Failure> {
    Ok(load_catalog(corpus).data()?.to_vec())
}

fn render_matrix(matrix: &SimilarityMatrix, echo: &[(String, String)], format: Format) -> String {
    match format {
        Format::Json => to_json_text(&with_echo(matrix.to_json(), echo)),
        Format::Csv => comment_header(echo) + &matrix.to_csv(),
        Format::Table => comment_header(echo) + &matrix.to_table(),
    }
}

fn cmd_matrix(
    corpus: &Path,
    approach: Option<Approach>,
    scoring: &ScoringArgs,
    model_args: &ModelArgs,
    output: &OutputArgs,
) -> Result<(), Failure> {
    let settings = Settings::resolve(approach, scoring, model_args)?;
    let sets = load_corpus(corpus)?;
    let refs: Vec<&TripleSet> = sets.iter().collect();
    let embedding = maybe_embedding(&settings)?;
    let (model, echo) = build_model(&settings, &refs, embedding.as_ref())?;
    let matrix = engine(&model, &settings, &refs)?
        .similarity_matrix(&sets)
        .data()?;
    emit(&render_matrix(&matrix, &echo, output.format), output)
}

#[allow(clippy::too_many_arguments)]
fn cmd_rank(
    profile_path: &Path,
    corpus: &Path,
    top_k: usize,
    user: Option<&str>,
    approach: Option<Approach>,
    scoring: &ScoringArgs,
    model_args: &ModelArgs,
    output: &OutputArgs,
) -> Result<(), Failure> {
    if top_k == 0 {
        return Err(Failure::Usage(anyhow!("--top-k must be at least 1")));
    }
    let settings = Settings::resolve(approach, scoring, model_args)?;
    let profile = UserProfile::load(profile_path, user).data()?;
    let catalog = load_catalog(corpus).data()?;
    let mut refs: Vec<&TripleSet> = catalog.iter().collect();
    refs.push(&profile.preferences);

    let embedding = maybe_embedding(&settings)?;
    let (model, mut echo) = build_model(&settings, &refs, embedding.as_ref())?;
    echo.push(("top_k".into(), top_k.to_string()));
    let engine = engine(&model, &settings, &refs)?;
    let ranked = rank_items(&profile, &catalog, &engine, top_k).data()?;

    let text = match output.format {
        Format::Json => to_json_text(&with_echo(ranked.to_json(), &echo)),
        Format::Csv => comment_header(&echo) + &ranked.to_csv(),
        Format::Table => comment_header(&echo) + &ranked.to_table(),
    };
    emit(&text, output)
}

const COMPARED: [Approach; 3] = [Approach::N1, Approach::N2, Approach::Ablation];

fn cmd_compare(
    corpus: &Path,
    scoring: &ScoringArgs,
    model_args: &ModelArgs,
    output: &OutputArgs,
) -> Result<(), Failure> {
    let base = Settings::resolve(Some(Approach::N1), scoring, model_args)?;
    let sets = load_corpus(corpus)?;
    let refs: Vec<&TripleSet> = sets.iter().collect();
    let embedding = load_embedding(base.embedding_path.as_deref(), "compare")?;

    let mut matrices = Vec::new();
    let mut echoes = Vec::new();
    for approach in COMPARED {
        let settings = base.with_approach(approach);
        let (model, echo) = build_model(&settings, &refs, Some(&embedding))?;
        let matrix = engine(&model, &settings, &refs)?
            .similarity_matrix(&sets)
            .data()?;
        matrices.push(matrix);
        echoes.push(echo);
    }

    let rows: Vec<(&str, &str, [f64; 3])> = matrices[0]
        .off_diagonal()
        .enumerate()
        .map(|(k, (a, b, n1))| {
            let others: Vec<f64> = matrices[1..]
                .iter()
                .map(|m| m.off_diagonal().nth(k).expect("same labels").2)
                .collect();
            (a, b, [n1, others[0], others[1]])
        })
        .collect();

    let mut header: Vec<(String, String)> = Vec::new();
    for (approach, echo) in COMPARED.iter().zip(&echoes) {
        for (k, v) in echo.iter().filter(|(k, _)| k != "approach") {
            header.push((format!("{}.{k}", approach.name()), v.clone()));
        }
    }

    let text = match output.format {
        Format::Json => {
            let pairs: Vec<Value> = rows
                .iter()
                .map(|(a, b, v)| json!({"left": a, "right": b, "n1": v[0], "n2": v[1], "ablation": v[2]}))
                .collect();
            let value = json!({"labels": matrices[0].labels(), "pairs": pairs});
            to_json_text(&with_echo(value, &header))
        }
        Format::Csv => {
            let mut text = comment_header(&header);
            text.push_str("left,right,n1,n2,ablation\n");
            for (a, b, v) in &rows {
                text.push_str(&format!("{a},{b},{},{},{}\n", v[0], v[1], v[2]));
            }
            text
        }
        Format::Table => {
            let width = rows
                .iter()
                .map(|(a, b, _)| a.chars().count() + b.chars().count() + 3)
                .max()
                .unwrap_or(4)
                .max(4);
            let mut text = comment_header(&header);
            text.push_str(&format!("{:width$}  {:>8}  {:>8}  {:>8}\n", "pair", "n1", "n2", "ablation"));
            for (a, b, v) in &rows {
                let pair = format!("{a} - {b}");
                text.push_str(&format!(
                    "{pair:width$}  {:>8.2}  {:>8.2}  {:>8.2}\n",
                    v[0], v[1], v[2]
                ));
            }
            text
        }
    };
    emit(&text, output)
}

struct FileReport {
    file: String,
    label: String,
    triples: usize,
    qualitative: usize,
    quantitative: usize,
    tokens: usize,
    oov: Vec<String>,
}

impl FileReport {
    fn oov_percent(&self) -> f64 {
        if self.tokens == 0 {
            0.0
        } else {
            100.0 * self.oov.len() as f64 / self.tokens as f64
        }
    }
}

fn describe_parse_error(path: &Path, error: &Error) -> String {
    match error.root() {
        Error::Parse { line, message } => format!("{}:{line}: {message}", path.display()),
        other => format!("{}: {other}", path.display()),
    }
}

fn cmd_validate(corpus: &Path, model_args: &ModelArgs, output: &OutputArgs) -> Result<(), Failure> {
    let file = match &model_args.config {
        Some(path) => FileConfig::load(path).usage()?,
        None => FileConfig::default(),
    };
    let embedding_path = model_args.embeddings.clone().or(file.embedding_path);
    let files = listing_files(corpus).data()?;
    if files.is_empty() {
        return Err(Failure::Data(Error::EmptyCatalog(corpus.to_path_buf()).into()));
    }

    let mut parsed = Vec::new();
    let mut errors = Vec::new();
    for path in &files {
        match parse_listing_file(path, None) {
            Ok(set) => parsed.push((path, set)),
            Err(e) => errors.push(describe_parse_error(path, &e)),
        }
    }

    let mut echo = Vec::new();
    let model = match embedding_path {
        Some(path) => {
            let loaded = load_embedding(Some(&path), "validate")?;
            echo.push(("backend".to_string(), "embedding".to_string()));
            echo.push(("embedding_path".to_string(), loaded.path.display().to_string()));
            echo.push(("embedding_sha256".to_string(), loaded.sha256.clone()));
            Some(VectorModel::Embedding(loaded.store))
        }
        None if !parsed.is_empty() => {
            echo.push(("backend".to_string(), "tfidf".to_string()));
            let model = TfIdfModel::fit(parsed.iter().map(|(_, s)| s)).data()?;
            Some(VectorModel::TfIdf(model))
        }
        None => None,
    };

    let reports: Vec<FileReport> = parsed
        .iter()
        .map(|(path, set)| {
            let tokens: BTreeSet<&str> = document_tokens(set).into_iter().collect();
            let oov = tokens
                .iter()
                .filter(|t| model.as_ref().is_some_and(|m| !m.contains(t)))
                .map(|t| t.to_string())
                .collect();
            FileReport {
                file: path.display().to_string(),
                label: set.label.clone(),
                triples: set.len(),
                qualitative: set.qualitative_count(),
                quantitative: set.quantitative_count(),
                tokens: tokens.len(),
                oov,
            }
        })
        .collect();

    let text = match output.format {
        Format::Json => {
            let files: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "file": r.file,
                        "label": r.label,
                        "triples": r.triples,
                        "qualitative": r.qualitative,
                        "quantitative": r.quantitative,
                        "tokens": r.tokens,
                        "oov": r.oov,
                        "oov_percent": r.oov_percent(),
                    })
                })
                .collect();
            to_json_text(&with_echo(json!({"files": files, "errors": errors}), &echo))
        }
        Format::Csv => {
            let mut text = comment_header(&echo);
            text.push_str("file,label,triples,qualitative,quantitative,tokens,oov_percent,oov\n");
            for r in &reports {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.file,
                    r.label,
                    r.triples,
                    r.qualitative,
                    r.quantitative,
                    r.tokens,
                    r.oov_percent(),
                    r.oov.join(" ")
                ));
            }
            for e in &errors {
                text.push_str(&format!("# error: {e}\n"));
            }
            text
        }
        Format::Table => {
            let mut text = comment_header(&echo);
            text.push_str(&format!(
                "{:<8} {:>7} {:>4} {:>4} {:>7} {:>6}  oov words\n",
                "label", "triples", "L", "H", "tokens", "oov%"
            ));
            for r in &reports {
                text.push_str(&format!(
                    "{:<8} {:>7} {:>4} {:>4} {:>7} {:>6.1}  {}\n",
                    r.label,
                    r.triples,
                    r.qualitative,
                    r.quantitative,
                    r.tokens,
                    r.oov_percent(),
                    r.oov.join(" ")
                ));
            }
            text.push_str(&format!("{} file(s), {} failed\n", files.len(), errors.len()));
            for e in &errors {
                text.push_str(&format!("error: {e}\n"));
            }
            text
        }
    };
    emit(&text, output)?;

    if errors.is_empty() {
        Ok(())
    } else {
        Err(Failure::Data(anyhow!("{} of {} file(s) failed to parse", errors.len(), files.len())))
    }
}
