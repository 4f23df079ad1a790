//! The `cat-aspect` command line.
//!
//! Settings resolve as: command-line flag, then the config file (`--config`
//! or `$CAT_ASPECT_CONFIG`), then the built-in default. The config file is
//! flat `key = value` lines whose keys are the long flag names (`gamma`,
//! `top-n`, `dim`, ...); `#` starts a comment.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::candidates::{default_seed_adjectives, CandidateSet, DEFAULT_ADJ_WINDOW};
use crate::corpus::{parse_conllu, parse_plain, prepare_eval_set, Corpus};
use crate::embeddings::{load_glove_text, load_word2vec_text, save_word2vec_text, VectorStore};
use crate::error::Error;
use crate::eval::{curve_to_tsv, evaluate, grid_search, learning_curve, CandidateMode, ExperimentConfig, GridConfig};
use crate::labeler::{
    build_label_vectors, canonical_label, default_label_definitions, LabelDefinition, Method, Pipeline,
    PredictionRecord,
};
use crate::sgns::{self, TrainerConfig};
use crate::AttentionConfig;

pub const CONFIG_ENV: &str = "CAT_ASPECT_CONFIG";

#[derive(Debug, Parser)]
#[command(
    name = "cat-aspect",
    version,
    about = "Unsupervised aspect extraction with contrastive attention"
)]
pub struct Cli {
    /// Flat key = value config file
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,

    /// Worker threads for training, labeling and grid search
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train skip-gram negative-sampling embeddings on a corpus
    TrainEmbeddings(TrainArgs),
    /// Rank aspect candidate terms
    ExtractCandidates(ExtractArgs),
    /// Label sentences, writing JSON lines
    Label(LabelArgs),
    /// Score a JSON-lines prediction file
    Evaluate(EvaluateArgs),
    /// Search candidate counts and gammas on development data
    GridSearch(GridArgs),
    /// Train on growing prefixes of a corpus and score each
    LearningCurve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Input format: conllu or plain (default: by file extension)
    #[arg(long)]
    pub format: Option<String>,
    /// Words to tag as NOUN when reading plain text
    #[arg(long)]
    pub noun_lexicon: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainerArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub min_count: Option<usize>,
    #[arg(long)]
    pub subsample: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[command(flatten)]
    pub corpus_args: CorpusArgs,
    #[command(flatten)]
    pub trainer: TrainerArgs,
}

#[derive(Debug, Args)]
pub struct CandidateArgs {
    /// nouns, tokens or adj-noun
    #[arg(long)]
    pub candidate_mode: Option<String>,
    /// Comma-separated seed adjectives for adj-noun mode
    #[arg(long)]
    pub seed_adjectives: Option<String>,
    #[arg(long)]
    pub adj_window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub corpus_args: CorpusArgs,
    #[command(flatten)]
    pub candidates: CandidateArgs,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Precomputed `term<TAB>score` candidates; otherwise extracted with --top-n
    #[arg(long)]
    pub candidates: Option<PathBuf>,
    /// Corpus to count candidates in (default: --corpus)
    #[arg(long)]
    pub candidate_corpus: Option<PathBuf>,
    #[arg(long)]
    pub top_n: Option<usize>,
    /// cat, attention or mean
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Label definition `name` or `name=term1,term2`; repeatable
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// Add per-token attention weights to each record
    #[arg(long)]
    pub show_attention: bool,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub corpus_args: CorpusArgs,
    #[command(flatten)]
    pub candidate_args: CandidateArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// JSON-lines predictions as written by `label`
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// Also write the report as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub vectors: PathBuf,
    /// Labeled development corpus
    #[arg(long)]
    pub dev: PathBuf,
    /// Corpus to count candidates in (default: --dev)
    #[arg(long)]
    pub candidate_corpus: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated candidate counts
    #[arg(long)]
    pub top_n: Option<String>,
    /// Comma-separated gammas
    #[arg(long)]
    pub gammas: Option<String>,
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// Also write the full grid as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub corpus_args: CorpusArgs,
    #[command(flatten)]
    pub candidate_args: CandidateArgs,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Unlabeled in-domain training corpus
    #[arg(long)]
    pub train: PathBuf,
    /// Labeled evaluation corpus
    #[arg(long)]
    pub eval: PathBuf,
    #[arg(long)]
    pub increments: Option<usize>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub top_n: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long = "label")]
    pub labels: Vec<String>,
    /// TSV output (default: standard output)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub corpus_args: CorpusArgs,
    #[command(flatten)]
    pub trainer: TrainerArgs,
    #[command(flatten)]
    pub candidate_args: CandidateArgs,
}

/// A failed command: usage problems exit 1, data problems exit 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Data(Error::Io(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Values from the config file, keyed by long flag name.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    used: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
            values.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(Settings {
            values,
            used: BTreeMap::new(),
        })
    }

    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(Settings::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", p.display())))?;
                Settings::parse(&text)
            }
        }
    }

    /// Flag value, else config-file value, else `default`. The resolved
    /// value is recorded for the run manifest.
    pub fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> CliResult<T>
    where
        T: FromStr + ToString,
    {
        let value = match flag {
            Some(v) => v,
            None => match self.values.get(key) {
                Some(raw) => raw
                    .parse()
                    .map_err(|_| CliError::Usage(format!("config: invalid value `{raw}` for `{key}`")))?,
                None => default,
            },
        };
        self.used.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    fn resolve_positive(&mut self, key: &str, flag: Option<usize>, default: usize) -> CliResult<usize> {
        let v = self.resolve(key, flag, default)?;
        if v == 0 {
            return Err(CliError::Usage(format!("--{key} must be at least 1")));
        }
        Ok(v)
    }

    fn record(&mut self, key: &str, value: impl ToString) {
        self.used.insert(key.to_string(), value.to_string());
    }

    pub fn snapshot(&self) -> BTreeMap<String, String> {
        self.used.clone()
    }
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every artifact as `<artifact>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub timestamp: u64,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, settings: &Settings, inputs: &[&Path]) -> CliResult<Self> {
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: file_digest(p)?,
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: settings.snapshot(),
            inputs,
        })
    }

    pub fn manifest_path(artifact: &Path) -> PathBuf {
        let mut name = artifact.as_os_str().to_os_string();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write_for(&self, artifact: &Path) -> CliResult<()> {
        let file = File::create(Self::manifest_path(artifact))?;
        serde_json::to_writer_pretty(BufWriter::new(file), self).map_err(|e| CliError::Data(Error::Io(e.into())))?;
        Ok(())
    }
}

fn file_digest(path: &Path) -> CliResult<String> {
    let mut file = open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn open(path: &Path) -> CliResult<File> {
    File::open(path)
        .map_err(|e| CliError::Data(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn reader(path: &Path) -> CliResult<BufReader<File>> {
    Ok(BufReader::new(open(path)?))
}

fn writer(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_corpus(path: &Path, args: &CorpusArgs, settings: &mut Settings) -> CliResult<Corpus> {
    let default_format = match path.extension().and_then(|e| e.to_str()) {
        Some("conllu") | Some("conll") => "conllu",
        _ => "plain",
    };
    let format: String = settings.resolve("format", args.format.clone(), default_format.to_string())?;
    let source = path.display().to_string();
    let corpus = match format.as_str() {
        "conllu" => parse_conllu(reader(path)?, &source)?,
        "plain" => {
            let lexicon = match &args.noun_lexicon {
                Some(p) => Some(
                    reader(p)?
                        .lines()
                        .map(|l| l.map(|w| w.trim().to_lowercase()))
                        .filter(|w| w.as_ref().map_or(true, |w| !w.is_empty()))
                        .collect::<io::Result<HashSet<String>>>()?,
                ),
                None => None,
            };
            parse_plain(reader(path)?, &source, lexicon.as_ref())?
        }
        other => return Err(CliError::Usage(format!("unknown corpus format `{other}`"))),
    };
    Ok(corpus.map_labels(canonical_label))
}

/// Reads word2vec text, or headerless GloVe text when the first line is not
/// a `V d` header.
pub fn read_vectors(path: &Path) -> CliResult<VectorStore> {
    let mut first = String::new();
    reader(path)?.read_line(&mut first)?;
    let is_header = {
        let fields: Vec<&str> = first.split_whitespace().collect();
        fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok())
    };
    Ok(if is_header {
        load_word2vec_text(reader(path)?)?
    } else {
        load_glove_text(reader(path)?)?
    })
}

fn parse_method(settings: &mut Settings, flag: Option<String>) -> CliResult<Method> {
    let raw = settings.resolve("method", flag, "cat".to_string())?;
    raw.parse().map_err(|e: Error| CliError::Usage(e.to_string()))
}

fn parse_labels(settings: &mut Settings, flags: &[String]) -> CliResult<Vec<LabelDefinition>> {
    let specs: Vec<String> = if !flags.is_empty() {
        flags.to_vec()
    } else if let Some(raw) = settings.values.get("labels") {
        raw.split(';').map(str::to_string).collect()
    } else {
        return Ok(default_label_definitions());
    };
    let defs = specs
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<LabelDefinition>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    settings.record("labels", specs.join(";"));
    Ok(defs)
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> CliResult<Vec<T>> {
    raw.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--{key}: invalid value `{v}`")))
        })
        .collect()
}

fn candidate_mode(settings: &mut Settings, args: &CandidateArgs) -> CliResult<CandidateMode> {
    let mode = settings.resolve("candidate-mode", args.candidate_mode.clone(), "nouns".to_string())?;
    match mode.as_str() {
        "nouns" => Ok(CandidateMode::Nouns),
        "tokens" => Ok(CandidateMode::Tokens),
        "adj-noun" => {
            let seeds = match settings.resolve("seed-adjectives", args.seed_adjectives.clone(), String::new())? {
                s if s.is_empty() => default_seed_adjectives(),
                s => s
                    .split(',')
                    .map(|w| w.trim().to_lowercase())
                    .filter(|w| !w.is_empty())
                    .collect::<BTreeSet<_>>(),
            };
            let window = settings.resolve("adj-window", args.adj_window, DEFAULT_ADJ_WINDOW)?;
            Ok(CandidateMode::AdjNoun { seeds, window })
        }
        other => Err(CliError::Usage(format!("unknown candidate mode `{other}`"))),
    }
}

fn trainer_config(settings: &mut Settings, args: &TrainerArgs, workers: usize) -> CliResult<TrainerConfig> {
    let d = TrainerConfig::default();
    let config = TrainerConfig {
        dim: settings.resolve_positive("dim", args.dim, d.dim)?,
        window: settings.resolve_positive("window", args.window, d.window)?,
        negatives: settings.resolve_positive("negatives", args.negatives, d.negatives)?,
        epochs: settings.resolve_positive("epochs", args.epochs, d.epochs)?,
        initial_lr: settings.resolve("lr", args.lr, d.initial_lr)?,
        min_count: settings.resolve_positive("min-count", args.min_count, d.min_count)?,
        subsample_threshold: settings.resolve("subsample", args.subsample, d.subsample_threshold)?,
        seed: settings.resolve("seed", args.seed, d.seed)?,
        workers,
    };
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn thread_pool(workers: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let mut settings = Settings::load(cli.config.as_deref())?;
    let workers = settings.resolve_positive("workers", cli.workers, 1)?;
    let pool = thread_pool(workers)?;
    pool.install(|| match cli.command {
        Command::TrainEmbeddings(args) => cmd_train_embeddings(args, &mut settings, workers),
        Command::ExtractCandidates(args) => cmd_extract_candidates(args, &mut settings),
        Command::Label(args) => cmd_label(args, &mut settings),
        Command::Evaluate(args) => cmd_evaluate(args, &mut settings),
        Command::GridSearch(args) => cmd_grid(args, &mut settings),
        Command::LearningCurve(args) => cmd_curve(args, &mut settings),
    })
}

/// Parses `args`, runs, and returns the process exit code. Errors go to
/// standard error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_train_embeddings(args: TrainArgs, settings: &mut Settings, workers: usize) -> CliResult<()> {
    let config = trainer_config(settings, &args.trainer, workers)?;
    let corpus = read_corpus(&args.corpus, &args.corpus_args, settings)?;
    let store = sgns::train(&corpus, &config)?;
    save_word2vec_text(&store, writer(Some(&args.output))?)?;
    RunManifest::new("train-embeddings", settings, &[&args.corpus])?.write_for(&args.output)?;
    log::info!("wrote {} vectors of dimension {}", store.len(), store.dim());
    Ok(())
}

pub fn cmd_extract_candidates(args: ExtractArgs, settings: &mut Settings) -> CliResult<()> {
    let n = settings.resolve_positive("top-n", args.top_n, 200)?;
    let mode = candidate_mode(settings, &args.candidates)?;
    let corpus = read_corpus(&args.corpus, &args.corpus_args, settings)?;
    let store = read_vectors(&args.vectors)?;
    let set = mode.extract(&corpus, &store, n)?;
    let mut out = writer(args.output.as_deref())?;
    set.write_tsv(&mut out)?;
    out.flush()?;
    if let Some(path) = &args.output {
        RunManifest::new("extract-candidates", settings, &[&args.corpus, &args.vectors])?.write_for(path)?;
    }
    Ok(())
}

pub fn cmd_label(args: LabelArgs, settings: &mut Settings) -> CliResult<()> {
    let method = parse_method(settings, args.method.clone())?;
    if !method.uses_gamma() && args.gamma.is_some() {
        eprintln!("warning: --gamma is ignored by method `{method}`");
    }
    let gamma = settings.resolve("gamma", args.gamma, crate::attention::DEFAULT_GAMMA)?;
    let config = if method.uses_gamma() {
        AttentionConfig::new(gamma).map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        AttentionConfig { gamma }
    };
    let defs = parse_labels(settings, &args.labels)?;
    let corpus = read_corpus(&args.corpus, &args.corpus_args, settings)?;
    let store = read_vectors(&args.vectors)?;
    let labels = build_label_vectors(&store, &defs)?;

    let mut inputs: Vec<&Path> = vec![&args.vectors, &args.corpus];
    let candidates = match &args.candidates {
        Some(path) => {
            inputs.push(path);
            settings.record("candidates", path.display());
            CandidateSet::read_tsv(reader(path)?, &store)?
        }
        None => {
            let n = settings.resolve_positive("top-n", args.top_n, 200)?;
            let mode = candidate_mode(settings, &args.candidate_args)?;
            match &args.candidate_corpus {
                Some(path) => {
                    inputs.push(path);
                    let source = read_corpus(path, &args.corpus_args, settings)?;
                    mode.extract(&source, &store, n)?
                }
                None => mode.extract(&corpus, &store, n)?,
            }
        }
    };
    settings.record("show-attention", args.show_attention);

    let pipeline = Pipeline::new(&store, &candidates, &labels, method, config)?;
    let results = pipeline.label_corpus(&corpus)?;
    let mut out = writer(args.output.as_deref())?;
    for (sentence, result) in corpus.iter().zip(&results) {
        let record = PredictionRecord::new(sentence, result, &labels, args.show_attention);
        serde_json::to_writer(&mut out, &record).map_err(|e| Error::Io(e.into()))?;
        writeln!(out)?;
    }
    out.flush()?;
    if let Some(path) = &args.output {
        RunManifest::new("label", settings, &inputs)?.write_for(path)?;
    }
    Ok(())
}

pub fn cmd_evaluate(args: EvaluateArgs, settings: &mut Settings) -> CliResult<()> {
    let defs = parse_labels(settings, &args.labels)?;
    let names: Vec<String> = defs.iter().map(|d| d.name.clone()).collect();
    let mut predicted = Vec::new();
    let mut gold = Vec::new();
    let mut abstained = 0;
    for (i, line) in reader(&args.predictions)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let Some(g) = record.gold.as_deref().map(canonical_label) else {
            continue;
        };
        if !names.contains(&g) {
            continue;
        }
        match record.predicted {
            Some(p) => {
                predicted.push(canonical_label(&p));
                gold.push(g);
            }
            None => abstained += 1,
        }
    }
    if gold.is_empty() {
        return Err(Error::Empty("no predictions with an allowed gold label".into()).into());
    }
    let mut report = evaluate(&predicted, &gold, &names)?;
    report.abstain_count = abstained;
    print!("{}", report.to_text());
    if let Some(path) = &args.json {
        let file = File::create(path)?;
        serde_json::to_writer_pretty(BufWriter::new(file), &report).map_err(|e| Error::Io(e.into()))?;
    }
    Ok(())
}

pub fn cmd_grid(args: GridArgs, settings: &mut Settings) -> CliResult<()> {
    let method = parse_method(settings, args.method.clone())?;
    let defaults = GridConfig::default_for(method);
    let counts = match settings.resolve("top-n", args.top_n.clone(), String::new())? {
        s if s.is_empty() => defaults.candidate_counts,
        s => parse_list("top-n", &s)?,
    };
    let gammas = match settings.resolve("gammas", args.gammas.clone(), String::new())? {
        s if s.is_empty() => defaults.gammas,
        s => parse_list("gammas", &s)?,
    };
    let grid = GridConfig {
        candidate_counts: counts,
        gammas,
        method,
    };
    let defs = parse_labels(settings, &args.labels)?;
    let mode = candidate_mode(settings, &args.candidate_args)?;

    let store = read_vectors(&args.vectors)?;
    let labels = build_label_vectors(&store, &defs)?;
    let allowed: BTreeSet<String> = labels.labels().iter().cloned().collect();
    let (dev, report) = prepare_eval_set(&read_corpus(&args.dev, &args.corpus_args, settings)?, &allowed)?;
    log::info!("dev set: kept {} of {} sentences", report.retained, report.input);
    let source = match &args.candidate_corpus {
        Some(path) => read_corpus(path, &args.corpus_args, settings)?,
        None => dev.clone(),
    };
    let max_n = grid.candidate_counts.iter().copied().max().unwrap_or(1);
    let pool = mode.extract(&source, &store, max_n)?;
    let result = grid_search(&dev, &store, &pool, &grid, &labels)?;
    print!("{}", result.to_table());
    if let Some(path) = &args.json {
        let file = File::create(path)?;
        serde_json::to_writer_pretty(BufWriter::new(file), &result).map_err(|e| Error::Io(e.into()))?;
        let mut inputs: Vec<&Path> = vec![&args.vectors, &args.dev];
        if let Some(p) = &args.candidate_corpus {
            inputs.push(p);
        }
        RunManifest::new("grid-search", settings, &inputs)?.write_for(path)?;
    }
    Ok(())
}

pub fn cmd_curve(args: CurveArgs, settings: &mut Settings) -> CliResult<()> {
    let increments = settings.resolve_positive("increments", args.increments, 10)?;
    let seeds = settings.resolve_positive("seeds", args.seeds, 5)?;
    let method = parse_method(settings, args.method.clone())?;
    let experiment = ExperimentConfig {
        method,
        candidate_count: settings.resolve_positive("top-n", args.top_n, 200)?,
        gamma: settings.resolve("gamma", args.gamma, crate::attention::DEFAULT_GAMMA)?,
        candidates: candidate_mode(settings, &args.candidate_args)?,
        labels: parse_labels(settings, &args.labels)?,
    };
    // Curve points run in parallel on the worker pool; each trainer is
    // single-threaded so every point is reproducible.
    let trainer = trainer_config(settings, &args.trainer, 1)?;

    let train = read_corpus(&args.train, &args.corpus_args, settings)?;
    let allowed: BTreeSet<String> = experiment.labels.iter().map(|d| d.name.clone()).collect();
    let (eval_set, _) = prepare_eval_set(&read_corpus(&args.eval, &args.corpus_args, settings)?, &allowed)?;
    let points = learning_curve(&train, &eval_set, &trainer, &experiment, increments, seeds)?;
    let mut out = writer(args.output.as_deref())?;
    out.write_all(curve_to_tsv(&points).as_bytes())?;
    out.flush()?;
    if let Some(path) = &args.output {
        RunManifest::new("learning-curve", settings, &[&args.train, &args.eval])?.write_for(path)?;
    }
    Ok(())
}
