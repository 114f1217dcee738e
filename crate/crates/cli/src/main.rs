//! `nazar` — command-line pipeline: preprocess, featurize, train,
//! predict, evaluate, ablate, estimate-probs, embed-demo.

mod config;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::builder::ArgGroup;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use nazar::classify::{
    split_train_test, train_logistic, train_mlp, train_stack, train_svm_smo, ConfidencePredictor,
    Kernel, TrainConfig,
};
use nazar::embed::{analogy, load_vectors, project_2d, projection_csv, train_ffn, FeedForwardConfig};
use nazar::eval::{ablate, ablation_csv, load_corpus, parse_indices, score, AblationSubset, Review};
use nazar::features::{
    estimate_probability_table, extract_features, features_csv_header, features_csv_row,
    format_probability_table, load_probability_table, parse_features_csv, parse_keywords,
    DomainKeywordSet, DoublingDirection, FeatureOptions, FeatureResources, FeatureVector,
    ProbabilityTable,
};
use nazar::lexicon::{load_lexicon, Lexicon, PolarityLabel, Scheme};
use nazar::model_file::{ModelFile, SavedClassifier};
use nazar::preprocess::{
    parse_emoticon_table, parse_line_list, preprocess_document, Document, IdentityResolver, Level,
    PreprocessConfig,
};
use nazar::shift::{load_shift_sets, ShiftConstants, ShiftSets};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Lexicon(#[from] nazar::lexicon::LexiconError),
    #[error(transparent)]
    Preprocess(#[from] nazar::preprocess::PreprocessError),
    #[error(transparent)]
    Shift(#[from] nazar::shift::ShiftError),
    #[error(transparent)]
    Feature(#[from] nazar::features::FeatureError),
    #[error(transparent)]
    Classify(#[from] nazar::classify::ClassifyError),
    #[error(transparent)]
    Eval(#[from] nazar::eval::EvalError),
    #[error(transparent)]
    Embed(#[from] nazar::embed::EmbedError),
    #[error(transparent)]
    Model(#[from] nazar::model_file::ModelFileError),
}

#[derive(Parser)]
#[command(
    name = "nazar",
    version,
    about = "Persian sentiment analysis: lexicon features, shift handling, stacked classifiers"
)]
struct Cli {
    /// Config file with default flag values (`key = value`, `[section]`
    /// headers; command-line flags win). Falls back to $NAZAR_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment and tokenize reviews into structured JSON lines
    Preprocess(PreprocessArgs),
    /// Extract the 17 features per review into a CSV
    Featurize(FeaturizeArgs),
    /// Train a classifier on a labeled feature CSV
    Train(TrainArgs),
    /// Predict label confidences for feature rows
    Predict(PredictArgs),
    /// Score a model against labeled feature rows
    Evaluate(EvaluateArgs),
    /// Re-run the pipeline over feature subsets
    Ablate(AblateArgs),
    /// Estimate the polar-word-count probability table from a corpus
    EstimateProbs(EstimateProbsArgs),
    /// Word-vector demos: analogy query or 2-D projection
    EmbedDemo(EmbedDemoArgs),
}

fn parse_level(s: &str) -> Result<Level, String> {
    Level::parse_token(s).ok_or_else(|| format!("unknown level `{s}` (sentence | document)"))
}

fn parse_kernel(s: &str) -> Result<Kernel, String> {
    let lower = s.trim().to_ascii_lowercase();
    if lower == "linear" {
        return Ok(Kernel::Linear);
    }
    if let Some(rest) = lower.strip_prefix("rbf") {
        let gamma = match rest.strip_prefix(':') {
            Some(g) => g
                .parse::<f64>()
                .map_err(|_| format!("bad RBF gamma `{g}`"))?,
            None if rest.is_empty() => 0.5,
            _ => return Err(format!("unknown kernel `{s}`")),
        };
        return Ok(Kernel::Rbf { gamma });
    }
    Err(format!("unknown kernel `{s}` (linear | rbf[:gamma])"))
}

#[derive(Clone)]
struct HiddenWidths(Vec<usize>);

fn parse_widths(s: &str) -> Result<HiddenWidths, String> {
    let widths: Result<Vec<usize>, _> = s.split(',').map(|w| w.trim().parse()).collect();
    match widths {
        Ok(w) if !w.is_empty() && w.iter().all(|&x| x > 0) => Ok(HiddenWidths(w)),
        _ => Err(format!("bad width list `{s}` (e.g. 16 or 16,8)")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassifierKind {
    Logistic,
    Mlp,
    Svm,
    Stack,
    Ffn,
}

/// Word-list overrides shared by preprocessing and featurizing.
#[derive(Args)]
struct ListArgs {
    /// Stopword list, one token per line
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Sentence-boundary abbreviations, one per line
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    /// Emoticon table (`emoticon TAB pos|neg`)
    #[arg(long)]
    emoticons: Option<PathBuf>,
}

#[derive(Args)]
struct ResourceArgs {
    /// Triple-scheme lexicon (surface TAB pos TAB p_pos TAB p_obj TAB p_neg)
    #[arg(long)]
    lex_triple: Option<PathBuf>,
    /// Scalar-scheme lexicon (surface TAB pos TAB score)
    #[arg(long)]
    lex_scalar: Option<PathBuf>,
    /// Label-scheme lexicon (surface TAB pos TAB pos|obj|neg)
    #[arg(long)]
    lex_label: Option<PathBuf>,
    /// Probability table TSV; defaults to the shipped table
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Domain keyword list (`surface TAB pos|neg`)
    #[arg(long)]
    keywords: Option<PathBuf>,
    /// Negator/intensifier list (`surface TAB neg|add|red`)
    #[arg(long)]
    shifts: Option<PathBuf>,
    #[command(flatten)]
    lists: ListArgs,
    /// Adjacency window for negator/intensifier attachment
    #[arg(long)]
    window: Option<usize>,
    /// Use P(at least i) instead of P(exactly i)
    #[arg(long)]
    at_least_i: bool,
    /// Double the word after an elongated intensifier instead of before
    #[arg(long)]
    doubling_following: bool,
    /// Verbatim reducer arithmetic on negative scalars
    #[arg(long)]
    literal_reducer: bool,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Labeled JSONL corpus to preprocess
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Raw UTF-8 text file treated as one review (alternative to --corpus)
    #[arg(long)]
    text: Option<PathBuf>,
    /// Review id for --text input
    #[arg(long, default_value = "r1")]
    id: String,
    /// Granularity for --text input
    #[arg(long, value_parser = parse_level, default_value = "document")]
    level: Level,
    #[command(flatten)]
    lists: ListArgs,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturizeArgs {
    /// Labeled JSONL corpus
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Keep only reviews at this level
    #[arg(long, value_parser = parse_level)]
    level: Option<Level>,
    /// Run seed recorded in the output header
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled feature CSV (from `featurize`)
    #[arg(long)]
    features: PathBuf,
    /// Where to write the model file
    #[arg(long)]
    model_out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ClassifierKind::Stack)]
    classifier: ClassifierKind,
    /// Fraction of rows used for training (stratified; the rest become
    /// the model's held-out evaluation split)
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    meta_folds: Option<usize>,
    /// MLP hidden widths, comma separated
    #[arg(long, value_parser = parse_widths)]
    hidden: Option<HiddenWidths>,
    /// SVM kernel: linear | rbf[:gamma]
    #[arg(long, value_parser = parse_kernel)]
    kernel: Option<Kernel>,
    /// SVM box constraint
    #[arg(long)]
    svm_c: Option<f64>,
    /// Meta-features from the bases' own training predictions (leaky
    /// historical protocol) instead of out-of-fold predictions
    #[arg(long)]
    literal_stacking: bool,
    /// FFN depth (hidden layers)
    #[arg(long)]
    ffn_hidden_layers: Option<usize>,
    /// FFN hidden width
    #[arg(long)]
    ffn_width: Option<usize>,
    /// Historical FFN head: one output unit, squared error
    #[arg(long)]
    compat_head: bool,
    /// Granularity recorded in the model file
    #[arg(long, value_parser = parse_level, default_value = "document")]
    level: Level,
}

#[derive(Args)]
struct PredictArgs {
    /// Model file from `train`
    #[arg(long)]
    model: PathBuf,
    /// Feature CSV (labels optional)
    #[arg(long)]
    features: PathBuf,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Model file from `train`
    #[arg(long)]
    model: PathBuf,
    /// Labeled feature CSV
    #[arg(long)]
    features: PathBuf,
    /// Score every labeled row instead of the model's held-out split
    #[arg(long)]
    all: bool,
    /// Also write machine-readable key,value CSV here
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    /// Labeled JSONL corpus
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    meta_folds: Option<usize>,
    /// Named subset `name=1,3-5`; repeatable. Defaults to the standard
    /// feature-group grid
    #[arg(long)]
    subset: Vec<String>,
    /// Retrain on narrower vectors instead of zeroing excluded columns
    #[arg(long)]
    drop_columns: bool,
    /// Also write subset,level,accuracy CSV here
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateProbsArgs {
    /// Labeled JSONL corpus
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    resources: ResourceArgs,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["analogy", "project"])))]
struct EmbedDemoArgs {
    /// Word-vector file (`count dim` header, token + floats per line)
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Analogy query: A - B + C = ?
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"])]
    analogy: Option<Vec<String>>,
    /// Project vectors to 2-D (CSV token,x,y)
    #[arg(long)]
    project: bool,
    /// Comma-separated tokens to project (default: whole vocabulary)
    #[arg(long)]
    tokens: Option<String>,
    /// Output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flag/config resolution: command-line value, else config value, else
/// the built-in default.
struct Ctx {
    cfg: RunConfig,
}

impl Ctx {
    fn path(&self, flag: &Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.clone()
            .or_else(|| self.cfg.get(key).map(PathBuf::from))
    }

    fn require_path(&self, flag: &Option<PathBuf>, key: &str) -> Result<PathBuf, CliError> {
        self.path(flag, key).ok_or_else(|| {
            CliError::Data(format!("missing --{key} (set it on the command line or in the config file)"))
        })
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        match flag {
            Some(s) => Ok(s),
            None => match self.cfg.get("seed") {
                Some(v) => v
                    .parse()
                    .map_err(|_| CliError::Data(format!("config seed `{v}` is not an integer"))),
                None => Ok(0),
            },
        }
    }

    fn flag(&self, set: bool, key: &str) -> bool {
        set || matches!(self.cfg.get(key), Some("true") | Some("1") | Some("yes"))
    }
}

/// Owned feature-extraction resources (loaded files or built-in seeds).
struct LoadedResources {
    triple: Lexicon,
    scalar: Lexicon,
    label: Lexicon,
    probs: ProbabilityTable,
    keywords: DomainKeywordSet,
    shifts: ShiftSets,
    constants: ShiftConstants,
    options: FeatureOptions,
    preprocess: PreprocessConfig,
}

impl LoadedResources {
    fn features(&self) -> FeatureResources<'_> {
        FeatureResources {
            triple: &self.triple,
            scalar: &self.scalar,
            label: &self.label,
            probs: &self.probs,
            keywords: &self.keywords,
            shift_sets: &self.shifts,
            constants: self.constants,
            options: self.options,
        }
    }
}

/// Read a text file, naming the path in any error.
fn read_file(path: impl AsRef<Path>) -> Result<String, CliError> {
    let path = path.as_ref();
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Attach the offending path to a loader error.
fn at_path<T, E: Into<CliError>>(path: impl AsRef<Path>, r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Data(format!("{}: {}", path.as_ref().display(), e.into())))
}

fn build_preprocess_config(lists: &ListArgs, ctx: &Ctx) -> Result<PreprocessConfig, CliError> {
    let mut config = PreprocessConfig::default();
    if let Some(path) = ctx.path(&lists.stopwords, "stopwords") {
        config.stopwords = parse_line_list(&read_file(path)?);
    }
    if let Some(path) = ctx.path(&lists.abbreviations, "abbreviations") {
        config.abbreviations = parse_line_list(&read_file(path)?);
    }
    if let Some(path) = ctx.path(&lists.emoticons, "emoticons") {
        config.emoticons = parse_emoticon_table(&read_file(path)?)?;
    }
    Ok(config)
}

fn load_resources(args: &ResourceArgs, ctx: &Ctx) -> Result<LoadedResources, CliError> {
    let triple_path = ctx.require_path(&args.lex_triple, "lex-triple")?;
    let triple = at_path(&triple_path, load_lexicon(&triple_path, Scheme::Triple))?;
    let scalar_path = ctx.require_path(&args.lex_scalar, "lex-scalar")?;
    let scalar = at_path(&scalar_path, load_lexicon(&scalar_path, Scheme::Scalar))?;
    let label_path = ctx.require_path(&args.lex_label, "lex-label")?;
    let label = at_path(&label_path, load_lexicon(&label_path, Scheme::Label))?;
    let probs = match ctx.path(&args.probs, "probs") {
        Some(path) => at_path(&path, load_probability_table(&path))?,
        None => ProbabilityTable::default(),
    };
    let keywords = match ctx.path(&args.keywords, "keywords") {
        Some(path) => parse_keywords(&read_file(path)?)?,
        None => DomainKeywordSet::builtin(),
    };
    let shifts = match ctx.path(&args.shifts, "shifts") {
        Some(path) => at_path(&path, load_shift_sets(&path))?,
        None => ShiftSets::builtin(),
    };
    let mut options = FeatureOptions::default();
    if let Some(window) = args.window {
        options.window = window;
    }
    options.at_least_i = ctx.flag(args.at_least_i, "at-least-i");
    if ctx.flag(args.doubling_following, "doubling-following") {
        options.doubling_direction = DoublingDirection::Following;
    }
    options.literal_reducer = ctx.flag(args.literal_reducer, "literal-reducer");
    Ok(LoadedResources {
        triple,
        scalar,
        label,
        probs,
        keywords,
        shifts,
        constants: ShiftConstants::default(),
        options,
        preprocess: build_preprocess_config(&args.lists, ctx)?,
    })
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn preprocess_review(review: &Review, config: &PreprocessConfig) -> Document {
    preprocess_document(
        &review.id,
        &review.text,
        review.level,
        &IdentityResolver,
        config,
    )
    .document
}

/// Preprocesses and featurizes reviews, returning rows sorted by id.
fn featurize_reviews(
    reviews: &[Review],
    res: &LoadedResources,
) -> Vec<(String, FeatureVector, PolarityLabel)> {
    let fr = res.features();
    let mut rows: Vec<_> = reviews
        .iter()
        .map(|r| {
            let doc = preprocess_review(r, &res.preprocess);
            (r.id.clone(), extract_features(&doc, &fr), r.label)
        })
        .collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows
}

fn load_feature_rows(
    path: &PathBuf,
) -> Result<Vec<(String, FeatureVector, Option<PolarityLabel>)>, CliError> {
    let mut rows = parse_features_csv(&read_file(path)?)?;
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(rows)
}

fn labeled_rows(
    rows: Vec<(String, FeatureVector, Option<PolarityLabel>)>,
) -> Result<Vec<(String, FeatureVector, PolarityLabel)>, CliError> {
    rows.into_iter()
        .map(|(id, v, label)| {
            label
                .map(|l| (id.clone(), v, l))
                .ok_or_else(|| CliError::Data(format!("feature row `{id}` has no label")))
        })
        .collect()
}

fn run_preprocess(args: PreprocessArgs, ctx: &Ctx) -> Result<(), CliError> {
    let config = build_preprocess_config(&args.lists, ctx)?;
    let docs: Vec<Document> = match (ctx.path(&args.corpus, "corpus"), &args.text) {
        (Some(corpus), None) => {
            let mut reviews = at_path(&corpus, load_corpus(&corpus))?;
            reviews.sort_by(|a, b| a.id.cmp(&b.id));
            reviews
                .iter()
                .map(|r| preprocess_review(r, &config))
                .collect()
        }
        (None, Some(text)) => {
            let raw = read_file(text)?;
            vec![
                preprocess_document(&args.id, &raw, args.level, &IdentityResolver, &config)
                    .document,
            ]
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Data(
                "--corpus and --text are mutually exclusive".to_string(),
            ))
        }
        (None, None) => {
            return Err(CliError::Data(
                "one of --corpus or --text is required".to_string(),
            ))
        }
    };
    let mut out = String::new();
    for doc in &docs {
        out.push_str(&serde_json::to_string(doc).expect("document serialization cannot fail"));
        out.push('\n');
    }
    emit(&args.out, &out)
}

fn run_featurize(args: FeaturizeArgs, ctx: &Ctx) -> Result<(), CliError> {
    let corpus = ctx.require_path(&args.corpus, "corpus")?;
    let res = load_resources(&args.resources, ctx)?;
    let seed = ctx.seed(args.seed)?;
    let mut reviews = at_path(&corpus, load_corpus(&corpus))?;
    if let Some(level) = args.level {
        reviews.retain(|r| r.level == level);
    }
    if reviews.is_empty() {
        return Err(CliError::Data("no reviews to featurize".to_string()));
    }
    let rows = featurize_reviews(&reviews, &res);
    let mut out = format!("# seed = {seed}\n{}\n", features_csv_header());
    for (id, features, label) in &rows {
        out.push_str(&features_csv_row(id, features, Some(*label)));
        out.push('\n');
    }
    emit(&args.out, &out)
}

fn build_train_config(
    seed: u64,
    fraction: Option<f64>,
    epochs: Option<usize>,
    meta_folds: Option<usize>,
) -> TrainConfig {
    let mut cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    if let Some(f) = fraction {
        cfg.train_fraction = f;
    }
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    if let Some(m) = meta_folds {
        cfg.meta_folds = m;
    }
    cfg
}

fn run_train(args: TrainArgs, ctx: &Ctx) -> Result<(), CliError> {
    let rows = labeled_rows(load_feature_rows(&args.features)?)?;
    let seed = ctx.seed(args.seed)?;
    let mut cfg = build_train_config(seed, args.train_fraction, args.epochs, args.meta_folds);
    if let Some(HiddenWidths(w)) = args.hidden {
        cfg.hidden_widths = w;
    }
    if let Some(kernel) = args.kernel {
        cfg.kernel = kernel;
    }
    if let Some(c) = args.svm_c {
        cfg.c = c;
    }
    cfg.literal_stacking = ctx.flag(args.literal_stacking, "literal-stacking");
    let x: Vec<Vec<f64>> = rows.iter().map(|(_, v, _)| v.as_array().to_vec()).collect();
    let y: Vec<PolarityLabel> = rows.iter().map(|(_, _, l)| *l).collect();
    let (train_idx, test_idx) = split_train_test(&y, cfg.train_fraction, seed)?;
    let train_x: Vec<Vec<f64>> = train_idx.iter().map(|&i| x[i].clone()).collect();
    let train_y: Vec<PolarityLabel> = train_idx.iter().map(|&i| y[i]).collect();
    let model = match args.classifier {
        ClassifierKind::Logistic => {
            SavedClassifier::Logistic(train_logistic(&train_x, &train_y, &cfg)?)
        }
        ClassifierKind::Mlp => SavedClassifier::Mlp(train_mlp(&train_x, &train_y, &cfg)?),
        ClassifierKind::Svm => SavedClassifier::Svm(train_svm_smo(&train_x, &train_y, &cfg)?),
        ClassifierKind::Stack => SavedClassifier::Stack(train_stack(&train_x, &train_y, &cfg)?),
        ClassifierKind::Ffn => {
            let mut fcfg = FeedForwardConfig {
                seed,
                ..FeedForwardConfig::default()
            };
            if let Some(layers) = args.ffn_hidden_layers {
                fcfg.hidden_layers = layers;
            }
            if let Some(width) = args.ffn_width {
                fcfg.layer_width = width;
            }
            if let Some(epochs) = args.epochs {
                fcfg.epochs = epochs;
            }
            if ctx.flag(args.compat_head, "compat-head") {
                fcfg = fcfg.compat_head();
            }
            SavedClassifier::Ffn(train_ffn(&train_x, &train_y, &fcfg)?)
        }
    };
    let mut test_ids: Vec<String> = test_idx.iter().map(|&i| rows[i].0.clone()).collect();
    test_ids.sort();
    let file = ModelFile::new(seed, args.level, test_ids, model);
    file.save(&args.model_out)?;
    println!(
        "trained {} on {} rows ({} train / {} held out), seed {} -> {}",
        file.model.scheme(),
        rows.len(),
        train_idx.len(),
        file.test_ids.len(),
        seed,
        args.model_out.display()
    );
    Ok(())
}

fn run_predict(args: PredictArgs) -> Result<(), CliError> {
    let file = at_path(&args.model, ModelFile::load(&args.model))?;
    let rows = load_feature_rows(&args.features)?;
    if rows.is_empty() {
        return Err(CliError::Data("no feature rows to predict".to_string()));
    }
    let mut out = format!("# seed = {}\nid,p_neg,p_obj,p_pos,predicted\n", file.seed);
    for (id, features, _) in &rows {
        let conf = file.model.confidence(&features.as_array())?;
        out.push_str(&format!(
            "{id},{},{},{},{}\n",
            conf.p_neg,
            conf.p_obj,
            conf.p_pos,
            conf.predicted().as_token()
        ));
    }
    emit(&args.out, &out)
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let file = at_path(&args.model, ModelFile::load(&args.model))?;
    let rows = labeled_rows(load_feature_rows(&args.features)?)?;
    let selected: Vec<&(String, FeatureVector, PolarityLabel)> =
        if args.all || file.test_ids.is_empty() {
            rows.iter().collect()
        } else {
            let wanted: BTreeSet<&str> = file.test_ids.iter().map(String::as_str).collect();
            rows.iter().filter(|(id, _, _)| wanted.contains(id.as_str())).collect()
        };
    if selected.is_empty() {
        return Err(CliError::Data(
            "no rows to evaluate (the model's held-out ids are absent; consider --all)".to_string(),
        ));
    }
    let preds: Result<Vec<PolarityLabel>, CliError> = selected
        .iter()
        .map(|(_, v, _)| Ok(file.model.confidence(&v.as_array())?.predicted()))
        .collect();
    let golds: Vec<PolarityLabel> = selected.iter().map(|(_, _, l)| *l).collect();
    let (_, report) = score(&preds?, &golds)?;
    println!("{report}");
    println!("items      {:>9}", selected.len());
    println!("seed       {:>9}", file.seed);
    if let Some(path) = &args.csv_out {
        let csv = format!("{}seed,{}\nitems,{}\n", report.csv(), file.seed, selected.len());
        fs::write(path, csv)?;
    }
    Ok(())
}

fn default_subsets() -> Vec<AblationSubset> {
    [
        ("F1-F2", "1,2"),
        ("F3-F6", "3-6"),
        ("F7-F8", "7,8"),
        ("F9-F12", "9-12"),
        ("F13-F17", "13-17"),
        ("All", "1-17"),
    ]
    .iter()
    .map(|(name, spec)| AblationSubset {
        name: name.to_string(),
        indices: parse_indices(spec).expect("static subset specs parse"),
    })
    .collect()
}

fn run_ablate(args: AblateArgs, ctx: &Ctx) -> Result<(), CliError> {
    let corpus = ctx.require_path(&args.corpus, "corpus")?;
    let res = load_resources(&args.resources, ctx)?;
    let seed = ctx.seed(args.seed)?;
    let cfg = build_train_config(seed, args.train_fraction, args.epochs, args.meta_folds);
    let reviews = at_path(&corpus, load_corpus(&corpus))?;
    let mut data = Vec::new();
    for level in [Level::DocumentLevel, Level::SentenceLevel] {
        let group: Vec<Review> = reviews.iter().filter(|r| r.level == level).cloned().collect();
        if group.is_empty() {
            continue;
        }
        let rows = featurize_reviews(&group, &res);
        let x: Vec<Vec<f64>> = rows.iter().map(|(_, v, _)| v.as_array().to_vec()).collect();
        let y: Vec<PolarityLabel> = rows.iter().map(|(_, _, l)| *l).collect();
        data.push((level, x, y));
    }
    if data.is_empty() {
        return Err(CliError::Data("no reviews to ablate".to_string()));
    }
    let subsets: Vec<AblationSubset> = if args.subset.is_empty() {
        default_subsets()
    } else {
        args.subset
            .iter()
            .map(|spec| {
                let (name, indices) = spec.split_once('=').ok_or_else(|| {
                    CliError::Data(format!("bad --subset `{spec}` (expected name=1,3-5)"))
                })?;
                Ok(AblationSubset {
                    name: name.trim().to_string(),
                    indices: parse_indices(indices)?,
                })
            })
            .collect::<Result<_, CliError>>()?
    };
    let table = ablate(&data, &subsets, &cfg, args.drop_columns)?;
    println!("{:<10} {:<10} {:>9}", "subset", "level", "accuracy");
    for row in &table {
        println!(
            "{:<10} {:<10} {:>9.4}",
            row.subset,
            row.level.as_token(),
            row.accuracy
        );
    }
    println!("seed {seed}");
    if let Some(path) = &args.csv_out {
        fs::write(path, format!("# seed = {seed}\n{}", ablation_csv(&table)))?;
    }
    Ok(())
}

fn run_estimate_probs(args: EstimateProbsArgs, ctx: &Ctx) -> Result<(), CliError> {
    let corpus = ctx.require_path(&args.corpus, "corpus")?;
    let res = load_resources(&args.resources, ctx)?;
    let mut reviews = at_path(&corpus, load_corpus(&corpus))?;
    reviews.sort_by(|a, b| a.id.cmp(&b.id));
    let docs: Vec<(Document, PolarityLabel)> = reviews
        .iter()
        .map(|r| (preprocess_review(r, &res.preprocess), r.label))
        .collect();
    let pairs: Vec<(&Document, PolarityLabel)> = docs.iter().map(|(d, l)| (d, *l)).collect();
    let table = estimate_probability_table(&pairs, &res.features())?;
    let out = format!(
        "# estimated from {} reviews\n{}",
        reviews.len(),
        format_probability_table(&table)
    );
    emit(&args.out, &out)
}

fn run_embed_demo(args: EmbedDemoArgs, ctx: &Ctx) -> Result<(), CliError> {
    let vectors = ctx.require_path(&args.vectors, "vectors")?;
    let table = at_path(&vectors, load_vectors(&vectors))?;
    if table.skipped_rows > 0 {
        eprintln!("warning: skipped {} malformed vector rows", table.skipped_rows);
    }
    if table.count_mismatch() {
        eprintln!(
            "warning: header declares {} tokens, file has {}",
            table.declared_count,
            table.len()
        );
    }
    if let Some(query) = &args.analogy {
        let answer = analogy(&table, &query[0], &query[1], &query[2])?;
        println!("{} - {} + {} = {}", query[0], query[1], query[2], answer);
        return Ok(());
    }
    let tokens: Vec<String> = match &args.tokens {
        Some(list) => list.split(',').map(|t| t.trim().to_string()).collect(),
        None => table.tokens().map(str::to_string).collect(),
    };
    let vectors: Result<Vec<Vec<f64>>, CliError> = tokens
        .iter()
        .map(|t| {
            table
                .get(t)
                .map(<[f64]>::to_vec)
                .ok_or_else(|| CliError::Data(format!("token `{t}` not in the vector file")))
        })
        .collect();
    let coords = project_2d(&vectors?)?;
    let refs: Vec<&str> = tokens.iter().map(String::as_str).collect();
    emit(&args.out, &projection_csv(&refs, &coords))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match cli
        .config
        .or_else(|| std::env::var("NAZAR_CONFIG").ok().map(PathBuf::from))
    {
        Some(path) => RunConfig::load(path).map_err(CliError::Data)?,
        None => RunConfig::default(),
    };
    let ctx = Ctx { cfg };
    match cli.command {
        Command::Preprocess(args) => run_preprocess(args, &ctx),
        Command::Featurize(args) => run_featurize(args, &ctx),
        Command::Train(args) => run_train(args, &ctx),
        Command::Predict(args) => run_predict(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Ablate(args) => run_ablate(args, &ctx),
        Command::EstimateProbs(args) => run_estimate_probs(args, &ctx),
        Command::EmbedDemo(args) => run_embed_demo(args, &ctx),
    }
}

/// Die quietly on a closed pipe (`nazar … | head`) instead of panicking.
#[cfg(unix)]
fn reset_sigpipe() {
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

#[cfg(not(unix))]
fn reset_sigpipe() {}

fn main() {
    reset_sigpipe();
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(e) => {
            let usage = !matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            if usage {
                1
            } else {
                0
            }
        }
    };
    std::process::exit(code);
}
