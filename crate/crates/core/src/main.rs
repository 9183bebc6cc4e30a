use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use augbow::encoding::{read_documents, write_documents};
use augbow::learn::{
    cluster_quality, grid_search_with_splits, kmeans, mcnemar, roc_auc, roc_curve, tfidf_fit,
    EvalReport, LearnError, Splits,
};
use augbow::regexgen::{augment_documents, RegexError, RegexFeature};
use augbow::seeds::{derive_seed, stream_rng, Stream};
use augbow::synth::{self, SynthSpec};
use augbow::temporal::{collect_durations, DurationFamily};
use augbow::{
    evaluate_loocv, parse_corpus, write_corpus, Activity, BinningModel, ClampPolicy, Corpus,
    EncodingError, Error, FeatureConfig, FittedFeatures, FoldFit, PyramidBase, RegexPolicy, Scheme,
    TemporalError,
};

#[derive(Parser)]
#[command(name = "augbow", version, about = "Augmented bag-of-words features for event sequences")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Multiplier applied to every timestamp on input.
    #[arg(long, global = true, default_value_t = 1.0)]
    time_scale: f64,
    /// Reject overlapping events instead of clamping negative gaps to 0.
    #[arg(long, global = true)]
    strict_time: bool,
    /// Worker threads for folds and grid points.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labelled corpus.
    Gen(GenArgs),
    /// Fit an equal-frequency binning model.
    Bins(BinsArgs),
    /// Encode a corpus into documents.
    Encode(EncodeArgs),
    /// Sample regex features, optionally augmenting documents.
    Regex(RegexArgs),
    /// k-NN leave-one-out classification.
    Classify(ClassifyArgs),
    /// Spherical k-means clustering.
    Cluster(ClusterArgs),
    /// Select (N, n) on a holdout half and evaluate on the other half.
    Gridsearch(GridArgs),
    /// Compare two prediction files.
    Mcnemar(McNemarArgs),
    /// Summarize a prediction file.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Bow,
    BowTime,
    Interspersed,
    Cumulative,
    Pyramid,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Bow => Scheme::Bow,
            SchemeArg::BowTime => Scheme::BowTime,
            SchemeArg::Interspersed => Scheme::Interspersed,
            SchemeArg::Cumulative => Scheme::Cumulative,
            SchemeArg::Pyramid => Scheme::Pyramid,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseArg {
    Interspersed,
    Cumulative,
}

#[derive(Args, Clone)]
struct Input {
    /// Corpus in JSON Lines (`-` for stdin).
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
}

#[derive(Args, Clone)]
struct FeatureArgs {
    #[arg(long, value_enum, default_value = "interspersed")]
    scheme: SchemeArg,
    /// Number of temporal bins.
    #[arg(long = "N", default_value_t = 4)]
    bins: usize,
    /// Gram size.
    #[arg(long = "n", default_value_t = 2)]
    gram: usize,
    /// Base scheme of the pyramid.
    #[arg(long, value_enum, default_value = "interspersed")]
    base: BaseArg,
    #[command(flatten)]
    regex: RegexFlags,
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct RegexFlags {
    /// Add exactly this many regex features.
    #[arg(long)]
    regex_count: Option<usize>,
    /// Grow the base vocabulary by this percentage of regex features.
    #[arg(long)]
    regex_pct: Option<f64>,
}

impl RegexFlags {
    fn policy(&self) -> RegexPolicy {
        match (self.regex_count, self.regex_pct) {
            (Some(k), _) => RegexPolicy::Count(k),
            (_, Some(p)) => RegexPolicy::Percent(p),
            _ => RegexPolicy::None,
        }
    }
}

impl FeatureArgs {
    fn config(&self, clamp: ClampPolicy) -> FeatureConfig {
        let mut c = FeatureConfig::new(self.scheme.into(), self.bins, self.gram)
            .with_regex(self.regex.policy());
        c.base = match self.base {
            BaseArg::Interspersed => PyramidBase::Interspersed,
            BaseArg::Cumulative => PyramidBase::Cumulative,
        };
        c.clamp = clamp;
        c
    }
}

#[derive(Args)]
struct GenArgs {
    /// Built-in scenario: parking or anomaly.
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// Generator spec file `{"classes": [...]}`.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// Consecutive gaps.
    Tau,
    /// Spans over `--window` consecutive events.
    Pi,
}

#[derive(Args)]
struct BinsArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long = "N", default_value_t = 4)]
    bins: usize,
    #[arg(long, value_enum, default_value = "tau")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    window: usize,
    /// Use letters A, B, ... as bin labels.
    #[arg(long)]
    letters: bool,
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    features: FeatureArgs,
    /// Documents in JSON Lines.
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
    /// Also write the fitted models and features as JSON.
    #[arg(long)]
    fitted: Option<PathBuf>,
}

#[derive(Args)]
struct RegexArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    features: FeatureArgs,
    /// Accepted features as JSON.
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
    /// Documents to augment with the sampled features.
    #[arg(long, requires = "augmented")]
    docs: Option<PathBuf>,
    #[arg(long)]
    augmented: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    features: FeatureArgs,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Split file; evaluation runs on its evaluation half. Created from
    /// `--seed` when missing.
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Prediction file.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Confusion matrix CSV.
    #[arg(long)]
    confusion: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    features: FeatureArgs,
    /// Number of clusters (default: number of labels).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "interspersed")]
    scheme: SchemeArg,
    /// Bin counts: `3`, `1..5` (inclusive) or `1,2,4`.
    #[arg(long = "N", default_value = "1..5", value_parser = parse_range)]
    bins: GridRange,
    /// Gram sizes, same syntax as `--N`.
    #[arg(long = "n", default_value = "1..4", value_parser = parse_range)]
    gram: GridRange,
    #[arg(long, value_enum, default_value = "interspersed")]
    base: BaseArg,
    #[command(flatten)]
    regex: RegexFlags,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Holdout accuracy table as CSV.
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
    /// Full outcome (table, choice, final evaluation) as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Prediction file of the final evaluation.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct McNemarArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct ReportArgs {
    /// Prediction file.
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    confusion: Option<PathBuf>,
    /// Write an ROC sweep for this positive class as CSV.
    #[arg(long, requires = "roc_out")]
    roc: Option<String>,
    #[arg(long)]
    roc_out: Option<PathBuf>,
    #[arg(short = 'o', long = "output", default_value = "-")]
    output: PathBuf,
}

#[derive(Debug, Clone)]
struct GridRange(Vec<usize>);

/// Any range string accepted as `--N` / `--n`.
fn parse_range(s: &str) -> Result<GridRange, String> {
    let bad = |_| format!("invalid range {s:?}; use 3, 1..5 or 1,2,4");
    let values: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi): (usize, usize) = (lo.trim().parse().map_err(bad)?, hi.trim().parse().map_err(bad)?);
        (lo..=hi).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse::<usize>().map_err(bad))
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(format!("range {s:?} is empty"));
    }
    Ok(GridRange(values))
}

#[derive(Debug, Serialize, Deserialize)]
struct Prediction {
    id: String,
    truth: String,
    predicted: String,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionFile {
    scheme: Scheme,
    config: FeatureConfig,
    k: usize,
    accuracy: f64,
    predictions: Vec<Prediction>,
}

#[derive(Serialize)]
struct Assignment<'a> {
    id: &'a str,
    label: Option<&'a str>,
    cluster: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Lib(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Lib(e.into())
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        Self::Lib(e.into())
    }
}

impl CliError {
    fn is_internal(&self) -> bool {
        matches!(
            self,
            Self::Lib(Error::Learn(LearnError::LengthMismatch { .. }))
                | Self::Lib(Error::Regex(RegexError::Misaligned(_)))
                | Self::Lib(Error::Encoding(EncodingError::MissingLevelModel(_)))
        )
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn open(path: &Path) -> Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(file)))
}

fn create(path: &Path) -> Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    let file = File::create(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
    Ok(Box::new(BufWriter::new(file)))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    serde_json::from_reader(open(path)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

struct Ctx {
    seed: u64,
    time_scale: f64,
    clamp: ClampPolicy,
}

impl Ctx {
    fn corpus(&self, input: &Input) -> Result<Corpus> {
        parse_corpus(open(&input.input)?, self.time_scale)
            .map_err(|e| CliError::Input(format!("{}: {e}", input.input.display())))
    }
}

/// Loads a split file, or draws one from the seed and writes it when the
/// file does not exist yet.
fn load_splits(corpus: &Corpus, path: Option<&Path>, seed: u64) -> Result<Splits> {
    match path {
        Some(p) if p.exists() => read_json(p),
        Some(p) => {
            let s = Splits::from_seed(corpus, seed)?;
            write_json(p, &s)?;
            Ok(s)
        }
        None => Ok(Splits::from_seed(corpus, seed)?),
    }
}

fn select<'a>(corpus: &'a Corpus, ids: &[String]) -> Result<Vec<&'a Activity>> {
    ids.iter()
        .map(|id| {
            corpus
                .get(id)
                .ok_or_else(|| CliError::Input(format!("split refers to unknown activity {id:?}")))
        })
        .collect()
}

fn cmd_gen(ctx: &Ctx, args: &GenArgs) -> Result<()> {
    let spec: SynthSpec = match (&args.preset, &args.spec) {
        (Some(name), _) => synth::preset(name).ok_or_else(|| {
            CliError::Input(format!(
                "unknown preset {name:?}; available: {}",
                synth::PRESETS.join(", ")
            ))
        })?,
        (None, Some(path)) => read_json(path)?,
        (None, None) => return Err(CliError::Input("give --preset or --spec".into())),
    };
    let corpus: Corpus = synth::generate(&spec.classes, &mut stream_rng(ctx.seed, Stream::Datagen))
        .map_err(Error::from)?;
    let mut w = create(&args.output)?;
    write_corpus(&corpus, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_bins(ctx: &Ctx, args: &BinsArgs) -> Result<()> {
    let corpus = ctx.corpus(&args.input)?;
    let family = match args.family {
        FamilyArg::Tau => DurationFamily::TauConsecutive,
        FamilyArg::Pi => DurationFamily::PiWindow(args.window),
    };
    let durations = collect_durations(corpus.activities(), family, ctx.clamp).map_err(Error::from)?;
    let mut model = BinningModel::fit(&durations, args.bins).map_err(Error::from)?;
    if args.letters {
        model = model.with_display_aliases().map_err(Error::from)?;
    }
    model
        .ensure_disjoint(corpus.vocabulary())
        .map_err(Error::from)?;
    if model.n() < args.bins {
        eprintln!(
            "warning: tied durations merged {} requested bins into {}",
            args.bins,
            model.n()
        );
    }
    write_json(&args.output, &model)
}

fn fit_all(ctx: &Ctx, corpus: &Corpus, features: &FeatureArgs) -> Result<FittedFeatures> {
    let refs: Vec<&Activity> = corpus.activities().iter().collect();
    let config = features.config(ctx.clamp);
    let fitted = FittedFeatures::fit(&refs, &config, &mut stream_rng(ctx.seed, Stream::Regex))?;
    for w in &fitted.warnings {
        eprintln!("warning: {w}");
    }
    Ok(fitted)
}

fn cmd_encode(ctx: &Ctx, args: &EncodeArgs) -> Result<()> {
    let corpus = ctx.corpus(&args.input)?;
    let fitted = fit_all(ctx, &corpus, &args.features)?;
    let refs: Vec<&Activity> = corpus.activities().iter().collect();
    let docs = fitted.encode_all(&refs)?;
    let mut w = create(&args.output)?;
    write_documents(&docs, &mut w)?;
    w.flush()?;
    if let Some(path) = &args.fitted {
        write_json(path, &fitted)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FeatureList<'a> {
    names: Vec<&'a str>,
    features: &'a [RegexFeature],
}

fn cmd_regex(ctx: &Ctx, args: &RegexArgs) -> Result<()> {
    let corpus = ctx.corpus(&args.input)?;
    let mut features = args.features.clone();
    if features.regex.policy() == RegexPolicy::None {
        features.regex.regex_pct = Some(20.0);
    }
    let fitted = fit_all(ctx, &corpus, &features)?;
    let list = FeatureList {
        names: fitted.features.iter().map(RegexFeature::canonical_name).collect(),
        features: &fitted.features,
    };
    write_json(&args.output, &list)?;
    if let (Some(docs_path), Some(out)) = (&args.docs, &args.augmented) {
        let docs = read_documents(open(docs_path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", docs_path.display())))?;
        let mut seqs = BTreeMap::new();
        for doc in &docs {
            let activity = corpus.get(&doc.id).ok_or_else(|| {
                CliError::Input(format!("document {:?} is not in the corpus", doc.id))
            })?;
            seqs.insert(doc.id.clone(), fitted.sequence(activity)?);
        }
        let augmented = augment_documents(&docs, &fitted.features, &seqs).map_err(Error::from)?;
        let mut w = create(out)?;
        write_documents(&augmented, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn prediction_file(
    config: FeatureConfig,
    k: usize,
    eval: &augbow::Evaluation,
) -> PredictionFile {
    PredictionFile {
        scheme: config.scheme,
        config,
        k,
        accuracy: eval.report.accuracy,
        predictions: (0..eval.ids.len())
            .map(|i| Prediction {
                id: eval.ids[i].clone(),
                truth: eval.truth[i].clone(),
                predicted: eval.predictions[i].clone(),
                score: eval.top_similarity[i],
            })
            .collect(),
    }
}

fn cmd_classify(ctx: &Ctx, args: &ClassifyArgs) -> Result<()> {
    let corpus = ctx.corpus(&args.input)?;
    let rows: Vec<&Activity> = match &args.splits {
        Some(path) => {
            let splits = load_splits(&corpus, Some(path), ctx.seed)?;
            select(&corpus, &splits.evaluation)?
        }
        None => corpus.activities().iter().collect(),
    };
    let config = args.features.config(ctx.clamp);
    let eval = evaluate_loocv(
        &rows,
        &config,
        args.k,
        FoldFit::PerFold,
        derive_seed(ctx.seed, Stream::Regex),
    )?;
    for w in &eval.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", eval.report.to_text());
    if let Some(path) = &args.output {
        write_json(path, &prediction_file(config, args.k, &eval))?;
    }
    if let Some(path) = &args.confusion {
        write_text(path, &eval.report.confusion_csv())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ClusterOutput<'a> {
    k: usize,
    objective: f64,
    iterations: usize,
    quality: Option<augbow::learn::ClusterQuality>,
    assignments: Vec<Assignment<'a>>,
}

fn cmd_cluster(ctx: &Ctx, args: &ClusterArgs) -> Result<()> {
    let corpus = ctx.corpus(&args.input)?;
    let fitted = fit_all(ctx, &corpus, &args.features)?;
    let refs: Vec<&Activity> = corpus.activities().iter().collect();
    let matrix = tfidf_fit::<f64>(&fitted.encode_all(&refs)?);
    let labels: Vec<Option<&str>> = corpus.labels();
    let distinct = labels.iter().flatten().collect::<std::collections::BTreeSet<_>>().len();
    let k = args.k.unwrap_or(distinct.max(1));
    let result = kmeans(&matrix, k, &mut stream_rng(ctx.seed, Stream::Kmeans), args.restarts)?;
    let quality = if labels.iter().all(Option::is_some) && labels.len() >= 2 {
        let truth: Vec<&str> = labels.iter().map(|l| l.unwrap_or_default()).collect();
        Some(cluster_quality(&result.assignment, &truth)?)
    } else {
        None
    };
    if let Some(q) = &quality {
        eprintln!("RI {:.4}  ARI {:.4}  NMI {:.4}", q.ri, q.ari, q.nmi);
    }
    let out = ClusterOutput {
        k,
        objective: result.objective,
        iterations: result.iterations,
        quality,
        assignments: corpus
            .activities()
            .iter()
            .zip(&result.assignment)
            .map(|(a, &cluster)| Assignment {
                id: &a.id,
                label: a.label.as_deref(),
                cluster,
            })
            .collect(),
    };
    write_json(&args.output, &out)
}

fn cmd_gridsearch(ctx: &Ctx, args: &GridArgs) -> Result<()> {
    let corpus = ctx.corpus(&args.input)?;
    let splits = load_splits(&corpus, args.splits.as_deref(), ctx.seed)?;
    let features = FeatureArgs {
        scheme: args.scheme,
        bins: 1,
        gram: 1,
        base: args.base,
        regex: args.regex.clone(),
    };
    let template = features.config(ctx.clamp);
    let outcome = grid_search_with_splits(
        &corpus, &splits, &template, &args.bins.0, &args.gram.0, args.k, ctx.seed,
    )?;
    for w in &outcome.evaluation.warnings {
        eprintln!("warning: {w}");
    }
    write_text(&args.output, &outcome.table_csv())?;
    eprintln!(
        "best N={} n={} holdout accuracy {:.4}; evaluation accuracy {:.4}",
        outcome.best.bins, outcome.best.gram, outcome.best.accuracy, outcome.evaluation.report.accuracy
    );
    if let Some(path) = &args.report {
        write_json(path, &outcome)?;
    }
    if let Some(path) = &args.predictions {
        let config = FeatureConfig {
            bins: outcome.best.bins,
            gram: outcome.best.gram,
            ..template
        };
        write_json(path, &prediction_file(config, args.k, &outcome.evaluation))?;
    }
    Ok(())
}

fn cmd_mcnemar(args: &McNemarArgs) -> Result<()> {
    let a: PredictionFile = read_json(&args.a)?;
    let b: PredictionFile = read_json(&args.b)?;
    let by_id: BTreeMap<&str, &Prediction> =
        b.predictions.iter().map(|p| (p.id.as_str(), p)).collect();
    if by_id.len() != a.predictions.len() {
        return Err(CliError::Input(
            "prediction files cover different activities".into(),
        ));
    }
    let (mut pa, mut pb, mut truth) = (Vec::new(), Vec::new(), Vec::new());
    for p in &a.predictions {
        let q = by_id.get(p.id.as_str()).ok_or_else(|| {
            CliError::Input(format!("activity {:?} missing from {}", p.id, args.b.display()))
        })?;
        if q.truth != p.truth {
            return Err(CliError::Input(format!("activity {:?} has conflicting truth labels", p.id)));
        }
        pa.push(p.predicted.as_str());
        pb.push(q.predicted.as_str());
        truth.push(p.truth.as_str());
    }
    let result = mcnemar(&pa, &pb, &truth)?;
    println!(
        "b={} c={} chi2={:.6} p={:.6}{}",
        result.b,
        result.c,
        result.chi2,
        result.p,
        if result.significant(0.05) { " (significant at 0.05)" } else { "" }
    );
    if let Some(path) = &args.output {
        write_json(path, &result)?;
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let file: PredictionFile = read_json(&args.input)?;
    let truth: Vec<&str> = file.predictions.iter().map(|p| p.truth.as_str()).collect();
    let pred: Vec<&str> = file.predictions.iter().map(|p| p.predicted.as_str()).collect();
    let report = EvalReport::from_predictions(&truth, &pred);
    match args.format {
        Format::Text => write_text(&args.output, &report.to_text())?,
        Format::Json => write_json(&args.output, &report)?,
    }
    if let Some(path) = &args.confusion {
        write_text(path, &report.confusion_csv())?;
    }
    if let (Some(positive), Some(path)) = (&args.roc, &args.roc_out) {
        if !report.classes.contains(positive) {
            return Err(CliError::Input(format!("class {positive:?} does not occur")));
        }
        let scores: Vec<f64> = file.predictions.iter().map(|p| p.score).collect();
        let points = roc_curve(&truth, &pred, &scores, positive);
        let mut csv = String::from("threshold,fpr,tpr\n");
        for p in &points {
            csv.push_str(&format!("{},{:.6},{:.6}\n", p.threshold, p.fpr, p.tpr));
        }
        write_text(path, &csv)?;
        eprintln!("AUC {:.4}", roc_auc(&points));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build_global()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    let ctx = Ctx {
        seed: cli.seed,
        time_scale: cli.time_scale,
        clamp: if cli.strict_time {
            ClampPolicy::Strict
        } else {
            ClampPolicy::Clamp
        },
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a),
        Command::Bins(a) => cmd_bins(&ctx, a),
        Command::Encode(a) => cmd_encode(&ctx, a),
        Command::Regex(a) => cmd_regex(&ctx, a),
        Command::Classify(a) => cmd_classify(&ctx, a),
        Command::Cluster(a) => cmd_cluster(&ctx, a),
        Command::Gridsearch(a) => cmd_gridsearch(&ctx, a),
        Command::Mcnemar(a) => cmd_mcnemar(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Lib(Error::Temporal(TemporalError::NegativeGap { .. })) = e {
                eprintln!("hint: drop --strict-time to clamp overlapping events to zero gaps");
            }
            if e.is_internal() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
