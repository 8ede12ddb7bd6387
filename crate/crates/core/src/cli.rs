//! The `minkpp` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
//! Every subcommand prints a one-line summary on stdout; outputs are
//! written atomically (temp file in the target directory, then rename).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::detectors::score_dataset;
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, write_roc_csv};
use crate::ingestion::{parse_records, write_records, Parsed, Severity};
use crate::online::{online_scan, DEFAULT_WINDOW};
use crate::sweep::{sweep, write_sweep_csv};
use crate::toy_lm::{make_membership_benchmark, BenchmarkConfig, NGramConfig, NGramModel};
use crate::types::{
    DecisionRule, DetectorConfig, Label, Method, Mode, RefCombine, ScoredExample, Variant,
    DEFAULT_K_PERCENT, DEFAULT_SIGMA_FLOOR,
};

pub const SCORES_SCHEMA: &str = "mia-scores/v1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "minkpp",
    version,
    about = "Pre-training data detection with Min-K%++ and baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score every record of a mia-stats/v1 file.
    Score(ScoreArgs),
    /// Compute AUROC, TPR at fixed FPR and the ROC curve from a scores file.
    Eval(EvalArgs),
    /// Evaluate a grid of k values and Min-K%++ variants.
    Sweep(SweepArgs),
    /// Sliding-window detection over each record.
    Online(OnlineArgs),
    /// Byte-level n-gram model utilities.
    #[command(name = "toy-lm", subcommand)]
    ToyLm(ToyLmCommand),
    /// Check a mia-stats/v1 file and print diagnostics as JSON.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Loss,
    Zlib,
    Ref,
    Lowercase,
    Neighbor,
    Mink,
    Minkpp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Loss => Method::Loss,
            MethodArg::Zlib => Method::Zlib,
            MethodArg::Ref => Method::Ref,
            MethodArg::Lowercase => Method::Lowercase,
            MethodArg::Neighbor => Method::Neighbor,
            MethodArg::Mink => Method::Mink,
            MethodArg::Minkpp => Method::Minkpp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Raw,
    SubMu,
    DivSigma,
    Full,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Raw => Variant::Raw,
            VariantArg::SubMu => Variant::SubMu,
            VariantArg::DivSigma => Variant::DivSigma,
            VariantArg::Full => Variant::Full,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CombineArg {
    Difference,
    Ratio,
}

#[derive(Args)]
struct DetectorArgs {
    #[arg(long, value_enum, default_value = "minkpp")]
    method: MethodArg,
    /// Percentage of lowest-scoring positions averaged by mink/minkpp.
    #[arg(long, default_value_t = DEFAULT_K_PERCENT)]
    k: f64,
    #[arg(long, value_enum, default_value = "full")]
    variant: VariantArg,
    #[arg(long, default_value_t = DEFAULT_SIGMA_FLOOR)]
    sigma_floor: f64,
    /// Reference entry used by ref, lowercase and neighbor.
    #[arg(long)]
    ref_name: Option<String>,
    #[arg(long, value_enum, default_value = "difference")]
    ref_combine: CombineArg,
}

impl DetectorArgs {
    fn config(&self) -> DetectorConfig {
        let mut c = DetectorConfig::new(self.method.into());
        c.k_percent = self.k;
        c.variant = self.variant.into();
        c.sigma_floor = self.sigma_floor;
        c.reference_name = self.ref_name.clone();
        c.ref_combine = match self.ref_combine {
            CombineArg::Difference => RefCombine::Difference,
            CombineArg::Ratio => RefCombine::Ratio,
        };
        c
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    detector: DetectorArgs,
    #[arg(long)]
    output: PathBuf,
    /// Skip bad lines and records instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    scores: PathBuf,
    /// FPR targets for TPR@FPR.
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    fpr: Vec<f64>,
    #[arg(long)]
    roc_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "minkpp")]
    method: MethodArg,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "10,20,30,40,50,60,70,80,90,100"
    )]
    k_grid: Vec<f64>,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "raw,sub-mu,div-sigma,full"
    )]
    variants: Vec<VariantArg>,
    #[arg(long, default_value_t = DEFAULT_SIGMA_FLOOR)]
    sigma_floor: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    fpr: Vec<f64>,
    /// CSV with one row per (variant, k).
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct OnlineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Windows scoring at or above this are flagged as member.
    #[arg(long, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    lenient: bool,
}

#[derive(Subcommand)]
enum ToyLmCommand {
    /// Train a model (on the bundled corpus's training split by default).
    Train(TrainArgs),
    /// Per-position statistics of a text file as one mia-stats/v1 record.
    Stats(StatsArgs),
    /// Labeled member/nonmember dataset from the bundled corpus.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value_t = crate::toy_lm::DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = crate::toy_lm::DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Args)]
struct TrainArgs {
    /// Training text; the bundled corpus's training split when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    text: PathBuf,
    /// Record id; the file stem when omitted.
    #[arg(long)]
    id: Option<String>,
    #[arg(long, default_value = "unknown")]
    label: Label,
    /// Include full log-probability vectors.
    #[arg(long)]
    vectors: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Target model; trained on the bundled training split when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    #[command(flatten)]
    train: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    snippet_len: usize,
    #[arg(long, default_value_t = 200)]
    n_snippets: usize,
    #[arg(long)]
    vectors: bool,
    /// Order of a reference model trained on the same split (adds `refs.ref`).
    #[arg(long)]
    ref_order: Option<usize>,
    /// Add `refs.lowercase`.
    #[arg(long)]
    lowercase: bool,
    /// Number of perturbed neighbors per snippet (adds `refs.neighbors`).
    #[arg(long, default_value_t = 0)]
    neighbors: usize,
    #[arg(long)]
    output: PathBuf,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                EXIT_DATA
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Score(a) => cmd_score(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Online(a) => cmd_online(a),
        Command::ToyLm(ToyLmCommand::Train(a)) => cmd_train(a),
        Command::ToyLm(ToyLmCommand::Stats(a)) => cmd_stats(a),
        Command::ToyLm(ToyLmCommand::Benchmark(a)) => cmd_benchmark(a),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn mode(lenient: bool) -> Mode {
    if lenient {
        Mode::Lenient
    } else {
        Mode::Strict
    }
}

fn read_stats(path: &Path, mode: Mode) -> Result<Parsed> {
    let parsed = parse_records(BufReader::new(File::open(path)?), mode)?;
    for d in &parsed.diagnostics {
        log::warn!("{}:{}: {}", path.display(), d.line, d.message);
    }
    Ok(parsed)
}

/// Writes through a temp file in the same directory, then renames it into place.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ScoresHeader {
    schema: String,
    tool_version: String,
    config: DetectorConfig,
}

fn cmd_score(a: ScoreArgs) -> Result<String> {
    let config = a.detector.config();
    config.check()?;
    let mode = mode(a.lenient);
    let parsed = read_stats(&a.input, mode)?;
    let out = score_dataset(&parsed.records, &config, mode)?;
    let header = ScoresHeader {
        schema: SCORES_SCHEMA.to_owned(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        config,
    };
    write_atomic(&a.output, |w| {
        serde_json::to_writer(&mut *w, &header)?;
        writeln!(w)?;
        for s in &out.scored {
            serde_json::to_writer(&mut *w, s)?;
            writeln!(w)?;
        }
        Ok(())
    })?;
    let skipped = out.skipped.len() + count_errors(&parsed);
    Ok(format!(
        "scored {} records with {} ({} skipped) -> {}",
        out.scored.len(),
        header.config.method,
        skipped,
        a.output.display()
    ))
}

fn count_errors(parsed: &Parsed) -> usize {
    parsed
        .diagnostics
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .count()
}

fn read_scores(path: &Path) -> Result<(ScoresHeader, Vec<ScoredExample>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let first = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::MalformedLine {
            line: 1,
            reason: "empty scores file".into(),
        })?;
    let header: ScoresHeader = serde_json::from_str(&first).map_err(|e| Error::MalformedLine {
        line: 1,
        reason: format!("bad header: {e}"),
    })?;
    if header.schema != SCORES_SCHEMA {
        return Err(Error::SchemaVersionMismatch {
            line: 1,
            found: header.schema,
            expected: SCORES_SCHEMA,
        });
    }
    let mut scored = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: ScoredExample = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: i + 2,
            reason: e.to_string(),
        })?;
        scored.push(s);
    }
    Ok((header, scored))
}

fn cmd_eval(a: EvalArgs) -> Result<String> {
    let (header, scored) = read_scores(&a.scores)?;
    let report = evaluate(&scored, &a.fpr, Some(&header.config))?;
    if let Some(path) = &a.roc_out {
        write_atomic(path, |w| Ok(write_roc_csv(&report.roc_points, w)?))?;
    }
    if let Some(path) = &a.report_out {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)?;
            writeln!(w)?;
            Ok(())
        })?;
    }
    let tprs: Vec<String> = report
        .tpr_at_fpr
        .iter()
        .map(|t| format!("TPR@{}={:.4}", t.fpr, t.tpr))
        .collect();
    Ok(format!(
        "AUROC={:.4} {} (n_pos={}, n_neg={}, n_unknown={})",
        report.auroc,
        tprs.join(" "),
        report.n_pos,
        report.n_neg,
        report.n_unknown
    ))
}

fn cmd_sweep(a: SweepArgs) -> Result<String> {
    let parsed = read_stats(&a.input, mode(a.lenient))?;
    let variants: Vec<Variant> = a.variants.iter().map(|&v| v.into()).collect();
    let rows = sweep(
        &parsed.records,
        a.method.into(),
        &a.k_grid,
        &variants,
        a.sigma_floor,
        &a.fpr,
    )?;
    write_atomic(&a.output, |w| Ok(write_sweep_csv(&rows, w)?))?;
    let best = rows
        .iter()
        .max_by(|x, y| x.auroc.total_cmp(&y.auroc))
        .map(|r| {
            format!(
                "best AUROC={:.4} at k={} variant={}",
                r.auroc,
                r.k_percent,
                r.variant.map_or("-", Variant::as_str)
            )
        })
        .unwrap_or_default();
    Ok(format!(
        "{} grid cells -> {}; {best}",
        rows.len(),
        a.output.display()
    ))
}

fn cmd_online(a: OnlineArgs) -> Result<String> {
    let config = a.detector.config();
    let parsed = read_stats(&a.input, mode(a.lenient))?;
    let rule = DecisionRule::new(a.threshold);
    let mut verdicts = Vec::new();
    for record in &parsed.records {
        verdicts.extend(online_scan(record, a.window, &config, rule)?);
    }
    write_atomic(&a.output, |w| {
        for v in &verdicts {
            serde_json::to_writer(&mut *w, v)?;
            writeln!(w)?;
        }
        Ok(())
    })?;
    let flagged = verdicts.iter().filter(|v| v.decision == 1).count();
    Ok(format!(
        "{} windows over {} records, {} flagged as member -> {}",
        verdicts.len(),
        parsed.records.len(),
        flagged,
        a.output.display()
    ))
}

fn train_model(corpus: &[u8], args: &ModelArgs) -> Result<NGramModel> {
    NGramModel::train(corpus, &NGramConfig::new(args.order, args.alpha))
}

fn save_model(model: &NGramModel, path: &Path) -> Result<()> {
    write_atomic(path, |w| model.save(w))
}

fn load_model(path: &Path) -> Result<NGramModel> {
    NGramModel::load(BufReader::new(File::open(path)?))
}

fn cmd_train(a: TrainArgs) -> Result<String> {
    let owned;
    let corpus: &[u8] = match &a.corpus {
        Some(p) => {
            owned = std::fs::read(p)?;
            &owned
        }
        None => corpus::split().0,
    };
    let model = train_model(corpus, &a.model)?;
    save_model(&model, &a.output)?;
    Ok(format!(
        "trained order-{} model on {} bytes (vocab {}) -> {}",
        model.order(),
        corpus.len(),
        model.vocab_size(),
        a.output.display()
    ))
}

fn cmd_stats(a: StatsArgs) -> Result<String> {
    let model = load_model(&a.model)?;
    let text = std::fs::read(&a.text)?;
    let id = a.id.clone().unwrap_or_else(|| {
        a.text
            .file_stem()
            .map_or_else(|| "text".to_owned(), |s| s.to_string_lossy().into_owned())
    });
    let mut record = model.record_for(id, a.label, &text, a.vectors)?;
    if std::str::from_utf8(&text).is_err() {
        record.text_bytes = None;
    }
    write_atomic(&a.output, |w| {
        write_records(std::slice::from_ref(&record), w).map(drop)
    })?;
    Ok(format!(
        "{} positions, mean NLL {:.4} -> {}",
        record.len(),
        record.mean_nll(),
        a.output.display()
    ))
}

fn cmd_benchmark(a: BenchmarkArgs) -> Result<String> {
    let (train, holdout) = corpus::split();
    let model = match &a.model {
        Some(p) => load_model(p)?,
        None => train_model(train, &a.train)?,
    };
    let reference = a
        .ref_order
        .map(|order| NGramModel::train(train, &NGramConfig::new(order, a.train.alpha)))
        .transpose()?;
    let config = BenchmarkConfig {
        snippet_len: a.snippet_len,
        n_snippets: a.n_snippets,
        seed: a.seed,
        emit_vectors: a.vectors,
        lowercase: a.lowercase,
        neighbors: a.neighbors,
        ..BenchmarkConfig::default()
    };
    let records = make_membership_benchmark(&model, train, holdout, &config, reference.as_ref())?;
    write_atomic(&a.output, |w| write_records(&records, w).map(drop))?;
    Ok(format!(
        "{} records ({} member, {} nonmember) -> {}",
        records.len(),
        a.n_snippets,
        a.n_snippets,
        a.output.display()
    ))
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    ok: bool,
    records: usize,
    diagnostics: &'a [crate::ingestion::Diagnostic],
}

fn cmd_validate(a: ValidateArgs) -> Result<String> {
    let mode = mode(a.lenient);
    let file = BufReader::new(File::open(&a.input)?);
    match parse_records(file, mode) {
        Ok(parsed) => {
            let report = ValidationReport {
                ok: count_errors(&parsed) == 0,
                records: parsed.records.len(),
                diagnostics: &parsed.diagnostics,
            };
            let json = serde_json::to_string(&report)?;
            if report.ok {
                Ok(json)
            } else {
                println!("{json}");
                Err(Error::InvalidRecord {
                    id: a.input.display().to_string(),
                    reason: format!("{} invalid line(s)", count_errors(&parsed)),
                })
            }
        }
        Err(e) => {
            let line = match &e {
                Error::MalformedLine { line, .. }
                | Error::LengthMismatch { line, .. }
                | Error::SchemaVersionMismatch { line, .. } => *line,
                _ => 0,
            };
            let diagnostics = [crate::ingestion::Diagnostic {
                line,
                severity: Severity::Error,
                message: e.to_string(),
            }];
            let report = ValidationReport {
                ok: false,
                records: 0,
                diagnostics: &diagnostics,
            };
            let _ = writeln!(io::stdout(), "{}", serde_json::to_string(&report)?);
            Err(e)
        }
    }
}
