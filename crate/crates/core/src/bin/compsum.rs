use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use compsum::corpus::{read_corpus, Document};
use compsum::error::{Error, Result};
use compsum::model::{gradient_check, train, Model, TrainConfig, INIT_SCALE};
use compsum::oracle::{
    build_oracles, compressability_report, read_oracle_cache, write_oracle_cache, OracleConfig,
};
use compsum::pipeline::config::FileConfig;
use compsum::pipeline::{
    attach_labels, evaluate_corpus, load_model, parse_tau_grid, prepare_examples, save_model,
    stats_report, summarize, sweep_threshold, write_sweep_csv, SummarizeConfig, Summary,
};
use compsum::rules::{extract_options_with, RuleConfig, RuleId};
use compsum::synthetic::{generate, SyntheticConfig};

#[derive(Parser)]
#[command(
    name = "compsum",
    version,
    about = "Extractive summarization with syntactic compression"
)]
struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compression option commands.
    Options {
        #[command(subcommand)]
        command: OptionsCommand,
    },
    /// Oracle commands.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Train a model from a corpus and its oracle cache.
    Train(TrainArgs),
    /// Write one summary per document as JSONL.
    Summarize(SummarizeArgs),
    /// Mean ROUGE-1/2/L of model summaries against references.
    Evaluate(EvaluateArgs),
    /// ROUGE and compression ratio over a grid of thresholds, as CSV.
    Sweep(SweepArgs),
    /// Node-type or compressability table, as CSV.
    Stats(StatsArgs),
    /// Compare backpropagated and finite-difference gradients.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic corpus with one salient sentence per document.
    Synth(SynthArgs),
}

#[derive(Subcommand)]
enum OptionsCommand {
    /// List the compression options of every sentence as JSONL.
    Extract(IoArgs),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Build the oracle cache.
    Build(OracleArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Corpus in JSONL.
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    max_sents: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    input: PathBuf,
    /// Oracle cache built by `oracle build`.
    #[arg(long)]
    oracles: PathBuf,
    /// Where to write the model.
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pos_weight: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args, Clone)]
struct SummaryFlags {
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    flags: SummaryFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Per-document scores as CSV.
    #[arg(long)]
    rows: Option<PathBuf>,
    #[command(flatten)]
    flags: SummaryFlags,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    io: IoArgs,
    /// Grid as start:stop:step.
    #[arg(long)]
    tau_grid: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    no_dedup: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Oracle cache; fills the Comp Acc column.
    #[arg(long)]
    oracles: Option<PathBuf>,
    /// Summaries from `summarize`; restricts the table to applied deletions.
    #[arg(long)]
    summaries: Option<PathBuf>,
    /// Print the three-bucket compressability table instead (needs --oracles).
    #[arg(long)]
    compressability: bool,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    oracles: PathBuf,
    /// Check this model; otherwise a random model per example.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    examples: usize,
    /// Half-width of the random weight interval.
    #[arg(long, default_value_t = INIT_SCALE)]
    scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 200)]
    docs: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::io(p, e))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_line<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let mut line = serde_json::to_string(value)?;
    line.push('\n');
    out.write_all(line.as_bytes())
        .map_err(|e| Error::io("<output>", e))
}

fn load_docs(path: &Path) -> Result<Vec<Document>> {
    let (docs, errors) = read_corpus(path)?;
    if !errors.is_empty() {
        log::warn!("{}: {} records rejected", path.display(), errors.len());
    }
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(docs)
}

fn read_summaries(path: &Path) -> Result<Vec<Summary>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::CorpusLine {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn summarize_config(flags: &SummaryFlags, file: &FileConfig) -> SummarizeConfig {
    let d = SummarizeConfig::default();
    SummarizeConfig {
        k: flags.k.or(file.summarize.k).unwrap_or(d.k),
        tau: flags.tau.or(file.summarize.tau).unwrap_or(d.tau),
        dedup: if flags.no_dedup {
            false
        } else {
            file.summarize.dedup.unwrap_or(d.dedup)
        },
        ..d
    }
}

#[derive(Serialize)]
struct OptionRow<'a> {
    start: usize,
    end: usize,
    rule: RuleId,
    node: &'a str,
    text: String,
}

fn cmd_options(args: &IoArgs) -> Result<()> {
    let docs = load_docs(&args.input)?;
    let rules = RuleConfig::default();
    let mut out = output(args.output.as_deref())?;
    for doc in &docs {
        let sentences: Vec<Vec<serde_json::Value>> = doc
            .sentences
            .iter()
            .map(|tree| {
                let words = tree.words();
                extract_options_with(tree, &rules)
                    .iter()
                    .map(|o| {
                        serde_json::to_value(OptionRow {
                            start: o.span.start,
                            end: o.span.end,
                            rule: o.rule,
                            node: &o.node_label,
                            text: words[o.span.start..o.span.end].join(" "),
                        })
                    })
                    .collect::<std::result::Result<_, _>>()
            })
            .collect::<std::result::Result<_, _>>()?;
        write_line(
            out.as_mut(),
            &serde_json::json!({"doc_id": doc.id, "sentences": sentences}),
        )?;
    }
    out.flush().map_err(|e| Error::io("<output>", e))
}

fn cmd_oracle(args: &OracleArgs, file: &FileConfig) -> Result<()> {
    let d = OracleConfig::default();
    let cfg = OracleConfig {
        k: args.k.or(file.oracle.k).unwrap_or(d.k),
        beam_width: args.beam.or(file.oracle.beam).unwrap_or(d.beam_width),
        max_sents: args
            .max_sents
            .or(file.oracle.max_sents)
            .unwrap_or(d.max_sents),
        m: args.m.or(file.oracle.m).unwrap_or(d.m),
        ..d
    };
    cfg.validate()?;
    let docs: Vec<Document> = load_docs(&args.io.input)?
        .into_iter()
        .filter(|d| {
            if !d.has_reference() {
                log::warn!("{}: no reference, skipped", d.id);
            }
            d.has_reference()
        })
        .collect();
    let mut records = Vec::with_capacity(docs.len());
    for result in build_oracles(&docs, &cfg, &RuleConfig::default()) {
        match result {
            Ok(r) => records.push(r),
            Err(e) => log::warn!("skipped: {e}"),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    match &args.io.output {
        Some(p) => write_oracle_cache(p, &records)?,
        None => {
            let mut out = output(None)?;
            for r in &records {
                write_line(out.as_mut(), r)?;
            }
            out.flush().map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    log::info!("{} oracle records written", records.len());
    Ok(())
}

fn cmd_train(args: &TrainArgs, file: &FileConfig) -> Result<()> {
    let d = TrainConfig::default();
    let t = &file.train;
    let cfg = TrainConfig {
        alpha: args.alpha.or(t.alpha).unwrap_or(d.alpha),
        learning_rate: args.lr.or(t.lr).unwrap_or(d.learning_rate),
        epochs: args.epochs.or(t.epochs).unwrap_or(d.epochs),
        seed: args.seed.or(t.seed).unwrap_or(d.seed),
        pos_weight: args.pos_weight.or(t.pos_weight).unwrap_or(d.pos_weight),
        hidden_size: t.hidden_size.unwrap_or(d.hidden_size),
        m: args.m.or(t.m).unwrap_or(d.m),
        ..d
    };
    let docs = load_docs(&args.input)?;
    let records = read_oracle_cache(&args.oracles)?;
    let examples = prepare_examples(&docs, &records, &cfg, &RuleConfig::default())?;
    let (model, report) = train(&examples, &cfg)?;
    save_model(&model, &args.output)?;
    let mut out = output(None)?;
    write_line(
        out.as_mut(),
        &serde_json::json!({
            "examples": examples.len(),
            "initial_loss": report.initial_loss,
            "epoch_losses": report.epoch_losses,
        }),
    )?;
    out.flush().map_err(|e| Error::io("<stdout>", e))
}

fn cmd_summarize(args: &SummarizeArgs, file: &FileConfig) -> Result<()> {
    let cfg = summarize_config(&args.flags, file);
    cfg.validate()?;
    let model = load_model(&args.model)?;
    let docs = load_docs(&args.io.input)?;
    let summaries: Vec<Summary> = docs
        .par_iter()
        .map(|d| summarize(&model, d, &cfg))
        .collect::<Result<_>>()?;
    let mut out = output(args.io.output.as_deref())?;
    for s in &summaries {
        write_line(out.as_mut(), s)?;
    }
    out.flush().map_err(|e| Error::io("<output>", e))
}

fn cmd_evaluate(args: &EvaluateArgs, file: &FileConfig) -> Result<()> {
    let cfg = summarize_config(&args.flags, file);
    cfg.validate()?;
    let model = load_model(&args.model)?;
    let docs = load_docs(&args.input)?;
    let report = evaluate_corpus(&model, &docs, &cfg)?;
    if let Some(p) = &args.rows {
        report.write_csv(File::create(p).map_err(|e| Error::io(p, e))?)?;
    }
    let mut out = output(None)?;
    write_line(
        out.as_mut(),
        &serde_json::json!({
            "documents": report.rows.len(),
            "skipped": report.skipped,
            "rouge_1": report.mean.rouge_1,
            "rouge_2": report.mean.rouge_2,
            "rouge_l": report.mean.rouge_l,
            "compression_ratio": report.compression_ratio(),
        }),
    )?;
    out.flush().map_err(|e| Error::io("<stdout>", e))
}

fn cmd_sweep(args: &SweepArgs, file: &FileConfig) -> Result<()> {
    let spec = args
        .tau_grid
        .clone()
        .or(file.sweep.tau_grid.clone())
        .unwrap_or_else(|| "0:1:0.05".to_string());
    let grid = parse_tau_grid(&spec)?;
    let flags = SummaryFlags {
        tau: Some(0.0),
        k: args.k,
        no_dedup: args.no_dedup,
    };
    let base = summarize_config(&flags, file);
    let model = load_model(&args.model)?;
    let docs = load_docs(&args.io.input)?;
    let rows = sweep_threshold(&model, &docs, &grid, &base)?;
    write_sweep_csv(&rows, output(args.io.output.as_deref())?)
}

fn cmd_stats(args: &StatsArgs) -> Result<()> {
    let docs = load_docs(&args.io.input)?;
    let rules = RuleConfig::default();
    let labels = match &args.oracles {
        Some(p) => {
            let records = read_oracle_cache(p)?;
            let attached = attach_labels(&docs, &records, &rules)?;
            Some(attached)
        }
        None => None,
    };
    let out = output(args.io.output.as_deref())?;
    if args.compressability {
        let Some(labels) = &labels else {
            return Err(Error::Config("--compressability needs --oracles".into()));
        };
        let all = labels.iter().flatten().flatten().flatten();
        let report = compressability_report(all)?;
        let mut out = out;
        let name = args
            .io
            .input
            .file_stem()
            .map_or("corpus".into(), |s| s.to_string_lossy().into_owned());
        out.write_all(report.to_table(&name).as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::io("<output>", e))?;
        return Ok(());
    }
    // Documents without an oracle record contribute no labels.
    let (docs, labels): (Vec<Document>, Option<Vec<_>>) = match labels {
        Some(l) => {
            let (d, l): (Vec<_>, Vec<_>) = docs
                .into_iter()
                .zip(l)
                .filter_map(|(d, l)| l.map(|l| (d, l)))
                .unzip();
            (d, Some(l))
        }
        None => (docs, None),
    };
    let summaries = args.summaries.as_deref().map(read_summaries).transpose()?;
    let report = stats_report(&docs, labels.as_deref(), summaries.as_deref(), &rules);
    report.write_csv(out)
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<()> {
    let docs = load_docs(&args.input)?;
    let records = read_oracle_cache(&args.oracles)?;
    let fixed = args.model.as_deref().map(load_model).transpose()?;
    let base_cfg = fixed
        .as_ref()
        .map_or_else(TrainConfig::default, |m| m.config.clone());
    let examples = prepare_examples(&docs, &records, &base_cfg, &RuleConfig::default())?;
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut out = output(None)?;
    let mut worst: f64 = 0.0;
    for (i, ex) in examples.iter().take(args.examples).enumerate() {
        let model = fixed.clone().unwrap_or_else(|| {
            let cfg = TrainConfig {
                seed: args.seed + i as u64,
                ..base_cfg.clone()
            };
            Model::init_uniform(&cfg, args.scale)
        });
        let err = gradient_check(&model, ex);
        worst = worst.max(err);
        write_line(
            out.as_mut(),
            &serde_json::json!({"doc_id": ex.doc_id, "max_rel_error": err}),
        )?;
    }
    write_line(out.as_mut(), &serde_json::json!({"max_rel_error": worst}))?;
    out.flush().map_err(|e| Error::io("<stdout>", e))
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let cfg = SyntheticConfig {
        docs: args.docs,
        seed: args.seed,
        ..SyntheticConfig::default()
    };
    let mut out = output(args.output.as_deref())?;
    for s in generate(&cfg) {
        write_line(out.as_mut(), &s.doc.to_record())?;
    }
    out.flush().map_err(|e| Error::io("<output>", e))
}

fn run(cli: &Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Options {
            command: OptionsCommand::Extract(a),
        } => cmd_options(a),
        Command::Oracle {
            command: OracleCommand::Build(a),
        } => cmd_oracle(a, &file),
        Command::Train(a) => cmd_train(a, &file),
        Command::Summarize(a) => cmd_summarize(a, &file),
        Command::Evaluate(a) => cmd_evaluate(a, &file),
        Command::Sweep(a) => cmd_sweep(a, &file),
        Command::Stats(a) => cmd_stats(a),
        Command::Gradcheck(a) => cmd_gradcheck(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed pipe (e.g. `| head`) is the reader's choice, not a failure.
        Err(Error::Io { source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            let report = serde_json::json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{report}");
            ExitCode::FAILURE
        }
    }
}
