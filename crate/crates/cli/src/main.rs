//! `citecast` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use citecast::baselines::ModelKind;
use citecast::corpus::{ingest_file, CaseLabel, CleanConfig, CorpusCache};
use citecast::pipeline::{
    evaluate_model, load_artifact, merge_reports, model_file, model_seed, prepare_case, read_metrics_csv,
    run_experiment, train_model, write_experiment, AtStage, ErrorClass, ExperimentConfig, ExperimentResult,
    ModelOutcome, PipelineError, Stage,
};
use citecast::synth::{generate, SynthConfig};
use citecast::topics::TopicModel;

const CACHE_FILE: &str = "corpus.bin";

#[derive(Parser)]
#[command(name = "citecast", version, about = "Citation-count prediction with graph convolutional networks")]
struct Cli {
    /// Directory holding the ingested corpus cache.
    #[arg(long, global = true, env = "CITECAST_CACHE_DIR", default_value = ".citecast")]
    cache_dir: PathBuf,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean a corpus file into the cache.
    Ingest {
        /// AMiner v1 text or JSON Lines, optionally gzip-compressed.
        input: PathBuf,
        /// Keep going when malformed records had to be skipped.
        #[arg(long)]
        lenient: bool,
    },
    /// Generate a synthetic corpus and its ground truth.
    Synth {
        /// JSON generator settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the topic model for a case.
    Topics(StageArgs),
    /// Build the normalized feature matrix and targets for a case.
    Features(StageArgs),
    /// Train models and save them under `<out>/models`.
    Train(StageArgs),
    /// Score saved models on the held-out split.
    Evaluate(StageArgs),
    /// Run every stage and write the full report.
    Run(StageArgs),
    /// Merge metric CSVs into one comparison table.
    Report {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Also write report.csv and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StageArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_case)]
    case: Option<CaseLabel>,
    /// Comma-separated subset of LR, RF, XGBoost, DNN, GCN.
    #[arg(long, value_delimiter = ',', value_parser = parse_model)]
    models: Option<Vec<ModelKind>>,
    /// Corpus file to ingest instead of reading the cache.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Topic model saved by `topics`; fitted afresh when absent.
    #[arg(long)]
    topics: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_case(s: &str) -> Result<CaseLabel, String> {
    match s.parse()? {
        CaseLabel::Custom => Err("custom cases are set through --config".into()),
        c => Ok(c),
    }
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

fn data_err(stage: Stage, message: impl Into<String>) -> PipelineError {
    PipelineError::new(stage, ErrorClass::Data, message)
}

fn ingest(input: &Path, lenient: bool) -> Result<CorpusCache, PipelineError> {
    let cache = ingest_file(input, &CleanConfig::default()).at(Stage::Ingest)?;
    for d in &cache.diagnostics {
        eprintln!("{}:{}: {:?}: {}", input.display(), d.line, d.kind, d.message);
    }
    let skipped = cache.diagnostics.iter().filter(|d| d.kind.skips_record()).count();
    if skipped > 0 && !lenient {
        return Err(data_err(
            Stage::Ingest,
            format!("{skipped} malformed record(s) in {}; rerun with --lenient to skip them", input.display()),
        ));
    }
    if cache.records.is_empty() {
        return Err(data_err(Stage::Ingest, format!("no usable records in {}", input.display())));
    }
    Ok(cache)
}

struct Context {
    config: ExperimentConfig,
    cache: CorpusCache,
    topics: Option<TopicModel>,
    out: PathBuf,
}

fn context(cli: &Cli, args: &StageArgs) -> Result<Context, PipelineError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(case) = args.case {
        config.case = case;
    }
    if let Some(models) = &args.models {
        config.models = models.clone();
    }
    if let Some(input) = &args.input {
        config.input = Some(input.clone());
    }
    if let Some(out) = &args.out {
        config.out_dir = out.clone();
    }
    config.validate()?;

    let cache = match &config.input {
        Some(input) => ingest(input, false)?,
        None => {
            let path = cli.cache_dir.join(CACHE_FILE);
            if !path.exists() {
                return Err(data_err(
                    Stage::Ingest,
                    format!("no corpus cache at {}; run `citecast ingest` or pass --input", path.display()),
                ));
            }
            CorpusCache::load(&path).at(Stage::Ingest)?
        }
    };
    let topics = match &args.topics {
        Some(path) => Some(TopicModel::load(path).at(Stage::Topics)?),
        None => None,
    };
    let out = config.out_dir.clone();
    fs::create_dir_all(&out).at(Stage::Output)?;
    Ok(Context { config, cache, topics, out })
}

fn writer(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    Ok(BufWriter::new(File::create(path).at(Stage::Output)?))
}

fn cmd_ingest(cli: &Cli, input: &Path, lenient: bool) -> Result<(), PipelineError> {
    let cache = ingest(input, lenient)?;
    fs::create_dir_all(&cli.cache_dir).at(Stage::Output)?;
    cache.save(cli.cache_dir.join(CACHE_FILE)).at(Stage::Output)?;
    println!("{}", serde_json::to_string_pretty(&cache.report).at(Stage::Output)?);
    Ok(())
}

fn cmd_synth(config: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<(), PipelineError> {
    let mut cfg: SynthConfig = match config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?
        }
        None => SynthConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let corpus = generate(&cfg).at(Stage::Synth)?;
    fs::create_dir_all(out).at(Stage::Output)?;
    citecast::corpus::write_aminer(&corpus.records, writer(&out.join("corpus.txt"))?).at(Stage::Output)?;
    corpus.write_truth_csv(writer(&out.join("truth.csv"))?).at(Stage::Output)?;
    println!(
        "wrote {} papers ({} in the observed span) to {}",
        corpus.records.len(),
        corpus.truth.len(),
        out.display()
    );
    Ok(())
}

fn cmd_topics(ctx: &Context) -> Result<(), PipelineError> {
    let prepared = prepare_case(&ctx.cache, &ctx.config, ctx.topics.clone())?;
    let model = &prepared.topic_model;
    model.save(ctx.out.join("topic_model.bin")).at(Stage::Output)?;
    prepared.doc_topics.write_csv(writer(&ctx.out.join("doc_topics.csv"))?).at(Stage::Output)?;
    let mut w = writer(&ctx.out.join("top_words.txt"))?;
    for k in 0..model.num_topics {
        writeln!(w, "{k}\t{}", model.top_words(k, 10).join(" ")).at(Stage::Output)?;
    }
    w.flush().at(Stage::Output)?;
    println!("{} topics over {} terms", model.num_topics, model.vocab_size());
    Ok(())
}

fn cmd_features(ctx: &Context) -> Result<(), PipelineError> {
    let p = prepare_case(&ctx.cache, &ctx.config, ctx.topics.clone())?;
    p.features.write_csv(writer(&ctx.out.join("features.csv"))?).at(Stage::Output)?;
    if let Some(stats) = &p.features.norm_stats {
        fs::write(ctx.out.join("norm_stats.json"), stats.to_json()).at(Stage::Output)?;
    }
    let mut w = writer(&ctx.out.join("targets.csv"))?;
    writeln!(w, "paper_id,split,target").at(Stage::Output)?;
    for (split, rows) in [("train", &p.train_rows), ("test", &p.test_rows)] {
        for &r in rows {
            writeln!(w, "{},{split},{}", p.graph.node_ids[r], p.targets[r]).at(Stage::Output)?;
        }
    }
    w.flush().at(Stage::Output)?;
    println!(
        "{} nodes x {} features; {} train, {} test",
        p.features.n_rows(),
        p.features.n_cols(),
        p.train_rows.len(),
        p.test_rows.len()
    );
    Ok(())
}

fn cmd_train(ctx: &Context) -> Result<(), PipelineError> {
    let p = prepare_case(&ctx.cache, &ctx.config, ctx.topics.clone())?;
    fs::create_dir_all(ctx.out.join("models")).at(Stage::Output)?;
    for &kind in &ctx.config.models {
        let artifact = train_model(&p, kind, &ctx.config, &p.train_rows, model_seed(ctx.config.seed, kind))?;
        artifact.save(model_file(&ctx.out, kind))?;
        println!("trained {kind}");
    }
    Ok(())
}

fn cmd_evaluate(ctx: &Context) -> Result<(), PipelineError> {
    let prepared = prepare_case(&ctx.cache, &ctx.config, ctx.topics.clone())?;
    let mut outcomes = Vec::new();
    for &kind in &ctx.config.models {
        let path = model_file(&ctx.out, kind);
        if !path.exists() {
            return Err(data_err(
                Stage::Evaluate(kind),
                format!("no trained model at {}; run `citecast train` first", path.display()),
            ));
        }
        let artifact = load_artifact(kind, &path)?;
        let (report, predictions) = evaluate_model(&prepared, &artifact, &prepared.test_rows)?;
        outcomes.push(ModelOutcome { kind, report, predictions, cv: Vec::new(), artifact });
    }
    let result = ExperimentResult { prepared, outcomes };
    write_experiment(&result, &ctx.out)?;
    print_summary(&result);
    Ok(())
}

fn cmd_run(ctx: &Context) -> Result<(), PipelineError> {
    let result = run_experiment(&ctx.cache, &ctx.config, ctx.topics.clone())?;
    write_experiment(&result, &ctx.out)?;
    print_summary(&result);
    Ok(())
}

fn print_summary(result: &ExperimentResult) {
    let case = result.prepared.case_name();
    println!("{:<8} {:>10} {:>10} {:>10} {:>10} {:>10}", "model", "MAE", "RMSE", "MAPE", "R2", "Adj R2");
    for o in &result.outcomes {
        let r = &o.report;
        println!(
            "{:<8} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            o.kind.name(),
            r.mae,
            r.rmse,
            r.mape,
            r.r2,
            r.adjusted_r2
        );
    }
    println!("case {case}, {} test papers", result.prepared.test_rows.len());
}

fn cmd_report(csv: &[PathBuf], out: Option<&Path>) -> Result<(), PipelineError> {
    let mut tables = Vec::new();
    for path in csv {
        let file = File::open(path).at(Stage::Report)?;
        tables.push(read_metrics_csv(file, &path.display().to_string())?);
    }
    let merged = merge_reports(tables);
    print!("{}", merged.to_text());
    if let Some(dir) = out {
        fs::create_dir_all(dir).at(Stage::Output)?;
        merged.write_csv(writer(&dir.join("report.csv"))?)?;
        fs::write(dir.join("report.json"), merged.to_json() + "\n").at(Stage::Output)?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), PipelineError> {
    match &cli.command {
        Command::Ingest { input, lenient } => cmd_ingest(cli, input, *lenient),
        Command::Synth { config, seed, out } => cmd_synth(config.as_deref(), *seed, out),
        Command::Topics(a) => cmd_topics(&context(cli, a)?),
        Command::Features(a) => cmd_features(&context(cli, a)?),
        Command::Train(a) => cmd_train(&context(cli, a)?),
        Command::Evaluate(a) => cmd_evaluate(&context(cli, a)?),
        Command::Run(a) => cmd_run(&context(cli, a)?),
        Command::Report { csv, out } => cmd_report(csv, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
