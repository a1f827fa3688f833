use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};
use emolabel_core::dedup::DedupMode;
use emolabel_core::export::{self, ExportError, QueryKind, QueryParams};
use emolabel_core::lexicon::{self, Lexicon, LexiconError, Polarity, SymbolKind, CANONICAL_LEXICON};
use emolabel_core::pipeline::{self, BuildConfig};
use emolabel_core::validation::{self, LabelFileError};

#[derive(Parser)]
#[command(name = "emolabel", version, about = "Emoticon/emoji distant-supervision labelling for tweet archives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Label, deduplicate and summarise archives into an output directory
    Build(BuildArgs),
    /// Print one analytics query from a stats.json as CSV
    Analyze(AnalyzeArgs),
    /// Compare a labels file against manual gold labels
    Validate(ValidateArgs),
    /// Check a lexicon file (the bundled one when no path is given)
    Lexicon(LexiconArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Archive directories, tar files or line files
    #[arg(value_name = "INPUT")]
    inputs: Vec<PathBuf>,
    /// TOML file with build settings; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Comma-separated language codes
    #[arg(long, value_delimiter = ',')]
    languages: Option<Vec<String>>,
    #[arg(long)]
    min_matches: Option<usize>,
    /// Match emojis glued to other characters inside a token
    #[arg(long, value_name = "BOOL")]
    in_token_emoji: Option<bool>,
    /// retweet_link or text_hash
    #[arg(long)]
    dedup: Option<DedupMode>,
    #[arg(long)]
    spill_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write tweets.jsonl with full records
    #[arg(long)]
    write_tweets: bool,
    /// Records held in memory per sort run
    #[arg(long)]
    run_size: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// One of yearly_counts, kind_share, top_symbols, polarity_ratio,
    /// length_histogram, user_source, platform_top
    query: String,
    #[arg(long, default_value = "stats.json")]
    stats: PathBuf,
    #[arg(long)]
    year: Option<i32>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    polarity: Option<Polarity>,
    #[arg(long)]
    source: Option<String>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Directory for confusion_matrix.csv and validation.json
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct LexiconArgs {
    path: Option<PathBuf>,
    /// Also require the 70/70 split into 41/37 emoticons and 29/33 emojis
    #[arg(long)]
    canonical: bool,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 1, error: error.into() }
    }

    fn io(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Lexicon(args) => cmd_lexicon(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

/// Reads a TOML build config. Relative paths in it are taken relative to
/// the file's own directory.
fn read_config(path: &Path) -> Result<BuildConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::io)?;
    let mut config: BuildConfig = toml::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::config)?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.inputs.iter_mut().for_each(|p| resolve(base, p));
    for p in [&mut config.lexicon, &mut config.spill_dir].into_iter().flatten() {
        resolve(base, p);
    }
    resolve(base, &mut config.output);
    Ok(config)
}

fn build_config(args: BuildArgs) -> Result<BuildConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => read_config(path)?,
        None => BuildConfig::default(),
    };
    if !args.inputs.is_empty() {
        config.inputs = args.inputs;
    }
    if let Some(v) = args.lexicon {
        config.lexicon = Some(v);
    }
    if let Some(v) = args.languages {
        config.languages = v.into_iter().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
    }
    if let Some(v) = args.min_matches {
        config.min_matches = v;
    }
    if let Some(v) = args.in_token_emoji {
        config.in_token_emoji = v;
    }
    if let Some(v) = args.dedup {
        config.dedup = v;
    }
    if let Some(v) = args.spill_dir {
        config.spill_dir = Some(v);
    }
    if let Some(v) = args.workers {
        config.workers = v;
    }
    if let Some(v) = args.output {
        config.output = v;
    }
    if let Some(v) = args.run_size {
        config.run_size = v;
    }
    config.write_tweets |= args.write_tweets;
    Ok(config)
}

fn cmd_build(args: BuildArgs) -> CmdResult {
    let config = build_config(args)?;
    match pipeline::run_build(&config) {
        Ok(outcome) => {
            let r = &outcome.report;
            println!(
                "{} lines, {} tweets, {} labelled, {} after dedup ({} positive, {} negative) -> {}",
                r.ingest.lines_read,
                r.ingest.records_parsed,
                r.labelled,
                r.dedup_survivors,
                r.positive,
                r.negative,
                outcome.output.display()
            );
            Ok(())
        }
        Err(err) => Err(Failure {
            code: err.exit_code() as u8,
            error: err.into(),
        }),
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CmdResult {
    let Ok(query) = args.query.parse::<QueryKind>() else {
        let mut cmd = Cli::command();
        let usage = cmd.find_subcommand_mut("analyze").map(|c| c.render_usage().to_string()).unwrap_or_default();
        let names: Vec<&str> = QueryKind::ALL.iter().map(|q| q.name()).collect();
        return Err(Failure::config(anyhow!(
            "unknown query {:?}; expected one of {}\n\n{usage}",
            args.query,
            names.join(", ")
        )));
    };
    let stats = pipeline::read_stats(&args.stats).map_err(|e| {
        let err = anyhow::Error::from(e).context(format!("reading {}", args.stats.display()));
        match err.downcast_ref::<io::Error>().map(io::Error::kind) {
            Some(io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof) => Failure::config(err),
            _ => Failure::io(err),
        }
    })?;
    let params = QueryParams {
        year: args.year,
        language: args.language,
        polarity: args.polarity,
        source: args.source,
        k: args.k,
        m: args.m,
    };
    let stdout = io::stdout().lock();
    export::write_query_csv(&stats, query, &params, stdout).map_err(|e| match e {
        ExportError::Csv(_) => Failure::io(e),
        _ => Failure::config(e),
    })
}

fn load_file<T>(path: &Path, load: impl FnOnce(BufReader<File>) -> Result<T, LabelFileError>) -> Result<T, Failure> {
    let file = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(Failure::io)?;
    load(BufReader::new(file)).map_err(|e| {
        let code = if matches!(e, LabelFileError::Io(_)) { 2 } else { 1 };
        Failure {
            code,
            error: anyhow::Error::from(e).context(path.display().to_string()),
        }
    })
}

fn cmd_validate(args: ValidateArgs) -> CmdResult {
    let labels = load_file(&args.labels, validation::load_labels)?;
    let gold = load_file(&args.gold, validation::load_gold)?;
    let matrix = validation::confusion_matrix(&labels, &gold);
    let summary = validation::matrix_summary(&matrix);

    let write = || -> anyhow::Result<()> {
        fs::create_dir_all(&args.out)?;
        let csv_path = args.out.join("confusion_matrix.csv");
        matrix.write_csv(BufWriter::new(File::create(&csv_path)?))?;
        let mut json = BufWriter::new(File::create(args.out.join("validation.json"))?);
        serde_json::to_writer_pretty(&mut json, &summary)?;
        json.write_all(b"\n")?;
        json.flush()?;
        Ok(())
    };
    write().context("writing validation outputs").map_err(Failure::io)?;

    let stdout = io::stdout();
    matrix.write_csv(stdout.lock()).map_err(Failure::io)?;
    println!(
        "captured {}, not captured {}, positive-row noise {}, negative-row noise {}",
        summary.captured, summary.coverage, summary.positive_row_noise, summary.negative_row_noise
    );
    Ok(())
}

fn cmd_lexicon(args: LexiconArgs) -> CmdResult {
    let text = match &args.path {
        Some(path) => fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::io)?,
        None => CANONICAL_LEXICON.to_string(),
    };
    let entries = lexicon::parse_entries(&text).map_err(|e: LexiconError| Failure::config(e))?;
    let lex = Lexicon::from_symbols(entries);
    let report = lexicon::validate_lexicon(&lex, args.canonical);
    print!("{report}");
    for polarity in Polarity::ALL {
        let emoticons = lex.count(SymbolKind::Emoticon, polarity);
        let emojis = lex.count(SymbolKind::Emoji, polarity);
        println!("{polarity}: {} ({emoticons} emoticons, {emojis} emojis)", emoticons + emojis);
    }
    if report.is_clean() {
        Ok(())
    } else {
        Err(Failure::config(anyhow!("lexicon check failed")))
    }
}
