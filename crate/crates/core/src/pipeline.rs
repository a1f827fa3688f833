//! End-to-end dataset build: ingest, label, deduplicate, export.
//!
//! Archive members are spread over `workers` threads. Each worker labels the
//! members it claims and feeds its own dedup sorter; the sorters are merged
//! sequentially afterwards. Every output is a function of the multiset of
//! labelled records, so the result does not depend on the worker count or
//! on which worker handled which member.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{Share, StatsBundle};
use crate::dedup::{self, DedupMode, DedupSorter};
use crate::export::{self, QueryKind, QueryParams};
use crate::extsort::{ExternalSorter, SortConfig};
use crate::ingest::{self, classify_line, ArchiveMember, IngestCounters, IngestError, ParseOutcome, DEFAULT_STAGE_BYTES};
use crate::labeller::{label_tweet, LabelConfig, LabelledTweet, Omission, DEFAULT_LANGUAGES};
use crate::lexicon::{Lexicon, LexiconError, Polarity};

pub const LABELS_FILE: &str = "labels.tsv";
pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const STATS_FILE: &str = "stats.json";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

impl BuildError {
    /// 1 for configuration problems, 2 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BuildError::Config(_) => 1,
            BuildError::Lexicon(LexiconError::Io(_)) => 2,
            BuildError::Lexicon(_) => 1,
            BuildError::Ingest(_) | BuildError::Io { .. } => 2,
        }
    }
}

trait IoContext<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, BuildError>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, BuildError> {
        self.map_err(|source| BuildError::Io { context: what(), source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub inputs: Vec<PathBuf>,
    /// Bundled canonical lexicon when unset.
    pub lexicon: Option<PathBuf>,
    pub languages: BTreeSet<String>,
    pub min_matches: usize,
    pub in_token_emoji: bool,
    pub dedup: DedupMode,
    pub spill_dir: Option<PathBuf>,
    pub workers: usize,
    pub output: PathBuf,
    /// Also write the full records as JSON lines.
    pub write_tweets: bool,
    /// In-memory records per sort run, shared by all workers.
    pub run_size: usize,
    /// Raw bytes of a member held back before its records are committed.
    pub stage_bytes: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            lexicon: None,
            languages: DEFAULT_LANGUAGES.iter().map(|s| s.to_string()).collect(),
            min_matches: 1,
            in_token_emoji: true,
            dedup: DedupMode::RetweetLink,
            spill_dir: None,
            workers: 1,
            output: PathBuf::from("out"),
            write_tweets: false,
            run_size: SortConfig::default().run_size,
            stage_bytes: DEFAULT_STAGE_BYTES,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<(), BuildError> {
        let fail = |msg: &str| Err(BuildError::Config(msg.to_string()));
        if self.languages.is_empty() {
            return fail("at least one language is required");
        }
        if self.min_matches < 1 {
            return fail("min_matches must be at least 1");
        }
        if self.workers < 1 {
            return fail("workers must be at least 1");
        }
        if self.run_size < 1 {
            return fail("run_size must be at least 1");
        }
        if self.inputs.is_empty() {
            return fail("no input paths given");
        }
        Ok(())
    }

    fn sort_config(&self) -> SortConfig {
        SortConfig {
            run_size: self.run_size,
            spill_dir: self.spill_dir.clone(),
            ..SortConfig::default()
        }
    }

    fn label_config(&self) -> LabelConfig {
        LabelConfig {
            min_matches: self.min_matches,
            languages: self.languages.clone(),
        }
    }

    pub fn load_lexicon(&self) -> Result<Lexicon, BuildError> {
        let lex = match &self.lexicon {
            Some(path) => Lexicon::from_path(path)?,
            None => Lexicon::canonical(),
        };
        Ok(lex.with_in_token_emoji(self.in_token_emoji))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmissionCounts {
    pub language: u64,
    pub no_symbols: u64,
    pub mixed: u64,
    pub below_min_matches: u64,
}

impl OmissionCounts {
    fn record(&mut self, why: Omission) {
        match why {
            Omission::Language => self.language += 1,
            Omission::NoSymbols => self.no_symbols += 1,
            Omission::Mixed => self.mixed += 1,
            Omission::BelowMinMatches => self.below_min_matches += 1,
        }
    }

    fn merge(&mut self, other: &OmissionCounts) {
        self.language += other.language;
        self.no_symbols += other.no_symbols;
        self.mixed += other.mixed;
        self.below_min_matches += other.below_min_matches;
    }

    pub fn total(&self) -> u64 {
        self.language + self.no_symbols + self.mixed + self.below_min_matches
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub ingest: IngestCounters,
    pub labelled: u64,
    pub omitted: OmissionCounts,
    pub dedup_survivors: u64,
    pub duplicates_removed: u64,
    pub positive: u64,
    pub negative: u64,
}

#[derive(Serialize)]
struct StatsSummary {
    tweets: u64,
    positive: u64,
    negative: u64,
    positive_share: Share,
    negative_share: Share,
    with_emoji: u64,
    with_emoticon: u64,
}

/// Contents of `stats.json`.
#[derive(Serialize)]
struct StatsFile<'a> {
    summary: StatsSummary,
    bundle: &'a StatsBundle,
}

#[derive(Deserialize)]
struct StatsFileIn {
    bundle: StatsBundle,
}

/// Reads the bundle back out of a `stats.json`.
pub fn read_stats(path: &Path) -> io::Result<StatsBundle> {
    let file = File::open(path)?;
    let parsed: StatsFileIn = serde_json::from_reader(io::BufReader::new(file))?;
    Ok(parsed.bundle)
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub report: BuildReport,
    pub stats: StatsBundle,
    pub output: PathBuf,
}

#[derive(Default)]
struct WorkerTally {
    ingest: IngestCounters,
    labelled: u64,
    omitted: OmissionCounts,
}

impl WorkerTally {
    fn merge(&mut self, other: &WorkerTally) {
        self.ingest.merge(&other.ingest);
        self.labelled += other.labelled;
        self.omitted.merge(&other.omitted);
    }
}

/// Reads one member, committing its labelled records to `sorter` only once
/// the member has been read to the end (or once `stage_bytes` of raw input
/// are pending). A decoding failure drops whatever is still pending.
fn process_member(
    member: &ArchiveMember,
    lex: &Lexicon,
    label_config: &LabelConfig,
    stage_bytes: usize,
    sorter: &mut DedupSorter,
    tally: &mut WorkerTally,
) -> io::Result<()> {
    let mut pending = WorkerTally::default();
    let mut staged: Vec<LabelledTweet> = Vec::new();
    let mut staged_bytes = 0usize;

    let commit = |staged: &mut Vec<LabelledTweet>, pending: &mut WorkerTally, sorter: &mut DedupSorter, tally: &mut WorkerTally| {
        tally.merge(pending);
        *pending = WorkerTally::default();
        staged.drain(..).try_for_each(|t| sorter.push(t))
    };

    let mut reader = match member.open() {
        Ok(r) => r,
        Err(err) => {
            warn!("skipping unreadable member {}: {err}", member.name);
            tally.ingest.members_corrupt += 1;
            return Ok(());
        }
    };
    let mut buf = Vec::new();
    loop {
        buf.clear();
        match reader.next_line(&mut buf) {
            Ok(true) => {}
            Ok(false) => break,
            Err(err) => {
                warn!("member {} truncated or corrupt, discarding its pending records: {err}", member.name);
                tally.ingest.members_corrupt += 1;
                return Ok(());
            }
        }
        staged_bytes += buf.len();
        let outcome = classify_line(&buf);
        pending.ingest.record(&outcome);
        if let ParseOutcome::Tweet(rec) = outcome {
            match label_tweet(rec, lex, label_config) {
                Ok(t) => {
                    pending.labelled += 1;
                    staged.push(t);
                }
                Err(why) => pending.omitted.record(why),
            }
        }
        if staged_bytes >= stage_bytes {
            commit(&mut staged, &mut pending, sorter, tally)?;
            staged_bytes = 0;
        }
    }
    commit(&mut staged, &mut pending, sorter, tally)
}

fn collect_members(inputs: &[PathBuf]) -> Result<(Vec<ArchiveMember>, u64), BuildError> {
    let mut members = Vec::new();
    let mut unreadable = 0;
    for input in inputs {
        members.extend(ingest::list_members(input, &mut unreadable)?);
    }
    Ok((members, unreadable))
}

/// Labels every member with `workers` threads and returns one sorter per
/// worker.
fn label_members(
    config: &BuildConfig,
    lex: &Lexicon,
    members: &[ArchiveMember],
) -> Result<(Vec<DedupSorter>, WorkerTally), BuildError> {
    let workers = config.workers.min(members.len()).max(1);
    let sort_config = config.sort_config().split(workers);
    let label_config = config.label_config();
    let next = AtomicUsize::new(0);
    let first_error: Mutex<Option<BuildError>> = Mutex::new(None);

    let results: Vec<Option<(DedupSorter, WorkerTally)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                let sort_config = sort_config.clone();
                let (label_config, next, first_error) = (&label_config, &next, &first_error);
                scope.spawn(move || {
                    let fail = |e: BuildError| {
                        first_error.lock().unwrap().get_or_insert(e);
                        None
                    };
                    let mut sorter = match DedupSorter::new(DedupMode::RetweetLink, sort_config) {
                        Ok(s) => s,
                        Err(e) => return fail(io_err(e, "creating spill files")),
                    };
                    let mut tally = WorkerTally::default();
                    loop {
                        if first_error.lock().unwrap().is_some() {
                            return None;
                        }
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(member) = members.get(i) else { break };
                        if let Err(e) = process_member(member, lex, label_config, config.stage_bytes, &mut sorter, &mut tally) {
                            return fail(io_err(e, "spilling sort run"));
                        }
                    }
                    Some((sorter, tally))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    if let Some(err) = first_error.into_inner().unwrap() {
        return Err(err);
    }
    let mut tally = WorkerTally::default();
    let mut sorters = Vec::new();
    for (sorter, t) in results.into_iter().flatten() {
        tally.merge(&t);
        sorters.push(sorter);
    }
    Ok((sorters, tally))
}

fn io_err(source: io::Error, context: &str) -> BuildError {
    BuildError::Io {
        context: context.to_string(),
        source,
    }
}

#[derive(Serialize, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
struct ById {
    id: u64,
    tweet: LabelledTweet,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BuildError> {
    let mut w = BufWriter::new(File::create(path).context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(io::Error::from)
        .context(|| format!("writing {}", path.display()))?;
    w.write_all(b"\n").context(|| format!("writing {}", path.display()))?;
    w.flush().context(|| format!("writing {}", path.display()))
}

/// Writes the per-query CSVs for `stats` into `dir`.
pub fn write_query_csvs(stats: &StatsBundle, dir: &Path) -> Result<(), BuildError> {
    let params = QueryParams::default();
    for query in QueryKind::ALL {
        let path = dir.join(format!("{}.csv", query.name()));
        let file = BufWriter::new(File::create(&path).context(|| format!("creating {}", path.display()))?);
        export::write_query_csv(stats, query, &params, file).map_err(|e| BuildError::Io {
            context: format!("writing {}", path.display()),
            source: io::Error::other(e.to_string()),
        })?;
    }
    Ok(())
}

pub fn run_build(config: &BuildConfig) -> Result<BuildOutcome, BuildError> {
    config.validate()?;
    let lex = config.load_lexicon()?;
    let (members, unreadable) = collect_members(&config.inputs)?;
    info!("{} archive members, {} workers", members.len(), config.workers);

    fs::create_dir_all(&config.output).context(|| format!("creating {}", config.output.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".emolabel-build-")
        .tempdir_in(&config.output)
        .context(|| format!("writing to {}", config.output.display()))?;

    let (sorters, mut tally) = label_members(config, &lex, &members)?;
    tally.ingest.members_corrupt += unreadable;

    let mut survivors: Box<dyn Iterator<Item = io::Result<LabelledTweet>>> =
        Box::new(dedup::survivors(sorters).context(|| "merging sort runs".into())?);
    if config.dedup == DedupMode::TextHash {
        let mut second = DedupSorter::new(DedupMode::TextHash, config.sort_config()).context(|| "creating spill files".into())?;
        for t in survivors {
            second.push(t.context(|| "reading sort runs".into())?).context(|| "spilling sort run".into())?;
        }
        survivors = Box::new(dedup::survivors(vec![second]).context(|| "merging sort runs".into())?);
    }

    let mut by_id = ExternalSorter::new(config.sort_config()).context(|| "creating spill files".into())?;
    for t in survivors {
        let tweet = t.context(|| "reading sort runs".into())?;
        by_id.push(ById { id: tweet.record.id, tweet }).context(|| "spilling sort run".into())?;
    }

    let labels_path = staging.path().join(LABELS_FILE);
    let mut labels = BufWriter::new(File::create(&labels_path).context(|| "creating labels file".into())?);
    let mut tweets = match config.write_tweets {
        true => Some(BufWriter::new(
            File::create(staging.path().join(TWEETS_FILE)).context(|| "creating tweets file".into())?,
        )),
        false => None,
    };
    let mut stats = StatsBundle::new();
    let mut report = BuildReport {
        ingest: tally.ingest,
        labelled: tally.labelled,
        omitted: tally.omitted,
        ..BuildReport::default()
    };
    for entry in by_id.finish().context(|| "merging sort runs".into())? {
        let ById { id, tweet } = entry.context(|| "reading sort runs".into())?;
        writeln!(labels, "{id}\t{}", tweet.label).context(|| "writing labels file".into())?;
        if let Some(w) = tweets.as_mut() {
            serde_json::to_writer(&mut *w, &tweet)
                .map_err(io::Error::from)
                .and_then(|_| w.write_all(b"\n"))
                .context(|| "writing tweets file".into())?;
        }
        stats.accumulate(&tweet);
        report.dedup_survivors += 1;
        match tweet.label {
            Polarity::Positive => report.positive += 1,
            Polarity::Negative => report.negative += 1,
        }
    }
    labels.flush().context(|| "writing labels file".into())?;
    if let Some(mut w) = tweets {
        w.flush().context(|| "writing tweets file".into())?;
    }
    report.duplicates_removed = report.labelled - report.dedup_survivors;

    let totals = stats.totals();
    let share = |n: u64| Share(if totals.total == 0 { 0.0 } else { n as f64 / totals.total as f64 });
    let stats_file = StatsFile {
        summary: StatsSummary {
            tweets: totals.total,
            positive: totals.positive,
            negative: totals.negative,
            positive_share: share(totals.positive),
            negative_share: share(totals.negative),
            with_emoji: totals.with_emoji,
            with_emoticon: totals.with_emoticon,
        },
        bundle: &stats,
    };
    write_json(&staging.path().join(STATS_FILE), &stats_file)?;
    write_query_csvs(&stats, staging.path())?;
    write_json(&staging.path().join(REPORT_FILE), &report)?;

    for entry in fs::read_dir(staging.path()).context(|| "listing staged outputs".into())? {
        let entry = entry.context(|| "listing staged outputs".into())?;
        let target = config.output.join(entry.file_name());
        fs::rename(entry.path(), &target).context(|| format!("moving output to {}", target.display()))?;
    }
    info!(
        "labelled {} tweets, {} after dedup ({} positive, {} negative)",
        report.labelled, report.dedup_survivors, report.positive, report.negative
    );
    Ok(BuildOutcome {
        report,
        stats,
        output: config.output.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(dir: &Path, lines: &[&str], workers: usize) -> BuildOutcome {
        let input = dir.join("in");
        fs::create_dir_all(&input).unwrap();
        fs::write(input.join("a.jsonl"), lines.join("\n")).unwrap();
        let config = BuildConfig {
            inputs: vec![input],
            output: dir.join("out"),
            workers,
            ..BuildConfig::default()
        };
        run_build(&config).unwrap()
    }

    fn tweet(id: u64, text: &str) -> String {
        serde_json::json!({
            "id": id, "text": text, "lang": "en",
            "created_at": "Wed Jan 02 03:04:05 +0000 2013",
            "user": {"id": 9}, "source": "web",
        })
        .to_string()
    }

    #[test]
    fn labels_sorted_by_id() {
        let dir = tempfile::tempdir().unwrap();
        let lines = [tweet(30, "a :)"), tweet(4, "b :("), tweet(7, "c :) :("), tweet(5, "none")];
        let out = build(dir.path(), &lines.iter().map(String::as_str).collect::<Vec<_>>(), 2);
        let labels = fs::read_to_string(dir.path().join("out").join(LABELS_FILE)).unwrap();
        assert_eq!(labels, "4\tnegative\n30\tpositive\n");
        assert_eq!(out.report.omitted.mixed, 1);
        assert_eq!(out.report.omitted.no_symbols, 1);
        assert_eq!(out.report.ingest.records_parsed, 4);
        assert!(dir.path().join("out").join("yearly_counts.csv").exists());
    }

    #[test]
    fn empty_input_writes_empty_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        fs::create_dir_all(&input).unwrap();
        let config = BuildConfig {
            inputs: vec![input],
            output: dir.path().join("out"),
            ..BuildConfig::default()
        };
        let out = run_build(&config).unwrap();
        assert_eq!(out.report, BuildReport::default());
        assert_eq!(fs::read_to_string(dir.path().join("out").join(LABELS_FILE)).unwrap(), "");
        let stats = read_stats(&dir.path().join("out").join(STATS_FILE)).unwrap();
        assert!(stats.is_empty());
    }

    #[test]
    fn config_errors_exit_one() {
        let config = BuildConfig {
            inputs: vec!["x".into()],
            workers: 0,
            ..BuildConfig::default()
        };
        assert_eq!(run_build(&config).unwrap_err().exit_code(), 1);
        let config = BuildConfig {
            inputs: vec!["/definitely/missing".into()],
            ..BuildConfig::default()
        };
        assert_eq!(run_build(&config).unwrap_err().exit_code(), 2);
    }
}
