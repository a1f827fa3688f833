//! Streaming reader for Twitter-Stream-Grab style archives.
//!
//! An archive is a `.bz2` / `.json` / `.jsonl` file, a tar container of such
//! files, or a directory tree holding any of these. Each file (or tar entry)
//! is a *member*. Members are visited in lexicographic order of their path
//! and read line by line, so memory use does not depend on archive size.

use std::borrow::Cow;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom};
use std::path::{Path, PathBuf};

use bzip2::read::MultiBzDecoder;
use chrono::{DateTime, Datelike, Utc};
use log::warn;
use serde::de::IgnoredAny;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lines longer than this are discarded as malformed without being buffered.
pub const MAX_LINE_BYTES: usize = 16 << 20;

/// Default number of raw bytes a member may stage before its lines are
/// released ahead of the member's end-of-stream check.
pub const DEFAULT_STAGE_BYTES: usize = 64 << 20;

const READ_BUF_BYTES: usize = 256 << 10;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input path {0} does not exist")]
    NotFound(PathBuf),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TweetRecord {
    pub id: u64,
    pub text: String,
    pub language: String,
    pub created_at: DateTime<Utc>,
    pub year: i32,
    pub author_id: u64,
    pub source_tool: String,
    pub retweet_of: Option<u64>,
    pub retweet_text: Option<String>,
}

impl TweetRecord {
    /// Text used for matching: the full original text for retweets,
    /// otherwise the tweet's own text.
    pub fn label_text(&self) -> &str {
        self.retweet_text.as_deref().unwrap_or(&self.text)
    }

    pub fn is_retweet(&self) -> bool {
        self.retweet_of.is_some()
    }
}

/// Skip/emit counters. `lines_read = records_parsed + notices_skipped +
/// malformed_skipped` holds for every run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestCounters {
    pub lines_read: u64,
    pub records_parsed: u64,
    pub notices_skipped: u64,
    pub malformed_skipped: u64,
    pub members_corrupt: u64,
}

impl IngestCounters {
    pub fn record(&mut self, outcome: &ParseOutcome) {
        self.lines_read += 1;
        match outcome {
            ParseOutcome::Tweet(_) => self.records_parsed += 1,
            ParseOutcome::Notice | ParseOutcome::Blank => self.notices_skipped += 1,
            ParseOutcome::Malformed => self.malformed_skipped += 1,
        }
    }

    pub fn merge(&mut self, other: &IngestCounters) {
        self.lines_read += other.lines_read;
        self.records_parsed += other.records_parsed;
        self.notices_skipped += other.notices_skipped;
        self.malformed_skipped += other.malformed_skipped;
        self.members_corrupt += other.members_corrupt;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Compression {
    None,
    Bz2,
}

impl Compression {
    fn for_name(name: &str) -> Compression {
        if name.ends_with(".bz2") {
            Compression::Bz2
        } else {
            Compression::None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MemberSource {
    File(PathBuf),
    TarEntry { tar: PathBuf, offset: u64, size: u64 },
}

/// One readable unit of an archive: a file, or a file inside a tar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchiveMember {
    /// Path used for ordering and log messages (`/`-separated).
    pub name: String,
    source: MemberSource,
    compression: Compression,
}

impl ArchiveMember {
    pub fn open(&self) -> io::Result<MemberReader> {
        let raw: Box<dyn Read + Send> = match &self.source {
            MemberSource::File(path) => Box::new(File::open(path)?),
            MemberSource::TarEntry { tar, offset, size } => {
                let mut file = File::open(tar)?;
                file.seek(SeekFrom::Start(*offset))?;
                Box::new(file.take(*size))
            }
        };
        let decoded: Box<dyn Read + Send> = match self.compression {
            Compression::None => raw,
            Compression::Bz2 => Box::new(MultiBzDecoder::new(BufReader::with_capacity(READ_BUF_BYTES, raw))),
        };
        Ok(MemberReader {
            inner: BufReader::with_capacity(READ_BUF_BYTES, decoded),
        })
    }
}

/// Line reader over one decompressed member.
pub struct MemberReader {
    inner: BufReader<Box<dyn Read + Send>>,
}

impl MemberReader {
    /// Reads the next line (without its terminator) into `buf`. Returns
    /// `Ok(false)` at end of member. Lines above [`MAX_LINE_BYTES`] come back
    /// truncated to zero bytes plus a marker byte so they parse as malformed.
    pub fn next_line(&mut self, buf: &mut Vec<u8>) -> io::Result<bool> {
        buf.clear();
        let mut overlong = false;
        let mut any = false;
        loop {
            let available = self.inner.fill_buf()?;
            if available.is_empty() {
                break;
            }
            any = true;
            let (chunk, done) = match memchr(b'\n', available) {
                Some(i) => (&available[..i], Some(i + 1)),
                None => (available, None),
            };
            if !overlong {
                if buf.len() + chunk.len() > MAX_LINE_BYTES {
                    overlong = true;
                    buf.clear();
                } else {
                    buf.extend_from_slice(chunk);
                }
            }
            let consumed = done.unwrap_or(available.len());
            self.inner.consume(consumed);
            if done.is_some() {
                break;
            }
        }
        if overlong {
            buf.clear();
            buf.push(0);
        } else if buf.last() == Some(&b'\r') {
            buf.pop();
        }
        Ok(any)
    }
}

fn memchr(needle: u8, haystack: &[u8]) -> Option<usize> {
    haystack.iter().position(|&b| b == needle)
}

fn is_member_name(name: &str) -> bool {
    [".bz2", ".json", ".jsonl"].iter().any(|ext| name.ends_with(ext))
}

fn is_tar_name(name: &str) -> bool {
    name.ends_with(".tar")
}

fn tar_members(tar_path: &Path, prefix: &str) -> io::Result<Vec<ArchiveMember>> {
    let mut archive = tar::Archive::new(File::open(tar_path)?);
    let mut out = Vec::new();
    for entry in archive.entries_with_seek()? {
        let entry = entry?;
        if !entry.header().entry_type().is_file() {
            continue;
        }
        let inner = entry.path()?.to_string_lossy().replace('\\', "/");
        if !is_member_name(&inner) {
            continue;
        }
        out.push(ArchiveMember {
            name: format!("{prefix}/{inner}"),
            compression: Compression::for_name(&inner),
            source: MemberSource::TarEntry {
                tar: tar_path.to_path_buf(),
                offset: entry.raw_file_position(),
                size: entry.size(),
            },
        });
    }
    Ok(out)
}

/// Lists the members under `path` in reading order. Tar containers that
/// cannot be listed are reported through `unreadable` and skipped.
pub fn list_members(path: &Path, unreadable: &mut u64) -> Result<Vec<ArchiveMember>, IngestError> {
    if !path.exists() {
        return Err(IngestError::NotFound(path.to_path_buf()));
    }
    let mut members = Vec::new();
    let mut push_file = |file: &Path, name: String, members: &mut Vec<ArchiveMember>| {
        if is_tar_name(&name) {
            match tar_members(file, &name) {
                Ok(found) => members.extend(found),
                Err(err) => {
                    warn!("skipping unreadable tar {}: {err}", file.display());
                    *unreadable += 1;
                }
            }
        } else if is_member_name(&name) {
            members.push(ArchiveMember {
                compression: Compression::for_name(&name),
                source: MemberSource::File(file.to_path_buf()),
                name,
            });
        }
    };

    if path.is_file() {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if is_tar_name(&name) || is_member_name(&name) {
            push_file(path, name, &mut members);
        } else {
            // explicitly named files are read as plain JSON lines
            members.push(ArchiveMember {
                name,
                source: MemberSource::File(path.to_path_buf()),
                compression: Compression::None,
            });
        }
    } else {
        for entry in walkdir::WalkDir::new(path).follow_links(true) {
            let entry = entry.map_err(|e| IngestError::Io {
                path: path.to_path_buf(),
                source: e.into(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(path)
                .unwrap_or(entry.path())
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            push_file(entry.path(), rel, &mut members);
        }
    }
    members.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(members)
}

/// Deterministic line stream over a whole archive.
///
/// Lines of a member are held back until the member has been read to the
/// end, so a member whose compressed stream turns out to be corrupt
/// contributes no lines. Members larger than the stage limit are released
/// incrementally; if such a member fails late, the lines already released
/// stand and the member is still counted as corrupt.
pub struct ArchiveLines {
    members: std::vec::IntoIter<ArchiveMember>,
    current: Option<MemberReader>,
    staged: std::collections::VecDeque<Vec<u8>>,
    staged_bytes: usize,
    stage_limit: usize,
    releasing: bool,
    members_corrupt: u64,
}

pub fn open_archive(path: impl AsRef<Path>) -> Result<ArchiveLines, IngestError> {
    open_archive_with_stage(path, DEFAULT_STAGE_BYTES)
}

pub fn open_archive_with_stage(path: impl AsRef<Path>, stage_limit: usize) -> Result<ArchiveLines, IngestError> {
    let mut corrupt = 0;
    let members = list_members(path.as_ref(), &mut corrupt)?;
    Ok(ArchiveLines {
        members: members.into_iter(),
        current: None,
        staged: Default::default(),
        staged_bytes: 0,
        stage_limit,
        releasing: false,
        members_corrupt: corrupt,
    })
}

impl ArchiveLines {
    /// Members skipped because they could not be opened or decoded.
    pub fn members_corrupt(&self) -> u64 {
        self.members_corrupt
    }

    fn pop_staged(&mut self) -> Option<Vec<u8>> {
        let line = self.staged.pop_front()?;
        self.staged_bytes -= line.len();
        Some(line)
    }
}

impl Iterator for ArchiveLines {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        loop {
            if self.releasing {
                if let Some(line) = self.pop_staged() {
                    return Some(line);
                }
                self.releasing = self.current.is_some() && self.staged_bytes >= self.stage_limit;
            }

            let Some(reader) = self.current.as_mut() else {
                let member = self.members.next()?;
                match member.open() {
                    Ok(reader) => self.current = Some(reader),
                    Err(err) => {
                        warn!("skipping unreadable member {}: {err}", member.name);
                        self.members_corrupt += 1;
                    }
                }
                continue;
            };

            let mut buf = Vec::new();
            match reader.next_line(&mut buf) {
                Ok(true) => {
                    self.staged_bytes += buf.len();
                    self.staged.push_back(buf);
                    if self.staged_bytes >= self.stage_limit {
                        self.releasing = true;
                    }
                }
                Ok(false) => {
                    self.current = None;
                    self.releasing = true;
                }
                Err(err) => {
                    warn!("member truncated or corrupt, discarding its staged lines: {err}");
                    self.members_corrupt += 1;
                    self.current = None;
                    self.staged.clear();
                    self.staged_bytes = 0;
                    self.releasing = false;
                }
            }
        }
    }
}

/// Result of interpreting one archive line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseOutcome {
    Tweet(TweetRecord),
    /// Delete, withheld, limit and similar stream notices.
    Notice,
    Blank,
    Malformed,
}

#[derive(Deserialize)]
struct RawUser {
    id: Option<u64>,
    id_str: Option<String>,
}

#[derive(Deserialize)]
struct RawExtended {
    full_text: Option<String>,
}

#[derive(Deserialize)]
struct RawTweet {
    id: Option<u64>,
    id_str: Option<String>,
    text: Option<String>,
    full_text: Option<String>,
    extended_tweet: Option<RawExtended>,
    lang: Option<String>,
    created_at: Option<String>,
    user: Option<RawUser>,
    source: Option<String>,
    retweeted_status: Option<Box<RawTweet>>,

    delete: Option<IgnoredAny>,
    status_withheld: Option<IgnoredAny>,
    user_withheld: Option<IgnoredAny>,
    scrub_geo: Option<IgnoredAny>,
    limit: Option<IgnoredAny>,
    disconnect: Option<IgnoredAny>,
    warning: Option<IgnoredAny>,
    status_deletion_notice: Option<IgnoredAny>,
}

impl RawTweet {
    fn is_notice(&self) -> bool {
        self.delete.is_some()
            || self.status_withheld.is_some()
            || self.user_withheld.is_some()
            || self.scrub_geo.is_some()
            || self.limit.is_some()
            || self.disconnect.is_some()
            || self.warning.is_some()
            || self.status_deletion_notice.is_some()
    }

    fn id(&self) -> Option<u64> {
        self.id.or_else(|| self.id_str.as_deref()?.parse().ok())
    }

    /// Longest text available: extended text, then `full_text`, then `text`.
    fn best_text(&mut self) -> Option<String> {
        self.extended_tweet
            .take()
            .and_then(|e| e.full_text)
            .or_else(|| self.full_text.take())
            .or_else(|| self.text.take())
    }
}

/// Interprets one archive line. Never panics, whatever the bytes.
pub fn classify_line(line: &[u8]) -> ParseOutcome {
    if line.iter().all(u8::is_ascii_whitespace) {
        return ParseOutcome::Blank;
    }
    let Ok(mut raw) = serde_json::from_slice::<RawTweet>(line) else {
        return ParseOutcome::Malformed;
    };
    if raw.is_notice() {
        return ParseOutcome::Notice;
    }
    match build_record(&mut raw) {
        Some(rec) => ParseOutcome::Tweet(rec),
        None => ParseOutcome::Malformed,
    }
}

fn build_record(raw: &mut RawTweet) -> Option<TweetRecord> {
    let id = raw.id().filter(|&id| id > 0)?;
    let text = unescape_entities(&raw.best_text()?).into_owned();
    let language = raw.lang.take()?;
    let (created_at, year) = parse_created_at(raw.created_at.as_deref()?).ok()?;
    if year < 2006 || year > Utc::now().year() {
        return None;
    }
    let user = raw.user.as_ref()?;
    let author_id = user.id.or_else(|| user.id_str.as_deref()?.parse().ok())?;
    let source_tool = parse_source(raw.source.as_deref()?).to_string();

    let (retweet_of, retweet_text) = match raw.retweeted_status.as_deref_mut() {
        Some(inner) => {
            let of = inner.id()?;
            if of == id {
                return None;
            }
            let text = inner.best_text().map(|t| unescape_entities(&t).into_owned());
            (Some(of), text)
        }
        None => (None, None),
    };

    Some(TweetRecord {
        id,
        text,
        language,
        created_at,
        year,
        author_id,
        source_tool,
        retweet_of,
        retweet_text,
    })
}

/// Parses one archive line into a tweet. Notices, blank lines and malformed
/// input all yield `None`.
pub fn parse_tweet(line: impl AsRef<[u8]>) -> Option<TweetRecord> {
    match classify_line(line.as_ref()) {
        ParseOutcome::Tweet(rec) => Some(rec),
        _ => None,
    }
}

/// Extracts the client display name from a `source` anchor.
pub fn parse_source(anchor: &str) -> &str {
    let trimmed = anchor.trim_start();
    if !trimmed.starts_with("<a") {
        return anchor;
    }
    let Some(open_end) = trimmed.find('>') else {
        return anchor;
    };
    let rest = &trimmed[open_end + 1..];
    let inner = match rest.rfind("</a>") {
        Some(close) => &rest[..close],
        None => rest,
    };
    inner.trim()
}

#[derive(Debug, Error)]
#[error("unrecognised created_at timestamp {0:?}")]
pub struct TimestampError(pub String);

/// Parses `Www Mmm DD HH:MM:SS +0000 YYYY`.
pub fn parse_created_at(s: &str) -> Result<(DateTime<Utc>, i32), TimestampError> {
    let ts = DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y")
        .map_err(|_| TimestampError(s.to_string()))?
        .with_timezone(&Utc);
    Ok((ts, ts.year()))
}

/// Undoes the `&lt;` / `&gt;` / `&amp;` escaping applied to tweet text, so
/// that emoticons such as `<3` and `>:(` are visible to the matcher.
pub fn unescape_entities(text: &str) -> Cow<'_, str> {
    if !text.contains('&') {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let (replacement, skip) = if tail.starts_with("&lt;") {
            ('<', 4)
        } else if tail.starts_with("&gt;") {
            ('>', 4)
        } else if tail.starts_with("&amp;") {
            ('&', 5)
        } else {
            ('&', 1)
        };
        out.push(replacement);
        rest = &tail[skip..];
    }
    out.push_str(rest);
    Cow::Owned(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn bz2(data: &[u8]) -> Vec<u8> {
        let mut enc = bzip2::write::BzEncoder::new(Vec::new(), bzip2::Compression::fast());
        enc.write_all(data).unwrap();
        enc.finish().unwrap()
    }

    const MINIMAL: &str = r#"{"id":10,"text":"hello :)","lang":"en","created_at":"Wed Jan 02 03:04:05 +0000 2013","user":{"id":5},"source":"<a href=\"http://twitter.com\" rel=\"nofollow\">Twitter Web Client</a>"}"#;

    #[test]
    fn parses_minimal_tweet() {
        let rec = parse_tweet(MINIMAL).unwrap();
        assert_eq!(rec.id, 10);
        assert_eq!(rec.language, "en");
        assert_eq!(rec.year, 2013);
        assert_eq!(rec.author_id, 5);
        assert_eq!(rec.source_tool, "Twitter Web Client");
        assert_eq!(rec.retweet_of, None);
    }

    #[test]
    fn notices_and_garbage() {
        assert_eq!(classify_line(br#"{"delete":{"status":{"id":1,"user_id":2}}}"#), ParseOutcome::Notice);
        assert_eq!(classify_line(br#"{"status_withheld":{"id":1}}"#), ParseOutcome::Notice);
        assert_eq!(classify_line(br#"{"limit":{"track":3}}"#), ParseOutcome::Notice);
        assert_eq!(classify_line(b"   "), ParseOutcome::Blank);
        assert_eq!(classify_line(b"{not json"), ParseOutcome::Malformed);
        assert_eq!(classify_line(b"[1,2]"), ParseOutcome::Malformed);
        assert_eq!(classify_line(br#"{"id":1,"text":"x"}"#), ParseOutcome::Malformed);
        assert_eq!(classify_line(&[0xff, 0xfe, b'{']), ParseOutcome::Malformed);
    }

    #[test]
    fn retweet_linkage() {
        let line = r#"{"id":50,"text":"RT @a: trunc","lang":"en","created_at":"Wed Jan 02 03:04:05 +0000 2013","user":{"id":5},"source":"web","retweeted_status":{"id":42,"text":"short","extended_tweet":{"full_text":"the whole thing &lt;3"},"lang":"en"}}"#;
        let rec = parse_tweet(line).unwrap();
        assert_eq!(rec.retweet_of, Some(42));
        assert_eq!(rec.retweet_text.as_deref(), Some("the whole thing <3"));
        assert_eq!(rec.label_text(), "the whole thing <3");
    }

    #[test]
    fn self_retweet_is_malformed() {
        let line = r#"{"id":42,"text":"x","lang":"en","created_at":"Wed Jan 02 03:04:05 +0000 2013","user":{"id":5},"source":"web","retweeted_status":{"id":42,"text":"x"}}"#;
        assert_eq!(classify_line(line.as_bytes()), ParseOutcome::Malformed);
    }

    #[test]
    fn full_text_precedence() {
        let line = r#"{"id":3,"text":"cut…","full_text":"full text :(","lang":"fr","created_at":"Wed Jan 02 03:04:05 +0000 2013","user":{"id_str":"77"},"source":"web","id_str":"3"}"#;
        let rec = parse_tweet(line).unwrap();
        assert_eq!(rec.text, "full text :(");
        assert_eq!(rec.author_id, 77);
    }

    #[test]
    fn source_examples() {
        assert_eq!(
            parse_source(r#"<a href="http://twitter.com/download/iphone" rel="nofollow">Twitter for iPhone</a>"#),
            "Twitter for iPhone"
        );
        assert_eq!(parse_source("web"), "web");
        assert_eq!(parse_source(r#"<a href="x"> Twitter for  Android </a>"#), "Twitter for  Android");
    }

    #[test]
    fn created_at_examples() {
        assert_eq!(parse_created_at("Wed Jan 02 03:04:05 +0000 2013").unwrap().1, 2013);
        let (ts, year) = parse_created_at("Tue Jun 30 23:59:59 +0000 2020").unwrap();
        assert_eq!(year, 2020);
        assert_eq!(ts.to_rfc3339(), "2020-06-30T23:59:59+00:00");
        assert!(parse_created_at("not a date").is_err());
    }

    #[test]
    fn out_of_range_year_is_malformed() {
        let line = MINIMAL.replace("2013", "1999");
        assert_eq!(classify_line(line.as_bytes()), ParseOutcome::Malformed);
    }

    #[test]
    fn entity_unescaping() {
        assert_eq!(unescape_entities("a &lt;3 &amp;&gt;:( &x"), "a <3 &>:( &x");
        assert!(matches!(unescape_entities("plain"), Cow::Borrowed(_)));
    }

    #[test]
    fn directory_order_and_empty_dir() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(open_archive(dir.path()).unwrap().count(), 0);

        std::fs::write(dir.path().join("b.json.bz2"), bz2(b"b1\n")).unwrap();
        std::fs::write(dir.path().join("a.json.bz2"), bz2(b"a1\na2\n")).unwrap();
        std::fs::write(dir.path().join("notes.txt"), b"ignored\n").unwrap();
        let lines: Vec<_> = open_archive(dir.path()).unwrap().collect();
        assert_eq!(lines, vec![b"a1".to_vec(), b"a2".to_vec(), b"b1".to_vec()]);
    }

    #[test]
    fn missing_path() {
        assert!(matches!(open_archive("/definitely/not/here"), Err(IngestError::NotFound(_))));
    }

    #[test]
    fn truncated_member_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("1.json.bz2"), bz2(b"one\n")).unwrap();
        let broken = bz2(b"two\nthree\n");
        std::fs::write(dir.path().join("2.json.bz2"), &broken[..broken.len() - 8]).unwrap();
        std::fs::write(dir.path().join("3.json.bz2"), bz2(b"four\n")).unwrap();
        let mut lines = open_archive(dir.path()).unwrap();
        let got: Vec<_> = lines.by_ref().collect();
        assert_eq!(got, vec![b"one".to_vec(), b"four".to_vec()]);
        assert_eq!(lines.members_corrupt(), 1);
    }

    #[test]
    fn tar_members_are_read_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        let tar_path = dir.path().join("day.tar");
        {
            let mut builder = tar::Builder::new(File::create(&tar_path).unwrap());
            for (name, body) in [("02/00.json.bz2", bz2(b"late\n")), ("01/59.json.bz2", bz2(b"early\n"))] {
                let mut header = tar::Header::new_gnu();
                header.set_size(body.len() as u64);
                header.set_mode(0o644);
                header.set_cksum();
                builder.append_data(&mut header, name, body.as_slice()).unwrap();
            }
            builder.finish().unwrap();
        }
        let lines: Vec<_> = open_archive(&tar_path).unwrap().collect();
        assert_eq!(lines, vec![b"early".to_vec(), b"late".to_vec()]);
    }

    #[test]
    fn crlf_and_missing_trailing_newline() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x.jsonl"), b"a\r\nb").unwrap();
        let lines: Vec<_> = open_archive(dir.path()).unwrap().collect();
        assert_eq!(lines, vec![b"a".to_vec(), b"b".to_vec()]);
    }

    #[test]
    fn small_stage_limit_still_yields_everything() {
        let dir = tempfile::tempdir().unwrap();
        let body: String = (0..100).map(|i| format!("line{i}\n")).collect();
        std::fs::write(dir.path().join("x.json.bz2"), bz2(body.as_bytes())).unwrap();
        let lines: Vec<_> = open_archive_with_stage(dir.path(), 16).unwrap().collect();
        assert_eq!(lines.len(), 100);
        assert_eq!(lines[99], b"line99".to_vec());
    }
}
