//! Deterministic synthetic tweet archives for tests and benchmarks.
//!
//! The generator mixes in everything the pipeline has to cope with:
//! in-scope and out-of-scope languages, retweet chains with and without
//! their original, mixed-polarity texts, emojis glued to words or carrying
//! skin-tone/variation marks, HTML-escaped emoticons, truncated texts with
//! an extended form, exact duplicate lines, delete notices, blank and
//! malformed lines.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::lexicon::{Lexicon, Polarity, SymbolKind};

const LANGUAGES: [&str; 10] = ["ar", "de", "en", "es", "fr", "it", "zh", "pt", "ja", "und"];
const SOURCES: [(&str, &str); 6] = [
    ("http://twitter.com/download/iphone", "Twitter for iPhone"),
    ("http://twitter.com/download/android", "Twitter for Android"),
    ("http://twitter.com", "Twitter Web Client"),
    ("https://about.twitter.com/products/tweetdeck", "TweetDeck"),
    ("http://instagram.com", "Instagram"),
    ("https://mobile.twitter.com", "Mobile Web (M2)"),
];
const WORDS: [&str; 24] = [
    "the", "show", "today", "great", "tired", "vamos", "bonjour", "ciao", "heute", "مرحبا", "你好", "weekend",
    "coffee", "match", "train", "again", "why", "love", "work", "rain", "finally", "party", "exam", "news",
];
const NOISE_EMOJI: [&str; 5] = ["🎉", "🔥", "🙏", "✨", "🤔"];
const MARKS: [&str; 4] = ["\u{FE0F}", "\u{1F3FB}", "\u{1F3FD}", "\u{1F3FF}"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    /// Filler bytes added to each tweet's user description, to control
    /// bytes per line.
    pub pad_bytes: usize,
    /// Probability that a line is a delete notice, blank or malformed.
    pub noise_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            pad_bytes: 0,
            noise_rate: 0.08,
        }
    }
}

struct Original {
    id: u64,
    text: String,
    ts: i64,
    user: String,
}

/// Endless stream of archive lines. Tweet lines and noise lines are
/// interleaved; [`SynthStream::tweets_emitted`] counts tweet lines only.
pub struct SynthStream {
    rng: ChaCha8Rng,
    config: SynthConfig,
    counter: u64,
    tweets: u64,
    positive: Vec<(String, SymbolKind)>,
    negative: Vec<(String, SymbolKind)>,
    recent: Vec<Original>,
    phantoms: Vec<(u64, String, i64)>,
    last_line: Option<String>,
    padding: String,
}

impl SynthStream {
    pub fn new(config: SynthConfig) -> Self {
        let lex = Lexicon::canonical();
        let pick = |p: Polarity| {
            lex.symbols()
                .iter()
                .filter(|s| s.polarity == p)
                .map(|s| (s.glyph.clone(), s.kind))
                .collect::<Vec<_>>()
        };
        Self {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            padding: "x".repeat(config.pad_bytes),
            config,
            counter: 0,
            tweets: 0,
            positive: pick(Polarity::Positive),
            negative: pick(Polarity::Negative),
            recent: Vec::new(),
            phantoms: Vec::new(),
            last_line: None,
        }
    }

    pub fn tweets_emitted(&self) -> u64 {
        self.tweets
    }

    fn next_id(&mut self) -> u64 {
        self.counter += 1;
        // odd multiplier: bijective mod 2^40, so ids are unique but unordered
        (self.counter.wrapping_mul(0x9E37_79B1) & ((1 << 40) - 1)) + 1
    }

    fn timestamp(&mut self) -> i64 {
        let start = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap().timestamp();
        let end = Utc.with_ymd_and_hms(2020, 6, 30, 23, 59, 59).unwrap().timestamp();
        self.rng.gen_range(start..=end)
    }

    fn symbol(&mut self, polarity: Polarity) -> String {
        let pool = match polarity {
            Polarity::Positive => &self.positive,
            Polarity::Negative => &self.negative,
        };
        // skew towards the head of the list so rankings have a shape
        let idx = (self.rng.gen::<f64>().powi(3) * pool.len() as f64) as usize;
        let (glyph, kind) = pool[idx.min(pool.len() - 1)].clone();
        let mut glyph = glyph;
        if kind == SymbolKind::Emoji && self.rng.gen_bool(0.15) {
            glyph.push_str(MARKS.choose(&mut self.rng).unwrap());
        }
        if glyph.contains('<') || glyph.contains('>') || glyph.contains('&') {
            glyph = glyph.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        }
        glyph
    }

    fn text(&mut self) -> String {
        let n_words = self.rng.gen_range(1..14);
        let mut tokens: Vec<String> = (0..n_words).map(|_| WORDS.choose(&mut self.rng).unwrap().to_string()).collect();
        let roll: f64 = self.rng.gen();
        let plan: &[Polarity] = if roll < 0.25 {
            &[]
        } else if roll < 0.55 {
            &[Polarity::Positive]
        } else if roll < 0.8 {
            &[Polarity::Negative]
        } else {
            &[Polarity::Positive, Polarity::Negative]
        };
        for &polarity in plan {
            for _ in 0..self.rng.gen_range(1..=3) {
                let sym = self.symbol(polarity);
                let at = self.rng.gen_range(0..=tokens.len());
                if self.rng.gen_bool(0.2) && !tokens.is_empty() {
                    // glue to a neighbouring word; only emojis should still match
                    let j = at.min(tokens.len() - 1);
                    tokens[j].push_str(&sym);
                } else {
                    tokens.insert(at, sym);
                }
            }
        }
        if self.rng.gen_bool(0.1) {
            tokens.push(format!("http://t.co/{}:/x", self.rng.gen_range(100..999)));
        }
        if self.rng.gen_bool(0.1) {
            tokens.push(NOISE_EMOJI.choose(&mut self.rng).unwrap().to_string());
        }
        let sep = if self.rng.gen_bool(0.1) { "\n" } else { " " };
        tokens.join(sep)
    }

    fn noise_line(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 | 1 => {
                let id = self.rng.gen_range(1..u64::MAX / 2);
                json!({"delete": {"status": {"id": id, "id_str": id.to_string(), "user_id": 3}, "timestamp_ms": "1"}})
                    .to_string()
            }
            2 => String::new(),
            3 => "{\"created_at\":\"Wed Jan 02 03:04:05 +0000 2013\",\"id\":12,\"text\":\"cut".to_string(),
            4 => json!({"id": 5, "text": "no language :)", "created_at": "Wed Jan 02 03:04:05 +0000 2013"}).to_string(),
            _ => json!({"id": 6, "text": "bad date :)", "lang": "en", "created_at": "yesterday",
                        "user": {"id": 1}, "source": "web"})
            .to_string(),
        }
    }

    fn tweet_line(&mut self) -> String {
        self.tweets += 1;
        let id = self.next_id();
        let ts = self.timestamp();
        let lang = LANGUAGES[self.rng.gen_range(0..LANGUAGES.len())];
        let author = self.rng.gen_range(1..=2_000u64);
        let screen_name = format!("user{author}");
        let (href, name) = SOURCES[self.rng.gen_range(0..SOURCES.len())];
        let source = format!("<a href=\"{href}\" rel=\"nofollow\">{name}</a>");
        let created_at = Utc.timestamp_opt(ts, 0).unwrap().format("%a %b %d %H:%M:%S +0000 %Y").to_string();

        let mut tweet = json!({
            "created_at": created_at,
            "id": id,
            "id_str": id.to_string(),
            "source": source,
            "user": {"id": author, "id_str": author.to_string(), "screen_name": screen_name, "description": self.padding},
            "lang": lang,
            "entities": {"hashtags": [], "urls": [], "user_mentions": []},
        });

        let roll: f64 = self.rng.gen();
        if roll < 0.15 && !self.recent.is_empty() {
            // retweet of an original present in the stream
            let i = self.rng.gen_range(0..self.recent.len());
            let orig = &self.recent[i];
            tweet["text"] = json!(format!("RT @{}: {}", orig.user, truncate(&orig.text, 60)));
            tweet["retweeted_status"] = json!({
                "id": orig.id, "id_str": orig.id.to_string(), "text": orig.text,
                "created_at": Utc.timestamp_opt(orig.ts, 0).unwrap().format("%a %b %d %H:%M:%S +0000 %Y").to_string(),
                "lang": lang, "user": {"id": 1, "screen_name": orig.user},
            });
        } else if roll < 0.25 {
            // retweet of an original that never appears
            if self.phantoms.is_empty() || self.rng.gen_bool(0.3) {
                let pid = self.next_id();
                let text = self.text();
                self.phantoms.push((pid, text, ts));
                if self.phantoms.len() > 50 {
                    self.phantoms.remove(0);
                }
            }
            let (pid, text, _) = self.phantoms[self.rng.gen_range(0..self.phantoms.len())].clone();
            let outer = format!("RT @ghost: {}", truncate(&text, 60));
            tweet["text"] = json!(outer);
            let mut inner = json!({"id": pid, "id_str": pid.to_string(), "lang": lang, "user": {"id": 2}});
            if self.rng.gen_bool(0.5) {
                inner["text"] = json!(truncate(&text, 40));
                inner["extended_tweet"] = json!({"full_text": text});
            } else {
                inner["text"] = json!(text);
            }
            tweet["retweeted_status"] = inner;
        } else {
            let text = self.text();
            if text.chars().count() > 30 && self.rng.gen_bool(0.3) {
                tweet["text"] = json!(truncate(&text, 30));
                tweet["truncated"] = json!(true);
                tweet["extended_tweet"] = json!({"full_text": text});
            } else {
                tweet["text"] = json!(text);
            }
            self.recent.push(Original {
                id,
                text,
                ts,
                user: screen_name,
            });
            if self.recent.len() > 200 {
                self.recent.swap_remove(self.rng.gen_range(0..self.recent.len()));
            }
        }
        tweet.to_string()
    }
}

fn truncate(text: &str, chars: usize) -> String {
    let mut out: String = text.chars().take(chars).collect();
    if out.len() < text.len() {
        out.push('…');
    }
    out
}

impl Iterator for SynthStream {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        if let Some(prev) = &self.last_line {
            if self.rng.gen_bool(0.01) {
                return Some(prev.clone());
            }
        }
        let line = if self.rng.gen_bool(self.config.noise_rate) {
            self.noise_line()
        } else {
            self.tweet_line()
        };
        self.last_line = Some(line.clone());
        Some(line)
    }
}

/// Lines up to and including the `tweets`-th tweet line.
pub fn corpus_lines(config: SynthConfig, tweets: u64) -> Vec<String> {
    let mut stream = SynthStream::new(config);
    let mut lines = Vec::new();
    while stream.tweets_emitted() < tweets {
        lines.push(stream.next().unwrap());
    }
    lines
}

/// How generated lines are laid out on disk.
#[derive(Debug, Clone)]
pub struct ArchiveLayout {
    pub members: usize,
    /// Trailing members packed into `bundle.tar` instead of loose files.
    pub tar_members: usize,
    pub bz2: bool,
}

impl Default for ArchiveLayout {
    fn default() -> Self {
        Self {
            members: 8,
            tar_members: 3,
            bz2: true,
        }
    }
}

fn encode(body: &[u8], bz2: bool) -> io::Result<Vec<u8>> {
    if !bz2 {
        return Ok(body.to_vec());
    }
    let mut enc = bzip2::write::BzEncoder::new(Vec::new(), bzip2::Compression::fast());
    enc.write_all(body)?;
    enc.finish()
}

/// Writes `lines` under `dir` split into members, in archive order.
pub fn write_archive(dir: &Path, lines: &[String], layout: &ArchiveLayout) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let members = layout.members.max(1);
    let per = lines.len().div_ceil(members).max(1);
    let ext = if layout.bz2 { "json.bz2" } else { "jsonl" };
    let loose = members.saturating_sub(layout.tar_members);
    let mut written = Vec::new();
    let mut tar_entries = Vec::new();
    for (i, chunk) in lines.chunks(per).enumerate() {
        let mut body = chunk.join("\n");
        body.push('\n');
        let data = encode(body.as_bytes(), layout.bz2)?;
        if i < loose {
            let path = dir.join(format!("part-{i:04}.{ext}"));
            fs::write(&path, data)?;
            written.push(path);
        } else {
            tar_entries.push((format!("inner/part-{i:04}.{ext}"), data));
        }
    }
    if !tar_entries.is_empty() {
        let path = dir.join("zz-bundle.tar");
        let mut builder = tar::Builder::new(File::create(&path)?);
        for (name, data) in tar_entries {
            let mut header = tar::Header::new_gnu();
            header.set_size(data.len() as u64);
            header.set_mode(0o644);
            header.set_cksum();
            builder.append_data(&mut header, name, data.as_slice())?;
        }
        builder.finish()?;
        written.push(path);
    }
    Ok(written)
}

/// Streams generated lines into plain `.jsonl` members of roughly
/// `member_bytes` each until `total_bytes` have been written.
pub fn write_sized_archive(dir: &Path, config: SynthConfig, total_bytes: u64, member_bytes: u64) -> io::Result<u64> {
    fs::create_dir_all(dir)?;
    let mut stream = SynthStream::new(config);
    let mut written = 0u64;
    let mut member = 0usize;
    while written < total_bytes {
        let path = dir.join(format!("part-{member:05}.jsonl"));
        let mut out = BufWriter::with_capacity(1 << 20, File::create(path)?);
        let mut in_member = 0u64;
        while in_member < member_bytes && written < total_bytes {
            let line = stream.next().unwrap();
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
            in_member += line.len() as u64 + 1;
            written += line.len() as u64 + 1;
        }
        out.flush()?;
        member += 1;
    }
    Ok(written)
}
