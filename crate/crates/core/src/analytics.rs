//! Corpus statistics as a mergeable accumulator.
//!
//! A [`StatsBundle`] only holds counters keyed by ordered maps, so merging is
//! cell-wise addition (associative, commutative, empty bundle as identity)
//! and serialization is deterministic. Every query is a read-only
//! projection of the counters.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::labeller::LabelledTweet;
use crate::lexicon::{Polarity, SymbolKind};

/// Lengths above this fall into the last histogram bucket.
pub const MAX_LENGTH_BUCKET: u32 = 400;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub total: u64,
    pub positive: u64,
    pub negative: u64,
    pub with_emoji: u64,
    pub with_emoticon: u64,
}

impl CellCounts {
    fn add(&mut self, other: &CellCounts) {
        self.total += other.total;
        self.positive += other.positive;
        self.negative += other.negative;
        self.with_emoji += other.with_emoji;
        self.with_emoticon += other.with_emoticon;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StatsBundle {
    cells: BTreeMap<(i32, String), CellCounts>,
    year_symbols: BTreeMap<(i32, Polarity, String), u64>,
    source_symbols: BTreeMap<(String, Polarity, String), u64>,
    lengths: BTreeMap<String, BTreeMap<u32, u64>>,
    authors: BTreeMap<u64, u64>,
    sources: BTreeMap<String, u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no defined value for year {year}, language {language:?}")]
pub struct UndefinedCell {
    pub year: i32,
    pub language: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KindShare {
    pub emoji: f64,
    pub emoticon: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct YearlyCount {
    pub year: i32,
    pub language: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceShare {
    pub source: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserSourceSummary {
    pub total_tweets: u64,
    pub distinct_authors: u64,
    pub max_tweets_per_author: u64,
    pub single_tweet_authors: u64,
    pub single_tweet_share: f64,
    pub distinct_sources: u64,
    pub top_sources: Vec<SourceShare>,
}

fn add_map<K: Ord + Clone, V: Copy + std::ops::AddAssign + Default>(into: &mut BTreeMap<K, V>, from: &BTreeMap<K, V>) {
    for (k, v) in from {
        *into.entry(k.clone()).or_default() += *v;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn rank(mut counts: Vec<(String, u64)>, k: usize) -> Vec<(String, u64)> {
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    counts.truncate(k);
    counts
}

impl StatsBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty() && self.authors.is_empty()
    }

    pub fn accumulate(&mut self, t: &LabelledTweet) {
        let rec = &t.record;
        let cell = self.cells.entry((rec.year, rec.language.clone())).or_default();
        cell.total += 1;
        match t.label {
            Polarity::Positive => cell.positive += 1,
            Polarity::Negative => cell.negative += 1,
        }
        if t.hits.has_kind(SymbolKind::Emoji) {
            cell.with_emoji += 1;
        }
        if t.hits.has_kind(SymbolKind::Emoticon) {
            cell.with_emoticon += 1;
        }

        for hit in t.hits.hits(t.label) {
            *self
                .year_symbols
                .entry((rec.year, t.label, hit.glyph.clone()))
                .or_default() += 1;
            *self
                .source_symbols
                .entry((rec.source_tool.clone(), t.label, hit.glyph.clone()))
                .or_default() += 1;
        }

        let length = (rec.label_text().chars().count() as u32).clamp(1, MAX_LENGTH_BUCKET);
        *self
            .lengths
            .entry(rec.language.clone())
            .or_default()
            .entry(length)
            .or_default() += 1;
        *self.authors.entry(rec.author_id).or_default() += 1;
        *self.sources.entry(rec.source_tool.clone()).or_default() += 1;
    }

    /// Adds every counter of `other` into `self`.
    pub fn merge_from(&mut self, other: &StatsBundle) {
        for (k, v) in &other.cells {
            self.cells.entry(k.clone()).or_default().add(v);
        }
        add_map(&mut self.year_symbols, &other.year_symbols);
        add_map(&mut self.source_symbols, &other.source_symbols);
        for (lang, hist) in &other.lengths {
            add_map(self.lengths.entry(lang.clone()).or_default(), hist);
        }
        add_map(&mut self.authors, &other.authors);
        add_map(&mut self.sources, &other.sources);
    }

    pub fn cell(&self, year: i32, language: &str) -> Option<&CellCounts> {
        self.cells.get(&(year, language.to_string()))
    }

    pub fn cells(&self) -> impl Iterator<Item = ((i32, &str), &CellCounts)> {
        self.cells.iter().map(|((y, l), c)| ((*y, l.as_str()), c))
    }

    /// Sum over every (year, language) cell.
    pub fn totals(&self) -> CellCounts {
        let mut total = CellCounts::default();
        for cell in self.cells.values() {
            total.add(cell);
        }
        total
    }

    pub fn years(&self) -> Vec<i32> {
        let mut years: Vec<i32> = self.cells.keys().map(|(y, _)| *y).collect();
        years.dedup();
        years
    }

    pub fn query_yearly_counts(&self) -> Vec<YearlyCount> {
        self.cells
            .iter()
            .map(|((year, language), c)| YearlyCount {
                year: *year,
                language: language.clone(),
                count: c.total,
            })
            .collect()
    }

    pub fn query_kind_share(&self, year: i32, language: &str) -> Result<KindShare, UndefinedCell> {
        match self.cell(year, language) {
            Some(c) if c.total > 0 => Ok(KindShare {
                emoji: ratio(c.with_emoji, c.total),
                emoticon: ratio(c.with_emoticon, c.total),
            }),
            _ => Err(UndefinedCell {
                year,
                language: language.to_string(),
            }),
        }
    }

    /// Top `k` glyphs of one polarity in one year, over all languages.
    /// Ties are ordered by glyph codepoints.
    pub fn query_top_symbols(&self, year: i32, polarity: Polarity, k: usize) -> Vec<(String, u64)> {
        let counts = self
            .year_symbols
            .range((year, polarity, String::new())..)
            .take_while(|((y, p, _), _)| *y == year && *p == polarity)
            .map(|((_, _, g), c)| (g.clone(), *c))
            .collect();
        rank(counts, k)
    }

    /// Negative-to-positive tweet ratio.
    pub fn query_polarity_ratio(&self, year: i32, language: &str) -> Result<f64, UndefinedCell> {
        match self.cell(year, language) {
            Some(c) if c.positive > 0 => Ok(c.negative as f64 / c.positive as f64),
            _ => Err(UndefinedCell {
                year,
                language: language.to_string(),
            }),
        }
    }

    pub fn query_length_histogram(&self, language: &str) -> BTreeMap<u32, u64> {
        self.lengths.get(language).cloned().unwrap_or_default()
    }

    pub fn languages_with_lengths(&self) -> impl Iterator<Item = &str> {
        self.lengths.keys().map(String::as_str)
    }

    pub fn query_user_source_stats(&self, top_m: usize) -> UserSourceSummary {
        let total_tweets: u64 = self.sources.values().sum();
        let distinct_authors = self.authors.len() as u64;
        let single = self.authors.values().filter(|&&c| c == 1).count() as u64;
        let top = rank(self.sources.iter().map(|(s, c)| (s.clone(), *c)).collect(), top_m);
        UserSourceSummary {
            total_tweets,
            distinct_authors,
            max_tweets_per_author: self.authors.values().copied().max().unwrap_or(0),
            single_tweet_authors: single,
            single_tweet_share: ratio(single, distinct_authors),
            distinct_sources: self.sources.len() as u64,
            top_sources: top
                .into_iter()
                .map(|(source, count)| SourceShare {
                    share: ratio(count, total_tweets),
                    source,
                    count,
                })
                .collect(),
        }
    }

    pub fn query_platform_top_symbols(&self, source_tool: &str, polarity: Polarity, k: usize) -> Vec<(String, u64)> {
        let counts = self
            .source_symbols
            .range((source_tool.to_string(), polarity, String::new())..)
            .take_while(|((s, p, _), _)| s == source_tool && *p == polarity)
            .map(|((_, _, g), c)| (g.clone(), *c))
            .collect();
        rank(counts, k)
    }
}

/// Cell-wise sum of two bundles.
pub fn merge(mut a: StatsBundle, b: &StatsBundle) -> StatsBundle {
    a.merge_from(b);
    a
}

/// A fraction printed with exactly six decimal digits in JSON and CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Share(pub f64);

impl fmt::Display for Share {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

impl Serialize for Share {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(self.to_string()).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

// On-disk layout: flat row lists so the JSON stays readable and keys stay
// plain strings.

#[derive(Serialize, Deserialize)]
struct CellRow<L> {
    year: i32,
    language: L,
    #[serde(flatten)]
    counts: CellCounts,
}

#[derive(Serialize, Deserialize)]
struct YearSymbolRow<G> {
    year: i32,
    polarity: Polarity,
    glyph: G,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct SourceSymbolRow<G> {
    source: G,
    polarity: Polarity,
    glyph: G,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct LengthRow<L> {
    language: L,
    length: u32,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct SourceRow<S> {
    source: S,
    count: u64,
}

impl Serialize for StatsBundle {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let cells: Vec<_> = self
            .cells
            .iter()
            .map(|((year, language), counts)| CellRow {
                year: *year,
                language: language.as_str(),
                counts: *counts,
            })
            .collect();
        let year_symbols: Vec<_> = self
            .year_symbols
            .iter()
            .map(|((year, polarity, glyph), count)| YearSymbolRow {
                year: *year,
                polarity: *polarity,
                glyph: glyph.as_str(),
                count: *count,
            })
            .collect();
        let source_symbols: Vec<_> = self
            .source_symbols
            .iter()
            .map(|((source, polarity, glyph), count)| SourceSymbolRow {
                source: source.as_str(),
                polarity: *polarity,
                glyph: glyph.as_str(),
                count: *count,
            })
            .collect();
        let lengths: Vec<_> = self
            .lengths
            .iter()
            .flat_map(|(language, hist)| {
                hist.iter().map(move |(length, count)| LengthRow {
                    language: language.as_str(),
                    length: *length,
                    count: *count,
                })
            })
            .collect();
        let authors: Vec<(u64, u64)> = self.authors.iter().map(|(a, c)| (*a, *c)).collect();
        let sources: Vec<_> = self
            .sources
            .iter()
            .map(|(source, count)| SourceRow {
                source: source.as_str(),
                count: *count,
            })
            .collect();

        let mut s = serializer.serialize_struct("StatsBundle", 6)?;
        s.serialize_field("cells", &cells)?;
        s.serialize_field("year_symbols", &year_symbols)?;
        s.serialize_field("source_symbols", &source_symbols)?;
        s.serialize_field("lengths", &lengths)?;
        s.serialize_field("authors", &authors)?;
        s.serialize_field("sources", &sources)?;
        s.end()
    }
}

#[derive(Deserialize)]
struct StatsFile {
    #[serde(default)]
    cells: Vec<CellRow<String>>,
    #[serde(default)]
    year_symbols: Vec<YearSymbolRow<String>>,
    #[serde(default)]
    source_symbols: Vec<SourceSymbolRow<String>>,
    #[serde(default)]
    lengths: Vec<LengthRow<String>>,
    #[serde(default)]
    authors: Vec<(u64, u64)>,
    #[serde(default)]
    sources: Vec<SourceRow<String>>,
}

impl<'de> Deserialize<'de> for StatsBundle {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = StatsFile::deserialize(deserializer)?;
        let mut bundle = StatsBundle::default();
        for row in file.cells {
            bundle.cells.entry((row.year, row.language)).or_default().add(&row.counts);
        }
        for row in file.year_symbols {
            *bundle.year_symbols.entry((row.year, row.polarity, row.glyph)).or_default() += row.count;
        }
        for row in file.source_symbols {
            *bundle
                .source_symbols
                .entry((row.source, row.polarity, row.glyph))
                .or_default() += row.count;
        }
        for row in file.lengths {
            *bundle
                .lengths
                .entry(row.language)
                .or_default()
                .entry(row.length)
                .or_default() += row.count;
        }
        for (author, count) in file.authors {
            *bundle.authors.entry(author).or_default() += count;
        }
        for row in file.sources {
            *bundle.sources.entry(row.source).or_default() += row.count;
        }
        Ok(bundle)
    }
}
