//! CSV rendering of analytics queries.
//!
//! | query              | columns                                          |
//! |--------------------|--------------------------------------------------|
//! | `yearly_counts`    | `year,language,count`                            |
//! | `kind_share`       | `year,language,total,emoji_share,emoticon_share` |
//! | `top_symbols`      | `year,polarity,rank,glyph,count`                 |
//! | `polarity_ratio`   | `year,language,positive,negative,ratio`          |
//! | `length_histogram` | `language,length,count`                          |
//! | `user_source`      | `section,name,count,share`                       |
//! | `platform_top`     | `source,polarity,rank,glyph,count`               |
//!
//! Shares and ratios carry six decimal digits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use thiserror::Error;

use crate::analytics::{Share, StatsBundle, UndefinedCell};
use crate::lexicon::Polarity;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Undefined(#[from] UndefinedCell),
    #[error("{0}")]
    Query(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    YearlyCounts,
    KindShare,
    TopSymbols,
    PolarityRatio,
    LengthHistogram,
    UserSource,
    PlatformTop,
}

impl QueryKind {
    pub const ALL: [QueryKind; 7] = [
        QueryKind::YearlyCounts,
        QueryKind::KindShare,
        QueryKind::TopSymbols,
        QueryKind::PolarityRatio,
        QueryKind::LengthHistogram,
        QueryKind::UserSource,
        QueryKind::PlatformTop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryKind::YearlyCounts => "yearly_counts",
            QueryKind::KindShare => "kind_share",
            QueryKind::TopSymbols => "top_symbols",
            QueryKind::PolarityRatio => "polarity_ratio",
            QueryKind::LengthHistogram => "length_histogram",
            QueryKind::UserSource => "user_source",
            QueryKind::PlatformTop => "platform_top",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueryKind::ALL
            .into_iter()
            .find(|q| q.name() == s)
            .ok_or_else(|| format!("unknown query {s:?}"))
    }
}

/// Optional filters; unset filters mean "all".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryParams {
    pub year: Option<i32>,
    pub language: Option<String>,
    pub polarity: Option<Polarity>,
    pub source: Option<String>,
    /// Symbols per ranking.
    pub k: usize,
    /// Source tools listed by `user_source` (and ranked by `platform_top`
    /// when no source is given).
    pub m: usize,
}

impl Default for QueryParams {
    fn default() -> Self {
        Self {
            year: None,
            language: None,
            polarity: None,
            source: None,
            k: 5,
            m: 3,
        }
    }
}

impl QueryParams {
    fn cell_selected(&self, year: i32, language: &str) -> bool {
        self.year.is_none_or(|y| y == year) && self.language.as_deref().is_none_or(|l| l == language)
    }

    fn exact_cell(&self) -> Option<(i32, &str)> {
        Some((self.year?, self.language.as_deref()?))
    }

    fn polarities(&self) -> Vec<Polarity> {
        match self.polarity {
            Some(p) => vec![p],
            None => Polarity::ALL.to_vec(),
        }
    }
}

pub fn write_query_csv(
    stats: &StatsBundle,
    query: QueryKind,
    params: &QueryParams,
    w: impl Write,
) -> Result<(), ExportError> {
    if params.k == 0 {
        return Err(ExportError::Query("k must be at least 1".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    match query {
        QueryKind::YearlyCounts => {
            out.write_record(["year", "language", "count"])?;
            for row in stats.query_yearly_counts() {
                if params.cell_selected(row.year, &row.language) {
                    out.write_record([row.year.to_string(), row.language, row.count.to_string()])?;
                }
            }
        }
        QueryKind::KindShare => {
            out.write_record(["year", "language", "total", "emoji_share", "emoticon_share"])?;
            if let Some((year, language)) = params.exact_cell() {
                stats.query_kind_share(year, language)?;
            }
            for ((year, language), cell) in stats.cells() {
                if !params.cell_selected(year, language) {
                    continue;
                }
                let Ok(share) = stats.query_kind_share(year, language) else {
                    continue;
                };
                out.write_record([
                    year.to_string(),
                    language.to_string(),
                    cell.total.to_string(),
                    Share(share.emoji).to_string(),
                    Share(share.emoticon).to_string(),
                ])?;
            }
        }
        QueryKind::TopSymbols => {
            out.write_record(["year", "polarity", "rank", "glyph", "count"])?;
            let years = match params.year {
                Some(y) => vec![y],
                None => stats.years(),
            };
            for year in years {
                for polarity in params.polarities() {
                    for (rank, (glyph, count)) in stats.query_top_symbols(year, polarity, params.k).into_iter().enumerate() {
                        out.write_record([
                            year.to_string(),
                            polarity.to_string(),
                            (rank + 1).to_string(),
                            glyph,
                            count.to_string(),
                        ])?;
                    }
                }
            }
        }
        QueryKind::PolarityRatio => {
            out.write_record(["year", "language", "positive", "negative", "ratio"])?;
            if let Some((year, language)) = params.exact_cell() {
                stats.query_polarity_ratio(year, language)?;
            }
            for ((year, language), cell) in stats.cells() {
                if !params.cell_selected(year, language) {
                    continue;
                }
                let Ok(ratio) = stats.query_polarity_ratio(year, language) else {
                    continue;
                };
                out.write_record([
                    year.to_string(),
                    language.to_string(),
                    cell.positive.to_string(),
                    cell.negative.to_string(),
                    Share(ratio).to_string(),
                ])?;
            }
        }
        QueryKind::LengthHistogram => {
            out.write_record(["language", "length", "count"])?;
            let languages: Vec<String> = match &params.language {
                Some(l) => vec![l.clone()],
                None => stats.languages_with_lengths().map(str::to_string).collect(),
            };
            for language in languages {
                for (length, count) in stats.query_length_histogram(&language) {
                    out.write_record([language.clone(), length.to_string(), count.to_string()])?;
                }
            }
        }
        QueryKind::UserSource => {
            out.write_record(["section", "name", "count", "share"])?;
            let s = stats.query_user_source_stats(params.m);
            let multi = s.distinct_authors - s.single_tweet_authors;
            let multi_share = if s.distinct_authors == 0 { 0.0 } else { 1.0 - s.single_tweet_share };
            let rows = [
                ("tweets", "total", s.total_tweets, None),
                ("authors", "distinct", s.distinct_authors, None),
                ("authors", "max_tweets_per_author", s.max_tweets_per_author, None),
                ("authors", "single_tweet", s.single_tweet_authors, Some(s.single_tweet_share)),
                ("authors", "multi_tweet", multi, Some(multi_share)),
                ("sources", "distinct", s.distinct_sources, None),
            ];
            for (section, name, count, share) in rows {
                out.write_record([
                    section.to_string(),
                    name.to_string(),
                    count.to_string(),
                    share.map(|v| Share(v).to_string()).unwrap_or_default(),
                ])?;
            }
            for src in s.top_sources {
                out.write_record(["source".to_string(), src.source, src.count.to_string(), Share(src.share).to_string()])?;
            }
        }
        QueryKind::PlatformTop => {
            out.write_record(["source", "polarity", "rank", "glyph", "count"])?;
            let sources: Vec<String> = match &params.source {
                Some(s) => vec![s.clone()],
                None => stats
                    .query_user_source_stats(params.m)
                    .top_sources
                    .into_iter()
                    .map(|s| s.source)
                    .collect(),
            };
            for source in sources {
                for polarity in params.polarities() {
                    let ranked = stats.query_platform_top_symbols(&source, polarity, params.k);
                    for (rank, (glyph, count)) in ranked.into_iter().enumerate() {
                        out.write_record([
                            source.clone(),
                            polarity.to_string(),
                            (rank + 1).to_string(),
                            glyph,
                            count.to_string(),
                        ])?;
                    }
                }
            }
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
