//! Distant-supervision labelling of single tweets.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;
use crate::lexicon::{canonicalize_glyph, Lexicon, Polarity, SymbolKind};

/// Language codes sampled by default.
pub const DEFAULT_LANGUAGES: [&str; 7] = ["ar", "de", "en", "es", "fr", "it", "zh"];

fn is_token_separator(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\r' | '\n')
}

/// Whitespace tokens of `text`: split on runs of space, tab, CR and LF.
pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_token_separator).filter(|t| !t.is_empty())
}

pub fn tokenize(text: &str) -> Vec<&str> {
    tokens(text).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Hit {
    pub glyph: String,
    pub kind: SymbolKind,
}

/// Symbol occurrences found in a tweet, one entry per occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchResult {
    pub positive_hits: Vec<Hit>,
    pub negative_hits: Vec<Hit>,
}

impl MatchResult {
    pub fn is_empty(&self) -> bool {
        self.positive_hits.is_empty() && self.negative_hits.is_empty()
    }

    pub fn is_mixed(&self) -> bool {
        !self.positive_hits.is_empty() && !self.negative_hits.is_empty()
    }

    pub fn hits(&self, polarity: Polarity) -> &[Hit] {
        match polarity {
            Polarity::Positive => &self.positive_hits,
            Polarity::Negative => &self.negative_hits,
        }
    }

    pub fn all(&self) -> impl Iterator<Item = &Hit> {
        self.positive_hits.iter().chain(&self.negative_hits)
    }

    pub fn has_kind(&self, kind: SymbolKind) -> bool {
        self.all().any(|h| h.kind == kind)
    }
}

pub fn match_symbols<'t>(tokens: impl IntoIterator<Item = &'t str>, lex: &Lexicon) -> MatchResult {
    let mut result = MatchResult::default();
    for token in tokens {
        lex.scan_token(token, |sym, _| {
            let hit = Hit {
                glyph: sym.glyph.clone(),
                kind: sym.kind,
            };
            match sym.polarity {
                Polarity::Positive => result.positive_hits.push(hit),
                Polarity::Negative => result.negative_hits.push(hit),
            }
        });
    }
    result
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelledTweet {
    pub record: TweetRecord,
    pub label: Polarity,
    pub hits: MatchResult,
    pub stripped_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelConfig {
    pub min_matches: usize,
    pub languages: BTreeSet<String>,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            min_matches: 1,
            languages: DEFAULT_LANGUAGES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Why a tweet did not receive a label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omission {
    Language,
    NoSymbols,
    Mixed,
    BelowMinMatches,
}

/// Labels `rec` when its text carries symbols of exactly one polarity,
/// at least `min_matches` of them, and its language is selected.
pub fn label_tweet(rec: TweetRecord, lex: &Lexicon, config: &LabelConfig) -> Result<LabelledTweet, Omission> {
    debug_assert!(config.min_matches >= 1);
    if !config.languages.contains(&rec.language) {
        return Err(Omission::Language);
    }
    let text = rec.label_text();
    let hits = match_symbols(tokens(text), lex);
    if hits.is_empty() {
        return Err(Omission::NoSymbols);
    }
    if hits.is_mixed() {
        return Err(Omission::Mixed);
    }
    let (label, count) = if hits.positive_hits.is_empty() {
        (Polarity::Negative, hits.negative_hits.len())
    } else {
        (Polarity::Positive, hits.positive_hits.len())
    };
    if count < config.min_matches {
        return Err(Omission::BelowMinMatches);
    }
    let stripped_text = strip_symbols(text, &hits, lex);
    Ok(LabelledTweet {
        record: rec,
        label,
        hits,
        stripped_text,
    })
}

/// Removes the matched symbols from `text`.
///
/// Emoticon tokens are dropped whole; emoji occurrences are cut out of their
/// token and the remainder split at the cut. Pieces left behind that are
/// themselves a lexicon emoticon (`😍:(` leaves `:(`) or only presentation
/// marks are dropped too, so the result never matches the lexicon again.
/// Surviving pieces are joined with single spaces.
pub fn strip_symbols(text: &str, hits: &MatchResult, lex: &Lexicon) -> String {
    let matched: HashSet<&str> = hits.all().map(|h| h.glyph.as_str()).collect();
    let mut out = String::with_capacity(text.len());
    let mut push = |piece: &str| {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(piece);
    };

    for token in tokens(text) {
        let mut cuts = Vec::new();
        let mut whole = false;
        lex.scan_token(token, |sym, range| {
            if matched.contains(sym.glyph.as_str()) {
                if sym.kind == SymbolKind::Emoticon {
                    whole = true;
                } else {
                    cuts.push(range);
                }
            }
        });
        if whole {
            continue;
        }
        if cuts.is_empty() {
            push(token);
            continue;
        }
        let mut start = 0;
        for range in cuts.iter().cloned().chain(std::iter::once(token.len()..token.len())) {
            let piece = &token[start..range.start];
            start = range.end;
            if piece.is_empty() {
                continue;
            }
            let canonical = canonicalize_glyph(piece);
            if canonical.is_empty() {
                continue;
            }
            if lex
                .get(&canonical)
                .is_some_and(|s| s.kind == SymbolKind::Emoticon)
            {
                continue;
            }
            push(piece);
        }
    }
    out
}
