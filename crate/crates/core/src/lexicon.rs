//! Emoticon and emoji sentiment lexicon.
//!
//! A lexicon is a flat list of [`SentimentSymbol`]s read from a tab-separated
//! file (`glyph<TAB>kind<TAB>polarity`). Lookups go through canonical glyphs:
//! variation selectors and skin-tone modifiers are removed before any
//! comparison, so `👍🏽` and `👍` are the same symbol.
//!
//! Matching rules:
//!
//! * emoticons only match a whole token, so `:/` never fires inside a URL;
//! * emojis match anywhere inside a token (`today😭`) unless in-token
//!   matching is switched off, in which case they also need a whole token.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, Read};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The bundled lexicon file.
pub const CANONICAL_LEXICON: &str = include_str!("../data/lexicon.tsv");

const CANONICAL_COUNTS: [(SymbolKind, Polarity, usize); 4] = [
    (SymbolKind::Emoticon, Polarity::Positive, 41),
    (SymbolKind::Emoticon, Polarity::Negative, 37),
    (SymbolKind::Emoji, Polarity::Positive, 29),
    (SymbolKind::Emoji, Polarity::Negative, 33),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub const ALL: [Polarity; 2] = [Polarity::Positive, Polarity::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            other => Err(format!("unknown polarity {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Emoticon,
    Emoji,
}

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Emoticon => "emoticon",
            SymbolKind::Emoji => "emoji",
        }
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SymbolKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emoticon" => Ok(SymbolKind::Emoticon),
            "emoji" => Ok(SymbolKind::Emoji),
            other => Err(format!("unknown symbol kind {other:?}")),
        }
    }
}

/// One lexicon entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentimentSymbol {
    pub glyph: String,
    pub kind: SymbolKind,
    pub polarity: Polarity,
}

impl SentimentSymbol {
    pub fn new(glyph: impl Into<String>, kind: SymbolKind, polarity: Polarity) -> Self {
        Self {
            glyph: glyph.into(),
            kind,
            polarity,
        }
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("glyph {glyph:?} is listed both as {first} and as {second}")]
    Conflict {
        glyph: String,
        first: String,
        second: String,
    },
    #[error("reading lexicon: {0}")]
    Io(#[from] io::Error),
}

/// Codepoints removed by [`canonicalize_glyph`].
pub fn is_presentation_mark(c: char) -> bool {
    matches!(c, '\u{FE0E}' | '\u{FE0F}' | '\u{1F3FB}'..='\u{1F3FF}')
}

/// Drops variation selectors (U+FE0E, U+FE0F) and skin-tone modifiers
/// (U+1F3FB..U+1F3FF). Borrows when there is nothing to remove.
pub fn canonicalize_glyph(raw: &str) -> Cow<'_, str> {
    if raw.is_ascii() || !raw.chars().any(is_presentation_mark) {
        Cow::Borrowed(raw)
    } else {
        Cow::Owned(raw.chars().filter(|&c| !is_presentation_mark(c)).collect())
    }
}

#[derive(Debug, Clone)]
struct EmojiEntry {
    chars: Vec<char>,
    symbol: usize,
}

/// An immutable, query-ready lexicon.
#[derive(Debug, Clone)]
pub struct Lexicon {
    symbols: Vec<SentimentSymbol>,
    index: HashMap<String, usize>,
    emoticons: HashMap<String, usize>,
    // first codepoint -> candidate emojis, longest first
    emoji_heads: HashMap<char, Vec<EmojiEntry>>,
    max_emoticon_bytes: usize,
    in_token_emoji: bool,
}

impl Lexicon {
    /// Builds a lexicon without rejecting conflicts, so that
    /// [`validate_lexicon`] can report them. Exact duplicates are merged and
    /// the index points at the first entry per glyph in sorted order.
    pub fn from_symbols(symbols: impl IntoIterator<Item = SentimentSymbol>) -> Self {
        let mut symbols: Vec<SentimentSymbol> = symbols
            .into_iter()
            .map(|s| SentimentSymbol {
                glyph: canonicalize_glyph(&s.glyph).into_owned(),
                ..s
            })
            .collect();
        symbols.sort();
        symbols.dedup();

        let mut index = HashMap::with_capacity(symbols.len());
        let mut emoticons = HashMap::new();
        let mut emoji_heads: HashMap<char, Vec<EmojiEntry>> = HashMap::new();
        let mut max_emoticon_bytes = 0;
        for (i, sym) in symbols.iter().enumerate() {
            if index.contains_key(&sym.glyph) {
                continue;
            }
            index.insert(sym.glyph.clone(), i);
            match sym.kind {
                SymbolKind::Emoticon => {
                    max_emoticon_bytes = max_emoticon_bytes.max(sym.glyph.len());
                    emoticons.insert(sym.glyph.clone(), i);
                }
                SymbolKind::Emoji => {
                    let chars: Vec<char> = sym.glyph.chars().collect();
                    if let Some(&head) = chars.first() {
                        emoji_heads
                            .entry(head)
                            .or_default()
                            .push(EmojiEntry { chars, symbol: i });
                    }
                }
            }
        }
        for entries in emoji_heads.values_mut() {
            entries.sort_by(|a, b| b.chars.len().cmp(&a.chars.len()).then(a.chars.cmp(&b.chars)));
        }

        Self {
            symbols,
            index,
            emoticons,
            emoji_heads,
            max_emoticon_bytes,
            in_token_emoji: true,
        }
    }

    /// The lexicon shipped with the crate.
    pub fn canonical() -> Self {
        load_lexicon(CANONICAL_LEXICON.as_bytes()).expect("bundled lexicon is well formed")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        load_lexicon(std::fs::File::open(path)?)
    }

    /// Switches in-token emoji matching on or off (default on).
    pub fn with_in_token_emoji(mut self, enabled: bool) -> Self {
        self.in_token_emoji = enabled;
        self
    }

    pub fn in_token_emoji(&self) -> bool {
        self.in_token_emoji
    }

    pub fn symbols(&self) -> &[SentimentSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, glyph: &str) -> Option<&SentimentSymbol> {
        self.index
            .get(canonicalize_glyph(glyph).as_ref())
            .map(|&i| &self.symbols[i])
    }

    pub fn count(&self, kind: SymbolKind, polarity: Polarity) -> usize {
        self.symbols
            .iter()
            .filter(|s| s.kind == kind && s.polarity == polarity)
            .count()
    }

    /// First symbol found in `token` by codepoint position, if any.
    pub fn classify_token(&self, token: &str) -> Option<&SentimentSymbol> {
        let mut first = None;
        self.scan_token(token, |sym, _| {
            if first.is_none() {
                first = Some(sym);
            }
        });
        first
    }

    /// Reports every symbol occurrence in `token` together with the byte
    /// range it covers in the raw token. For emojis the range includes any
    /// presentation marks attached to the glyph.
    pub fn scan_token<'a>(&'a self, token: &str, mut on_hit: impl FnMut(&'a SentimentSymbol, Range<usize>)) {
        if token.is_ascii() {
            if token.len() <= self.max_emoticon_bytes {
                if let Some(&i) = self.emoticons.get(token) {
                    on_hit(&self.symbols[i], 0..token.len());
                }
            }
            return;
        }

        // canonical codepoints, each with the raw span it owns
        let mut chars: Vec<(char, usize, usize)> = Vec::with_capacity(token.len() / 2);
        for (pos, c) in token.char_indices() {
            let end = pos + c.len_utf8();
            if is_presentation_mark(c) {
                if let Some(last) = chars.last_mut() {
                    last.2 = end;
                }
                continue;
            }
            chars.push((c, pos, end));
        }

        let canonical = canonicalize_glyph(token);
        if canonical.len() <= self.max_emoticon_bytes {
            if let Some(&i) = self.emoticons.get(canonical.as_ref()) {
                on_hit(&self.symbols[i], 0..token.len());
                return;
            }
        }

        if !self.in_token_emoji {
            if let Some(&i) = self.index.get(canonical.as_ref()) {
                if self.symbols[i].kind == SymbolKind::Emoji {
                    on_hit(&self.symbols[i], 0..token.len());
                }
            }
            return;
        }

        let mut i = 0;
        'outer: while i < chars.len() {
            if let Some(candidates) = self.emoji_heads.get(&chars[i].0) {
                for entry in candidates {
                    let n = entry.chars.len();
                    if i + n <= chars.len() && chars[i..i + n].iter().map(|c| c.0).eq(entry.chars.iter().copied()) {
                        on_hit(&self.symbols[entry.symbol], chars[i].1..chars[i + n - 1].2);
                        i += n;
                        continue 'outer;
                    }
                }
            }
            i += 1;
        }
    }
}

/// Parses lexicon entries without checking cross-entry constraints.
pub fn parse_entries(text: &str) -> Result<Vec<SentimentSymbol>, LexiconError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let parse_err = |reason: String| LexiconError::Parse {
            line: line_no,
            reason,
        };
        if fields.len() != 3 {
            return Err(parse_err(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        if fields[0].is_empty() {
            return Err(parse_err("empty glyph".into()));
        }
        let kind = fields[1].trim().parse::<SymbolKind>().map_err(parse_err)?;
        let polarity = fields[2].trim().parse::<Polarity>().map_err(parse_err)?;
        out.push(SentimentSymbol::new(fields[0], kind, polarity));
    }
    Ok(out)
}

/// Reads a lexicon file, rejecting glyphs listed with two different
/// polarities (or kinds). Input line order does not matter.
pub fn load_lexicon(mut source: impl Read) -> Result<Lexicon, LexiconError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    let entries = parse_entries(&text)?;

    let mut seen: BTreeMap<String, &SentimentSymbol> = BTreeMap::new();
    for entry in &entries {
        let glyph = canonicalize_glyph(&entry.glyph).into_owned();
        if let Some(prev) = seen.get(&glyph) {
            if prev.polarity != entry.polarity || prev.kind != entry.kind {
                return Err(LexiconError::Conflict {
                    glyph,
                    first: format!("{} {}", prev.kind, prev.polarity),
                    second: format!("{} {}", entry.kind, entry.polarity),
                });
            }
        } else {
            seen.insert(glyph, entry);
        }
    }
    Ok(Lexicon::from_symbols(entries))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconIssue {
    PolarityConflict { glyph: String },
    Whitespace { glyph: String },
    GlyphLength { glyph: String, codepoints: usize },
    KindMismatch { glyph: String, kind: SymbolKind },
    CountMismatch {
        kind: Option<SymbolKind>,
        polarity: Polarity,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for LexiconIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconIssue::PolarityConflict { glyph } => {
                write!(f, "glyph {glyph:?} appears with both polarities")
            }
            LexiconIssue::Whitespace { glyph } => write!(f, "glyph {glyph:?} contains whitespace"),
            LexiconIssue::GlyphLength { glyph, codepoints } => {
                write!(f, "glyph {glyph:?} has {codepoints} codepoints (allowed 1..=8)")
            }
            LexiconIssue::KindMismatch { glyph, kind } => {
                write!(f, "glyph {glyph:?} does not look like an {kind}")
            }
            LexiconIssue::CountMismatch {
                kind,
                polarity,
                expected,
                found,
            } => match kind {
                Some(kind) => write!(f, "{polarity} {kind}s: expected {expected}, found {found}"),
                None => write!(f, "{polarity} symbols: expected {expected}, found {found}"),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<LexiconIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "ok");
        }
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

fn is_emoticon_codepoint(c: char) -> bool {
    c.is_ascii_graphic() || ('\u{2000}'..='\u{206F}').contains(&c)
}

fn is_emoji_codepoint(c: char) -> bool {
    c >= '\u{1F000}' || ('\u{2600}'..='\u{27BF}').contains(&c) || ('\u{2B00}'..='\u{2BFF}').contains(&c)
}

pub fn validate_lexicon(lex: &Lexicon, expect_canonical_counts: bool) -> ValidationReport {
    let mut issues = Vec::new();

    let mut polarities: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for sym in lex.symbols() {
        let e = polarities.entry(sym.glyph.as_str()).or_default();
        match sym.polarity {
            Polarity::Positive => e.0 = true,
            Polarity::Negative => e.1 = true,
        }
    }
    for (glyph, (pos, neg)) in &polarities {
        if *pos && *neg {
            issues.push(LexiconIssue::PolarityConflict {
                glyph: glyph.to_string(),
            });
        }
    }

    for sym in lex.symbols() {
        let glyph = &sym.glyph;
        if glyph.chars().any(char::is_whitespace) {
            issues.push(LexiconIssue::Whitespace { glyph: glyph.clone() });
        }
        let codepoints = glyph.chars().count();
        if !(1..=8).contains(&codepoints) {
            issues.push(LexiconIssue::GlyphLength {
                glyph: glyph.clone(),
                codepoints,
            });
        }
        let kind_ok = match sym.kind {
            SymbolKind::Emoticon => glyph.chars().all(|c| is_emoticon_codepoint(c) || c.is_whitespace()),
            SymbolKind::Emoji => glyph.chars().any(is_emoji_codepoint),
        };
        if !kind_ok {
            issues.push(LexiconIssue::KindMismatch {
                glyph: glyph.clone(),
                kind: sym.kind,
            });
        }
    }

    if expect_canonical_counts {
        for polarity in Polarity::ALL {
            let found = lex.symbols().iter().filter(|s| s.polarity == polarity).count();
            if found != 70 {
                issues.push(LexiconIssue::CountMismatch {
                    kind: None,
                    polarity,
                    expected: 70,
                    found,
                });
            }
        }
        for (kind, polarity, expected) in CANONICAL_COUNTS {
            let found = lex.count(kind, polarity);
            if found != expected {
                issues.push(LexiconIssue::CountMismatch {
                    kind: Some(kind),
                    polarity,
                    expected,
                    found,
                });
            }
        }
    }

    ValidationReport { issues }
}
