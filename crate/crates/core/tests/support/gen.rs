//! proptest strategies for labelled tweets and retweet-chain fixtures.

#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use emolabel_core::ingest::TweetRecord;
use emolabel_core::labeller::{Hit, LabelledTweet, MatchResult};
use emolabel_core::lexicon::{Polarity, SymbolKind};
use proptest::prelude::*;

const LANGS: [&str; 4] = ["en", "es", "zh", "ar"];
const SOURCES: [&str; 3] = ["Twitter for iPhone", "Twitter for Android", "Twitter Web Client"];
const POSITIVE: [(&str, SymbolKind); 4] = [
    (":)", SymbolKind::Emoticon),
    (":D", SymbolKind::Emoticon),
    ("😂", SymbolKind::Emoji),
    ("😍", SymbolKind::Emoji),
];
const NEGATIVE: [(&str, SymbolKind); 4] = [
    (":(", SymbolKind::Emoticon),
    (":/", SymbolKind::Emoticon),
    ("😭", SymbolKind::Emoji),
    ("😡", SymbolKind::Emoji),
];

#[allow(clippy::too_many_arguments)]
pub fn tweet(
    id: u64,
    retweet_of: Option<u64>,
    secs: i64,
    year: i32,
    lang: &str,
    source: &str,
    author_id: u64,
    label: Polarity,
    glyphs: &[usize],
    text: &str,
) -> LabelledTweet {
    let pool = match label {
        Polarity::Positive => &POSITIVE,
        Polarity::Negative => &NEGATIVE,
    };
    let hits: Vec<Hit> = glyphs
        .iter()
        .map(|&g| Hit {
            glyph: pool[g % pool.len()].0.to_string(),
            kind: pool[g % pool.len()].1,
        })
        .collect();
    let full = format!("{text} {}", hits.iter().map(|h| h.glyph.as_str()).collect::<Vec<_>>().join(" "));
    let created_at = Utc.with_ymd_and_hms(year, 1, 1, 0, 0, 0).unwrap() + chrono::Duration::seconds(secs);
    let mut result = MatchResult::default();
    match label {
        Polarity::Positive => result.positive_hits = hits,
        Polarity::Negative => result.negative_hits = hits,
    }
    LabelledTweet {
        record: TweetRecord {
            id,
            text: full.clone(),
            language: lang.to_string(),
            created_at,
            year,
            author_id,
            source_tool: source.to_string(),
            retweet_of,
            retweet_text: None,
        },
        label,
        hits: result,
        stripped_text: text.to_string(),
    }
}

fn polarity() -> impl Strategy<Value = Polarity> {
    prop_oneof![Just(Polarity::Positive), Just(Polarity::Negative)]
}

/// Arbitrary labelled tweet over a small key space so that bundles built
/// from independent draws overlap.
pub fn labelled_tweet() -> impl Strategy<Value = LabelledTweet> {
    (
        1u64..1_000_000,
        2013i32..2021,
        0usize..LANGS.len(),
        0usize..SOURCES.len(),
        1u64..40,
        polarity(),
        prop::collection::vec(0usize..8, 1..4),
        "[a-z ]{0,30}",
    )
        .prop_map(|(id, year, lang, source, author, label, glyphs, text)| {
            tweet(id, None, 0, year, LANGS[lang], SOURCES[source], author, label, &glyphs, &text)
        })
}

pub fn tweets(max: usize) -> impl Strategy<Value = Vec<LabelledTweet>> {
    prop::collection::vec(labelled_tweet(), 0..max)
}

/// Retweet chains. Each chain has a root id; the original itself is
/// present or not, and any number of retweets share the root. Timestamps
/// are drawn from a narrow range so ties happen. All ids are distinct.
pub fn retweet_fixture(max_chains: usize) -> impl Strategy<Value = Vec<LabelledTweet>> {
    retweet_fixture_sized(1, max_chains)
}

pub fn retweet_fixture_sized(min_chains: usize, max_chains: usize) -> impl Strategy<Value = Vec<LabelledTweet>> {
    assert!(max_chains <= 100, "root ids must stay below the retweet id range");
    prop::collection::vec(
        (any::<bool>(), prop::collection::vec((0i64..20, polarity()), 0..12), polarity()),
        min_chains..max_chains,
    )
        .prop_map(|chains| {
            let mut out = Vec::new();
            let mut next_id = 1_000u64;
            for (root_idx, (has_original, retweets, label)) in chains.into_iter().enumerate() {
                let root = 10 + root_idx as u64 * 7;
                if has_original || retweets.is_empty() {
                    out.push(tweet(root, None, 10, 2016, "en", "web", 1, label, &[0], "orig"));
                }
                for (secs, rlabel) in retweets {
                    // ids are not in timestamp order
                    next_id += 1 + (secs as u64 * 13) % 5;
                    out.push(tweet(next_id, Some(root), secs, 2016, "en", "web", 2, rlabel, &[1], "rt"));
                }
            }
            out
        })
}
