//! Retweet deduplication.
//!
//! Records are grouped under a [`ContentKey`]. Within a group the original
//! tweet wins; without an original, the earliest retweet wins (lowest id on
//! equal timestamps). Grouping goes through the external sorter ordered by
//! `(key, is_retweet, created_at, id, record)`, so the survivor of each group
//! is simply the first record seen for its key.

use std::io;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::extsort::{merge_sorters, ExternalSorter, SortConfig, SortedIter};
use crate::labeller::LabelledTweet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    /// Key = id of the original tweet (own id for non-retweets).
    #[default]
    RetweetLink,
    /// Key = hash of the normalised stripped text.
    TextHash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ContentKey {
    Id(u64),
    TextHash(u128),
}

impl std::str::FromStr for DedupMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "retweet_link" | "retweet-link" => Ok(DedupMode::RetweetLink),
            "text_hash" | "text-hash" => Ok(DedupMode::TextHash),
            other => Err(format!("unknown dedup mode {other:?}")),
        }
    }
}

pub fn content_key(t: &LabelledTweet, mode: DedupMode) -> ContentKey {
    match mode {
        DedupMode::RetweetLink => ContentKey::Id(t.record.retweet_of.unwrap_or(t.record.id)),
        DedupMode::TextHash => ContentKey::TextHash(text_hash(&t.stripped_text)),
    }
}

/// Lowercases and drops leading legacy `rt @user:` prefixes.
pub fn normalize_text(text: &str) -> String {
    let lower = text.to_lowercase();
    let mut rest = lower.trim();
    while let Some(after) = rest.strip_prefix("rt @") {
        let name_len = after
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(after.len());
        match after[name_len..].strip_prefix(':') {
            Some(tail) if name_len > 0 => rest = tail.trim_start(),
            _ => break,
        }
    }
    rest.trim_end().to_string()
}

fn text_hash(text: &str) -> u128 {
    let digest = Sha256::digest(normalize_text(text).as_bytes());
    let mut bytes = [0u8; 16];
    bytes.copy_from_slice(&digest[..16]);
    u128::from_be_bytes(bytes)
}

/// Sort record: field order is the sort order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DedupEntry {
    pub key: ContentKey,
    pub is_retweet: bool,
    pub created_at: DateTime<Utc>,
    pub id: u64,
    pub tweet: LabelledTweet,
}

impl DedupEntry {
    pub fn new(tweet: LabelledTweet, mode: DedupMode) -> Self {
        Self {
            key: content_key(&tweet, mode),
            is_retweet: tweet.record.is_retweet(),
            created_at: tweet.record.created_at,
            id: tweet.record.id,
            tweet,
        }
    }
}

/// Accepts labelled tweets for one worker; combine several with
/// [`survivors`].
pub struct DedupSorter {
    mode: DedupMode,
    sorter: ExternalSorter<DedupEntry>,
}

impl DedupSorter {
    pub fn new(mode: DedupMode, config: SortConfig) -> io::Result<Self> {
        Ok(Self {
            mode,
            sorter: ExternalSorter::new(config)?,
        })
    }

    pub fn push(&mut self, tweet: LabelledTweet) -> io::Result<()> {
        self.sorter.push(DedupEntry::new(tweet, self.mode))
    }

    pub fn spilled_runs(&self) -> usize {
        self.sorter.spilled_runs()
    }
}

/// One survivor per key, ascending by key.
pub struct Survivors {
    inner: SortedIter<DedupEntry>,
    last_key: Option<ContentKey>,
}

impl Iterator for Survivors {
    type Item = io::Result<LabelledTweet>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let entry = match self.inner.next()? {
                Ok(entry) => entry,
                Err(err) => return Some(Err(err)),
            };
            if self.last_key == Some(entry.key) {
                continue;
            }
            self.last_key = Some(entry.key);
            return Some(Ok(entry.tweet));
        }
    }
}

pub fn survivors(sorters: Vec<DedupSorter>) -> io::Result<Survivors> {
    let inner = merge_sorters(sorters.into_iter().map(|s| s.sorter).collect())?;
    Ok(Survivors { inner, last_key: None })
}

pub fn deduplicate(
    input: impl IntoIterator<Item = LabelledTweet>,
    mode: DedupMode,
    config: &SortConfig,
) -> io::Result<Survivors> {
    let mut sorter = DedupSorter::new(mode, config.clone())?;
    for tweet in input {
        sorter.push(tweet)?;
    }
    survivors(vec![sorter])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::TweetRecord;
    use crate::labeller::MatchResult;
    use crate::lexicon::Polarity;
    use chrono::TimeZone;

    fn tweet(id: u64, retweet_of: Option<u64>, hour: u32, text: &str) -> LabelledTweet {
        let created_at = Utc.with_ymd_and_hms(2015, 3, 1, hour, 0, 0).unwrap();
        LabelledTweet {
            record: TweetRecord {
                id,
                text: text.into(),
                language: "en".into(),
                created_at,
                year: 2015,
                author_id: id * 10,
                source_tool: "web".into(),
                retweet_of,
                retweet_text: None,
            },
            label: Polarity::Positive,
            hits: MatchResult::default(),
            stripped_text: text.into(),
        }
    }

    fn ids(tweets: Vec<LabelledTweet>, mode: DedupMode) -> Vec<u64> {
        deduplicate(tweets, mode, &SortConfig::default())
            .unwrap()
            .map(|t| t.unwrap().record.id)
            .collect()
    }

    #[test]
    fn key_examples() {
        assert_eq!(content_key(&tweet(7, Some(3), 1, "x"), DedupMode::RetweetLink), ContentKey::Id(3));
        assert_eq!(content_key(&tweet(7, None, 1, "x"), DedupMode::RetweetLink), ContentKey::Id(7));
        assert_eq!(
            content_key(&tweet(1, None, 1, "RT @a: hello"), DedupMode::TextHash),
            content_key(&tweet(2, None, 1, "hello"), DedupMode::TextHash)
        );
        assert_ne!(
            content_key(&tweet(1, None, 1, "hello"), DedupMode::TextHash),
            content_key(&tweet(2, None, 1, "goodbye"), DedupMode::TextHash)
        );
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_text("RT @a_b: RT @c: Hello World"), "hello world");
        assert_eq!(normalize_text("rt @: odd"), "rt @: odd");
        assert_eq!(normalize_text("  Plain  "), "plain");
    }

    #[test]
    fn original_beats_retweets() {
        let input = vec![tweet(9, Some(3), 1, "a"), tweet(3, None, 5, "a"), tweet(12, Some(3), 0, "a")];
        assert_eq!(ids(input, DedupMode::RetweetLink), vec![3]);
    }

    #[test]
    fn earliest_retweet_without_original() {
        let input = vec![tweet(9, Some(3), 10, "a"), tweet(12, Some(3), 9, "a")];
        assert_eq!(ids(input, DedupMode::RetweetLink), vec![12]);
    }

    #[test]
    fn equal_timestamps_prefer_lower_id() {
        let input = vec![tweet(12, Some(3), 9, "a"), tweet(9, Some(3), 9, "a")];
        assert_eq!(ids(input, DedupMode::RetweetLink), vec![9]);
    }

    #[test]
    fn unrelated_tweets_survive() {
        let input = vec![tweet(5, None, 1, "a"), tweet(4, None, 1, "b")];
        assert_eq!(ids(input, DedupMode::RetweetLink), vec![4, 5]);
    }

    #[test]
    fn spill_dir_unwritable() {
        let config = SortConfig {
            spill_dir: Some("/nonexistent/dir".into()),
            ..SortConfig::default()
        };
        assert!(deduplicate(Vec::new(), DedupMode::RetweetLink, &config).is_err());
    }
}
