//! Naive single-threaded reference labeller. Shares no code with the
//! library beyond timestamp parsing via chrono, and favours obviousness
//! over speed: JSON goes through `serde_json::Value`, matching is a brute
//! force scan over every lexicon glyph, dedup is a hash map.

#![allow(dead_code)]

use std::collections::HashMap;

use chrono::{DateTime, Datelike, Utc};
use serde_json::Value;

const LANGS: [&str; 7] = ["ar", "de", "en", "es", "fr", "it", "zh"];
const NOTICE_KEYS: [&str; 8] = [
    "delete",
    "status_withheld",
    "user_withheld",
    "scrub_geo",
    "limit",
    "disconnect",
    "warning",
    "status_deletion_notice",
];

pub struct RefLexicon {
    emoticons: HashMap<String, bool>,
    emojis: Vec<(Vec<char>, bool)>,
}

impl RefLexicon {
    /// `glyph<TAB>kind<TAB>polarity` lines; `#` starts a comment line.
    pub fn parse(tsv: &str) -> Self {
        let mut emoticons = HashMap::new();
        let mut emojis = Vec::new();
        for line in tsv.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let positive = cols[2].trim() == "positive";
            let glyph = strip_marks(cols[0]);
            if cols[1].trim() == "emoticon" {
                emoticons.insert(glyph, positive);
            } else {
                emojis.push((glyph.chars().collect(), positive));
            }
        }
        RefLexicon { emoticons, emojis }
    }

    /// (positive hits, negative hits) for a whole text.
    pub fn count_hits(&self, text: &str) -> (usize, usize) {
        let (mut pos, mut neg) = (0, 0);
        let mut bump = |positive: bool| if positive { pos += 1 } else { neg += 1 };
        for token in text.split([' ', '\t', '\r', '\n']) {
            if token.is_empty() {
                continue;
            }
            let canon = strip_marks(token);
            if let Some(&p) = self.emoticons.get(&canon) {
                bump(p);
                continue;
            }
            if token.is_ascii() {
                continue;
            }
            let chars: Vec<char> = canon.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let mut best: Option<(usize, bool)> = None;
                for (glyph, p) in &self.emojis {
                    if chars[i..].starts_with(glyph) && best.is_none_or(|(n, _)| glyph.len() > n) {
                        best = Some((glyph.len(), *p));
                    }
                }
                match best {
                    Some((n, p)) => {
                        bump(p);
                        i += n;
                    }
                    None => i += 1,
                }
            }
        }
        (pos, neg)
    }
}

fn strip_marks(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, '\u{FE0E}' | '\u{FE0F}' | '\u{1F3FB}'..='\u{1F3FF}'))
        .collect()
}

fn unescape(s: &str) -> String {
    s.replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
}

fn get_id(v: &Value) -> Option<u64> {
    v.get("id")
        .and_then(Value::as_u64)
        .or_else(|| v.get("id_str")?.as_str()?.parse().ok())
}

fn best_text(v: &Value) -> Option<String> {
    let s = v
        .pointer("/extended_tweet/full_text")
        .and_then(Value::as_str)
        .or_else(|| v.get("full_text").and_then(Value::as_str))
        .or_else(|| v.get("text").and_then(Value::as_str))?;
    Some(unescape(s))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefTweet {
    pub id: u64,
    pub positive: bool,
    pub retweet_of: Option<u64>,
    pub created_at: DateTime<Utc>,
}

/// Returns the labelled tweet a line describes, if any.
pub fn label_line(line: &str, lex: &RefLexicon) -> Option<RefTweet> {
    let v: Value = serde_json::from_str(line).ok()?;
    let obj = v.as_object()?;
    if NOTICE_KEYS.iter().any(|k| obj.get(*k).is_some_and(|x| !x.is_null())) {
        return None;
    }
    let id = get_id(&v).filter(|&id| id > 0)?;
    let mut text = best_text(&v)?;
    let lang = v.get("lang")?.as_str()?;
    let created_at = DateTime::parse_from_str(v.get("created_at")?.as_str()?, "%a %b %d %H:%M:%S %z %Y")
        .ok()?
        .with_timezone(&Utc);
    if created_at.year() < 2006 || created_at.year() > Utc::now().year() {
        return None;
    }
    let user = v.get("user")?;
    user.get("id")
        .and_then(Value::as_u64)
        .or_else(|| user.get("id_str")?.as_str()?.parse().ok())?;
    v.get("source")?.as_str()?;
    let mut retweet_of = None;
    if let Some(inner) = v.get("retweeted_status").filter(|x| !x.is_null()) {
        let of = get_id(inner)?;
        if of == id {
            return None;
        }
        retweet_of = Some(of);
        if let Some(t) = best_text(inner) {
            text = t;
        }
    }
    if !LANGS.contains(&lang) {
        return None;
    }
    let (pos, neg) = lex.count_hits(&text);
    if (pos == 0) == (neg == 0) {
        return None;
    }
    Some(RefTweet {
        id,
        positive: pos > 0,
        retweet_of,
        created_at,
    })
}

/// Labels file contents for `lines` using the default configuration.
pub fn reference_labels<'a>(lines: impl IntoIterator<Item = &'a str>, lexicon_tsv: &str) -> String {
    let lex = RefLexicon::parse(lexicon_tsv);
    let mut winners: HashMap<u64, RefTweet> = HashMap::new();
    for line in lines {
        let Some(t) = label_line(line, &lex) else { continue };
        let key = t.retweet_of.unwrap_or(t.id);
        let rank = |x: &RefTweet| (x.retweet_of.is_some(), x.created_at, x.id);
        match winners.get(&key) {
            Some(cur) if rank(cur) <= rank(&t) => {}
            _ => {
                winners.insert(key, t);
            }
        }
    }
    let mut rows: Vec<&RefTweet> = winners.values().collect();
    rows.sort_by_key(|t| t.id);
    rows.iter()
        .map(|t| format!("{}\t{}\n", t.id, if t.positive { "positive" } else { "negative" }))
        .collect()
}
