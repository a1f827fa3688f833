//! Distantly supervised sentiment labelling of tweet archives.
//!
//! Tweets are labelled positive or negative from the emoticons and emojis
//! they contain, deduplicated across retweets and summarised into mergeable
//! statistics. [`pipeline::run_build`] ties the stages together.

pub mod analytics;
pub mod dedup;
pub mod export;
pub mod extsort;
pub mod ingest;
pub mod labeller;
pub mod lexicon;
pub mod pipeline;
pub mod synth;
pub mod validation;

pub use analytics::{merge, Share, StatsBundle};
pub use dedup::{DedupMode, DedupSorter};
pub use labeller::{label_tweet, LabelConfig, LabelledTweet};
pub use lexicon::{Lexicon, Polarity, SymbolKind};
pub use pipeline::{run_build, BuildConfig, BuildReport};
