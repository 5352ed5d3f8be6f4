//! Destination requests and periodic scene descriptions, both as text.

mod describe;
mod intent;

pub use describe::{
    bearing, describe_scene, description_due, is_describable, line_of_sight, DescribeConfig, SceneDescription,
    NOTHING_AROUND,
};
pub use intent::{
    confirmation_text, extract_intent, score_entries, tokenize, Destination, DestinationLexicon, Intent, Stopwords,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DialogueError {
    #[error("no destination recognized")]
    NoDestination,
    #[error("ambiguous destination: {}", candidates.join(", "))]
    Ambiguous { candidates: Vec<String> },
    #[error("lexicon is empty")]
    EmptyLexicon,
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error("lexicon line {line}: {message}")]
    LexiconParse { line: usize, message: String },
}
