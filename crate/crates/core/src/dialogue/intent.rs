use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::DialogueError;
use crate::geometry::Pose2D;
use crate::world::{Cell, OccupancyGrid};

const STOPWORDS_V1: &str = include_str!("../../data/stopwords-v1.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Self { words }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }
}

impl Default for Stopwords {
    fn default() -> Self {
        Self::parse(STOPWORDS_V1)
    }
}

/// Lowercases, drops punctuation and splits on whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Destination {
    pub id: String,
    pub goal: Pose2D,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DestinationLexicon {
    entries: Vec<Destination>,
}

impl DestinationLexicon {
    pub fn new(entries: Vec<Destination>) -> Result<Self, DialogueError> {
        if entries.is_empty() {
            return Err(DialogueError::EmptyLexicon);
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.id.as_str()) {
                return Err(DialogueError::InvalidLexicon(format!("duplicate destination `{}`", e.id)));
            }
            if e.aliases.iter().all(|a| tokenize(a).is_empty()) {
                return Err(DialogueError::InvalidLexicon(format!("destination `{}` has no aliases", e.id)));
            }
        }
        Ok(Self { entries })
    }

    /// `DEST_ID X Y THETA alias1,alias2,...` per line. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str) -> Result<Self, DialogueError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: String| DialogueError::LexiconParse { line: i + 1, message: m };
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(err("expected `DEST_ID X Y THETA alias1,alias2,...`".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
            let goal = Pose2D::new(num(f[1])?, num(f[2])?, num(f[3])?);
            let aliases = f[4].split(',').filter(|a| !a.is_empty()).map(str::to_string).collect();
            entries.push(Destination {
                id: f[0].to_string(),
                goal,
                aliases,
            });
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[Destination] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&Destination> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Every goal must sit on a free cell of `map`.
    pub fn check_goals(&self, map: &OccupancyGrid) -> Result<(), DialogueError> {
        for e in &self.entries {
            if map.cell_at(e.goal.position()) != Cell::Free {
                return Err(DialogueError::InvalidLexicon(format!(
                    "goal of `{}` at ({}, {}) is not on a free cell",
                    e.id, e.goal.x, e.goal.y
                )));
            }
        }
        Ok(())
    }

    pub fn with_alias(&self, id: &str, alias: &str) -> Option<Self> {
        let mut out = self.clone();
        out.entries.iter_mut().find(|e| e.id == id)?.aliases.push(alias.to_string());
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub destination_id: String,
    pub score: usize,
    pub confirmation_text: String,
}

pub fn confirmation_text(destination_id: &str) -> String {
    format!("Navigating to {destination_id}.")
}

/// Count of utterance tokens (with multiplicity) that are alias tokens of each entry.
pub fn score_entries(utterance: &str, lexicon: &DestinationLexicon, stopwords: &Stopwords) -> Vec<usize> {
    let tokens: Vec<String> = tokenize(utterance)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect();
    lexicon
        .entries
        .iter()
        .map(|e| {
            let alias_tokens: BTreeSet<String> = e.aliases.iter().flat_map(|a| tokenize(a)).collect();
            tokens.iter().filter(|t| alias_tokens.contains(*t)).count()
        })
        .collect()
}

pub fn extract_intent(
    utterance: &str,
    lexicon: &DestinationLexicon,
    stopwords: &Stopwords,
) -> Result<Intent, DialogueError> {
    let scores = score_entries(utterance, lexicon, stopwords);
    let best = scores.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return Err(DialogueError::NoDestination);
    }
    let winners: Vec<&Destination> = lexicon
        .entries
        .iter()
        .zip(&scores)
        .filter(|(_, s)| **s == best)
        .map(|(e, _)| e)
        .collect();
    if winners.len() > 1 {
        return Err(DialogueError::Ambiguous {
            candidates: winners.iter().map(|e| e.id.clone()).collect(),
        });
    }
    let id = winners[0].id.clone();
    Ok(Intent {
        confirmation_text: confirmation_text(&id),
        destination_id: id,
        score: best,
    })
}
