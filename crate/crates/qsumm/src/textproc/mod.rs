//! Deterministic linguistic pre-processing: sentence splitting, tokenization,
//! stopword removal and stemming.
//!
//! Everything here is a pure function over immutable inputs; the only state
//! is the loaded stopword and abbreviation lists.

mod porter;

pub use porter::stem;

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bundled defaults, one entry per line. Overridable via [`TextProc::from_files`].
const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const DEFAULT_ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");

#[derive(Debug, Error)]
pub enum TextProcError {
    #[error("cannot read word list {path}: {source}")]
    ListUnreadable {
        path: String,
        source: std::io::Error,
    },
}

/// One candidate sentence, fully pre-processed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// 0-based position in the source pool.
    pub index: usize,
    pub raw: String,
    /// Lowercased word tokens, punctuation stripped.
    pub tokens: Vec<String>,
    /// Tokens after stopword removal and stemming; the tf-idf unit.
    pub stems: Vec<String>,
}

/// A source text split into ordered sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    pub raw: String,
    pub sentences: Vec<Sentence>,
}

/// Pre-processing engine holding the stopword and abbreviation lists.
#[derive(Debug, Clone)]
pub struct TextProc {
    stopwords: HashSet<String>,
    abbreviations: HashSet<String>,
}

impl Default for TextProc {
    fn default() -> Self {
        Self {
            stopwords: parse_list(DEFAULT_STOPWORDS),
            abbreviations: parse_list(DEFAULT_ABBREVIATIONS),
        }
    }
}

fn parse_list(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_lowercase())
        .collect()
}

fn read_list(path: &Path) -> Result<HashSet<String>, TextProcError> {
    let text = std::fs::read_to_string(path).map_err(|source| TextProcError::ListUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    Ok(parse_list(&text))
}

impl TextProc {
    /// Loads word lists from files; `None` keeps the bundled default.
    pub fn from_files(
        stopwords: Option<&Path>,
        abbreviations: Option<&Path>,
    ) -> Result<Self, TextProcError> {
        Ok(Self {
            stopwords: match stopwords {
                Some(p) => read_list(p)?,
                None => parse_list(DEFAULT_STOPWORDS),
            },
            abbreviations: match abbreviations {
                Some(p) => read_list(p)?,
                None => parse_list(DEFAULT_ABBREVIATIONS),
            },
        })
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    /// Splits `text` into sentence spans.
    ///
    /// A boundary is sentence-final punctuation (`.` `!` `?`) followed by
    /// whitespace and an uppercase or digit start, unless the word ending at
    /// a period is in the abbreviation guard list. Spans with no word tokens
    /// are dropped.
    pub fn split_sentences(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        let mut spans = Vec::new();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            let c = chars[i];
            if matches!(c, '.' | '!' | '?') && self.is_boundary(&chars, i) {
                spans.push(chars[start..=i].iter().collect::<String>());
                start = i + 1;
            }
            i += 1;
        }
        if start < chars.len() {
            spans.push(chars[start..].iter().collect::<String>());
        }
        spans
            .into_iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !tokenize(s).is_empty())
            .collect()
    }

    fn is_boundary(&self, chars: &[char], i: usize) -> bool {
        // must be followed by whitespace
        match chars.get(i + 1) {
            Some(c) if c.is_whitespace() => {}
            _ => return false,
        }
        // next non-whitespace char must start like a new sentence
        let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
        match next {
            Some(c) if c.is_uppercase() || c.is_ascii_digit() => {}
            _ => return false,
        }
        if chars[i] != '.' {
            return true;
        }
        // abbreviation guard: the word ending at this period, and the
        // two-word form for entries like "et al."
        let mut w_start = i;
        while w_start > 0 {
            let p = chars[w_start - 1];
            if p.is_alphanumeric() || p == '.' {
                w_start -= 1;
            } else {
                break;
            }
        }
        let word: String = chars[w_start..=i].iter().collect::<String>().to_lowercase();
        if self.abbreviations.contains(&word) {
            return false;
        }
        if w_start > 0 && chars[w_start - 1] == ' ' {
            let mut p_start = w_start - 1;
            while p_start > 0 && chars[p_start - 1].is_alphanumeric() {
                p_start -= 1;
            }
            let two: String = chars[p_start..=i].iter().collect::<String>().to_lowercase();
            if self.abbreviations.contains(&two) {
                return false;
            }
        }
        true
    }

    /// Removes stopwords, preserving order.
    pub fn remove_stopwords(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .filter(|t| !self.stopwords.contains(t.as_str()))
            .cloned()
            .collect()
    }

    /// Tokenize, remove stopwords, stem: the tf-idf unit of a text.
    pub fn stems_of(&self, text: &str) -> Vec<String> {
        self.remove_stopwords(&tokenize(text))
            .iter()
            .map(|t| stem(t))
            .collect()
    }

    /// Builds a fully pre-processed sentence record.
    pub fn sentence(&self, index: usize, raw: &str) -> Sentence {
        let tokens = tokenize(raw);
        let stems = self
            .remove_stopwords(&tokens)
            .iter()
            .map(|t| stem(t))
            .collect();
        Sentence {
            index,
            raw: raw.to_string(),
            tokens,
            stems,
        }
    }

    /// Splits and pre-processes a whole text.
    pub fn process(&self, text: &str) -> TokenizedText {
        let sentences = self
            .split_sentences(text)
            .iter()
            .enumerate()
            .map(|(i, raw)| self.sentence(i, raw))
            .collect();
        TokenizedText {
            raw: text.to_string(),
            sentences,
        }
    }
}

/// Lowercases and splits on non-alphanumeric boundaries; digits are kept
/// inside tokens, hyphens and all punctuation separate.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

/// Stemmed tokens with stopwords retained; the ROUGE scoring unit.
pub fn stemmed_tokens(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| stem(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_strips_punctuation() {
        assert_eq!(tokenize("Bazex syndrome."), vec!["bazex", "syndrome"]);
    }

    #[test]
    fn tokenize_hyphen_is_boundary() {
        assert_eq!(tokenize("tf-idf"), vec!["tf", "idf"]);
    }

    #[test]
    fn tokenize_keeps_digits() {
        assert_eq!(tokenize("ACE2 receptor"), vec!["ace2", "receptor"]);
    }

    #[test]
    fn split_empty() {
        let tp = TextProc::default();
        assert!(tp.split_sentences("").is_empty());
    }

    #[test]
    fn split_two_simple() {
        let tp = TextProc::default();
        assert_eq!(
            tp.split_sentences("A is B. C is D."),
            vec!["A is B.", "C is D."]
        );
    }

    #[test]
    fn abbreviation_does_not_split() {
        let tp = TextProc::default();
        let got = tp.split_sentences("Some diseases, e.g. Bazex syndrome, are rare.");
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn et_al_does_not_split() {
        let tp = TextProc::default();
        let got = tp.split_sentences("Reported by Smith et al. In contrast, we differ.");
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn lowercase_continuation_does_not_split() {
        let tp = TextProc::default();
        let got = tp.split_sentences("Approx. half responded. the rest did not.");
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn remove_stopwords_basic() {
        let tp = TextProc::default();
        let toks: Vec<String> = ["the", "cat"].iter().map(|s| s.to_string()).collect();
        assert_eq!(tp.remove_stopwords(&toks), vec!["cat"]);
        assert!(tp.remove_stopwords(&[]).is_empty());
    }

    #[test]
    fn removed_tokens_are_in_shipped_list() {
        let tp = TextProc::default();
        let toks: Vec<String> = ["is", "a", "syndrome"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let kept = tp.remove_stopwords(&toks);
        assert_eq!(kept, vec!["syndrome"]);
        for t in &toks {
            if !kept.contains(t) {
                assert!(tp.is_stopword(t), "{t} removed but not in list");
            }
        }
    }

    #[test]
    fn sentence_indices_dense() {
        let tp = TextProc::default();
        let doc = tp.process("First one. Second one! Third one?");
        let idx: Vec<usize> = doc.sentences.iter().map(|s| s.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        for s in &doc.sentences {
            assert!(!s.tokens.is_empty());
        }
    }

    // hand-segmented fixture: 20 sentences with assorted hazards
    #[test]
    fn fixture_segmentation() {
        let tp = TextProc::default();
        let text = "\
The ACE2 receptor mediates viral entry. It is expressed in lung tissue. \
Several studies, e.g. those from 2020, confirm this. Dr. Smith led the trial. \
Results were striking! Were they reproducible? Fig. 3 shows the dose curve. \
The cohort had 120 patients. Each received 5 mg daily. Adverse events were rare. \
Some effects, i.e. mild nausea, resolved quickly. Jones et al. reported similar data. \
The trial ran for 12 weeks. Compliance exceeded 90 percent. Blood markers improved. \
No deaths occurred. Follow-up continues. Secondary endpoints were met. \
Statistical power was adequate. Conclusions remain preliminary.";
        let got = tp.split_sentences(text);
        assert_eq!(got.len(), 20, "got: {got:#?}");
        assert_eq!(got[0], "The ACE2 receptor mediates viral entry.");
        assert_eq!(
            got[2],
            "Several studies, e.g. those from 2020, confirm this."
        );
        assert_eq!(got[3], "Dr. Smith led the trial.");
        assert_eq!(got[6], "Fig. 3 shows the dose curve.");
        assert_eq!(got[11], "Jones et al. reported similar data.");
        assert_eq!(got[19], "Conclusions remain preliminary.");
    }
}
