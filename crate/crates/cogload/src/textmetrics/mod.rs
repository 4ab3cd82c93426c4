//! Disclosure-complexity measures computed from raw filing text: Gunning Fog
//! readability, log file size, and the boilerplate (repeated-shingle) ratio.

mod shingle;
mod tokenize;

pub use shingle::{boilerplate_ratio, ReferenceScope, ShingleSet, DEFAULT_SHINGLE_K};
pub use tokenize::{strip_markup, tokenize, Tokenized};

use crate::error::{Error, Result};

/// Counts that feed the Fog index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DocumentStats {
    pub word_count: usize,
    pub sentence_count: usize,
    /// Words with three or more syllables.
    pub complex_word_count: usize,
    pub byte_size: usize,
}

impl DocumentStats {
    pub fn from_text(text: &str) -> Self {
        let tok = tokenize(text);
        let complex = tok
            .tokens
            .iter()
            .filter(|t| syllable_count(t) >= 3)
            .count();
        Self {
            word_count: tok.tokens.len(),
            sentence_count: tok.sentence_count,
            complex_word_count: complex,
            byte_size: text.len(),
        }
    }
}

/// Gunning Fog index: `0.4 · (words/sentences + 100 · complex_words/words)`.
pub fn fog_index(stats: &DocumentStats) -> Result<f64> {
    if stats.sentence_count == 0 || stats.word_count == 0 {
        return Err(Error::DegenerateDocument(format!(
            "fog index needs at least one word and one sentence, got {} words, {} sentences",
            stats.word_count, stats.sentence_count
        )));
    }
    let words = stats.word_count as f64;
    let sentences = stats.sentence_count as f64;
    let complex = stats.complex_word_count as f64;
    Ok(0.4 * (words / sentences + 100.0 * complex / words))
}

/// Natural log of file size in kilobytes.
pub fn log_file_size(byte_size: usize) -> Result<f64> {
    if byte_size == 0 {
        return Err(Error::DegenerateDocument("zero-byte file".into()));
    }
    Ok((byte_size as f64 / 1024.0).ln())
}

/// Heuristic syllable count: maximal vowel runs (a, e, i, o, u, y), minus a
/// silent trailing 'e' unless the word ends in consonant + "le"; minimum 1.
pub fn syllable_count(word: &str) -> usize {
    let chars: Vec<char> = word
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    if chars.is_empty() {
        return 1;
    }
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &chars {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }
    let n = chars.len();
    if n >= 2 && chars[n - 1] == 'e' {
        let ends_consonant_le = n >= 3 && chars[n - 2] == 'l' && !is_vowel(chars[n - 3]);
        if !ends_consonant_le && !is_vowel(chars[n - 2]) && groups > 1 {
            groups -= 1;
        }
    }
    groups.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syllable_examples() {
        assert_eq!(syllable_count("cat"), 1);
        assert_eq!(syllable_count("finance"), 2);
        assert_eq!(syllable_count("table"), 2);
        assert_eq!(syllable_count("the"), 1);
        assert_eq!(syllable_count("disclosure"), 3);
        assert_eq!(syllable_count("regulatory"), 5);
        assert_eq!(syllable_count("e"), 1);
    }

    #[test]
    fn fog_hand_values() {
        let stats = DocumentStats {
            word_count: 6,
            sentence_count: 1,
            complex_word_count: 0,
            byte_size: 30,
        };
        assert!((fog_index(&stats).unwrap() - 2.4).abs() < 1e-12);

        let stats = DocumentStats {
            word_count: 10,
            sentence_count: 1,
            complex_word_count: 10,
            byte_size: 60,
        };
        assert!((fog_index(&stats).unwrap() - 44.0).abs() < 1e-12);
    }

    #[test]
    fn fog_rejects_degenerate_documents() {
        let stats = DocumentStats {
            word_count: 0,
            sentence_count: 0,
            complex_word_count: 0,
            byte_size: 0,
        };
        assert!(matches!(fog_index(&stats), Err(Error::DegenerateDocument(_))));
    }

    #[test]
    fn fog_invariant_under_document_duplication() {
        let text = "The quarterly consolidated statements reflect significant uncertainty. \
                    Management evaluated the litigation exposure carefully.";
        let once = DocumentStats::from_text(text);
        let twice = DocumentStats::from_text(&format!("{text} {text}"));
        assert!((fog_index(&once).unwrap() - fog_index(&twice).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn log_file_size_values() {
        assert_eq!(log_file_size(1024).unwrap(), 0.0);
        assert!((log_file_size(1024 * 1024).unwrap() - 1024f64.ln()).abs() < 1e-12);
        assert!((log_file_size(1024 * 1024).unwrap() - 6.931).abs() < 1e-3);
        assert!(log_file_size(0).is_err());
    }

    #[test]
    fn stats_from_text() {
        let s = DocumentStats::from_text("The cat sat.");
        assert_eq!(s.word_count, 3);
        assert_eq!(s.sentence_count, 1);
        assert_eq!(s.complex_word_count, 0);

        let s = DocumentStats::from_text("");
        assert_eq!(s.word_count, 0);
        assert_eq!(s.sentence_count, 0);
    }
}
