//! Word and sentence segmentation for filing text.

/// Tokens, sentence structure, and the count of skipped non-text characters.
#[derive(Debug, Clone, Default)]
pub struct Tokenized {
    /// Case-folded words: maximal alphabetic-or-hyphen runs.
    pub tokens: Vec<String>,
    /// Byte offsets (into the input) of detected sentence terminators.
    pub sentence_boundaries: Vec<usize>,
    pub sentence_count: usize,
    /// Characters that were neither word characters, whitespace, nor
    /// ordinary punctuation.
    pub skipped_chars: usize,
}

const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "jr", "sr", "st", "no", "inc", "corp", "co", "ltd", "llc", "etc",
    "vs", "al", "fig", "est", "dept", "approx", "sec", "jan", "feb", "mar", "apr", "jun", "jul",
    "aug", "sep", "sept", "oct", "nov", "dec",
];

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '-'
}

fn is_ordinary(c: char) -> bool {
    c.is_ascii_alphanumeric()
        || c.is_whitespace()
        || matches!(
            c,
            '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"' | '(' | ')' | '[' | ']' | '-' | '—'
                | '–' | '$' | '%' | '&' | '/' | '*' | '#' | '@' | '+' | '=' | '<' | '>' | '_'
        )
}

/// Split text into case-folded word tokens and sentence boundaries.
///
/// A sentence ends at '.', '!' or '?' followed by whitespace and an uppercase
/// letter, or by end of text. A period after a listed abbreviation (or a
/// single letter, covering initials and dotted acronyms) does not end a
/// sentence. Text trailing the last terminator still counts as a sentence.
pub fn tokenize(text: &str) -> Tokenized {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Tokenized::default();
    let mut current = String::new();
    let mut last_word = String::new();
    let mut words_since_boundary = 0usize;

    let flush = |current: &mut String, out: &mut Tokenized, last_word: &mut String, count: &mut usize| {
        let trimmed = current.trim_matches('-');
        if !trimmed.is_empty() {
            out.tokens.push(trimmed.to_string());
            *last_word = trimmed.to_string();
            *count += 1;
        }
        current.clear();
    };

    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        if is_word_char(c) {
            current.push(c.to_ascii_lowercase());
            i += 1;
            continue;
        }
        flush(&mut current, &mut out, &mut last_word, &mut words_since_boundary);
        if matches!(c, '.' | '!' | '?') {
            let abbreviation = c == '.'
                && (last_word.len() == 1 || ABBREVIATIONS.contains(&last_word.as_str()));
            if !abbreviation {
                // skip closing quotes/brackets, then require whitespace +
                // uppercase, or end of text
                let mut j = i + 1;
                while j < chars.len() && matches!(chars[j].1, '"' | '\'' | ')' | ']') {
                    j += 1;
                }
                let at_end = j >= chars.len();
                let mut boundary = at_end;
                if !at_end && chars[j].1.is_whitespace() {
                    let mut k = j;
                    while k < chars.len() && chars[k].1.is_whitespace() {
                        k += 1;
                    }
                    boundary = k >= chars.len() || chars[k].1.is_uppercase();
                }
                if boundary && words_since_boundary > 0 {
                    out.sentence_boundaries.push(offset);
                    words_since_boundary = 0;
                }
            }
        } else if !is_ordinary(c) {
            out.skipped_chars += 1;
        }
        i += 1;
    }
    flush(&mut current, &mut out, &mut last_word, &mut words_since_boundary);

    out.sentence_count = out.sentence_boundaries.len() + usize::from(words_since_boundary > 0);
    out
}

/// Remove markup from a filing: `<table>…</table>` blocks, then all tags,
/// then a handful of common entities.
pub fn strip_markup(text: &str) -> String {
    let lower = text.to_ascii_lowercase();
    let mut kept = String::with_capacity(text.len());
    let mut pos = 0;
    while let Some(start) = lower[pos..].find("<table") {
        let start = pos + start;
        kept.push_str(&text[pos..start]);
        match lower[start..].find("</table>") {
            Some(end) => pos = start + end + "</table>".len(),
            None => {
                pos = text.len();
                break;
            }
        }
    }
    kept.push_str(&text[pos..]);

    let mut out = String::with_capacity(kept.len());
    let mut in_tag = false;
    for c in kept.chars() {
        match c {
            '<' => in_tag = true,
            '>' if in_tag => {
                in_tag = false;
                out.push(' ');
            }
            _ if !in_tag => out.push(c),
            _ => {}
        }
    }

    out.replace("&nbsp;", " ")
        .replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&#160;", " ")
}
