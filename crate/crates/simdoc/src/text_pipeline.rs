//! Text preprocessing: sentence segmentation, tokenization, stop-word
//! removal, light suffix stemming, and shallow voice normalization.

use std::collections::HashSet;

/// Abbreviations that never terminate a sentence, stored without the
/// trailing period, lowercase.
const ABBREVIATIONS: &[&str] = &[
    "e.g", "i.e", "etc", "fig", "figs", "eq", "eqs", "sec", "cf", "vs", "al",
    "dr", "mr", "mrs", "ms", "prof", "no", "vol", "pp", "resp", "approx",
];

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// Forms of "to be" recognized by the passive-voice rewrite.
const BE_FORMS: &[&str] = &["is", "are", "was", "were", "be", "been", "being", "am"];

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub stopwords: HashSet<String>,
    pub stemming_enabled: bool,
    pub voice_normalization_enabled: bool,
    pub min_token_length: usize,
}

impl PipelineConfig {
    /// Inference-time defaults: bundled stopword list, stemming on,
    /// voice normalization on.
    pub fn inference_default() -> Self {
        PipelineConfig {
            stopwords: default_stopwords(),
            stemming_enabled: true,
            voice_normalization_enabled: true,
            min_token_length: 2,
        }
    }

    /// Training-time defaults: voice normalization off.
    pub fn training_default() -> Self {
        PipelineConfig {
            voice_normalization_enabled: false,
            ..Self::inference_default()
        }
    }
}

pub fn default_stopwords() -> HashSet<String> {
    DEFAULT_STOPWORDS
        .split_whitespace()
        .map(|w| w.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessedDoc {
    pub source_id: String,
    pub sentences: Vec<Vec<String>>,
}

impl PreprocessedDoc {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }
}

/// Splits text into sentences on `.`, `!`, `?` followed by whitespace or
/// end of text. A period preceded by a single letter or a listed
/// abbreviation does not split.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c == '.' || c == '!' || c == '?' {
            let at_boundary = i + 1 == chars.len() || chars[i + 1].is_whitespace();
            let guarded = c == '.' && is_abbreviation(&chars[start..i]);
            if at_boundary && !guarded {
                let sentence: String = chars[start..=i].iter().collect();
                let sentence = sentence.trim();
                if !sentence.is_empty() {
                    sentences.push(sentence.to_string());
                }
                start = i + 1;
            }
        }
        i += 1;
    }
    let tail: String = chars[start..].iter().collect();
    let tail = tail.trim();
    if !tail.is_empty() {
        sentences.push(tail.to_string());
    }
    sentences
}

/// True when the word immediately preceding a period is a single
/// uppercase letter (an initial, "J.") or a known abbreviation
/// ("fig.", "e.g.").
fn is_abbreviation(before: &[char]) -> bool {
    let end = before.len();
    let mut begin = end;
    while begin > 0 && !before[begin - 1].is_whitespace() {
        begin -= 1;
    }
    // strip leading punctuation such as an opening parenthesis
    while begin < end && !before[begin].is_alphanumeric() && before[begin] != '.' {
        begin += 1;
    }
    if begin == end {
        return false;
    }
    let raw: String = before[begin..end].iter().collect();
    if raw.chars().count() == 1 && raw.chars().all(|c| c.is_uppercase()) {
        return true;
    }
    ABBREVIATIONS.contains(&raw.to_lowercase().as_str())
}

/// Lowercases, splits on non-letter characters, drops stopwords and short
/// tokens, optionally applies light suffix stemming.
pub fn tokenize_and_filter(sentence: &str, config: &PipelineConfig) -> Vec<String> {
    sentence
        .to_lowercase()
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .filter(|t| !config.stopwords.contains(*t))
        .filter(|t| t.chars().count() >= config.min_token_length)
        .map(|t| {
            if config.stemming_enabled {
                stem(t)
            } else {
                t.to_string()
            }
        })
        .collect()
}

/// Light suffix stemmer: strips "-ing", "-ed", "-es" (after a sibilant),
/// or "-s", keeping stems of at least 3 characters.
pub fn stem(token: &str) -> String {
    let n = token.chars().count();
    if n >= 6 {
        if let Some(s) = token.strip_suffix("ing") {
            return s.to_string();
        }
    }
    if n >= 5 {
        if let Some(s) = token.strip_suffix("ed") {
            return s.to_string();
        }
    }
    // "es" only after sibilant endings (boxes, watches); otherwise a bare
    // plural "s" (loves -> love)
    if n >= 5 {
        if let Some(s) = token.strip_suffix("es") {
            if s.ends_with('s') || s.ends_with('x') || s.ends_with('z') || s.ends_with("ch") || s.ends_with("sh") {
                return s.to_string();
            }
        }
    }
    if n >= 4 && !token.ends_with("ss") {
        if let Some(s) = token.strip_suffix('s') {
            return s.to_string();
        }
    }
    token.to_string()
}

/// Rewrites a passive sentence of the shape
/// `<subject> <be-form> <participle> by <agent>` into
/// `<agent> <participle> <subject>`. Anything else passes through
/// unchanged. The participle keeps its passive form.
pub fn normalize_voice(sentence: &str) -> String {
    let words: Vec<&str> = sentence.split_whitespace().collect();
    let be_pos = match words
        .iter()
        .position(|w| BE_FORMS.contains(&w.to_lowercase().as_str()))
    {
        Some(p) if p >= 1 && p + 2 < words.len() => p,
        _ => return sentence.to_string(),
    };
    let verb = words[be_pos + 1];
    if verb.to_lowercase() == "by" {
        return sentence.to_string();
    }
    if words[be_pos + 2].to_lowercase() != "by" || be_pos + 3 >= words.len() {
        return sentence.to_string();
    }
    let subject = words[..be_pos].join(" ");
    let agent = words[be_pos + 3..].join(" ");
    format!("{} {} {}", agent, verb, subject)
}

/// Full preprocessing: segment, optionally normalize voice, tokenize and
/// filter; empty sentences are dropped.
pub fn preprocess(text: &str, source_id: &str, config: &PipelineConfig) -> PreprocessedDoc {
    let sentences = segment_sentences(text)
        .into_iter()
        .map(|s| {
            if config.voice_normalization_enabled {
                normalize_voice(&s)
            } else {
                s
            }
        })
        .map(|s| tokenize_and_filter(&s, config))
        .filter(|tokens| !tokens.is_empty())
        .collect();
    PreprocessedDoc {
        source_id: source_id.to_string(),
        sentences,
    }
}
