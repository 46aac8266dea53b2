//! Bag-of-words / bag-of-topics reference scorers: Jaccard, symmetrized
//! Okapi BM25, and a TF-IDF cosine stand-in for Lucene-style scoring.

use std::collections::{HashMap, HashSet};

use crate::document_scorer::TopicSequenceDoc;
use crate::error::{Result, SimDocError};
use crate::text_pipeline::PreprocessedDoc;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagOfTokens {
    pub counts: HashMap<String, u64>,
    pub total_count: u64,
}

impl BagOfTokens {
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut counts = HashMap::new();
        let mut total = 0u64;
        for t in tokens {
            *counts.entry(t.into()).or_insert(0) += 1;
            total += 1;
        }
        BagOfTokens {
            counts,
            total_count: total,
        }
    }

    pub fn support(&self) -> HashSet<&str> {
        self.counts.keys().map(|s| s.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn bag_of_words(doc: &PreprocessedDoc) -> BagOfTokens {
    BagOfTokens::from_tokens(doc.sentences.iter().flatten().cloned())
}

/// Flattens all segments into a topic-count multiset; topic ids become
/// string tokens.
pub fn bag_of_topics(doc: &TopicSequenceDoc) -> BagOfTokens {
    BagOfTokens::from_tokens(doc.segments.iter().flatten().map(|t| t.to_string()))
}

/// |support(a) ∩ support(b)| / |support(a) ∪ support(b)|. Both empty is
/// 1 by convention, exactly one empty is 0.
pub fn jaccard(a: &BagOfTokens, b: &BagOfTokens) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let sa = a.support();
    let sb = b.support();
    let inter = sa.intersection(&sb).count() as f64;
    let union = sa.union(&sb).count() as f64;
    inter / union
}

#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub doc_freq: HashMap<String, u64>,
    pub num_docs: u64,
    pub avg_doc_len: f64,
}

impl CorpusStats {
    pub fn from_bags<'a, I>(bags: I) -> Self
    where
        I: IntoIterator<Item = &'a BagOfTokens>,
    {
        let mut doc_freq = HashMap::new();
        let mut num_docs = 0u64;
        let mut total_len = 0u64;
        for bag in bags {
            num_docs += 1;
            total_len += bag.total_count;
            for term in bag.counts.keys() {
                *doc_freq.entry(term.clone()).or_insert(0) += 1;
            }
        }
        CorpusStats {
            doc_freq,
            num_docs,
            avg_doc_len: if num_docs == 0 {
                0.0
            } else {
                total_len as f64 / num_docs as f64
            },
        }
    }

    /// Non-negative idf variant: ln((N - df + 0.5) / (df + 0.5) + 1).
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.num_docs as f64;
        let df = self.doc_freq.get(term).copied().unwrap_or(0) as f64;
        ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
    }
}

pub const BM25_DEFAULT_K1: f64 = 1.2;
pub const BM25_DEFAULT_B: f64 = 0.75;

/// One-directional Okapi BM25 of `query` terms against `doc`.
pub fn bm25(
    query: &BagOfTokens,
    doc: &BagOfTokens,
    stats: &CorpusStats,
    k1: f64,
    b: f64,
) -> Result<f64> {
    if stats.num_docs == 0 || stats.avg_doc_len <= 0.0 {
        return Err(SimDocError::Config("empty corpus stats".into()));
    }
    let dl = doc.total_count as f64;
    let mut score = 0.0;
    for term in query.counts.keys() {
        let tf = doc.counts.get(term).copied().unwrap_or(0) as f64;
        if tf == 0.0 {
            continue;
        }
        let norm = tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / stats.avg_doc_len));
        score += stats.idf(term) * norm;
    }
    Ok(score)
}

/// Document-pair score: mean of both retrieval directions.
pub fn bm25_symmetric(
    a: &BagOfTokens,
    b: &BagOfTokens,
    stats: &CorpusStats,
    k1: f64,
    b_param: f64,
) -> Result<f64> {
    Ok((bm25(a, b, stats, k1, b_param)? + bm25(b, a, stats, k1, b_param)?) / 2.0)
}

/// Cosine over (1 + ln tf) * idf weighted vectors. Stand-in for a
/// Lucene-style scorer; an approximation, not a replication.
pub fn tfidf_cosine(a: &BagOfTokens, b: &BagOfTokens, stats: &CorpusStats) -> f64 {
    let weight = |bag: &BagOfTokens, term: &str| -> f64 {
        let tf = bag.counts.get(term).copied().unwrap_or(0) as f64;
        if tf == 0.0 {
            0.0
        } else {
            (1.0 + tf.ln()) * stats.idf(term)
        }
    };
    let mut dot = 0.0;
    for term in a.counts.keys() {
        dot += weight(a, term) * weight(b, term);
    }
    let norm = |bag: &BagOfTokens| -> f64 {
        bag.counts
            .keys()
            .map(|t| weight(bag, t).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}
