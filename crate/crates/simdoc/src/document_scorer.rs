//! Topic-sequence documents and the two-level SimDoc similarity, plus
//! the mean / RMSD / word-vector variants used for internal comparison.

use serde::{Deserialize, Serialize};

use crate::alignment::{normalized_alignment, AlignmentMode, AlignmentParams};
use crate::text_pipeline::PreprocessedDoc;
use crate::topic_embedding::{cosine, TopicSimilarityMatrix, WordVectorStore};
use crate::topic_model::{assign_topic, TopicWordIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSequenceDoc {
    pub source_id: String,
    /// One topic-id sequence per surviving sentence.
    pub segments: Vec<Vec<usize>>,
}

impl TopicSequenceDoc {
    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDocConfig {
    pub sentence_params: AlignmentParams,
    pub document_params: AlignmentParams,
    pub top_k: usize,
    pub alignment_mode: AlignmentMode,
}

impl Default for SimDocConfig {
    fn default() -> Self {
        SimDocConfig {
            sentence_params: AlignmentParams::reference_init(),
            document_params: AlignmentParams::reference_init(),
            top_k: 10,
            alignment_mode: AlignmentMode::Corner,
        }
    }
}

impl SimDocConfig {
    /// Default sentence-level parameters with much milder document-level
    /// gap penalties. The triangular normalizer keeps sentence
    /// similarities small (an exact self-match of length L scores only
    /// 2/(L+1)), so document-level gaps on the order of -1 drown the
    /// compensation term; shrinking them lets sentence similarity drive
    /// the document alignment. Works markedly better on short documents
    /// than `default()`.
    pub fn recommended() -> Self {
        SimDocConfig {
            document_params: AlignmentParams {
                match_gain: 1.0,
                gap_insert: -0.05,
                gap_delete: -0.05,
                gap_substitute: -0.1,
                discount_factor: 1.0,
            },
            ..Self::default()
        }
    }
}

/// Maps in-vocabulary tokens to their indexed topics, preserving order
/// and sentence boundaries; OOV tokens and emptied sentences are
/// dropped.
pub fn to_topic_sequence_doc(doc: &PreprocessedDoc, index: &TopicWordIndex) -> TopicSequenceDoc {
    let segments = doc
        .sentences
        .iter()
        .map(|sentence| {
            sentence
                .iter()
                .filter_map(|w| assign_topic(w, index))
                .collect::<Vec<usize>>()
        })
        .filter(|seg| !seg.is_empty())
        .collect();
    TopicSequenceDoc {
        source_id: doc.source_id.clone(),
        segments,
    }
}

/// Clamped topic similarity used as mismatch compensation; raw cosine
/// may be negative, which would turn the bonus into extra penalty.
fn clamped_sim(a: usize, b: usize, matrix: &TopicSimilarityMatrix) -> f64 {
    matrix.values[a][b].clamp(0.0, 1.0)
}

/// Normalized sentence-level alignment between two topic sequences.
pub fn sentence_similarity(
    seg_a: &[usize],
    seg_b: &[usize],
    config: &SimDocConfig,
    matrix: &TopicSimilarityMatrix,
) -> f64 {
    if seg_a.is_empty() || seg_b.is_empty() {
        return 0.0;
    }
    normalized_alignment(
        seg_a,
        seg_b,
        &config.sentence_params,
        config.alignment_mode,
        |x, y| x == y,
        |&x, &y| clamped_sim(x, y, matrix),
    )
}

/// All-pairs sentence similarity table, computed once per document pair
/// and reused by the document-level recurrence and the ablation
/// aggregators.
pub fn sentence_similarity_matrix(
    doc_a: &TopicSequenceDoc,
    doc_b: &TopicSequenceDoc,
    config: &SimDocConfig,
    matrix: &TopicSimilarityMatrix,
) -> Vec<Vec<f64>> {
    doc_a
        .segments
        .iter()
        .map(|sa| {
            doc_b
                .segments
                .iter()
                .map(|sb| sentence_similarity(sa, sb, config, matrix))
                .collect()
        })
        .collect()
}

/// Two-level SimDoc score: document-level alignment over segments where
/// a match requires element-wise identical topic sequences and mismatch
/// compensation is the precomputed sentence similarity.
pub fn document_similarity(
    doc_a: &TopicSequenceDoc,
    doc_b: &TopicSequenceDoc,
    config: &SimDocConfig,
    matrix: &TopicSimilarityMatrix,
) -> f64 {
    if doc_a.is_empty() || doc_b.is_empty() {
        return 0.0;
    }
    let table = sentence_similarity_matrix(doc_a, doc_b, config, matrix);
    let rows: Vec<usize> = (0..doc_a.segments.len()).collect();
    let cols: Vec<usize> = (0..doc_b.segments.len()).collect();
    normalized_alignment(
        &rows,
        &cols,
        &config.document_params,
        config.alignment_mode,
        |&i, &j| doc_a.segments[i] == doc_b.segments[j],
        |&i, &j| table[i][j],
    )
}

/// Arithmetic mean of the all-pairs sentence similarity table.
pub fn document_similarity_mean(
    doc_a: &TopicSequenceDoc,
    doc_b: &TopicSequenceDoc,
    config: &SimDocConfig,
    matrix: &TopicSimilarityMatrix,
) -> f64 {
    if doc_a.is_empty() || doc_b.is_empty() {
        return 0.0;
    }
    mean_of_table(&sentence_similarity_matrix(doc_a, doc_b, config, matrix))
}

pub(crate) fn mean_of_table(table: &[Vec<f64>]) -> f64 {
    let cells = table.iter().map(|r| r.len()).sum::<usize>();
    if cells == 0 {
        return 0.0;
    }
    table.iter().flatten().sum::<f64>() / cells as f64
}

/// Root mean square of each row's best match; callers pass the table
/// oriented so rows belong to the shorter document.
pub(crate) fn rmsd_of_table(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = rows
        .iter()
        .map(|row| {
            let best = row.iter().cloned().fold(0.0f64, f64::max);
            best * best
        })
        .sum();
    (sum_sq / rows.len() as f64).sqrt()
}

/// Root mean square of the best-match similarity of every sentence of
/// the shorter document.
pub fn document_similarity_rmsd(
    doc_a: &TopicSequenceDoc,
    doc_b: &TopicSequenceDoc,
    config: &SimDocConfig,
    matrix: &TopicSimilarityMatrix,
) -> f64 {
    if doc_a.is_empty() || doc_b.is_empty() {
        return 0.0;
    }
    let table = sentence_similarity_matrix(doc_a, doc_b, config, matrix);
    let rows = if doc_a.segments.len() <= doc_b.segments.len() {
        table
    } else {
        (0..doc_b.segments.len())
            .map(|j| (0..doc_a.segments.len()).map(|i| table[i][j]).collect())
            .collect()
    };
    rmsd_of_table(&rows)
}

/// Word-vector-only variant: the same two-level alignment but tokens
/// are words, equality is string equality, and mismatch compensation is
/// the clamped cosine of the word vectors.
pub fn document_similarity_wordvec(
    doc_a: &PreprocessedDoc,
    doc_b: &PreprocessedDoc,
    config: &SimDocConfig,
    store: &WordVectorStore,
) -> f64 {
    if doc_a.sentences.is_empty() || doc_b.sentences.is_empty() {
        return 0.0;
    }
    let word_sim = |a: &String, b: &String| -> f64 {
        match (store.get(a), store.get(b)) {
            (Some(va), Some(vb)) => cosine(va, vb).clamp(0.0, 1.0),
            _ => 0.0,
        }
    };
    let sentence = |sa: &[String], sb: &[String]| -> f64 {
        if sa.is_empty() || sb.is_empty() {
            return 0.0;
        }
        normalized_alignment(
            sa,
            sb,
            &config.sentence_params,
            config.alignment_mode,
            |x, y| x == y,
            word_sim,
        )
    };
    let table: Vec<Vec<f64>> = doc_a
        .sentences
        .iter()
        .map(|sa| doc_b.sentences.iter().map(|sb| sentence(sa, sb)).collect())
        .collect();
    let rows: Vec<usize> = (0..doc_a.sentences.len()).collect();
    let cols: Vec<usize> = (0..doc_b.sentences.len()).collect();
    normalized_alignment(
        &rows,
        &cols,
        &config.document_params,
        config.alignment_mode,
        |&i, &j| doc_a.sentences[i] == doc_b.sentences[j],
        |&i, &j| table[i][j],
    )
}
