//! Word-vector loading, topic encoding as mean top-k word vectors, and
//! the precomputed K x K topic cosine-similarity matrix.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Result, SimDocError};
use crate::topic_model::{top_words, LdaModel};

#[derive(Debug, Clone)]
pub struct WordVectorStore {
    pub vectors: HashMap<String, Vec<f64>>,
    pub dimension: usize,
}

impl WordVectorStore {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(|v| v.as_slice())
    }
}

/// Parses the `word v1 v2 ... vD` one-line-per-word text format.
/// Duplicate words keep the first occurrence.
pub fn load_word_vectors(path: &Path) -> Result<WordVectorStore> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut vectors = HashMap::new();
    let mut dimension = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts
            .next()
            .ok_or_else(|| SimDocError::Format(format!("line {}: empty record", lineno + 1)))?;
        let values: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| {
                    SimDocError::Format(format!("line {}: bad float {:?}", lineno + 1, p))
                })
            })
            .collect::<Result<_>>()?;
        if values.is_empty() {
            return Err(SimDocError::Format(format!(
                "line {}: no vector components",
                lineno + 1
            )));
        }
        if dimension == 0 {
            dimension = values.len();
        } else if values.len() != dimension {
            return Err(SimDocError::Format(format!(
                "line {}: expected {} components, found {}",
                lineno + 1,
                dimension,
                values.len()
            )));
        }
        vectors.entry(word.to_string()).or_insert(values);
    }
    if vectors.is_empty() {
        return Err(SimDocError::Format("embedding file holds no vectors".into()));
    }
    Ok(WordVectorStore { vectors, dimension })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSimilarityMatrix {
    pub values: Vec<Vec<f64>>,
    pub top_k: usize,
    /// Topics whose top-k words had no embeddings; they score 0 against
    /// every topic.
    pub flagged: Vec<bool>,
}

impl TopicSimilarityMatrix {
    pub fn num_topics(&self) -> usize {
        self.values.len()
    }

    /// Identity matrix stand-in: topics are only similar to themselves.
    /// Used when no embedding file is supplied.
    pub fn identity(k: usize) -> Self {
        let mut values = vec![vec![0.0; k]; k];
        for (i, row) in values.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        TopicSimilarityMatrix {
            values,
            top_k: 0,
            flagged: vec![false; k],
        }
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Mean of the embeddable top-k word vectors of a topic; words missing
/// from the store are skipped. Returns (vector, embeddable) where
/// embeddable is false when no top-k word had a vector (zero vector).
pub fn encode_topic(
    model: &LdaModel,
    topic: usize,
    store: &WordVectorStore,
    k: usize,
) -> Result<(Vec<f64>, bool)> {
    let words = top_words(model, topic, k)?;
    let mut acc = vec![0.0f64; store.dimension];
    let mut found = 0usize;
    for word in &words {
        if let Some(vec) = store.get(word) {
            for (a, v) in acc.iter_mut().zip(vec) {
                *a += v;
            }
            found += 1;
        }
    }
    if found == 0 {
        return Ok((acc, false));
    }
    for a in acc.iter_mut() {
        *a /= found as f64;
    }
    Ok((acc, true))
}

/// Precomputes all K^2 pairwise topic cosines; symmetric by
/// construction, flagged topics contribute 0 everywhere.
pub fn build_topic_similarity_matrix(
    model: &LdaModel,
    store: &WordVectorStore,
    k: usize,
) -> Result<TopicSimilarityMatrix> {
    let num_topics = model.num_topics();
    let mut encodings = Vec::with_capacity(num_topics);
    let mut flagged = Vec::with_capacity(num_topics);
    for t in 0..num_topics {
        let (vec, embeddable) = encode_topic(model, t, store, k)?;
        encodings.push(vec);
        flagged.push(!embeddable);
    }
    let mut values = vec![vec![0.0f64; num_topics]; num_topics];
    for i in 0..num_topics {
        for j in i..num_topics {
            let sim = if flagged[i] || flagged[j] {
                0.0
            } else {
                cosine(&encodings[i], &encodings[j])
            };
            values[i][j] = sim;
            values[j][i] = sim;
        }
    }
    Ok(TopicSimilarityMatrix {
        values,
        top_k: k,
        flagged,
    })
}

/// Matrix lookup with range checking.
pub fn topic_similarity(t_i: usize, t_j: usize, matrix: &TopicSimilarityMatrix) -> Result<f64> {
    let k = matrix.num_topics();
    if t_i >= k || t_j >= k {
        return Err(SimDocError::Argument(format!(
            "topic pair ({t_i},{t_j}) out of range (K={k})"
        )));
    }
    Ok(matrix.values[t_i][t_j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topic_model::LdaConfig;
    
    use proptest::prelude::*;
    use std::io::Write;

    fn write_store(lines: &[&str]) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.txt");
        let mut f = File::create(&path).unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        (dir, path)
    }

    #[test]
    fn loads_small_store() {
        let (_d, path) = write_store(&["cat 1.0 0.0 0.0", "dog 0.0 1.0 0.0"]);
        let store = load_word_vectors(&path).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.dimension, 3);
        assert_eq!(store.get("cat").unwrap(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn dimension_drift_reports_line() {
        let (_d, path) = write_store(&["cat 1.0 0.0 0.0", "dog 0.0 1.0"]);
        match load_word_vectors(&path) {
            Err(SimDocError::Format(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn bad_float_reports_line() {
        let (_d, path) = write_store(&["cat 1.0 zero 0.0"]);
        match load_word_vectors(&path) {
            Err(SimDocError::Format(msg)) => assert!(msg.contains("line 1"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn duplicates_keep_first() {
        let (_d, path) = write_store(&["cat 1.0 0.0", "cat 0.0 1.0"]);
        let store = load_word_vectors(&path).unwrap();
        assert_eq!(store.get("cat").unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn missing_file_is_io_error() {
        match load_word_vectors(Path::new("/nonexistent/vectors.txt")) {
            Err(SimDocError::Io(_)) => {}
            other => panic!("expected io error, got {other:?}"),
        }
    }

    /// Hand-built two-topic model with a predictable top-2 word split:
    /// topic 0 is {cat, dog}, topic 1 is {car, bus}.
    fn toy_model() -> LdaModel {
        LdaModel {
            config: LdaConfig {
                num_topics: 2,
                alpha: 0.1,
                beta: 0.01,
                gibbs_sweeps: 1,
                rng_seed: 3,
            },
            vocabulary: [("cat", 0), ("dog", 1), ("car", 2), ("bus", 3)]
                .into_iter()
                .map(|(w, i)| (w.to_string(), i))
                .collect(),
            topic_word_counts: vec![vec![5, 3, 0, 0], vec![0, 0, 5, 3]],
            topic_totals: vec![8, 8],
        }
    }

    #[test]
    fn encode_topic_is_mean_of_embeddable_words() {
        let model = toy_model();
        let (_d, path) = write_store(&[
            "cat 1.0 0.0 0.0",
            "dog 0.0 1.0 0.0",
            "car 0.0 0.0 1.0",
            "bus 0.0 0.0 1.0",
        ]);
        let store = load_word_vectors(&path).unwrap();
        for t in 0..2 {
            let (vec, ok) = encode_topic(&model, t, &store, 2).unwrap();
            assert!(ok);
            // each topic's words are a subset of the store; the mean of
            // any mix of these unit vectors has components summing to 1
            let total: f64 = vec.iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn encode_topic_single_word() {
        let model = toy_model();
        let (_d, path) = write_store(&["cat 2.0 4.0 0.0"]);
        let store = load_word_vectors(&path).unwrap();
        // only "cat" is embeddable; whichever topic holds it returns its
        // exact vector, the other is flagged
        let mut embeddable = 0;
        for t in 0..2 {
            let (vec, ok) = encode_topic(&model, t, &store, 2).unwrap();
            if ok {
                assert_eq!(vec, vec![2.0, 4.0, 0.0]);
                embeddable += 1;
            } else {
                assert_eq!(vec, vec![0.0, 0.0, 0.0]);
            }
        }
        assert_eq!(embeddable, 1);
    }

    #[test]
    fn matrix_properties() {
        let model = toy_model();
        let (_d, path) = write_store(&[
            "cat 1.0 0.0 0.0",
            "dog 1.0 0.2 0.0",
            "car 0.0 0.0 1.0",
            "bus 0.1 0.0 1.0",
        ]);
        let store = load_word_vectors(&path).unwrap();
        let matrix = build_topic_similarity_matrix(&model, &store, 2).unwrap();
        for i in 0..2 {
            assert!((matrix.values[i][i] - 1.0).abs() < 1e-9);
            for j in 0..2 {
                assert!((matrix.values[i][j] - matrix.values[j][i]).abs() < 1e-12);
                assert!(matrix.values[i][j] >= -1.0 - 1e-12);
                assert!(matrix.values[i][j] <= 1.0 + 1e-12);
            }
        }
        assert!(topic_similarity(0, 1, &matrix).is_ok());
        assert!(topic_similarity(0, 5, &matrix).is_err());
    }

    #[test]
    fn hand_cosines() {
        assert!((cosine(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0])).abs() < 1e-12);
        assert!((cosine(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]) - 0.7071).abs() < 1e-4);
        assert!((cosine(&[2.0, 0.0], &[2.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unembeddable_topic_scores_zero() {
        let model = toy_model();
        // only one topic's words exist in the store
        let (_d, path) = write_store(&["cat 1.0 0.0", "dog 0.5 0.5"]);
        let store = load_word_vectors(&path).unwrap();
        let matrix = build_topic_similarity_matrix(&model, &store, 2).unwrap();
        let flagged: Vec<usize> = (0..2).filter(|&t| matrix.flagged[t]).collect();
        assert_eq!(flagged.len(), 1);
        let f = flagged[0];
        assert_eq!(matrix.values[f][0], 0.0);
        assert_eq!(matrix.values[f][1], 0.0);
        assert_eq!(matrix.values[f][f], 0.0);
    }

    #[test]
    fn identity_matrix() {
        let m = TopicSimilarityMatrix::identity(3);
        assert_eq!(m.values[0][0], 1.0);
        assert_eq!(m.values[0][1], 0.0);
    }

    proptest! {
        #[test]
        fn scale_invariance(scale in 0.1f64..10.0) {
            let model = toy_model();
            let base = ["cat 1.0 0.3 0.0", "dog 0.2 1.0 0.0", "car 0.0 0.1 1.0", "bus 0.3 0.0 1.0"];
            let (_d1, p1) = write_store(&base);
            let scaled: Vec<String> = base.iter().map(|l| {
                let mut parts = l.split_whitespace();
                let w = parts.next().unwrap();
                let vals: Vec<String> = parts.map(|v| format!("{}", v.parse::<f64>().unwrap() * scale)).collect();
                format!("{} {}", w, vals.join(" "))
            }).collect();
            let scaled_refs: Vec<&str> = scaled.iter().map(|s| s.as_str()).collect();
            let (_d2, p2) = write_store(&scaled_refs);
            let m1 = build_topic_similarity_matrix(&model, &load_word_vectors(&p1).unwrap(), 2).unwrap();
            let m2 = build_topic_similarity_matrix(&model, &load_word_vectors(&p2).unwrap(), 2).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!((m1.values[i][j] - m2.values[i][j]).abs() < 1e-9);
                }
            }
        }
    }
}
