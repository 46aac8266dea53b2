//! LDA by collapsed Gibbs sampling, fold-in inference, and the inverted
//! topic-word index used for per-word topic assignment.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimDocError};
use crate::text_pipeline::PreprocessedDoc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub num_topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gibbs_sweeps: usize,
    pub rng_seed: u64,
}

impl Default for LdaConfig {
    /// Paper-scale priors with desk-scale sweeps.
    fn default() -> Self {
        LdaConfig {
            num_topics: 100,
            alpha: 0.1,
            beta: 0.001,
            gibbs_sweeps: 200,
            rng_seed: 42,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 1 {
            return Err(SimDocError::Config("num_topics must be >= 1".into()));
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(SimDocError::Config("alpha and beta must be > 0".into()));
        }
        if self.gibbs_sweeps < 1 {
            return Err(SimDocError::Config("gibbs_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub config: LdaConfig,
    /// word -> dense vocabulary id
    #[serde(serialize_with = "sorted_map")]
    pub vocabulary: HashMap<String, usize>,
    /// K x V counts, row-major per topic
    pub topic_word_counts: Vec<Vec<u64>>,
    pub topic_totals: Vec<u64>,
}

/// Serializes a word-keyed map in sorted order so files are
/// byte-identical across runs.
fn sorted_map<V: Serialize, S: serde::Serializer>(
    map: &HashMap<String, V>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let sorted: std::collections::BTreeMap<&String, &V> = map.iter().collect();
    sorted.serialize(serializer)
}

/// Serialized container version; bumped on layout changes.
const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: LdaModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocTopicVector {
    pub probabilities: Vec<f64>,
    /// Set when the document had no in-vocabulary tokens and the vector
    /// is the uniform smoothing-only limit.
    pub zero_tokens: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWordIndex {
    /// word -> (argmax topic, phi at that topic)
    #[serde(serialize_with = "sorted_map")]
    pub entries: HashMap<String, (usize, f64)>,
    pub num_topics: usize,
}

impl LdaModel {
    pub fn num_topics(&self) -> usize {
        self.config.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Smoothed topic-word probability phi_k(v).
    pub fn phi(&self, topic: usize, word_id: usize) -> f64 {
        let v = self.vocab_size() as f64;
        (self.topic_word_counts[topic][word_id] as f64 + self.config.beta)
            / (self.topic_totals[topic] as f64 + v * self.config.beta)
    }
}

fn build_vocabulary(corpus: &[PreprocessedDoc]) -> HashMap<String, usize> {
    // insertion order follows first occurrence in corpus order, so ids
    // are deterministic
    let mut vocab = HashMap::new();
    for doc in corpus {
        for sentence in &doc.sentences {
            for token in sentence {
                let next = vocab.len();
                vocab.entry(token.clone()).or_insert(next);
            }
        }
    }
    vocab
}

/// Per-sweep snapshot handed to the training observer.
pub struct SweepStats<'a> {
    pub sweep: usize,
    pub topic_totals: &'a [u64],
}

pub fn train_lda(corpus: &[PreprocessedDoc], config: &LdaConfig) -> Result<LdaModel> {
    train_lda_observed(corpus, config, |_| {})
}

/// Collapsed Gibbs training with a per-sweep observer hook (used by the
/// count-conservation checks).
pub fn train_lda_observed<F>(
    corpus: &[PreprocessedDoc],
    config: &LdaConfig,
    mut observer: F,
) -> Result<LdaModel>
where
    F: FnMut(&SweepStats),
{
    config.validate()?;
    if corpus.is_empty() {
        return Err(SimDocError::Config("empty corpus".into()));
    }
    let vocabulary = build_vocabulary(corpus);
    if vocabulary.is_empty() {
        return Err(SimDocError::Config("empty vocabulary".into()));
    }
    let k = config.num_topics;
    let v = vocabulary.len();

    // flatten documents to word-id lists
    let docs: Vec<Vec<usize>> = corpus
        .iter()
        .map(|d| {
            d.sentences
                .iter()
                .flatten()
                .map(|w| vocabulary[w])
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut topic_word = vec![vec![0u64; v]; k];
    let mut topic_totals = vec![0u64; k];
    let mut doc_topic = vec![vec![0u64; k]; docs.len()];
    let mut assignments: Vec<Vec<usize>> = docs
        .iter()
        .map(|words| words.iter().map(|_| rng.gen_range(0..k)).collect())
        .collect();
    for (d, words) in docs.iter().enumerate() {
        for (i, &w) in words.iter().enumerate() {
            let z = assignments[d][i];
            topic_word[z][w] += 1;
            topic_totals[z] += 1;
            doc_topic[d][z] += 1;
        }
    }

    let vbeta = v as f64 * config.beta;
    let mut weights = vec![0.0f64; k];
    for sweep in 0..config.gibbs_sweeps {
        for (d, words) in docs.iter().enumerate() {
            for (i, &w) in words.iter().enumerate() {
                let old = assignments[d][i];
                topic_word[old][w] -= 1;
                topic_totals[old] -= 1;
                doc_topic[d][old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    let wgt = (doc_topic[d][t] as f64 + config.alpha)
                        * (topic_word[t][w] as f64 + config.beta)
                        / (topic_totals[t] as f64 + vbeta);
                    weights[t] = wgt;
                    total += wgt;
                }
                let mut u = rng.gen::<f64>() * total;
                let mut new = k - 1;
                for (t, &wgt) in weights.iter().enumerate() {
                    u -= wgt;
                    if u <= 0.0 {
                        new = t;
                        break;
                    }
                }

                assignments[d][i] = new;
                topic_word[new][w] += 1;
                topic_totals[new] += 1;
                doc_topic[d][new] += 1;
            }
        }
        observer(&SweepStats {
            sweep,
            topic_totals: &topic_totals,
        });
    }

    Ok(LdaModel {
        config: config.clone(),
        vocabulary,
        topic_word_counts: topic_word,
        topic_totals,
    })
}

/// Fold-in sweeps used by `infer_topic_distribution`.
pub const INFERENCE_SWEEPS: usize = 20;

/// Gibbs fold-in over the document's tokens with model counts held
/// fixed; returns smoothed proportions (n_dk + alpha) / (N_d + K*alpha).
pub fn infer_topic_distribution(doc: &PreprocessedDoc, model: &LdaModel) -> DocTopicVector {
    let k = model.num_topics();
    let words: Vec<usize> = doc
        .sentences
        .iter()
        .flatten()
        .filter_map(|w| model.vocabulary.get(w).copied())
        .collect();
    let alpha = model.config.alpha;
    if words.is_empty() {
        return DocTopicVector {
            probabilities: vec![1.0 / k as f64; k],
            zero_tokens: true,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(model.config.rng_seed ^ 0x5eed_f01d);
    let mut doc_topic = vec![0u64; k];
    let mut assignments: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
    for &z in &assignments {
        doc_topic[z] += 1;
    }
    let mut weights = vec![0.0f64; k];
    for _ in 0..INFERENCE_SWEEPS {
        for (i, &w) in words.iter().enumerate() {
            let old = assignments[i];
            doc_topic[old] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                let wgt = (doc_topic[t] as f64 + alpha) * model.phi(t, w);
                weights[t] = wgt;
                total += wgt;
            }
            let mut u = rng.gen::<f64>() * total;
            let mut new = k - 1;
            for (t, &wgt) in weights.iter().enumerate() {
                u -= wgt;
                if u <= 0.0 {
                    new = t;
                    break;
                }
            }
            assignments[i] = new;
            doc_topic[new] += 1;
        }
    }

    let n = words.len() as f64;
    let denom = n + k as f64 * alpha;
    DocTopicVector {
        probabilities: doc_topic
            .iter()
            .map(|&c| (c as f64 + alpha) / denom)
            .collect(),
        zero_tokens: false,
    }
}

/// Maps every vocabulary word to argmax_k phi_k(w); ties go to the
/// lowest topic id.
pub fn build_topic_word_index(model: &LdaModel) -> TopicWordIndex {
    let k = model.num_topics();
    let mut entries = HashMap::with_capacity(model.vocab_size());
    for (word, &wid) in &model.vocabulary {
        let mut best_topic = 0;
        let mut best_phi = model.phi(0, wid);
        for t in 1..k {
            let p = model.phi(t, wid);
            if p > best_phi {
                best_phi = p;
                best_topic = t;
            }
        }
        entries.insert(word.clone(), (best_topic, best_phi));
    }
    TopicWordIndex {
        entries,
        num_topics: k,
    }
}

/// Index lookup; out-of-vocabulary words return None and the caller
/// drops the token.
pub fn assign_topic(word: &str, index: &TopicWordIndex) -> Option<usize> {
    index.entries.get(word).map(|&(t, _)| t)
}

/// The k highest-phi words of a topic, descending probability, ties by
/// word order.
pub fn top_words(model: &LdaModel, topic: usize, k: usize) -> Result<Vec<String>> {
    if topic >= model.num_topics() {
        return Err(SimDocError::Argument(format!(
            "topic {} out of range (K={})",
            topic,
            model.num_topics()
        )));
    }
    let mut words: Vec<(&String, f64)> = model
        .vocabulary
        .iter()
        .map(|(w, &wid)| (w, model.phi(topic, wid)))
        .collect();
    words.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(b.0)));
    Ok(words.into_iter().take(k).map(|(w, _)| w.clone()).collect())
}

pub fn save_model(model: &LdaModel, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let container = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    serde_json::to_writer(BufWriter::new(file), &container)
        .map_err(|e| SimDocError::Format(format!("model serialization failed: {e}")))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<LdaModel> {
    let file = File::open(path)?;
    let container: ModelFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| SimDocError::Format(format!("model file unreadable: {e}")))?;
    if container.format_version != MODEL_FORMAT_VERSION {
        return Err(SimDocError::Format(format!(
            "unsupported model format version {}",
            container.format_version
        )));
    }
    Ok(container.model)
}
