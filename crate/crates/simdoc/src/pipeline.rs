//! End-to-end wiring: builds every artifact needed to score a corpus
//! (preprocessed docs, LDA model, topic-word index, similarity matrix,
//! baseline statistics) and exposes the named scoring variants.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    bag_of_topics, bag_of_words, bm25_symmetric, jaccard, tfidf_cosine, BagOfTokens, CorpusStats,
    BM25_DEFAULT_B, BM25_DEFAULT_K1,
};
use crate::document_scorer::{
    document_similarity, document_similarity_mean, document_similarity_rmsd,
    document_similarity_wordvec, to_topic_sequence_doc, SimDocConfig, TopicSequenceDoc,
};
use crate::error::{Result, SimDocError};
use crate::evaluation::CorpusRecord;
use crate::text_pipeline::{preprocess, PipelineConfig, PreprocessedDoc};
use crate::topic_embedding::{
    build_topic_similarity_matrix, TopicSimilarityMatrix, WordVectorStore,
};
use crate::topic_model::{build_topic_word_index, train_lda, LdaConfig, LdaModel, TopicWordIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Simdoc,
    Mean,
    Rmsd,
    Wordvec,
    JaccardBow,
    JaccardBot,
    Bm25Bow,
    Bm25Bot,
    Tfidf,
}

pub const ALL_VARIANTS: &[Variant] = &[
    Variant::Simdoc,
    Variant::Mean,
    Variant::Rmsd,
    Variant::Wordvec,
    Variant::JaccardBow,
    Variant::JaccardBot,
    Variant::Bm25Bow,
    Variant::Bm25Bot,
    Variant::Tfidf,
];

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Variant::Simdoc => "simdoc",
            Variant::Mean => "mean",
            Variant::Rmsd => "rmsd",
            Variant::Wordvec => "wordvec",
            Variant::JaccardBow => "jaccard-bow",
            Variant::JaccardBot => "jaccard-bot",
            Variant::Bm25Bow => "bm25-bow",
            Variant::Bm25Bot => "bm25-bot",
            Variant::Tfidf => "tfidf",
        };
        write!(f, "{name}")
    }
}

impl FromStr for Variant {
    type Err = SimDocError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simdoc" => Ok(Variant::Simdoc),
            "mean" => Ok(Variant::Mean),
            "rmsd" => Ok(Variant::Rmsd),
            "wordvec" => Ok(Variant::Wordvec),
            "jaccard-bow" => Ok(Variant::JaccardBow),
            "jaccard-bot" => Ok(Variant::JaccardBot),
            "bm25-bow" => Ok(Variant::Bm25Bow),
            "bm25-bot" => Ok(Variant::Bm25Bot),
            "tfidf" => Ok(Variant::Tfidf),
            other => {
                let valid: Vec<String> = ALL_VARIANTS.iter().map(|v| v.to_string()).collect();
                Err(SimDocError::Argument(format!(
                    "unknown variant {:?}; valid variants: {}",
                    other,
                    valid.join(", ")
                )))
            }
        }
    }
}

/// Everything needed to score any document pair of a corpus under any
/// variant. Immutable once built; scoring is safe to run concurrently.
pub struct Artifacts {
    pub model: LdaModel,
    pub index: TopicWordIndex,
    pub matrix: TopicSimilarityMatrix,
    pub store: Option<WordVectorStore>,
    pub simdoc_config: SimDocConfig,
    pub pre_docs: HashMap<String, PreprocessedDoc>,
    pub topic_docs: HashMap<String, TopicSequenceDoc>,
    bow: HashMap<String, BagOfTokens>,
    bot: HashMap<String, BagOfTokens>,
    bow_stats: CorpusStats,
    bot_stats: CorpusStats,
}

impl Artifacts {
    /// Preprocesses, trains the topic model, builds the index and (when
    /// a store is given) the topic similarity matrix, and precomputes
    /// baseline statistics.
    pub fn build(
        corpus: &[CorpusRecord],
        lda_config: &LdaConfig,
        simdoc_config: &SimDocConfig,
        store: Option<WordVectorStore>,
    ) -> Result<Self> {
        let train_cfg = PipelineConfig::training_default();
        let train_docs: Vec<PreprocessedDoc> = corpus
            .iter()
            .map(|r| preprocess(&r.text, &r.id, &train_cfg))
            .collect();
        let model = train_lda(&train_docs, lda_config)?;
        Self::from_model(corpus, model, simdoc_config, store)
    }

    /// Same as `build` but starting from an already-trained model.
    pub fn from_model(
        corpus: &[CorpusRecord],
        model: LdaModel,
        simdoc_config: &SimDocConfig,
        store: Option<WordVectorStore>,
    ) -> Result<Self> {
        let infer_cfg = PipelineConfig::inference_default();
        let index = build_topic_word_index(&model);
        let matrix = match &store {
            Some(s) => build_topic_similarity_matrix(&model, s, simdoc_config.top_k)?,
            None => TopicSimilarityMatrix::identity(model.num_topics()),
        };

        let mut pre_docs = HashMap::new();
        let mut topic_docs = HashMap::new();
        let mut bow = HashMap::new();
        let mut bot = HashMap::new();
        for r in corpus {
            let pre = preprocess(&r.text, &r.id, &infer_cfg);
            let topic_doc = to_topic_sequence_doc(&pre, &index);
            bow.insert(r.id.clone(), bag_of_words(&pre));
            bot.insert(r.id.clone(), bag_of_topics(&topic_doc));
            pre_docs.insert(r.id.clone(), pre);
            topic_docs.insert(r.id.clone(), topic_doc);
        }
        let bow_stats = CorpusStats::from_bags(bow.values());
        let bot_stats = CorpusStats::from_bags(bot.values());

        Ok(Artifacts {
            model,
            index,
            matrix,
            store,
            simdoc_config: simdoc_config.clone(),
            pre_docs,
            topic_docs,
            bow,
            bot,
            bow_stats,
            bot_stats,
        })
    }

    fn topic_doc(&self, id: &str) -> Result<&TopicSequenceDoc> {
        self.topic_docs
            .get(id)
            .ok_or_else(|| SimDocError::Data(format!("unknown document id {id:?}")))
    }

    fn pre_doc(&self, id: &str) -> Result<&PreprocessedDoc> {
        self.pre_docs
            .get(id)
            .ok_or_else(|| SimDocError::Data(format!("unknown document id {id:?}")))
    }

    /// Scores a document pair by id under the given variant, using the
    /// stored alignment parameters for the alignment-based variants.
    pub fn score(&self, variant: Variant, id_a: &str, id_b: &str) -> Result<f64> {
        self.score_with(variant, &self.simdoc_config, id_a, id_b)
    }

    /// Same as `score` but with explicit alignment parameters (used by
    /// the tuner).
    pub fn score_with(
        &self,
        variant: Variant,
        config: &SimDocConfig,
        id_a: &str,
        id_b: &str,
    ) -> Result<f64> {
        match variant {
            Variant::Simdoc => Ok(document_similarity(
                self.topic_doc(id_a)?,
                self.topic_doc(id_b)?,
                config,
                &self.matrix,
            )),
            Variant::Mean => Ok(document_similarity_mean(
                self.topic_doc(id_a)?,
                self.topic_doc(id_b)?,
                config,
                &self.matrix,
            )),
            Variant::Rmsd => Ok(document_similarity_rmsd(
                self.topic_doc(id_a)?,
                self.topic_doc(id_b)?,
                config,
                &self.matrix,
            )),
            Variant::Wordvec => {
                let store = self.store.as_ref().ok_or_else(|| {
                    SimDocError::Config("wordvec variant requires an embedding file".into())
                })?;
                Ok(document_similarity_wordvec(
                    self.pre_doc(id_a)?,
                    self.pre_doc(id_b)?,
                    config,
                    store,
                ))
            }
            Variant::JaccardBow => Ok(jaccard(
                &self.bow[self.check(id_a)?],
                &self.bow[self.check(id_b)?],
            )),
            Variant::JaccardBot => Ok(jaccard(
                &self.bot[self.check(id_a)?],
                &self.bot[self.check(id_b)?],
            )),
            Variant::Bm25Bow => bm25_symmetric(
                &self.bow[self.check(id_a)?],
                &self.bow[self.check(id_b)?],
                &self.bow_stats,
                BM25_DEFAULT_K1,
                BM25_DEFAULT_B,
            ),
            Variant::Bm25Bot => bm25_symmetric(
                &self.bot[self.check(id_a)?],
                &self.bot[self.check(id_b)?],
                &self.bot_stats,
                BM25_DEFAULT_K1,
                BM25_DEFAULT_B,
            ),
            Variant::Tfidf => Ok(tfidf_cosine(
                &self.bow[self.check(id_a)?],
                &self.bow[self.check(id_b)?],
                &self.bow_stats,
            )),
        }
    }

    fn check<'a>(&self, id: &'a str) -> Result<&'a str> {
        if self.bow.contains_key(id) {
            Ok(id)
        } else {
            Err(SimDocError::Data(format!("unknown document id {id:?}")))
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationEntry {
    pub variant: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport {
    pub schema_version: u32,
    pub entries: Vec<AblationEntry>,
}

/// Evaluates the document-level scorer variants (and the word-vector
/// variant when embeddings are available) on the same triplet set.
pub fn run_ablation_suite(
    artifacts: &Artifacts,
    triplets: &[crate::evaluation::Triplet],
) -> Result<AblationReport> {
    let mut variants = vec![Variant::Simdoc, Variant::Mean, Variant::Rmsd];
    if artifacts.store.is_some() {
        variants.push(Variant::Wordvec);
    }
    let mut entries = Vec::new();
    for v in variants {
        let report =
            crate::evaluation::eval_triplets(triplets, |a, b| artifacts.score(v, a, b))?;
        entries.push(AblationEntry {
            variant: v.to_string(),
            accuracy: report.accuracy,
        });
    }
    Ok(AblationReport {
        schema_version: crate::evaluation::REPORT_SCHEMA_VERSION,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate, SynthConfig};
    use crate::topic_embedding::load_word_vectors;
    use std::io::Write;

    pub(crate) fn build_from_synth(cfg: &SynthConfig) -> (Artifacts, Vec<crate::evaluation::Triplet>) {
        let ds = generate(cfg);
        let corpus: Vec<CorpusRecord> = ds
            .docs
            .iter()
            .map(|d| CorpusRecord {
                id: d.id.clone(),
                text: d.text.clone(),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let emb = dir.path().join("emb.txt");
        let mut f = std::fs::File::create(&emb).unwrap();
        for line in &ds.embedding_lines {
            writeln!(f, "{line}").unwrap();
        }
        let store = load_word_vectors(&emb).unwrap();
        let lda = LdaConfig {
            num_topics: cfg.num_topics,
            alpha: 0.1,
            beta: 0.01,
            gibbs_sweeps: 60,
            rng_seed: cfg.seed,
        };
        let artifacts =
            Artifacts::build(&corpus, &lda, &SimDocConfig::default(), Some(store)).unwrap();
        (artifacts, ds.triplets)
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("simdoc".parse::<Variant>().unwrap(), Variant::Simdoc);
        assert_eq!("bm25-bot".parse::<Variant>().unwrap(), Variant::Bm25Bot);
        let err = "nope".parse::<Variant>().unwrap_err();
        assert!(err.to_string().contains("jaccard-bow"), "{err}");
    }

    #[test]
    fn unknown_id_is_data_error() {
        let (artifacts, _) = build_from_synth(&SynthConfig::easy(3, 21));
        for v in ALL_VARIANTS {
            assert!(artifacts.score(*v, "nope", "trip0-d1").is_err(), "{v}");
        }
    }

    #[test]
    fn all_variants_score_synth_pairs() {
        let (artifacts, triplets) = build_from_synth(&SynthConfig::easy(3, 22));
        for v in ALL_VARIANTS {
            let s = artifacts.score(*v, &triplets[0].d1, &triplets[0].d2).unwrap();
            assert!(s.is_finite(), "{v}: {s}");
        }
    }

    #[test]
    fn ablation_lists_each_variant_once() {
        let (artifacts, triplets) = build_from_synth(&SynthConfig::easy(4, 23));
        let report = run_ablation_suite(&artifacts, &triplets).unwrap();
        let names: Vec<&str> = report.entries.iter().map(|e| e.variant.as_str()).collect();
        assert_eq!(names, vec!["simdoc", "mean", "rmsd", "wordvec"]);
    }
}

