//! Deterministic planted-triplet generator: synthetic corpora where the
//! ground-truth similarity ordering is known by construction, plus a
//! matching synthetic embedding file.
//!
//! Easy mode draws D3 from a template over a disjoint topic subset.
//! Hard mode derives D3 from D2's own tokens so that the topic (and
//! word) multisets are identical while the order differs: even-indexed
//! triplets scramble tokens document-wide, odd-indexed triplets shuffle
//! whole sentences.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::evaluation::Triplet;

/// Letters that survive the tokenizer untouched: no vowels (keeps
/// synthetic words out of the stopword list) and none of the stemmer
/// suffix letters.
const WORD_ALPHABET: &[u8] = b"bcdfhklmnpqrtvw";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_topics: usize,
    pub vocab_per_topic: usize,
    pub num_triplets: usize,
    pub segments_per_doc: (usize, usize),
    pub tokens_per_segment: (usize, usize),
    /// Fraction of D1 topic positions mutated to another template topic.
    pub topic_noise: f64,
    /// Target cosine between paired planted topic directions
    /// (topics 2p and 2p+1). 0 keeps all topics near-orthogonal.
    pub embed_correlation: f64,
    pub embed_dim: usize,
    pub hard: bool,
    pub seed: u64,
}

impl SynthConfig {
    pub fn easy(num_triplets: usize, seed: u64) -> Self {
        SynthConfig {
            num_topics: 6,
            vocab_per_topic: 30,
            num_triplets,
            segments_per_doc: (4, 6),
            tokens_per_segment: (5, 8),
            topic_noise: 0.03,
            embed_correlation: 0.0,
            embed_dim: 16,
            hard: false,
            seed,
        }
    }

    pub fn hard(num_triplets: usize, seed: u64) -> Self {
        SynthConfig {
            topic_noise: 0.0,
            embed_correlation: 0.85,
            hard: true,
            ..Self::easy(num_triplets, seed)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthDoc {
    pub id: String,
    pub text: String,
    /// Planted topic id per token, per sentence.
    pub topic_segments: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub docs: Vec<SynthDoc>,
    pub triplets: Vec<Triplet>,
    /// `word v1 .. vD` lines for every planted word.
    pub embedding_lines: Vec<String>,
    pub config: SynthConfig,
}

fn word_for(topic: usize, idx: usize) -> String {
    let t = WORD_ALPHABET[topic % WORD_ALPHABET.len()] as char;
    let a = WORD_ALPHABET[idx % WORD_ALPHABET.len()] as char;
    let b = WORD_ALPHABET[(idx / WORD_ALPHABET.len()) % WORD_ALPHABET.len()] as char;
    let c = WORD_ALPHABET[(idx / (WORD_ALPHABET.len() * WORD_ALPHABET.len()))
        % WORD_ALPHABET.len()] as char;
    format!("{t}{a}{b}{c}")
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    // Box-Muller
    (0..dim)
        .map(|_| {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        })
        .collect()
}

/// Unit directions per topic; paired topics (2p, 2p+1) share a direction
/// up to the configured cosine.
fn topic_directions(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(cfg.num_topics);
    let mut t = 0;
    while t < cfg.num_topics {
        let mut base = gaussian_vec(rng, cfg.embed_dim);
        normalize(&mut base);
        dirs.push(base.clone());
        t += 1;
        if t < cfg.num_topics && cfg.embed_correlation > 0.0 {
            let mut other = gaussian_vec(rng, cfg.embed_dim);
            // Gram-Schmidt against base, then mix to the target cosine
            let dot: f64 = other.iter().zip(&base).map(|(a, b)| a * b).sum();
            for (o, b) in other.iter_mut().zip(&base) {
                *o -= dot * b;
            }
            normalize(&mut other);
            let c = cfg.embed_correlation;
            let mut partner: Vec<f64> = base
                .iter()
                .zip(&other)
                .map(|(b, o)| c * b + (1.0 - c * c).sqrt() * o)
                .collect();
            normalize(&mut partner);
            dirs.push(partner);
            t += 1;
        }
    }
    dirs.truncate(cfg.num_topics);
    dirs
}

fn embedding_lines(cfg: &SynthConfig, dirs: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut lines = Vec::new();
    for (t, dir) in dirs.iter().enumerate() {
        for i in 0..cfg.vocab_per_topic {
            let noise = gaussian_vec(rng, cfg.embed_dim);
            let mut v: Vec<f64> = dir
                .iter()
                .zip(&noise)
                .map(|(d, n)| d + 0.05 * n)
                .collect();
            normalize(&mut v);
            let comps: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
            lines.push(format!("{} {}", word_for(t, i), comps.join(" ")));
        }
    }
    lines
}

type Template = Vec<Vec<usize>>;

fn sample_template(cfg: &SynthConfig, topics: &[usize], rng: &mut ChaCha8Rng) -> Template {
    let n_seg = rng.gen_range(cfg.segments_per_doc.0..=cfg.segments_per_doc.1);
    (0..n_seg)
        .map(|_| {
            let len = rng.gen_range(cfg.tokens_per_segment.0..=cfg.tokens_per_segment.1);
            (0..len).map(|_| topics[rng.gen_range(0..topics.len())]).collect()
        })
        .collect()
}

fn realize(
    cfg: &SynthConfig,
    id: &str,
    template: &Template,
    topic_pool: &[usize],
    noise: f64,
    rng: &mut ChaCha8Rng,
) -> SynthDoc {
    let mut segments: Template = template.clone();
    if noise > 0.0 {
        for seg in segments.iter_mut() {
            for t in seg.iter_mut() {
                if rng.gen::<f64>() < noise {
                    *t = topic_pool[rng.gen_range(0..topic_pool.len())];
                }
            }
        }
    }
    doc_from_segments(cfg, id, segments, rng)
}

fn doc_from_segments(
    cfg: &SynthConfig,
    id: &str,
    segments: Template,
    rng: &mut ChaCha8Rng,
) -> SynthDoc {
    let sentences: Vec<String> = segments
        .iter()
        .map(|seg| {
            let words: Vec<String> = seg
                .iter()
                .map(|&t| word_for(t, rng.gen_range(0..cfg.vocab_per_topic)))
                .collect();
            format!("{}.", words.join(" "))
        })
        .collect();
    SynthDoc {
        id: id.to_string(),
        text: sentences.join(" "),
        topic_segments: segments,
    }
}

/// Re-segments a flat token list using the given segment lengths.
fn reshape(tokens: &[(usize, String)], lengths: &[usize]) -> (Template, String) {
    let mut segments = Vec::new();
    let mut sentences = Vec::new();
    let mut pos = 0;
    for &len in lengths {
        let slice = &tokens[pos..pos + len];
        segments.push(slice.iter().map(|(t, _)| *t).collect());
        let words: Vec<&str> = slice.iter().map(|(_, w)| w.as_str()).collect();
        sentences.push(format!("{}.", words.join(" ")));
        pos += len;
    }
    (segments, sentences.join(" "))
}

fn tokens_of(doc: &SynthDoc) -> Vec<(usize, String)> {
    let words: Vec<String> = doc
        .text
        .split_whitespace()
        .map(|w| w.trim_end_matches('.').to_string())
        .collect();
    doc.topic_segments
        .iter()
        .flatten()
        .cloned()
        .zip(words)
        .collect()
}

/// Document-wide token scramble preserving segment lengths; retries
/// until the token order actually changes.
fn scramble_tokens(cfg: &SynthConfig, id: &str, src: &SynthDoc, rng: &mut ChaCha8Rng) -> SynthDoc {
    let tokens = tokens_of(src);
    let lengths: Vec<usize> = src.topic_segments.iter().map(|s| s.len()).collect();
    let mut shuffled = tokens.clone();
    loop {
        shuffled.shuffle(rng);
        if shuffled != tokens {
            break;
        }
    }
    let (segments, text) = reshape(&shuffled, &lengths);
    let _ = cfg;
    SynthDoc {
        id: id.to_string(),
        text,
        topic_segments: segments,
    }
}

/// Copy of the template padded with extra noise segments drawn from the
/// reserved topic pool; the padding halves mean table similarity while
/// leaving the original rows' best matches intact.
fn pad_with_noise(
    cfg: &SynthConfig,
    id: &str,
    template: &Template,
    noise_topics: &[usize],
    rng: &mut ChaCha8Rng,
) -> SynthDoc {
    let mut segments = template.clone();
    let extra = (template.len() + 1) / 2;
    for _ in 0..extra {
        let len = rng.gen_range(cfg.tokens_per_segment.0..=cfg.tokens_per_segment.1);
        segments.push(
            (0..len)
                .map(|_| noise_topics[rng.gen_range(0..noise_topics.len())])
                .collect(),
        );
    }
    doc_from_segments(cfg, id, segments, rng)
}

/// Whole-sentence shuffle; retries until the sentence order changes.
fn shuffle_sentences(id: &str, src: &SynthDoc, rng: &mut ChaCha8Rng) -> SynthDoc {
    let sentences: Vec<String> = src
        .text
        .split_inclusive(". ")
        .map(|s| s.trim().to_string())
        .collect();
    let mut order: Vec<usize> = (0..src.topic_segments.len()).collect();
    loop {
        order.shuffle(rng);
        if order.iter().enumerate().any(|(i, &j)| i != j) {
            break;
        }
    }
    let segments: Template = order.iter().map(|&j| src.topic_segments[j].clone()).collect();
    let text: Vec<String> = order.iter().map(|&j| sentences[j].clone()).collect();
    SynthDoc {
        id: id.to_string(),
        text: text.join(" "),
        topic_segments: segments,
    }
}

/// Generates the corpus, triplets, and embedding lines for a config;
/// identical output for identical configs.
pub fn generate(cfg: &SynthConfig) -> SynthDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs = topic_directions(cfg, &mut rng);
    let embedding = embedding_lines(cfg, &dirs, &mut rng);

    let mut docs = Vec::new();
    let mut triplets = Vec::new();
    let all_topics: Vec<usize> = (0..cfg.num_topics).collect();
    for i in 0..cfg.num_triplets {
        // disjoint topic subsets for the two templates
        let mut pool = all_topics.clone();
        pool.shuffle(&mut rng);
        let half = cfg.num_topics / 2;
        let (topics_a, topics_b) = pool.split_at(half.max(1));
        let template_a = sample_template(cfg, topics_a, &mut rng);

        let d2 = realize(cfg, &format!("trip{i}-d2"), &template_a, topics_a, 0.0, &mut rng);
        let id1 = format!("trip{i}-d1");
        let id3 = format!("trip{i}-d3");
        let (d1, d3) = if cfg.hard {
            // three rotating distractor shapes: token scramble, sentence
            // shuffle, and scramble with a noise-padded near document
            match i % 3 {
                0 => (
                    realize(cfg, &id1, &template_a, topics_a, 0.0, &mut rng),
                    scramble_tokens(cfg, &id3, &d2, &mut rng),
                ),
                1 => (
                    realize(cfg, &id1, &template_a, topics_a, 0.0, &mut rng),
                    shuffle_sentences(&id3, &d2, &mut rng),
                ),
                _ => (
                    pad_with_noise(cfg, &id1, &template_a, topics_b, &mut rng),
                    scramble_tokens(cfg, &id3, &d2, &mut rng),
                ),
            }
        } else {
            let template_b = sample_template(cfg, topics_b, &mut rng);
            (
                realize(cfg, &id1, &template_a, topics_a, cfg.topic_noise, &mut rng),
                realize(cfg, &id3, &template_b, topics_b, 0.0, &mut rng),
            )
        };

        triplets.push(Triplet {
            d1: d1.id.clone(),
            d2: d2.id.clone(),
            d3: d3.id.clone(),
        });
        docs.push(d1);
        docs.push(d2);
        docs.push(d3);
    }

    SynthDataset {
        docs,
        triplets,
        embedding_lines: embedding,
        config: cfg.clone(),
    }
}
