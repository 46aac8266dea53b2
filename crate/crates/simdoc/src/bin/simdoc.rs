//! Command-line front end: train, index, score, eval, tune, synth.
//!
//! Flag precedence is flags > config file (TOML or JSON) > built-in
//! defaults. Every command that writes an output file also writes a
//! `<output>.manifest.json` with the resolved configuration and input
//! hashes. Exit codes: 0 success, 1 usage error, 2 data error,
//! 3 internal error.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use simdoc::document_scorer::{
    document_similarity, sentence_similarity_matrix, to_topic_sequence_doc, SimDocConfig,
};
use simdoc::evaluation::{
    eval_clustering, eval_triplets, load_cluster_records, load_corpus, load_triplets,
    ClusterDataset, EvalReport, Triplet,
};
use simdoc::manifest::RunManifest;
use simdoc::pipeline::{Artifacts, Variant};
use simdoc::synth::{generate, SynthConfig};
use simdoc::text_pipeline::{preprocess, PipelineConfig};
use simdoc::topic_embedding::{load_word_vectors, TopicSimilarityMatrix, WordVectorStore};
use simdoc::topic_model::{
    build_topic_word_index, load_model, save_model, top_words, train_lda, LdaConfig, LdaModel,
    TopicWordIndex,
};
use simdoc::tuner::{tune, ParamVector, TuneConfig};
use simdoc::{Result, SimDocError};

#[derive(Parser)]
#[command(name = "simdoc", version, about = "Topic-sequence document similarity")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random component of the run.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for pairwise scoring; default = available cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// TOML or JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the topic model and save the model plus topic-word index.
    Train(TrainArgs),
    /// Rebuild the topic-word index from a saved model.
    Index(IndexArgs),
    /// Score two text files against each other.
    Score(ScoreArgs),
    /// Evaluate a scoring variant on triplets or labeled clusters.
    Eval(EvalArgs),
    /// Search alignment parameters that maximize triplet accuracy.
    Tune(TuneArgs),
    /// Generate a planted synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus as JSONL records {"id": ..., "text": ...}.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    model_out: PathBuf,
    /// Defaults to <model-out>.index.json.
    #[arg(long)]
    index_out: Option<PathBuf>,
    #[arg(long)]
    num_topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
    /// Words printed per topic after training.
    #[arg(long)]
    top_words: Option<usize>,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    index_out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    doc_a: PathBuf,
    #[arg(long)]
    doc_b: PathBuf,
    #[arg(long)]
    model: PathBuf,
    /// Word-vector file; without it topics only match themselves.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Tuned parameter block (JSON, as written by `tune`).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Also print the per-sentence similarity matrix as JSON.
    #[arg(long)]
    explain: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Triplet file, JSONL {"d1": ..., "d2": ..., "d3": ...}.
    #[arg(long, conflicts_with = "clusters")]
    triplets: Option<PathBuf>,
    /// Cluster file, JSONL {"id": ..., "label": ..., "text": ...}.
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Saved model; trained fresh from the corpus when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = "simdoc")]
    variant: String,
    #[arg(long)]
    report_out: PathBuf,
    #[arg(long)]
    num_topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    triplets: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Output JSON parameter block, loadable via `--params`.
    #[arg(long)]
    params_out: PathBuf,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    num_topics: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory receiving corpus.jsonl, triplets.jsonl, embeddings.txt.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 50)]
    triplets: usize,
    /// Hard mode: near documents share the far document's token bag.
    #[arg(long)]
    hard: bool,
}

/// Optional values a config file may set; flags always win.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    jobs: Option<usize>,
    num_topics: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    sweeps: Option<usize>,
    top_words: Option<usize>,
    variant: Option<String>,
    budget: Option<usize>,
    restarts: Option<usize>,
    /// Tuner-style 10-value parameter block.
    params: Option<ParamVector>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)?;
    let is_toml = path
        .extension()
        .map(|e| e.eq_ignore_ascii_case("toml"))
        .unwrap_or(false);
    if is_toml {
        toml::from_str(&text)
            .map_err(|e| SimDocError::Config(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&text)
            .map_err(|e| SimDocError::Config(format!("{}: {e}", path.display())))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                SimDocError::Argument(_) | SimDocError::Config(_) => 1,
                SimDocError::Data(_) | SimDocError::Format(_) | SimDocError::Io(_) => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = load_file_config(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed);
    let jobs = cli
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(SimDocError::Argument("--jobs must be >= 1".into()));
    }
    match cli.command {
        Command::Train(args) => cmd_train(args, &file, seed),
        Command::Index(args) => cmd_index(args, seed),
        Command::Score(args) => cmd_score(args, &file),
        Command::Eval(args) => cmd_eval(args, &file, seed, jobs),
        Command::Tune(args) => cmd_tune(args, &file, seed),
        Command::Synth(args) => cmd_synth(args, seed),
    }
}

fn resolve_lda(
    num_topics: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    sweeps: Option<usize>,
    file: &FileConfig,
    seed: Option<u64>,
) -> LdaConfig {
    let defaults = LdaConfig::default();
    LdaConfig {
        num_topics: num_topics.or(file.num_topics).unwrap_or(defaults.num_topics),
        alpha: alpha.or(file.alpha).unwrap_or(defaults.alpha),
        beta: beta.or(file.beta).unwrap_or(defaults.beta),
        gibbs_sweeps: sweeps.or(file.sweeps).unwrap_or(defaults.gibbs_sweeps),
        rng_seed: seed.unwrap_or(defaults.rng_seed),
    }
}

fn resolve_simdoc_config(params: Option<&Path>, file: &FileConfig) -> Result<SimDocConfig> {
    let base = SimDocConfig::default();
    let vector = match params {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let v: ParamVector = serde_json::from_str(&text)
                .map_err(|e| SimDocError::Format(format!("{}: {e}", path.display())))?;
            Some(v)
        }
        None => file.params,
    };
    match vector {
        Some(v) => {
            v.validate()?;
            Ok(v.to_config(&base))
        }
        None => Ok(base),
    }
}

fn load_store(path: Option<&Path>) -> Result<Option<WordVectorStore>> {
    path.map(load_word_vectors).transpose()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("value serializes");
    fs::write(path, json)?;
    Ok(())
}

fn cmd_train(args: TrainArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let lda = resolve_lda(args.num_topics, args.alpha, args.beta, args.sweeps, file, seed);
    lda.validate()?;
    let corpus = load_corpus(&args.corpus)?;
    let cfg = PipelineConfig::training_default();
    let docs: Vec<_> = corpus
        .iter()
        .map(|r| preprocess(&r.text, &r.id, &cfg))
        .collect();
    let model = train_lda(&docs, &lda)?;
    save_model(&model, &args.model_out)?;
    let index = build_topic_word_index(&model);
    let index_out = args
        .index_out
        .unwrap_or_else(|| args.model_out.with_extension("index.json"));
    write_json(&index_out, &index)?;

    let k = args.top_words.or(file.top_words).unwrap_or(10);
    for t in 0..model.num_topics() {
        println!("topic {t}: {}", top_words(&model, t, k)?.join(" "));
    }

    let mut manifest = RunManifest::new(
        "train",
        lda.rng_seed,
        serde_json::json!({ "lda": lda, "index_out": index_out.display().to_string() }),
    );
    manifest.add_input(&args.corpus)?;
    manifest.write_next_to(&args.model_out)
}

fn cmd_index(args: IndexArgs, seed: Option<u64>) -> Result<()> {
    let model = load_model(&args.model)?;
    let index = build_topic_word_index(&model);
    write_json(&args.index_out, &index)?;
    println!(
        "indexed {} words into {} topics",
        index.entries.len(),
        index.num_topics
    );
    let mut manifest = RunManifest::new("index", seed.unwrap_or(0), serde_json::json!({}));
    manifest.add_input(&args.model)?;
    manifest.write_next_to(&args.index_out)
}

fn score_artifacts(
    model: &LdaModel,
    embeddings: Option<&Path>,
    config: &SimDocConfig,
) -> Result<(TopicWordIndex, TopicSimilarityMatrix)> {
    let index = build_topic_word_index(model);
    let matrix = match load_store(embeddings)? {
        Some(store) => simdoc::topic_embedding::build_topic_similarity_matrix(
            model,
            &store,
            config.top_k,
        )?,
        None => TopicSimilarityMatrix::identity(model.num_topics()),
    };
    Ok((index, matrix))
}

fn cmd_score(args: ScoreArgs, file: &FileConfig) -> Result<()> {
    let model = load_model(&args.model)?;
    let config = resolve_simdoc_config(args.params.as_deref(), file)?;
    let (index, matrix) = score_artifacts(&model, args.embeddings.as_deref(), &config)?;
    let cfg = PipelineConfig::inference_default();
    let read = |path: &Path| -> Result<String> { Ok(fs::read_to_string(path)?) };
    let pre_a = preprocess(&read(&args.doc_a)?, "a", &cfg);
    let pre_b = preprocess(&read(&args.doc_b)?, "b", &cfg);
    let doc_a = to_topic_sequence_doc(&pre_a, &index);
    let doc_b = to_topic_sequence_doc(&pre_b, &index);
    let score = document_similarity(&doc_a, &doc_b, &config, &matrix);
    println!("{score:.6}");
    if args.explain {
        let table = sentence_similarity_matrix(&doc_a, &doc_b, &config, &matrix);
        let detail = serde_json::json!({
            "rows": doc_a.segments.len(),
            "cols": doc_b.segments.len(),
            "sentence_matrix": table,
        });
        println!("{}", serde_json::to_string_pretty(&detail).expect("json"));
    }
    Ok(())
}

/// Scores each pair once across `jobs` threads; the result map does not
/// depend on the thread count.
fn parallel_pair_scores(
    artifacts: &Artifacts,
    variant: Variant,
    pairs: &[(String, String)],
    jobs: usize,
) -> Result<HashMap<(String, String), f64>> {
    let chunk = pairs.len().div_ceil(jobs.max(1)).max(1);
    let results: Vec<Result<Vec<((String, String), f64)>>> = std::thread::scope(|scope| {
        pairs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|(a, b)| {
                            artifacts
                                .score(variant, a, b)
                                .map(|s| ((a.clone(), b.clone()), s))
                        })
                        .collect()
                })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .map(|h| h.join().expect("scoring thread panicked"))
            .collect()
    });
    let mut map = HashMap::new();
    for part in results {
        map.extend(part?);
    }
    Ok(map)
}

fn triplet_pairs(triplets: &[Triplet]) -> Vec<(String, String)> {
    triplets
        .iter()
        .flat_map(|t| {
            [
                (t.d2.clone(), t.d1.clone()),
                (t.d2.clone(), t.d3.clone()),
            ]
        })
        .collect()
}

fn cmd_eval(args: EvalArgs, file: &FileConfig, seed: Option<u64>, jobs: usize) -> Result<()> {
    let variant: Variant = file
        .variant
        .as_deref()
        .filter(|_| args.variant == "simdoc")
        .unwrap_or(&args.variant)
        .parse()?;
    let config = resolve_simdoc_config(args.params.as_deref(), file)?;
    let lda = resolve_lda(args.num_topics, args.alpha, args.beta, args.sweeps, file, seed);
    lda.validate()?;

    let store = load_store(args.embeddings.as_deref())?;
    let report: EvalReport;
    let mut manifest_inputs = vec![args.corpus.clone()];

    match (&args.triplets, &args.clusters) {
        (Some(triplet_path), None) => {
            let corpus = load_corpus(&args.corpus)?;
            let triplets = load_triplets(triplet_path)?;
            let artifacts = match &args.model {
                Some(path) => Artifacts::from_model(&corpus, load_model(path)?, &config, store)?,
                None => Artifacts::build(&corpus, &lda, &config, store)?,
            };
            let pairs = triplet_pairs(&triplets);
            let scores = parallel_pair_scores(&artifacts, variant, &pairs, jobs)?;
            report = eval_triplets(&triplets, |a, b| {
                Ok(scores[&(a.to_string(), b.to_string())])
            })?;
            manifest_inputs.push(triplet_path.clone());
        }
        (None, Some(cluster_path)) => {
            let records = load_cluster_records(cluster_path)?;
            let corpus: Vec<_> = records
                .iter()
                .map(|r| simdoc::evaluation::CorpusRecord {
                    id: r.id.clone(),
                    text: r.text.clone(),
                })
                .collect();
            let artifacts = match &args.model {
                Some(path) => Artifacts::from_model(&corpus, load_model(path)?, &config, store)?,
                None => Artifacts::build(&corpus, &lda, &config, store)?,
            };
            let dataset = ClusterDataset::from_records(&records);
            report = eval_clustering(&dataset, |a, b| artifacts.score(variant, a, b))?;
            manifest_inputs.push(cluster_path.clone());
        }
        _ => {
            return Err(SimDocError::Argument(
                "exactly one of --triplets or --clusters is required".into(),
            ));
        }
    }

    write_json(&args.report_out, &report)?;
    println!("{variant} accuracy {:.4}", report.accuracy);

    let mut manifest = RunManifest::new(
        "eval",
        lda.rng_seed,
        serde_json::json!({
            "variant": variant.to_string(),
            "lda": lda,
            "simdoc": config,
        }),
    );
    for input in &manifest_inputs {
        manifest.add_input(input)?;
    }
    if let Some(m) = &args.model {
        manifest.add_input(m)?;
    }
    if let Some(e) = &args.embeddings {
        manifest.add_input(e)?;
    }
    manifest.write_next_to(&args.report_out)
}

fn cmd_tune(args: TuneArgs, file: &FileConfig, seed: Option<u64>) -> Result<()> {
    let lda = resolve_lda(args.num_topics, args.alpha, args.beta, args.sweeps, file, seed);
    lda.validate()?;
    let corpus = load_corpus(&args.corpus)?;
    let triplets = load_triplets(&args.triplets)?;
    let store = load_store(args.embeddings.as_deref())?;
    let base = SimDocConfig::default();
    let artifacts = match &args.model {
        Some(path) => Artifacts::from_model(&corpus, load_model(path)?, &base, store)?,
        None => Artifacts::build(&corpus, &lda, &base, store)?,
    };

    let defaults = TuneConfig::default();
    let tune_cfg = TuneConfig {
        max_evaluations: args.budget.or(file.budget).unwrap_or(defaults.max_evaluations),
        random_restarts: args.restarts.or(file.restarts).unwrap_or(defaults.random_restarts),
        rng_seed: seed.unwrap_or(defaults.rng_seed),
        ..defaults
    };

    let result = tune(ParamVector::reference_init(), &tune_cfg, |p| {
        let config = p.to_config(&base);
        let report = eval_triplets(&triplets, |a, b| {
            artifacts.score_with(Variant::Simdoc, &config, a, b)
        })?;
        Ok(report.accuracy)
    })?;

    write_json(&args.params_out, &result.best_params)?;
    println!(
        "init accuracy {:.4} -> best {:.4} after {} evaluations",
        result.init_accuracy, result.best_accuracy, result.evaluations
    );

    let mut manifest = RunManifest::new(
        "tune",
        tune_cfg.rng_seed,
        serde_json::json!({ "lda": lda, "tune": tune_cfg, "result": result }),
    );
    manifest.add_input(&args.corpus)?;
    manifest.add_input(&args.triplets)?;
    if let Some(e) = &args.embeddings {
        manifest.add_input(e)?;
    }
    manifest.write_next_to(&args.params_out)
}

fn cmd_synth(args: SynthArgs, seed: Option<u64>) -> Result<()> {
    let seed = seed.unwrap_or(7);
    let cfg = if args.hard {
        SynthConfig::hard(args.triplets, seed)
    } else {
        SynthConfig::easy(args.triplets, seed)
    };
    let dataset = generate(&cfg);
    fs::create_dir_all(&args.out_dir)?;

    let corpus_path = args.out_dir.join("corpus.jsonl");
    let mut corpus_lines = String::new();
    for doc in &dataset.docs {
        let record = serde_json::json!({ "id": doc.id, "text": doc.text });
        corpus_lines.push_str(&record.to_string());
        corpus_lines.push('\n');
    }
    fs::write(&corpus_path, corpus_lines)?;

    let triplet_path = args.out_dir.join("triplets.jsonl");
    let mut triplet_lines = String::new();
    for t in &dataset.triplets {
        triplet_lines.push_str(&serde_json::to_string(t).expect("triplet serializes"));
        triplet_lines.push('\n');
    }
    fs::write(&triplet_path, triplet_lines)?;

    let emb_path = args.out_dir.join("embeddings.txt");
    fs::write(&emb_path, dataset.embedding_lines.join("\n") + "\n")?;

    println!(
        "wrote {} docs, {} triplets to {}",
        dataset.docs.len(),
        dataset.triplets.len(),
        args.out_dir.display()
    );
    let manifest = RunManifest::new("synth", seed, serde_json::json!({ "synth": cfg }));
    manifest.write_next_to(&corpus_path)
}
