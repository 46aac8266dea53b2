//! Triplet and clustering evaluation harnesses and report types.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimDocError};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triplet {
    pub d1: String,
    pub d2: String,
    pub d3: String,
}

/// Line-delimited JSON corpus record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
}

/// Line-delimited JSON clustering record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub id: String,
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub rejection: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrievalMetrics {
    pub per_cluster: Vec<ClusterMetrics>,
    pub mean_average_precision: f64,
    pub mean_average_recall: f64,
    pub mean_average_f_score: f64,
    pub mean_average_rejection: f64,
    pub skipped_clusters: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub accuracy: f64,
    pub num_cases: usize,
    pub margins: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retrieval: Option<RetrievalMetrics>,
}

/// Scores every triplet with the pairwise scorer; a triplet is correct
/// iff sim(d2,d1) > sim(d2,d3) strictly (ties count as incorrect).
pub fn eval_triplets<F>(triplets: &[Triplet], mut scorer: F) -> Result<EvalReport>
where
    F: FnMut(&str, &str) -> Result<f64>,
{
    if triplets.is_empty() {
        return Err(SimDocError::Data("empty triplet set".into()));
    }
    let mut correct = 0usize;
    let mut margins = Vec::with_capacity(triplets.len());
    for t in triplets {
        let near = scorer(&t.d2, &t.d1)
            .map_err(|e| SimDocError::Data(format!("triplet ({},{},{}): {e}", t.d1, t.d2, t.d3)))?;
        let far = scorer(&t.d2, &t.d3)
            .map_err(|e| SimDocError::Data(format!("triplet ({},{},{}): {e}", t.d1, t.d2, t.d3)))?;
        if near > far {
            correct += 1;
        }
        margins.push(near - far);
    }
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        accuracy: correct as f64 / triplets.len() as f64,
        num_cases: triplets.len(),
        margins,
        retrieval: None,
    })
}

#[derive(Debug, Clone)]
pub struct ClusterDataset {
    /// document id -> cluster label
    pub labels: HashMap<String, String>,
}

impl ClusterDataset {
    pub fn from_records(records: &[ClusterRecord]) -> Self {
        ClusterDataset {
            labels: records
                .iter()
                .map(|r| (r.id.clone(), r.label.clone()))
                .collect(),
        }
    }
}

/// Top-(n-1) retrieval protocol: for each document of a size-n cluster
/// retrieve the n-1 most similar documents corpus-wide (ties broken by
/// ascending id). Precision equals recall by construction; rejection is
/// the true-negative rate over out-of-cluster documents. Size-1
/// clusters are skipped.
pub fn eval_clustering<F>(dataset: &ClusterDataset, mut scorer: F) -> Result<EvalReport>
where
    F: FnMut(&str, &str) -> Result<f64>,
{
    // cluster membership in deterministic order
    let mut clusters: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (id, label) in &dataset.labels {
        clusters.entry(label).or_default().push(id);
    }
    for members in clusters.values_mut() {
        members.sort();
    }
    let mut all_ids: Vec<&str> = dataset.labels.keys().map(|s| s.as_str()).collect();
    all_ids.sort();

    let mut per_cluster = Vec::new();
    let mut skipped = Vec::new();
    for (label, members) in &clusters {
        if members.len() < 2 {
            skipped.push(label.to_string());
            continue;
        }
        let n = members.len();
        let out_of_cluster = all_ids.len() - n;
        let mut sums = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &doc in members {
            let mut scored: Vec<(&str, f64)> = Vec::with_capacity(all_ids.len() - 1);
            for &other in &all_ids {
                if other == doc {
                    continue;
                }
                scored.push((other, scorer(doc, other)?));
            }
            // score descending, ties by ascending id (ids are pre-sorted,
            // so a stable sort on score alone preserves id order)
            scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
            let retrieved = &scored[..n - 1];
            let hits = retrieved
                .iter()
                .filter(|(id, _)| dataset.labels[*id] == **label)
                .count();
            let precision = hits as f64 / (n - 1) as f64;
            let recall = precision;
            let f_score = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            let false_positives = (n - 1) - hits;
            let rejection = if out_of_cluster > 0 {
                (out_of_cluster - false_positives) as f64 / out_of_cluster as f64
            } else {
                1.0
            };
            sums.0 += precision;
            sums.1 += recall;
            sums.2 += f_score;
            sums.3 += rejection;
        }
        let m = members.len() as f64;
        per_cluster.push(ClusterMetrics {
            label: label.to_string(),
            precision: sums.0 / m,
            recall: sums.1 / m,
            f_score: sums.2 / m,
            rejection: sums.3 / m,
        });
    }
    if per_cluster.is_empty() {
        return Err(SimDocError::Data("no cluster with at least 2 members".into()));
    }
    let k = per_cluster.len() as f64;
    let retrieval = RetrievalMetrics {
        mean_average_precision: per_cluster.iter().map(|c| c.precision).sum::<f64>() / k,
        mean_average_recall: per_cluster.iter().map(|c| c.recall).sum::<f64>() / k,
        mean_average_f_score: per_cluster.iter().map(|c| c.f_score).sum::<f64>() / k,
        mean_average_rejection: per_cluster.iter().map(|c| c.rejection).sum::<f64>() / k,
        per_cluster,
        skipped_clusters: skipped,
    };
    let map = retrieval.mean_average_precision;
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        accuracy: map,
        num_cases: dataset.labels.len(),
        margins: Vec::new(),
        retrieval: Some(retrieval),
    })
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            SimDocError::Format(format!("{}: line {}: {e}", path.display(), lineno + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Vec<CorpusRecord>> {
    read_jsonl(path)
}

pub fn load_triplets(path: &Path) -> Result<Vec<Triplet>> {
    read_jsonl(path)
}

pub fn load_cluster_records(path: &Path) -> Result<Vec<ClusterRecord>> {
    read_jsonl(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triplets(n: usize) -> Vec<Triplet> {
        (0..n)
            .map(|i| Triplet {
                d1: format!("{i}-1"),
                d2: format!("{i}-2"),
                d3: format!("{i}-3"),
            })
            .collect()
    }

    #[test]
    fn oracle_scorer_is_perfect() {
        let ts = triplets(200);
        // oracle: d2 is most similar to its own triplet's d1
        let report = eval_triplets(&ts, |a, b| {
            let (pa, sa) = a.split_once('-').unwrap();
            let (pb, sb) = b.split_once('-').unwrap();
            let near = pa == pb && sa == "2" && sb == "1";
            Ok(if near { 1.0 } else { 0.0 })
        })
        .unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(report.margins.len(), 200);
    }

    #[test]
    fn constant_scorer_ties_are_incorrect() {
        let ts = triplets(10);
        let report = eval_triplets(&ts, |_, _| Ok(0.5)).unwrap();
        assert_eq!(report.accuracy, 0.0);
        assert!(report.margins.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn anti_oracle_is_zero() {
        let ts = triplets(20);
        let report = eval_triplets(&ts, |a, b| {
            let (pa, sa) = a.split_once('-').unwrap();
            let (pb, sb) = b.split_once('-').unwrap();
            let near = pa == pb && sa == "2" && sb == "1";
            Ok(if near { 0.0 } else { 1.0 })
        })
        .unwrap();
        assert_eq!(report.accuracy, 0.0);
    }

    #[test]
    fn margins_are_exact_differences() {
        let ts = triplets(3);
        let report = eval_triplets(&ts, |_, b| {
            Ok(if b.ends_with("-1") { 0.75 } else { 0.25 })
        })
        .unwrap();
        for &m in &report.margins {
            assert!((m - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn unresolvable_id_names_triplet() {
        let ts = triplets(1);
        let err = eval_triplets(&ts, |_, _| {
            Err(SimDocError::Data("unknown document".into()))
        })
        .unwrap_err();
        assert!(err.to_string().contains("0-2"), "{err}");
    }

    #[test]
    fn empty_triplet_set_rejected() {
        assert!(eval_triplets(&[], |_, _| Ok(0.0)).is_err());
    }

    fn two_cluster_dataset() -> ClusterDataset {
        let mut labels = HashMap::new();
        for i in 0..4 {
            labels.insert(format!("a{i}"), "A".to_string());
            labels.insert(format!("b{i}"), "B".to_string());
        }
        ClusterDataset { labels }
    }

    #[test]
    fn label_oracle_gives_perfect_retrieval() {
        let ds = two_cluster_dataset();
        let labels = ds.labels.clone();
        let report = eval_clustering(&ds, |a, b| {
            Ok(if labels[a] == labels[b] { 1.0 } else { 0.0 })
        })
        .unwrap();
        let r = report.retrieval.unwrap();
        assert_eq!(r.mean_average_precision, 1.0);
        assert_eq!(r.mean_average_recall, 1.0);
        assert_eq!(r.mean_average_rejection, 1.0);
    }

    #[test]
    fn anti_oracle_retrieval_is_zero_precision() {
        let ds = two_cluster_dataset();
        let labels = ds.labels.clone();
        let report = eval_clustering(&ds, |a, b| {
            Ok(if labels[a] == labels[b] { 0.0 } else { 1.0 })
        })
        .unwrap();
        let r = report.retrieval.unwrap();
        assert_eq!(r.mean_average_precision, 0.0);
        // 3 false positives out of 4 out-of-cluster docs
        assert!((r.mean_average_rejection - 0.25).abs() < 1e-12);
    }

    #[test]
    fn singleton_cluster_skipped() {
        let mut ds = two_cluster_dataset();
        ds.labels.insert("lonely".into(), "C".into());
        let labels = ds.labels.clone();
        let report = eval_clustering(&ds, |a, b| {
            Ok(if labels[a] == labels[b] { 1.0 } else { 0.0 })
        })
        .unwrap();
        let r = report.retrieval.unwrap();
        assert_eq!(r.skipped_clusters, vec!["C".to_string()]);
        assert_eq!(r.per_cluster.len(), 2);
    }

    #[test]
    fn random_scorer_expected_precision() {
        // 2 clusters of 10: retrieving 9 of 19 uniformly at random hits
        // in-cluster docs with expectation 9/19
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut labels = HashMap::new();
        for i in 0..10 {
            labels.insert(format!("a{i:02}"), "A".to_string());
            labels.insert(format!("b{i:02}"), "B".to_string());
        }
        let ds = ClusterDataset { labels };
        let mut total = 0.0;
        let runs = 60;
        for _ in 0..runs {
            let mut cache: HashMap<(String, String), f64> = HashMap::new();
            let report = eval_clustering(&ds, |a, b| {
                let key = if a < b {
                    (a.to_string(), b.to_string())
                } else {
                    (b.to_string(), a.to_string())
                };
                Ok(*cache.entry(key).or_insert_with(|| rng.gen::<f64>()))
            })
            .unwrap();
            total += report.retrieval.unwrap().mean_average_precision;
        }
        let avg = total / runs as f64;
        let expected = 9.0 / 19.0;
        assert!((avg - expected).abs() < 0.05, "avg={avg} expected={expected}");
    }

    #[test]
    fn jsonl_round_trip() {
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triplets.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "{}", serde_json::to_string(&Triplet { d1: "a".into(), d2: "b".into(), d3: "c".into() }).unwrap()).unwrap();
        writeln!(f).unwrap();
        let loaded = load_triplets(&path).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].d2, "b");
    }

    #[test]
    fn malformed_jsonl_reports_line() {
        use std::io::Write;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let mut f = File::create(&path).unwrap();
        writeln!(f, "{{\"d1\":\"a\",\"d2\":\"b\",\"d3\":\"c\"}}").unwrap();
        writeln!(f, "not json").unwrap();
        match load_triplets(&path) {
            Err(SimDocError::Format(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("expected format error, got {other:?}"),
        }
    }
}
