//! Seeded toy data for examples, tests and benchmarks.

use ndarray::Array2;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{Corpus, Sentence, Token, Upos};
use crate::embeddings::VectorStore;
use crate::labeler::{default_label_definitions, LabelDefinition};

/// Sentences drawing all their tokens from one of two disjoint five-word
/// topics (`a1..a5` or `b1..b5`), alternating topic by sentence.
pub fn two_topic_corpus(sentences: usize, len: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics: [Vec<String>; 2] = [
        (1..=5).map(|i| format!("a{i}")).collect(),
        (1..=5).map(|i| format!("b{i}")).collect(),
    ];
    let sentences = (0..sentences)
        .map(|i| {
            let words = &topics[i % 2];
            Sentence::new(
                (0..len)
                    .map(|_| Token::new(words.choose(&mut rng).unwrap().as_str(), Upos::Noun))
                    .collect(),
            )
        })
        .collect();
    Corpus::new("two-topic", sentences)
}

/// A vector store with well-separated Gaussian clusters around the default
/// label words, and a labeled corpus whose sentences draw from one cluster.
#[derive(Clone, Debug)]
pub struct ClusteredDomain {
    pub store: VectorStore,
    pub corpus: Corpus,
    pub labels: Vec<LabelDefinition>,
}

#[derive(Clone, Debug)]
pub struct ClusterSpec {
    pub dim: usize,
    pub words_per_cluster: usize,
    pub sentences: usize,
    /// Tokens per sentence are drawn uniformly from `min_len..=max_len`.
    pub min_len: usize,
    pub max_len: usize,
    /// Distance of each cluster center from the origin.
    pub separation: f64,
    /// Per-component standard deviation within a cluster.
    pub spread: f64,
    /// Words near the origin, shared by all clusters and tagged as
    /// non-nouns. Each sentence gets one or two of them.
    pub filler_words: usize,
    pub seed: u64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            dim: 50,
            words_per_cluster: 30,
            sentences: 500,
            min_len: 4,
            max_len: 12,
            separation: 10.0,
            spread: 1.0,
            filler_words: 10,
            seed: 7,
        }
    }
}

pub fn clustered_domain(spec: &ClusterSpec) -> ClusteredDomain {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.spread).expect("spread is finite and >= 0");
    let labels = default_label_definitions();

    let mut words = Vec::new();
    let mut rows = Vec::new();
    let mut cluster_words: Vec<Vec<String>> = Vec::new();
    for (k, def) in labels.iter().enumerate() {
        let mut center = vec![0.0; spec.dim];
        center[k % spec.dim] = spec.separation;
        for term in &def.query_terms {
            words.push(term.clone());
            rows.extend(center.iter().copied());
        }
        let members: Vec<String> = (0..spec.words_per_cluster)
            .map(|i| format!("{}_{i}", def.name))
            .collect();
        for member in &members {
            words.push(member.clone());
            rows.extend(center.iter().map(|c| c + noise.sample(&mut rng)));
        }
        cluster_words.push(members);
    }
    let fillers: Vec<String> = (0..spec.filler_words).map(|i| format!("w{i}")).collect();
    let small = Normal::new(0.0, spec.spread * 0.1).expect("finite");
    for filler in &fillers {
        words.push(filler.clone());
        rows.extend((0..spec.dim).map(|_| small.sample(&mut rng)));
    }
    let matrix = Array2::from_shape_vec((words.len(), spec.dim), rows).expect("rows * dim");
    let store = VectorStore::from_rows(words, matrix).expect("generated words are unique");

    let sentences = (0..spec.sentences)
        .map(|i| {
            let k = i % labels.len();
            let len = rng.random_range(spec.min_len..=spec.max_len);
            let mut tokens: Vec<Token> = (0..len)
                .map(|_| Token::new(cluster_words[k].choose(&mut rng).unwrap().as_str(), Upos::Noun))
                .collect();
            if !fillers.is_empty() {
                for _ in 0..rng.random_range(1..=2) {
                    let at = rng.random_range(0..=tokens.len());
                    tokens.insert(at, Token::new(fillers.choose(&mut rng).unwrap().as_str(), Upos::Det));
                }
            }
            Sentence::new(tokens).with_label(labels[k].name.clone())
        })
        .collect();

    ClusteredDomain {
        store,
        corpus: Corpus::new("clustered", sentences),
        labels,
    }
}

/// Random vectors for `vocab` words of dimension `dim`, plus a corpus of
/// random sentences over them; for throughput measurements.
pub fn random_domain(vocab: usize, dim: usize, sentences: usize, mean_len: usize, seed: u64) -> (VectorStore, Corpus) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut words: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    words.extend(["food", "staff", "service", "ambience", "ambiance"].map(String::from));
    let matrix = Array2::from_shape_fn((words.len(), dim), |_| normal.sample(&mut rng));
    let store = VectorStore::from_rows(words, matrix).expect("unique words");
    let labels = ["food", "staff", "ambience"];
    let corpus = Corpus::new(
        "random",
        (0..sentences)
            .map(|i| {
                let len = rng.random_range(1..=2 * mean_len);
                let tokens = (0..len)
                    .map(|_| {
                        let w = format!("w{}", rng.random_range(0..vocab));
                        let upos = if rng.random_bool(0.3) { Upos::Noun } else { Upos::Other };
                        Token::new(w, upos)
                    })
                    .collect();
                Sentence::new(tokens).with_label(labels[i % 3])
            })
            .collect(),
    );
    (store, corpus)
}
