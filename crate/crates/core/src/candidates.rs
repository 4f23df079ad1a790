//! Aspect-candidate extraction: the rows of the aspect matrix used by
//! contrastive attention.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use ndarray::{Array2, Axis};

use crate::corpus::{Corpus, Upos};
use crate::embeddings::VectorStore;
use crate::error::{Error, Result};

/// Seed adjectives for the co-occurrence extractor.
pub const DEFAULT_SEED_ADJECTIVES: [&str; 8] =
    ["good", "bad", "great", "terrible", "excellent", "awful", "nice", "poor"];

/// How far before a noun (in tokens) a seed adjective may occur.
pub const DEFAULT_ADJ_WINDOW: usize = 3;

/// Ranked aspect terms with their embedding rows.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    terms: Vec<String>,
    scores: Vec<f64>,
    vectors: Array2<f64>,
}

impl CandidateSet {
    /// Ranks `(term, score)` pairs by descending score, ties broken
    /// lexicographically; drops terms missing from `store`; keeps the top `n`.
    pub fn from_scores(scores: impl IntoIterator<Item = (String, f64)>, store: &VectorStore, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("candidate count must be at least 1".into()));
        }
        let (mut ranked, oov): (Vec<_>, Vec<_>) = scores.into_iter().partition(|(t, _)| store.contains(t));
        if !oov.is_empty() {
            log::info!("dropped {} out-of-vocabulary candidate terms", oov.len());
        }
        if ranked.is_empty() {
            return Err(Error::Empty("no in-vocabulary candidate terms".into()));
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(n);
        let (terms, scores): (Vec<String>, Vec<f64>) = ranked.into_iter().unzip();
        let vectors = store.stack(&terms)?;
        Ok(CandidateSet { terms, scores, vectors })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// `|terms| × d` aspect matrix.
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The first `n` candidates (all of them if fewer).
    pub fn top(&self, n: usize) -> CandidateSet {
        let n = n.min(self.len());
        CandidateSet {
            terms: self.terms[..n].to_vec(),
            scores: self.scores[..n].to_vec(),
            vectors: self.vectors.slice_axis(Axis(0), (0..n).into()).to_owned(),
        }
    }

    /// Newline-delimited `term<TAB>score`.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        for (term, score) in self.terms.iter().zip(&self.scores) {
            writeln!(writer, "{term}\t{score}")?;
        }
        Ok(())
    }

    /// Reads a `term<TAB>score` file, resolving vectors in `store`. File
    /// order is kept; OOV terms are dropped.
    pub fn read_tsv<R: BufRead>(reader: R, store: &VectorStore) -> Result<Self> {
        let mut terms = Vec::new();
        let mut scores = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (term, score) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: "expected `term<TAB>score`".into(),
            })?;
            let score: f64 = score.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("invalid score `{score}`"),
            })?;
            if store.contains(term) {
                terms.push(term.to_string());
                scores.push(score);
            }
        }
        if terms.is_empty() {
            return Err(Error::Empty("no in-vocabulary candidate terms".into()));
        }
        let vectors = store.stack(&terms)?;
        Ok(CandidateSet { terms, scores, vectors })
    }
}

fn count_where(corpus: &Corpus, keep: impl Fn(Upos) -> bool) -> HashMap<String, f64> {
    let mut counts = HashMap::new();
    for token in corpus.iter().flat_map(|s| &s.tokens) {
        if keep(token.upos) {
            *counts.entry(token.norm.clone()).or_insert(0.0) += 1.0;
        }
    }
    counts
}

/// The `n` most frequent in-vocabulary nouns.
pub fn top_n_nouns(corpus: &Corpus, store: &VectorStore, n: usize) -> Result<CandidateSet> {
    CandidateSet::from_scores(count_where(corpus, |u| u == Upos::Noun), store, n)
}

/// The `n` most frequent in-vocabulary tokens of any part of speech.
pub fn top_n_tokens(corpus: &Corpus, store: &VectorStore, n: usize) -> Result<CandidateSet> {
    CandidateSet::from_scores(count_where(corpus, |_| true), store, n)
}

/// Nouns ranked by how often a seed adjective occurs within `window` tokens
/// before them in the same sentence.
pub fn adj_noun_candidates(
    corpus: &Corpus,
    store: &VectorStore,
    seed_adjectives: &BTreeSet<String>,
    window: usize,
    n: usize,
) -> Result<CandidateSet> {
    if seed_adjectives.is_empty() {
        return Err(Error::Config("seed adjective set is empty".into()));
    }
    let seeds: BTreeSet<String> = seed_adjectives.iter().map(|s| s.to_lowercase()).collect();
    let mut counts: HashMap<String, f64> = HashMap::new();
    for sentence in corpus {
        for (i, token) in sentence.tokens.iter().enumerate() {
            if token.upos != Upos::Noun {
                continue;
            }
            let lo = i.saturating_sub(window);
            if sentence.tokens[lo..i].iter().any(|t| seeds.contains(&t.norm)) {
                *counts.entry(token.norm.clone()).or_insert(0.0) += 1.0;
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::Empty("no noun co-occurs with a seed adjective".into()));
    }
    CandidateSet::from_scores(counts, store, n)
}

pub fn default_seed_adjectives() -> BTreeSet<String> {
    DEFAULT_SEED_ADJECTIVES.iter().map(|s| s.to_string()).collect()
}
