//! Scoring, hyperparameter grid search and the learning-curve experiment.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::attention::AttentionConfig;
use crate::candidates::{adj_noun_candidates, top_n_nouns, top_n_tokens, CandidateSet, DEFAULT_ADJ_WINDOW};
use crate::corpus::Corpus;
use crate::embeddings::VectorStore;
use crate::error::{Error, Result};
use crate::labeler::{build_label_vectors, LabelDefinition, LabelMatrix, LabeledResult, Method, Pipeline};
use crate::sgns::{self, TrainerConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_class: Vec<ClassMetrics>,
    /// Per-class metrics averaged with support weights.
    pub weighted_macro: Scores,
    /// `confusion[gold][predicted]`, indexed in label order.
    pub confusion: Vec<Vec<usize>>,
    pub evaluated: usize,
    pub abstain_count: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl EvaluationReport {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.per_class.iter().map(|c| c.label.as_str())
    }

    pub fn class(&self, label: &str) -> Option<&ClassMetrics> {
        self.per_class.iter().find(|c| c.label == label)
    }

    /// `trace(confusion) / N`.
    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..self.confusion.len()).map(|i| self.confusion[i][i]).sum();
        ratio(correct, self.evaluated)
    }

    /// Aligned-column text rendering with four decimals.
    pub fn to_text(&self) -> String {
        let width = self
            .per_class
            .iter()
            .map(|c| c.label.len())
            .chain(["weighted".len()])
            .max()
            .unwrap_or(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>7}",
            "label", "precision", "recall", "f1", "support"
        );
        for c in &self.per_class {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
                c.label, c.precision, c.recall, c.f1, c.support
            );
        }
        let w = &self.weighted_macro;
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
            "weighted", w.precision, w.recall, w.f1, self.evaluated
        );
        let _ = writeln!(out, "abstained: {}", self.abstain_count);
        out
    }
}

/// Per-class and support-weighted macro precision, recall and F1.
///
/// Undefined ratios (no predictions or no support for a class) are 0.
pub fn evaluate<P: AsRef<str>, G: AsRef<str>, L: AsRef<str>>(
    predictions: &[P],
    gold: &[G],
    label_order: &[L],
) -> Result<EvaluationReport> {
    if predictions.len() != gold.len() {
        return Err(Error::ShapeMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::Empty("nothing to evaluate".into()));
    }
    let labels: Vec<&str> = label_order.iter().map(AsRef::as_ref).collect();
    let position = |label: &str| {
        labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    };

    let k = labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (p, g) in predictions.iter().zip(gold) {
        confusion[position(g.as_ref())?][position(p.as_ref())?] += 1;
    }

    let n = gold.len();
    let mut per_class = Vec::with_capacity(k);
    let mut weighted = Scores {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };
    for (c, label) in labels.iter().enumerate() {
        let tp = confusion[c][c];
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[c]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = harmonic(precision, recall);
        weighted.precision += support as f64 * precision;
        weighted.f1 += support as f64 * f1;
        per_class.push(ClassMetrics {
            label: label.to_string(),
            precision,
            recall,
            f1,
            support,
        });
    }

    weighted.precision /= n as f64;
    weighted.f1 /= n as f64;
    // Σ_c (support_c / N) · (TP_c / support_c) collapses to Σ_c TP_c / N.
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();
    weighted.recall = correct as f64 / n as f64;

    Ok(EvaluationReport {
        per_class,
        weighted_macro: weighted,
        confusion,
        evaluated: n,
        abstain_count: 0,
    })
}

/// Scores labeled sentences against their gold labels, excluding abstentions.
pub fn evaluate_results(results: &[LabeledResult], corpus: &Corpus, labels: &LabelMatrix) -> Result<EvaluationReport> {
    if results.len() != corpus.len() {
        return Err(Error::ShapeMismatch {
            left: results.len(),
            right: corpus.len(),
        });
    }
    let mut predicted = Vec::with_capacity(results.len());
    let mut gold = Vec::with_capacity(results.len());
    let mut abstained = 0;
    for (result, sentence) in results.iter().zip(corpus) {
        let g = sentence
            .gold_label()
            .ok_or_else(|| Error::Empty("sentence without a single gold label".into()))?;
        match &result.label {
            Some(p) => {
                predicted.push(p.as_str());
                gold.push(g);
            }
            None => abstained += 1,
        }
    }
    let mut report = evaluate(&predicted, &gold, labels.labels())?;
    report.abstain_count = abstained;
    Ok(report)
}

/// Which candidate extractor builds the aspect matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CandidateMode {
    Nouns,
    Tokens,
    AdjNoun { seeds: BTreeSet<String>, window: usize },
}

impl CandidateMode {
    pub fn adj_noun_default() -> Self {
        CandidateMode::AdjNoun {
            seeds: crate::candidates::default_seed_adjectives(),
            window: DEFAULT_ADJ_WINDOW,
        }
    }

    pub fn extract(&self, corpus: &Corpus, store: &VectorStore, n: usize) -> Result<CandidateSet> {
        match self {
            CandidateMode::Nouns => top_n_nouns(corpus, store, n),
            CandidateMode::Tokens => top_n_tokens(corpus, store, n),
            CandidateMode::AdjNoun { seeds, window } => adj_noun_candidates(corpus, store, seeds, *window, n),
        }
    }
}

/// Everything downstream of the embeddings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub candidate_count: usize,
    pub gamma: f64,
    pub candidates: CandidateMode,
    pub labels: Vec<LabelDefinition>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::Cat,
            candidate_count: 200,
            gamma: crate::attention::DEFAULT_GAMMA,
            candidates: CandidateMode::Nouns,
            labels: crate::labeler::default_label_definitions(),
        }
    }
}

/// Extracts candidates from `candidate_corpus`, labels `eval_set`, scores it.
pub fn run_experiment(
    candidate_corpus: &Corpus,
    eval_set: &Corpus,
    store: &VectorStore,
    config: &ExperimentConfig,
) -> Result<EvaluationReport> {
    let candidates = config
        .candidates
        .extract(candidate_corpus, store, config.candidate_count)?;
    let labels = build_label_vectors(store, &config.labels)?;
    let pipeline = Pipeline::new(
        store,
        &candidates,
        &labels,
        config.method,
        AttentionConfig { gamma: config.gamma },
    )?;
    let results = pipeline.label_corpus(eval_set)?;
    evaluate_results(&results, eval_set, &labels)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub candidate_counts: Vec<usize>,
    pub gammas: Vec<f64>,
    pub method: Method,
}

impl GridConfig {
    /// N ∈ {50, 100, 200, 500, 980}, γ ∈ {0.01, 0.03, 0.1, 0.3, 1.0}.
    pub fn default_for(method: Method) -> Self {
        GridConfig {
            candidate_counts: vec![50, 100, 200, 500, 980],
            gammas: vec![0.01, 0.03, 0.1, 0.3, 1.0],
            method,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.candidate_counts.is_empty() || self.gammas.is_empty() {
            return Err(Error::Config("grid needs at least one N and one gamma".into()));
        }
        if self.candidate_counts.contains(&0) {
            return Err(Error::Config("candidate counts must be positive".into()));
        }
        if self.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::Config("gammas must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridCell {
    pub candidate_count: usize,
    pub gamma: f64,
    pub report: EvaluationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridResult {
    pub method: Method,
    /// Every evaluated cell, sorted by (N, γ).
    pub cells: Vec<GridCell>,
    best: usize,
}

impl GridResult {
    pub fn best(&self) -> &GridCell {
        &self.cells[self.best]
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("n\tgamma\tprecision\trecall\tf1\n");
        for cell in &self.cells {
            let w = &cell.report.weighted_macro;
            let _ = writeln!(
                out,
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                cell.candidate_count, cell.gamma, w.precision, w.recall, w.f1
            );
        }
        let best = self.best();
        let _ = writeln!(
            out,
            "best\tn={}\tgamma={:.4}\tf1={:.4}",
            best.candidate_count, best.gamma, best.report.weighted_macro.f1
        );
        out
    }
}

/// Evaluates every (N, γ) cell on `dev`, taking the first N terms of
/// `pool` as candidates. Best = highest weighted-macro F1; ties go to the
/// smaller N, then the smaller γ.
pub fn grid_search(
    dev: &Corpus,
    store: &VectorStore,
    pool: &CandidateSet,
    grid: &GridConfig,
    labels: &LabelMatrix,
) -> Result<GridResult> {
    grid.validate()?;
    if dev.is_empty() {
        return Err(Error::Empty("development set is empty".into()));
    }
    let mut keys: Vec<(usize, f64)> = grid
        .candidate_counts
        .iter()
        .flat_map(|&n| grid.gammas.iter().map(move |&g| (n, g)))
        .collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();

    let cells = keys
        .par_iter()
        .map(|&(n, gamma)| {
            let candidates = pool.top(n);
            let pipeline = Pipeline::new(store, &candidates, labels, grid.method, AttentionConfig { gamma })?;
            let results = pipeline.label_corpus(dev)?;
            Ok(GridCell {
                candidate_count: n,
                gamma,
                report: evaluate_results(&results, dev, labels)?,
            })
        })
        .collect::<Result<Vec<GridCell>>>()?;

    let mut best = 0;
    for (i, cell) in cells.iter().enumerate() {
        if cell.report.weighted_macro.f1 > cells[best].report.weighted_macro.f1 {
            best = i;
        }
    }
    Ok(GridResult {
        method: grid.method,
        cells,
        best,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub sentences: usize,
    /// Weighted-macro F1 of each successful seed, in seed order.
    pub f_scores: Vec<f64>,
    /// Seeds whose run failed (e.g. vocabulary too small).
    pub failures: usize,
}

impl CurvePoint {
    pub fn mean_f(&self) -> Option<f64> {
        if self.f_scores.is_empty() {
            None
        } else {
            Some(self.f_scores.iter().sum::<f64>() / self.f_scores.len() as f64)
        }
    }

    /// Sample standard deviation (0 for a single run).
    pub fn std_f(&self) -> Option<f64> {
        let mean = self.mean_f()?;
        let n = self.f_scores.len();
        if n < 2 {
            return Some(0.0);
        }
        let ss: f64 = self.f_scores.iter().map(|f| (f - mean).powi(2)).sum();
        Some((ss / (n - 1) as f64).sqrt())
    }

    pub fn is_missing(&self) -> bool {
        self.f_scores.is_empty()
    }
}

/// `fraction<TAB>mean_f<TAB>std_f` with a header; missing points print `NA`.
pub fn curve_to_tsv(points: &[CurvePoint]) -> String {
    let mut out = String::from("fraction\tmean_f\tstd_f\n");
    for p in points {
        let fmt = |v: Option<f64>| v.map_or("NA".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(out, "{:.4}\t{}\t{}", p.fraction, fmt(p.mean_f()), fmt(p.std_f()));
    }
    out
}

/// Trains `seeds` embedding models on each prefix `k / increments` of
/// `train_corpus` (seeds `trainer.seed + i`), runs the pipeline with
/// candidates drawn from that prefix, and scores `eval_set`.
pub fn learning_curve(
    train_corpus: &Corpus,
    eval_set: &Corpus,
    trainer: &TrainerConfig,
    experiment: &ExperimentConfig,
    increments: usize,
    seeds: usize,
) -> Result<Vec<CurvePoint>> {
    if increments == 0 {
        return Err(Error::Config("increments must be at least 1".into()));
    }
    let fractions: Vec<f64> = (1..=increments).map(|k| k as f64 / increments as f64).collect();
    learning_curve_at(train_corpus, eval_set, trainer, experiment, &fractions, seeds)
}

/// [`learning_curve`] at explicit data fractions in `(0, 1]`.
pub fn learning_curve_at(
    train_corpus: &Corpus,
    eval_set: &Corpus,
    trainer: &TrainerConfig,
    experiment: &ExperimentConfig,
    fractions: &[f64],
    seeds: usize,
) -> Result<Vec<CurvePoint>> {
    if train_corpus.is_empty() {
        return Err(Error::Empty("training corpus is empty".into()));
    }
    if seeds == 0 {
        return Err(Error::Config("seeds must be at least 1".into()));
    }
    if fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
        return Err(Error::Config("fractions must lie in (0, 1]".into()));
    }
    trainer.validate()?;

    let prefix_len = |f: f64| ((train_corpus.len() as f64 * f).round() as usize).min(train_corpus.len());
    let jobs: Vec<(usize, usize)> = (0..fractions.len())
        .flat_map(|p| (0..seeds).map(move |s| (p, s)))
        .collect();
    let outcomes: Vec<(usize, usize, Option<f64>)> = jobs
        .par_iter()
        .map(|&(p, s)| {
            let prefix = train_corpus.prefix(prefix_len(fractions[p]));
            let config = TrainerConfig {
                seed: trainer.seed.wrapping_add(s as u64),
                ..trainer.clone()
            };
            let f = sgns::train(&prefix, &config)
                .and_then(|store| run_experiment(&prefix, eval_set, &store, experiment))
                .map(|report| report.weighted_macro.f1);
            if let Err(e) = &f {
                log::warn!("curve point {:.2}, seed {}: {e}", fractions[p], config.seed);
            }
            (p, s, f.ok())
        })
        .collect();

    let points = fractions
        .iter()
        .enumerate()
        .map(|(p, &fraction)| {
            let mut scores: Vec<(usize, Option<f64>)> =
                outcomes.iter().filter(|o| o.0 == p).map(|o| (o.1, o.2)).collect();
            scores.sort_by_key(|s| s.0);
            CurvePoint {
                fraction,
                sentences: prefix_len(fraction),
                f_scores: scores.iter().filter_map(|s| s.1).collect(),
                failures: scores.iter().filter(|s| s.1.is_none()).count(),
            }
        })
        .collect();
    Ok(points)
}
