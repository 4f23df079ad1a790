//! Sentence labeling: summary vector → nearest label embedding by cosine.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attention::{
    mean_summary, sentence_matrix, softmax_attention, summarize, AspectMatrix, AttentionConfig, AttentionResult,
};
use crate::candidates::CandidateSet;
use crate::corpus::{Corpus, Sentence};
use crate::embeddings::VectorStore;
use crate::error::{Error, Result};

/// A target label and the words whose mean embedding represents it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDefinition {
    pub name: String,
    pub query_terms: Vec<String>,
}

impl LabelDefinition {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        LabelDefinition {
            query_terms: vec![name.clone()],
            name,
        }
    }

    pub fn with_terms<S: Into<String>>(name: impl Into<String>, terms: impl IntoIterator<Item = S>) -> Self {
        LabelDefinition {
            name: name.into(),
            query_terms: terms.into_iter().map(Into::into).collect(),
        }
    }
}

impl FromStr for LabelDefinition {
    type Err = Error;

    /// `name` or `name=term1,term2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let def = match s.split_once('=') {
            Some((name, terms)) => {
                LabelDefinition::with_terms(name.trim(), terms.split(',').map(str::trim).filter(|t| !t.is_empty()))
            }
            None => LabelDefinition::new(s),
        };
        if def.name.is_empty() || def.query_terms.is_empty() {
            return Err(Error::Config(format!("invalid label definition `{s}`")));
        }
        Ok(def)
    }
}

/// food, staff (staff + service), ambience (ambience + ambiance).
pub fn default_label_definitions() -> Vec<LabelDefinition> {
    vec![
        LabelDefinition::new("food"),
        LabelDefinition::with_terms("staff", ["staff", "service"]),
        LabelDefinition::with_terms("ambience", ["ambience", "ambiance"]),
    ]
}

/// Folds dataset label spellings onto the default label names.
pub fn canonical_label(label: &str) -> String {
    let lower = label.trim().to_lowercase();
    match lower.as_str() {
        "service" => "staff".to_string(),
        "ambiance" => "ambience".to_string(),
        _ => lower,
    }
}

/// Label embeddings in a fixed order; earlier labels win ties.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelMatrix {
    labels: Vec<String>,
    matrix: Array2<f64>,
}

impl LabelMatrix {
    pub fn from_rows(labels: Vec<String>, matrix: Array2<f64>) -> Result<Self> {
        if labels.len() != matrix.nrows() {
            return Err(Error::ShapeMismatch {
                left: labels.len(),
                right: matrix.nrows(),
            });
        }
        if labels.is_empty() {
            return Err(Error::Empty("no labels".into()));
        }
        Ok(LabelMatrix { labels, matrix })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn build_label_vectors(store: &VectorStore, defs: &[LabelDefinition]) -> Result<LabelMatrix> {
    let mut matrix = Array2::zeros((defs.len(), store.dim()));
    for (mut row, def) in matrix.outer_iter_mut().zip(defs) {
        let (mean, missing) = store
            .mean_vector(&def.query_terms)
            .map_err(|_| Error::UnresolvedLabel {
                label: def.name.clone(),
                terms: def.query_terms.clone(),
            })?;
        if !missing.is_empty() {
            log::info!("label `{}`: no vector for {}", def.name, missing.join(", "));
        }
        row.assign(&mean);
    }
    LabelMatrix::from_rows(defs.iter().map(|d| d.name.clone()).collect(), matrix)
}

fn cosine(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let denom = a.dot(&a).sqrt() * b.dot(&b).sqrt();
    if denom > 0.0 {
        a.dot(&b) / denom
    } else {
        0.0
    }
}

/// Outcome of [`assign_label`]: `label` is `None` when the summary has zero
/// norm (abstain).
#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub label: Option<usize>,
    pub similarities: Vec<f64>,
}

/// Argmax cosine between `summary` and each label row.
pub fn assign_label(summary: ArrayView1<'_, f64>, labels: &LabelMatrix) -> Result<Assignment> {
    if summary.len() != labels.dim() {
        return Err(Error::ShapeMismatch {
            left: summary.len(),
            right: labels.dim(),
        });
    }
    if summary.dot(&summary) == 0.0 || summary.iter().any(|v| !v.is_finite()) {
        return Ok(Assignment {
            label: None,
            similarities: vec![0.0; labels.labels.len()],
        });
    }
    let similarities: Vec<f64> = labels.matrix.outer_iter().map(|row| cosine(summary, row)).collect();
    let mut best = 0;
    for (i, &s) in similarities.iter().enumerate().skip(1) {
        if s > similarities[best] {
            best = i;
        }
    }
    Ok(Assignment {
        label: Some(best),
        similarities,
    })
}

/// How token weights are computed before summarizing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Contrastive (RBF) attention over all candidate rows.
    Cat,
    /// Dot-product softmax attention with the mean candidate row as query.
    Attention,
    /// Uniform weights.
    Mean,
}

impl Method {
    pub fn uses_gamma(self) -> bool {
        self == Method::Cat
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Cat => "cat",
            Method::Attention => "attention",
            Method::Mean => "mean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "cat" | "contrastive" => Ok(Method::Cat),
            "attention" | "att" | "dot" => Ok(Method::Attention),
            "mean" => Ok(Method::Mean),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledResult {
    /// `None` means abstain.
    pub label: Option<String>,
    /// Cosine to each label, in label-matrix order.
    pub similarities: Vec<f64>,
    /// Absent when no token of the sentence has a vector.
    pub attention: Option<AttentionResult>,
}

impl LabeledResult {
    pub fn is_abstain(&self) -> bool {
        self.label.is_none()
    }
}

/// Everything needed to label sentences, prepared once.
#[derive(Clone, Debug)]
pub struct Pipeline<'a> {
    store: &'a VectorStore,
    labels: &'a LabelMatrix,
    aspects: AspectMatrix,
    query: Array1<f64>,
    method: Method,
    config: AttentionConfig,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        store: &'a VectorStore,
        candidates: &CandidateSet,
        labels: &'a LabelMatrix,
        method: Method,
        config: AttentionConfig,
    ) -> Result<Self> {
        if candidates.vectors().ncols() != store.dim() {
            return Err(Error::ShapeMismatch {
                left: candidates.vectors().ncols(),
                right: store.dim(),
            });
        }
        if labels.dim() != store.dim() {
            return Err(Error::ShapeMismatch {
                left: labels.dim(),
                right: store.dim(),
            });
        }
        let aspects = AspectMatrix::new(candidates.vectors().clone())?;
        let query = mean_summary(candidates.vectors().view())?;
        Ok(Pipeline {
            store,
            labels,
            aspects,
            query,
            method,
            config,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn labels(&self) -> &LabelMatrix {
        self.labels
    }

    pub fn attend(&self, sentence: &Sentence) -> Result<Option<AttentionResult>> {
        let (matrix, skipped_positions) = sentence_matrix(sentence, self.store);
        if matrix.nrows() == 0 {
            return Ok(None);
        }
        let weights = match self.method {
            Method::Cat => self.aspects.attend(matrix.view(), self.config.gamma)?,
            Method::Attention => softmax_attention(matrix.view(), self.query.view())?,
            Method::Mean => Array1::from_elem(matrix.nrows(), 1.0 / matrix.nrows() as f64),
        };
        let summary = summarize(matrix.view(), weights.view())?;
        Ok(Some(AttentionResult {
            weights,
            summary,
            skipped_positions,
        }))
    }

    pub fn label_sentence(&self, sentence: &Sentence) -> Result<LabeledResult> {
        let Some(attention) = self.attend(sentence)? else {
            return Ok(LabeledResult {
                label: None,
                similarities: vec![0.0; self.labels.labels.len()],
                attention: None,
            });
        };
        let assignment = assign_label(attention.summary.view(), self.labels)?;
        Ok(LabeledResult {
            label: assignment.label.map(|i| self.labels.labels[i].clone()),
            similarities: assignment.similarities,
            attention: Some(attention),
        })
    }

    /// Labels every sentence (in parallel); output order equals corpus order.
    pub fn label_corpus(&self, corpus: &Corpus) -> Result<Vec<LabeledResult>> {
        corpus.sentences.par_iter().map(|s| self.label_sentence(s)).collect()
    }
}

/// One-shot convenience over [`Pipeline`].
pub fn label_sentence(
    sentence: &Sentence,
    store: &VectorStore,
    candidates: &CandidateSet,
    labels: &LabelMatrix,
    method: Method,
    config: AttentionConfig,
) -> Result<LabeledResult> {
    Pipeline::new(store, candidates, labels, method, config)?.label_sentence(sentence)
}

/// One line of the JSON-lines prediction output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub text: String,
    pub gold: Option<String>,
    /// `null` when the labeler abstained.
    pub predicted: Option<String>,
    pub similarities: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<(String, f64)>>,
}

impl PredictionRecord {
    pub fn new(sentence: &Sentence, result: &LabeledResult, labels: &LabelMatrix, with_weights: bool) -> Self {
        let weights = with_weights.then(|| {
            let by_pos = result
                .attention
                .as_ref()
                .map(|a| a.weights_by_position(sentence.len()))
                .unwrap_or_else(|| vec![0.0; sentence.len()]);
            sentence
                .tokens
                .iter()
                .zip(by_pos)
                .map(|(t, w)| (t.form.clone(), round4(w)))
                .collect()
        });
        PredictionRecord {
            text: sentence.text(),
            gold: sentence.gold_label().map(str::to_string),
            predicted: result.label.clone(),
            similarities: labels
                .labels()
                .iter()
                .cloned()
                .zip(result.similarities.iter().map(|&s| round4(s)))
                .collect(),
            weights,
        }
    }
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}
