//! Contrastive (RBF-kernel) attention, dot-product attention, and the
//! summaries built from them.
//!
//! Contrastive attention assigns token `i` the weight
//!
//! ```text
//! att_i = Σ_a rbf(s_i, a) / Σ_j Σ_a rbf(s_j, a),   rbf(x, y) = exp(-γ ‖x - y‖²)
//! ```
//!
//! so tokens that lie close to *any* aspect vector receive most of the mass,
//! regardless of which aspect they are close to.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::corpus::Sentence;
use crate::embeddings::VectorStore;
use crate::error::{Error, Result};

/// Kernel width used throughout unless configured otherwise.
pub const DEFAULT_GAMMA: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttentionConfig {
    /// RBF kernel scale. `0.0` is accepted by the attention functions (every
    /// response becomes 1, i.e. uniform attention) but rejected by [`AttentionConfig::new`].
    pub gamma: f64,
}

impl AttentionConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(AttentionConfig { gamma })
        } else {
            Err(Error::Config(format!("gamma must be positive, got {gamma}")))
        }
    }
}

impl Default for AttentionConfig {
    fn default() -> Self {
        AttentionConfig { gamma: DEFAULT_GAMMA }
    }
}

/// Attention weights over the in-vocabulary positions of a sentence plus the
/// weighted summary vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionResult {
    /// One weight per in-vocabulary token, in sentence order.
    pub weights: Array1<f64>,
    pub summary: Array1<f64>,
    /// Sentence positions whose tokens had no vector.
    pub skipped_positions: Vec<usize>,
}

impl AttentionResult {
    /// Weights re-expanded to every sentence position; OOV positions get 0.
    pub fn weights_by_position(&self, sentence_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; sentence_len];
        let mut weights = self.weights.iter();
        for (pos, slot) in out.iter_mut().enumerate() {
            if !self.skipped_positions.contains(&pos) {
                *slot = *weights.next().expect("one weight per kept position");
            }
        }
        out
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { left, right })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("gamma must be finite and >= 0, got {gamma}")))
    }
}

/// `exp(-γ ‖x − y‖²)`.
pub fn rbf(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>, gamma: f64) -> Result<f64> {
    check_dims(x.len(), y.len())?;
    check_gamma(gamma)?;
    let dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-gamma * dist).exp())
}

fn row_sq_norms(m: ArrayView2<'_, f64>) -> Array1<f64> {
    m.map_axis(Axis(1), |row| row.dot(&row))
}

/// Aspect matrix with cached squared row norms, for labeling many sentences
/// against the same candidates.
#[derive(Clone, Debug)]
pub struct AspectMatrix {
    rows: Array2<f64>,
    sq_norms: Array1<f64>,
}

impl AspectMatrix {
    pub fn new(rows: Array2<f64>) -> Result<Self> {
        if rows.nrows() == 0 {
            return Err(Error::Empty("aspect matrix has no rows".into()));
        }
        let sq_norms = row_sq_norms(rows.view());
        Ok(AspectMatrix { rows, sq_norms })
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    /// Contrastive attention of `sentence` (n × d) against these aspects.
    pub fn attend(&self, sentence: ArrayView2<'_, f64>, gamma: f64) -> Result<Array1<f64>> {
        check_gamma(gamma)?;
        if sentence.nrows() == 0 {
            return Err(Error::Empty("sentence matrix has no rows".into()));
        }
        check_dims(sentence.ncols(), self.rows.ncols())?;

        // ‖s − a‖² = ‖s‖² + ‖a‖² − 2 s·a for all pairs at once.
        let mut dist = sentence.dot(&self.rows.t());
        let s_norms = row_sq_norms(sentence);
        for (mut row, s_norm) in dist.outer_iter_mut().zip(&s_norms) {
            for (d, a_norm) in row.iter_mut().zip(&self.sq_norms) {
                *d = (s_norm + a_norm - 2.0 * *d).max(0.0);
            }
        }

        // Shifting every distance by the global minimum rescales all responses
        // by the same factor, which cancels in the normalization but keeps the
        // largest response at exactly 1.
        let min = dist.iter().copied().fold(f64::INFINITY, f64::min);
        let mut weights: Array1<f64> = dist.map_axis(Axis(1), |row| {
            row.iter().map(|d| (-gamma * (d - min)).exp()).sum::<f64>()
        });
        let total = weights.sum();
        weights /= total;
        Ok(weights)
    }
}

/// Contrastive attention weights for the rows of `sentence` given aspect
/// rows `aspects`.
pub fn contrastive_attention(
    sentence: ArrayView2<'_, f64>,
    aspects: ArrayView2<'_, f64>,
    config: &AttentionConfig,
) -> Result<Array1<f64>> {
    AspectMatrix::new(aspects.to_owned())?.attend(sentence, config.gamma)
}

/// `softmax(S · query)` with max subtraction.
pub fn softmax_attention(sentence: ArrayView2<'_, f64>, query: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if sentence.nrows() == 0 {
        return Err(Error::Empty("sentence matrix has no rows".into()));
    }
    check_dims(sentence.ncols(), query.len())?;
    let logits = sentence.dot(&query);
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut weights = logits.mapv(|l| (l - max).exp());
    let total = weights.sum();
    weights /= total;
    Ok(weights)
}

/// `Σ_i weights_i · S_i`.
pub fn summarize(sentence: ArrayView2<'_, f64>, weights: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    check_dims(sentence.nrows(), weights.len())?;
    Ok(weights.dot(&sentence))
}

/// Arithmetic mean of the rows of `sentence`.
pub fn mean_summary(sentence: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    sentence
        .mean_axis(Axis(0))
        .ok_or_else(|| Error::Empty("sentence matrix has no rows".into()))
}

/// Stacks the vectors of a sentence's in-vocabulary tokens. Returns the
/// matrix and the skipped (OOV) positions.
pub fn sentence_matrix(sentence: &Sentence, store: &VectorStore) -> (Array2<f64>, Vec<usize>) {
    let mut rows = Vec::with_capacity(sentence.len() * store.dim());
    let mut skipped = Vec::new();
    let mut kept = 0;
    for (pos, token) in sentence.tokens.iter().enumerate() {
        match store.lookup(&token.norm) {
            Some(v) => {
                rows.extend(v.iter().copied());
                kept += 1;
            }
            None => skipped.push(pos),
        }
    }
    let matrix = Array2::from_shape_vec((kept, store.dim()), rows).expect("kept rows * dim");
    (matrix, skipped)
}

/// `token<TAB>weight` lines, one per sentence position; OOV tokens get 0.
pub fn format_weights(sentence: &Sentence, result: &AttentionResult) -> String {
    let weights = result.weights_by_position(sentence.len());
    let mut out = String::new();
    for (token, w) in sentence.tokens.iter().zip(weights) {
        out.push_str(&format!("{}\t{w:.4}\n", token.form));
    }
    out
}
