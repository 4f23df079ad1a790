//! Unsupervised aspect extraction with contrastive (RBF-kernel) attention.
//!
//! The pipeline needs only in-domain word embeddings and POS-tagged text:
//!
//! 1. [`candidates`]: the most frequent nouns of the domain become aspect
//!    candidates; their vectors form the aspect matrix.
//! 2. [`attention`]: each token of a sentence is weighted by its summed RBF
//!    similarity to all candidates, and the weighted token vectors are
//!    summed into a sentence summary.
//! 3. [`labeler`]: the summary is assigned the label whose embedding is
//!    closest by cosine.
//!
//! [`sgns`] trains the embeddings, [`corpus`] reads CoNLL-U or plain text,
//! and [`eval`] scores predictions and runs grid searches and learning
//! curves. The `cat-aspect` binary wires these together; see [`cli`].
//!
//! ```
//! use cat_aspect::attention::{contrastive_attention, AttentionConfig};
//! use ndarray::array;
//!
//! let sentence = array![[1.0, 0.0], [0.0, 1.0]];
//! let aspects = array![[1.0, 0.0]];
//! let w = contrastive_attention(sentence.view(), aspects.view(), &AttentionConfig { gamma: 1.0 })?;
//! assert!(w[0] > 0.88 && w[0] < 0.881);
//! # Ok::<(), cat_aspect::Error>(())
//! ```

pub mod attention;
pub mod candidates;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod labeler;
pub mod sgns;
pub mod synthetic;

pub use attention::{AttentionConfig, AttentionResult};
pub use candidates::CandidateSet;
pub use corpus::{Corpus, Sentence, Token, Upos};
pub use embeddings::VectorStore;
pub use error::{Error, Result};
pub use eval::{EvaluationReport, GridConfig};
pub use labeler::{LabelDefinition, LabelMatrix, LabeledResult, Method, Pipeline};
pub use sgns::TrainerConfig;
