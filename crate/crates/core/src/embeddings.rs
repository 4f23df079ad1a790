//! Dense word vectors: loading, saving, lookup and mean composition.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// Vocabulary-indexed embedding matrix. Immutable once built.
///
/// Vectors are kept exactly as loaded (no length normalization).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorStore {
    words: Vec<String>,
    index: HashMap<String, usize>,
    matrix: Array2<f64>,
}

impl VectorStore {
    /// Builds a store from parallel word and row lists.
    pub fn from_rows(words: Vec<String>, matrix: Array2<f64>) -> Result<Self> {
        if words.len() != matrix.nrows() {
            return Err(Error::ShapeMismatch {
                left: words.len(),
                right: matrix.nrows(),
            });
        }
        if matrix.ncols() == 0 {
            return Err(Error::Config("embedding dimension must be at least 1".into()));
        }
        if let Some(row) = matrix.outer_iter().position(|row| row.iter().any(|v| !v.is_finite())) {
            return Err(Error::Config(format!(
                "non-finite value in vector for `{}`",
                words[row]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, word) in words.iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(Error::DuplicateWord {
                    word: word.clone(),
                    line: i + 2,
                });
            }
        }
        Ok(VectorStore { words, index, matrix })
    }

    /// A store with no words (still has a dimension).
    pub fn empty(dim: usize) -> Self {
        VectorStore {
            words: Vec::new(),
            index: HashMap::new(),
            matrix: Array2::zeros((0, dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Row index of `word`, matched on its lowercased form first and the
    /// exact form second.
    pub fn index_of(&self, word: &str) -> Option<usize> {
        let lower = word.to_lowercase();
        self.index.get(&lower).or_else(|| self.index.get(word)).copied()
    }

    pub fn lookup(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.index_of(word).map(|i| self.matrix.row(i))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index_of(word).is_some()
    }

    /// Arithmetic mean of the resolvable words' vectors, plus the words that
    /// did not resolve.
    pub fn mean_vector<S: AsRef<str>>(&self, words: &[S]) -> Result<(Array1<f64>, Vec<String>)> {
        let mut sum = Array1::zeros(self.dim());
        let mut hits = 0usize;
        let mut missing = Vec::new();
        for word in words {
            match self.lookup(word.as_ref()) {
                Some(row) => {
                    sum += &row;
                    hits += 1;
                }
                None => missing.push(word.as_ref().to_string()),
            }
        }
        if hits == 0 {
            return Err(Error::NoneResolved { missing });
        }
        sum /= hits as f64;
        Ok((sum, missing))
    }

    /// Stacks the rows for `words` (all of which must resolve).
    pub fn stack<S: AsRef<str>>(&self, words: &[S]) -> Result<Array2<f64>> {
        let mut out = Array2::zeros((words.len(), self.dim()));
        for (mut row, word) in out.outer_iter_mut().zip(words) {
            let v = self.lookup(word.as_ref()).ok_or_else(|| Error::NoneResolved {
                missing: vec![word.as_ref().to_string()],
            })?;
            row.assign(&v);
        }
        Ok(out)
    }

    /// Restricts the store to words accepted by `keep`, preserving order.
    pub fn filter(&self, keep: impl Fn(&str) -> bool) -> VectorStore {
        let rows: Vec<usize> = (0..self.len()).filter(|&i| keep(&self.words[i])).collect();
        let words = rows.iter().map(|&i| self.words[i].clone()).collect();
        let matrix = self.matrix.select(Axis(0), &rows);
        VectorStore::from_rows(words, matrix).expect("subset of a valid store is valid")
    }
}

fn parse_row(line: &str, line_no: usize, dim: Option<usize>) -> Result<(String, Vec<f64>)> {
    let mut parts = line.split(' ').filter(|p| !p.is_empty());
    let word = parts.next().ok_or_else(|| Error::Parse {
        line: line_no,
        message: "empty vector row".into(),
    })?;
    let values = parts
        .map(|p| {
            let v: f64 = p.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("cannot parse `{p}` as a number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite component `{p}`"),
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(dim) = dim {
        if values.len() != dim {
            return Err(Error::Dimension {
                line: line_no,
                expected: dim,
                found: values.len(),
            });
        }
    }
    Ok((word.to_string(), values))
}

fn assemble(words: Vec<String>, rows: Vec<f64>, dim: usize, lines: &[usize]) -> Result<VectorStore> {
    let mut seen = HashMap::with_capacity(words.len());
    for (i, word) in words.iter().enumerate() {
        if seen.insert(word.as_str(), i).is_some() {
            return Err(Error::DuplicateWord {
                word: word.clone(),
                line: lines[i],
            });
        }
    }
    let matrix = Array2::from_shape_vec((words.len(), dim), rows).map_err(|e| Error::Config(e.to_string()))?;
    VectorStore::from_rows(words, matrix)
}

/// Reads the word2vec text format: a `V d` header, then `V` rows of
/// `word v1 ... vd`.
pub fn load_word2vec_text<R: BufRead>(reader: R) -> Result<VectorStore> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or_else(|| Error::Parse {
        line: 1,
        message: "missing `V d` header".into(),
    })?;
    let mut fields = header.split_whitespace().map(str::parse::<usize>);
    let (vocab_len, dim) = match (fields.next(), fields.next(), fields.next()) {
        (Some(Ok(v)), Some(Ok(d)), None) if d >= 1 => (v, d),
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("malformed header `{header}`, expected `V d` with d >= 1"),
            })
        }
    };

    let mut words = Vec::with_capacity(vocab_len);
    let mut rows = Vec::with_capacity(vocab_len * dim);
    let mut line_numbers = Vec::with_capacity(vocab_len);
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let (word, values) = parse_row(line, line_no, Some(dim))?;
        words.push(word);
        rows.extend(values);
        line_numbers.push(line_no);
    }
    if words.len() != vocab_len {
        return Err(Error::VocabSizeMismatch {
            expected: vocab_len,
            found: words.len(),
        });
    }
    assemble(words, rows, dim, &line_numbers)
}

/// Reads headerless `word v1 ... vd` rows (GloVe distribution format). The
/// dimension is taken from the first row.
pub fn load_glove_text<R: BufRead>(reader: R) -> Result<VectorStore> {
    let mut words = Vec::new();
    let mut rows = Vec::new();
    let mut line_numbers = Vec::new();
    let mut dim = None;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (word, values) = parse_row(line.trim_end(), line_no, dim)?;
        dim.get_or_insert(values.len());
        words.push(word);
        rows.extend(values);
        line_numbers.push(line_no);
    }
    let dim = dim.ok_or_else(|| Error::Empty("no vectors in input".into()))?;
    assemble(words, rows, dim, &line_numbers)
}

/// Writes the word2vec text format read by [`load_word2vec_text`].
pub fn save_word2vec_text<W: Write>(store: &VectorStore, mut writer: W) -> Result<()> {
    writeln!(writer, "{} {}", store.len(), store.dim())?;
    let mut line = String::new();
    for (word, row) in store.words.iter().zip(store.matrix.outer_iter()) {
        line.clear();
        line.push_str(word);
        for v in row {
            // Shortest representation that parses back to the same f64.
            line.push(' ');
            line.push_str(&format!("{v:?}"));
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    writer.flush()?;
    Ok(())
}
