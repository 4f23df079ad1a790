//! POS-tagged corpora: CoNLL-U and plain-text ingestion, and evaluation-set
//! preparation.
//!
//! Only three CoNLL-U columns are consumed (ID, FORM, UPOS). Gold aspect
//! labels travel as `# label = <name>` comments; a sentence may carry several
//! such comments, which is how multi-aspect sentences are represented before
//! [`prepare_eval_set`] discards them.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Universal POS tag. Anything outside the UD inventory becomes [`Upos::Other`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Upos {
    Adj,
    Adp,
    Adv,
    Aux,
    Cconj,
    Det,
    Intj,
    Noun,
    Num,
    Part,
    Pron,
    Propn,
    Punct,
    Sconj,
    Sym,
    Verb,
    X,
    Other,
}

impl Upos {
    pub fn as_str(self) -> &'static str {
        match self {
            Upos::Adj => "ADJ",
            Upos::Adp => "ADP",
            Upos::Adv => "ADV",
            Upos::Aux => "AUX",
            Upos::Cconj => "CCONJ",
            Upos::Det => "DET",
            Upos::Intj => "INTJ",
            Upos::Noun => "NOUN",
            Upos::Num => "NUM",
            Upos::Part => "PART",
            Upos::Pron => "PRON",
            Upos::Propn => "PROPN",
            Upos::Punct => "PUNCT",
            Upos::Sconj => "SCONJ",
            Upos::Sym => "SYM",
            Upos::Verb => "VERB",
            Upos::X => "X",
            // `_` is the CoNLL-U "unspecified" marker and parses back to Other.
            Upos::Other => "_",
        }
    }

    /// Lenient conversion: unknown tags degrade to `Other`.
    pub fn from_tag(tag: &str) -> Upos {
        tag.parse().unwrap_or(Upos::Other)
    }
}

impl FromStr for Upos {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "ADJ" => Upos::Adj,
            "ADP" => Upos::Adp,
            "ADV" => Upos::Adv,
            "AUX" => Upos::Aux,
            "CCONJ" => Upos::Cconj,
            "DET" => Upos::Det,
            "INTJ" => Upos::Intj,
            "NOUN" => Upos::Noun,
            "NUM" => Upos::Num,
            "PART" => Upos::Part,
            "PRON" => Upos::Pron,
            "PROPN" => Upos::Propn,
            "PUNCT" => Upos::Punct,
            "SCONJ" => Upos::Sconj,
            "SYM" => Upos::Sym,
            "VERB" => Upos::Verb,
            "X" => Upos::X,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Token {
    pub form: String,
    /// Case-folded `form`; all lookups go through this.
    pub norm: String,
    pub upos: Upos,
}

impl Token {
    pub fn new(form: impl Into<String>, upos: Upos) -> Self {
        let form = form.into();
        let norm = form.to_lowercase();
        Token { form, norm, upos }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    /// Every `# label =` annotation seen for this sentence, in file order.
    pub gold_labels: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            gold_labels: Vec::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.gold_labels.push(label.into());
        self
    }

    /// The gold label, if the sentence carries exactly one distinct label.
    pub fn gold_label(&self) -> Option<&str> {
        let mut labels = self.distinct_labels().into_iter();
        match (labels.next(), labels.next()) {
            (Some(label), None) => Some(label),
            _ => None,
        }
    }

    fn distinct_labels(&self) -> BTreeSet<&str> {
        self.gold_labels.iter().map(String::as_str).collect()
    }

    /// Surface text, tokens joined by single spaces.
    pub fn text(&self) -> String {
        let forms: Vec<&str> = self.tokens.iter().map(|t| t.form.as_str()).collect();
        forms.join(" ")
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub source_id: String,
}

impl Corpus {
    pub fn new(source_id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        Corpus {
            sentences,
            source_id: source_id.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sentence> {
        self.sentences.iter()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// A corpus holding the first `count` sentences.
    pub fn prefix(&self, count: usize) -> Corpus {
        let count = count.min(self.sentences.len());
        Corpus {
            sentences: self.sentences[..count].to_vec(),
            source_id: format!("{}[..{count}]", self.source_id),
        }
    }

    /// Rewrites every gold label through `f` (used to fold dataset-specific
    /// label names such as `service` onto canonical ones).
    pub fn map_labels(mut self, f: impl Fn(&str) -> String) -> Corpus {
        for sentence in &mut self.sentences {
            for label in &mut sentence.gold_labels {
                *label = f(label);
            }
        }
        self
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Sentence;
    type IntoIter = std::slice::Iter<'a, Sentence>;

    fn into_iter(self) -> Self::IntoIter {
        self.sentences.iter()
    }
}

fn parse_label_comment(comment: &str) -> Option<&str> {
    let (key, value) = comment.split_once('=')?;
    if key.trim() == "label" {
        let value = value.trim();
        (!value.is_empty()).then_some(value)
    } else {
        None
    }
}

/// Parses the CoNLL-U subset: tab-separated token lines (at least the four
/// leading columns ID, FORM, LEMMA, UPOS), `#` comments, blank-line sentence
/// boundaries. Range IDs (`3-4`) and empty nodes (`5.1`) are skipped.
pub fn parse_conllu<R: BufRead>(reader: R, source_id: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut current = Sentence::default();
    let mut open = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);

        if line.trim().is_empty() {
            if open {
                sentences.push(std::mem::take(&mut current));
                open = false;
            }
            continue;
        }

        open = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(label) = parse_label_comment(comment) {
                current.gold_labels.push(label.to_string());
            }
            continue;
        }

        let columns: Vec<&str> = line.split('\t').collect();
        if columns.len() < 4 {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected at least 4 tab-separated columns (ID, FORM, LEMMA, UPOS), found {}",
                    columns.len()
                ),
            });
        }
        let id = columns[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        if id.parse::<usize>().is_err() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("invalid token ID `{id}`"),
            });
        }
        current.tokens.push(Token::new(columns[1], Upos::from_tag(columns[3])));
    }
    if open {
        sentences.push(current);
    }

    Ok(Corpus::new(source_id, sentences))
}

/// Writes a corpus in the same CoNLL-U subset [`parse_conllu`] reads. Columns
/// other than ID, FORM and UPOS are `_`.
pub fn write_conllu<W: Write>(corpus: &Corpus, mut writer: W) -> Result<()> {
    for sentence in corpus {
        for label in &sentence.gold_labels {
            writeln!(writer, "# label = {label}")?;
        }
        for (i, token) in sentence.tokens.iter().enumerate() {
            writeln!(writer, "{}\t{}\t_\t{}\t_\t_\t_\t_\t_\t_", i + 1, token.form, token.upos)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

/// One sentence per line, whitespace tokenized. Tokens whose norm appears in
/// `noun_lexicon` are tagged NOUN, everything else OTHER. Blank lines are
/// skipped.
pub fn parse_plain<R: BufRead>(reader: R, source_id: &str, noun_lexicon: Option<&HashSet<String>>) -> Result<Corpus> {
    let mut sentences = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let tokens: Vec<Token> = line
            .split_whitespace()
            .map(|form| {
                let mut token = Token::new(form, Upos::Other);
                if noun_lexicon.is_some_and(|lex| lex.contains(&token.norm)) {
                    token.upos = Upos::Noun;
                }
                token
            })
            .collect();
        if !tokens.is_empty() {
            sentences.push(Sentence::new(tokens));
        }
    }
    Ok(Corpus::new(source_id, sentences))
}

/// Why a sentence was dropped from an evaluation set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DiscardReason {
    NoLabel,
    MultipleLabels,
    DisallowedLabel,
    EmptySentence,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DiscardReport {
    pub input: usize,
    pub retained: usize,
    pub discarded: BTreeMap<DiscardReason, usize>,
}

impl DiscardReport {
    pub fn count(&self, reason: DiscardReason) -> usize {
        self.discarded.get(&reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.discarded.values().sum()
    }
}

/// Keeps sentences that carry exactly one distinct gold label which is also
/// in `allowed_labels` (compared case-insensitively). The retained label is
/// stored lowercased.
pub fn prepare_eval_set(corpus: &Corpus, allowed_labels: &BTreeSet<String>) -> Result<(Corpus, DiscardReport)> {
    let allowed: BTreeSet<String> = allowed_labels.iter().map(|l| l.to_lowercase()).collect();
    let mut report = DiscardReport {
        input: corpus.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();

    for sentence in corpus {
        let labels: BTreeSet<String> = sentence.gold_labels.iter().map(|l| l.to_lowercase()).collect();
        let reason = if labels.is_empty() {
            Some(DiscardReason::NoLabel)
        } else if labels.len() > 1 {
            Some(DiscardReason::MultipleLabels)
        } else if !allowed.contains(labels.iter().next().unwrap()) {
            Some(DiscardReason::DisallowedLabel)
        } else if sentence.is_empty() {
            Some(DiscardReason::EmptySentence)
        } else {
            None
        };

        match reason {
            Some(reason) => *report.discarded.entry(reason).or_default() += 1,
            None => kept.push(Sentence {
                tokens: sentence.tokens.clone(),
                gold_labels: labels.into_iter().collect(),
            }),
        }
    }

    report.retained = kept.len();
    if kept.is_empty() {
        return Err(Error::Empty(format!(
            "no sentence in `{}` has exactly one allowed label",
            corpus.source_id
        )));
    }
    Ok((Corpus::new(corpus.source_id.clone(), kept), report))
}
