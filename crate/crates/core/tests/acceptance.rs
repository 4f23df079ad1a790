//! Acceptance criteria, one test each. Every test prints a single
//! `PASS` / `FAIL` / `SKIP` line to stderr (bypassing output capture).
//!
//! Criteria 9-12 need real data. Point `CAT_ASPECT_DATA` at a directory with
//!
//! - `train.conllu`: POS-tagged in-domain restaurant text (a few million tokens)
//! - `test.conllu`: the labeled test set (`# label = ...` per sentence)
//! - `glove.txt`: 200-d general-domain GloVe vectors (criterion 11 only)
//! - `vectors.txt` (optional): in-domain word2vec vectors; trained from
//!   `train.conllu` with default settings when absent
//!
//! Criterion 13 uses the test set when available and a synthetic set of the
//! same size otherwise.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cat_aspect::attention::{contrastive_attention, softmax_attention, AttentionConfig};
use cat_aspect::candidates::top_n_nouns;
use cat_aspect::corpus::{parse_conllu, prepare_eval_set, Corpus};
use cat_aspect::embeddings::{load_glove_text, load_word2vec_text, VectorStore};
use cat_aspect::eval::{
    evaluate, learning_curve_at, run_experiment, CandidateMode, EvaluationReport, ExperimentConfig,
};
use cat_aspect::labeler::{
    assign_label, build_label_vectors, canonical_label, default_label_definitions, LabelMatrix, Method, Pipeline,
};
use cat_aspect::sgns::{self, TrainerConfig};
use cat_aspect::synthetic::{clustered_domain, random_domain, two_topic_corpus, ClusterSpec};
use ndarray::{concatenate, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = std::result::Result<String, String>;

fn report(id: u32, name: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("PASS  [{id:>2}] {name}: {detail}"),
        Err(detail) => format!("FAIL  [{id:>2}] {name}: {detail}"),
    };
    let _ = writeln!(std::io::stderr(), "{line}");
    if let Err(detail) = outcome {
        panic!("criterion {id} failed: {detail}");
    }
}

fn skip(id: u32, name: &str, reason: &str) {
    let _ = writeln!(std::io::stderr(), "SKIP  [{id:>2}] {name}: {reason}");
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> std::result::Result<(), String> {
    if elapsed.as_secs_f64() < limit_secs {
        Ok(())
    } else {
        Err(format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64()))
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    let normal = Normal::new(0.0, scale).unwrap();
    Array2::from_shape_fn((rows, cols), |_| normal.sample(rng))
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

fn cat(s: &Array2<f64>, a: &Array2<f64>, gamma: f64) -> Array1<f64> {
    contrastive_attention(s.view(), a.view(), &AttentionConfig { gamma }).unwrap()
}

fn max_diff(x: &Array1<f64>, y: &Array1<f64>) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Random (S, A, γ) with n ≤ 30, m ≤ 50, d ≤ 64.
fn random_instance(rng: &mut ChaCha8Rng) -> (Array2<f64>, Array2<f64>, f64) {
    let (n, m, d) = (
        rng.random_range(1..=30),
        rng.random_range(1..=50),
        rng.random_range(1..=64),
    );
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let gamma = if rng.random_bool(0.1) {
        0.0
    } else {
        10f64.powf(rng.random_range(-4.0..2.0))
    };
    (gaussian(rng, n, d, scale), gaussian(rng, m, d, scale), gamma)
}

/// Direct evaluation of the definition, one kernel at a time.
fn naive_contrastive(s: &Array2<f64>, a: &Array2<f64>, gamma: f64) -> Vec<f64> {
    let mut responses = Vec::with_capacity(s.nrows());
    for i in 0..s.nrows() {
        let mut total = 0.0;
        for j in 0..a.nrows() {
            let mut dist = 0.0;
            for k in 0..s.ncols() {
                let diff = s[[i, k]] - a[[j, k]];
                dist += diff * diff;
            }
            total += (-gamma * dist).exp();
        }
        responses.push(total);
    }
    let sum: f64 = responses.iter().sum();
    responses.iter().map(|r| r / sum).collect()
}

#[test]
fn c01_attention_normalization() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut negative = 0;
    for _ in 0..10_000 {
        let (s, a, gamma) = random_instance(&mut rng);
        let query = a.row(rng.random_range(0..a.nrows())).to_owned();
        for w in [cat(&s, &a, gamma), softmax_attention(s.view(), query.view()).unwrap()] {
            negative += w.iter().filter(|x| x.is_nan() || **x < 0.0).count();
            worst = worst.max((w.sum() - 1.0).abs());
        }
    }
    let elapsed = start.elapsed();
    let outcome = within(elapsed, 10.0).and_then(|_| {
        check(
            negative == 0 && worst <= 1e-9,
            format!(
                "max |Σw − 1| = {worst:.1e}, negative weights = {negative}, {:.2}s",
                elapsed.as_secs_f64()
            ),
        )
    });
    report(1, "attention normalization", outcome);
}

#[test]
fn c02_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let (n, m, d) = (
            rng.random_range(1..=30),
            rng.random_range(1..=50),
            rng.random_range(1..=64),
        );
        // Entries in [-1, 1] and γ ≤ 1 keep every kernel above 1e-112, so the
        // unshifted reference never underflows.
        let s = uniform(&mut rng, n, d);
        let a = uniform(&mut rng, m, d);
        let gamma = rng.random_range(0.0..1.0);
        let fast = cat(&s, &a, gamma);
        let slow = Array1::from(naive_contrastive(&s, &a, gamma));
        worst = worst.max(max_diff(&fast, &slow));
    }
    report(
        2,
        "oracle equivalence",
        check(worst <= 1e-6, format!("max abs diff {worst:.1e}")),
    );
}

#[test]
fn c03_limit_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_uniform = 0.0f64;
    let mut min_match = f64::INFINITY;
    for _ in 0..1_000 {
        let (s, a, _) = random_instance(&mut rng);
        let w = cat(&s, &a, 0.0);
        let expected = 1.0 / s.nrows() as f64;
        worst_uniform = worst_uniform.max(w.iter().map(|x| (x - expected).abs()).fold(0.0, f64::max));

        let (n, m, d) = (
            rng.random_range(2..=30),
            rng.random_range(1..=50),
            rng.random_range(4..=64),
        );
        let mut s = gaussian(&mut rng, n, d, 1.0);
        let a = gaussian(&mut rng, m, d, 1.0);
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..m));
        s.row_mut(i).assign(&a.row(j));
        min_match = min_match.min(cat(&s, &a, 1e6)[i]);
    }
    report(
        3,
        "limit laws",
        check(
            worst_uniform <= 1e-12 && min_match > 0.999,
            format!("γ=0 max deviation {worst_uniform:.1e}; γ=1e6 min matched weight {min_match:.6}"),
        ),
    );
}

#[test]
fn c04_invariances() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut translation, mut duplication, mut permutation, mut shift, mut cosine) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut label_flips = 0;
    for _ in 0..1_000 {
        let (s, a, _) = random_instance(&mut rng);
        let gamma = 10f64.powf(rng.random_range(-3.0..0.0));
        let w = cat(&s, &a, gamma);
        let d = s.ncols();

        let t = gaussian(&mut rng, 1, d, 3.0).row(0).to_owned();
        translation = translation.max(max_diff(&w, &cat(&(&s + &t), &(&a + &t), gamma)));

        let tripled = concatenate(Axis(0), &[a.view(), a.view(), a.view()]).unwrap();
        duplication = duplication.max(max_diff(&w, &cat(&s, &tripled, gamma)));

        let mut perm: Vec<usize> = (0..s.nrows()).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let w_perm = cat(&s.select(Axis(0), &perm), &a, gamma);
        for (k, &i) in perm.iter().enumerate() {
            permutation = permutation.max((w_perm[k] - w[i]).abs());
        }

        let q = a.row(0).to_owned();
        let shifted = &s + &(&q * rng.random_range(-3.0..3.0));
        let soft = softmax_attention(s.view(), q.view()).unwrap();
        shift = shift.max(max_diff(&soft, &softmax_attention(shifted.view(), q.view()).unwrap()));

        let labels =
            LabelMatrix::from_rows((0..3).map(|i| format!("l{i}")).collect(), gaussian(&mut rng, 3, d, 1.0)).unwrap();
        let summary = s.row(0).to_owned();
        let k = 10f64.powf(rng.random_range(-3.0..3.0));
        let x = assign_label(summary.view(), &labels).unwrap();
        let y = assign_label((&summary * k).view(), &labels).unwrap();
        if x.label != y.label {
            label_flips += 1;
        }
        for (p, q) in x.similarities.iter().zip(&y.similarities) {
            cosine = cosine.max((p - q).abs());
        }
    }
    let ok = translation <= 1e-9
        && duplication <= 1e-12
        && permutation <= 1e-12
        && shift <= 1e-9
        && label_flips == 0
        && cosine <= 1e-12;
    report(
        4,
        "invariances",
        check(
            ok,
            format!(
                "translation {translation:.1e}, duplication {duplication:.1e}, permutation {permutation:.1e}, \
                 logit shift {shift:.1e}, scaling: {label_flips} label changes / cosine drift {cosine:.1e}"
            ),
        ),
    );
}

#[test]
fn c05_mean_reduction_identity() {
    let (store, corpus) = random_domain(2_000, 50, 500, 10, 5);
    let candidates = top_n_nouns(&corpus, &store, 200).unwrap();
    let labels = build_label_vectors(&store, &default_label_definitions()).unwrap();
    let cat_zero = Pipeline::new(
        &store,
        &candidates,
        &labels,
        Method::Cat,
        AttentionConfig { gamma: 0.0 },
    )
    .unwrap();
    let mean = Pipeline::new(&store, &candidates, &labels, Method::Mean, AttentionConfig::default()).unwrap();
    let a = cat_zero.label_corpus(&corpus).unwrap();
    let b = mean.label_corpus(&corpus).unwrap();
    let differing = a.iter().zip(&b).filter(|(x, y)| x.label != y.label).count();
    report(
        5,
        "mean-reduction identity",
        check(
            differing == 0,
            format!("{differing} of {} sentences differ", corpus.len()),
        ),
    );
}

#[test]
fn c06_metric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let labels = ["food", "staff", "ambience", "price"];
    let mut worst = 0.0f64;
    let mut recall_mismatch = 0;
    for _ in 0..50 {
        // "price" appears in gold only, so one class never gets predicted.
        let pairs: Vec<(usize, usize)> = (0..1_000)
            .map(|_| (rng.random_range(0..3), rng.random_range(0..4)))
            .collect();
        let pred: Vec<&str> = pairs.iter().map(|p| labels[p.0]).collect();
        let gold: Vec<&str> = pairs.iter().map(|p| labels[p.1]).collect();
        let report = evaluate(&pred, &gold, &labels).unwrap();

        let n = pairs.len() as f64;
        let mut weighted = [0.0; 3];
        for (c, label) in labels.iter().enumerate() {
            let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
            for &(p, g) in &pairs {
                match (p == c, g == c) {
                    (true, true) => tp += 1.0,
                    (true, false) => fp += 1.0,
                    (false, true) => fn_ += 1.0,
                    _ => {}
                }
            }
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            let m = report.class(label).unwrap();
            for (x, y) in [(m.precision, precision), (m.recall, recall), (m.f1, f1)] {
                worst = worst.max((x - y).abs());
            }
            let support = (tp + fn_) / n;
            weighted[0] += support * precision;
            weighted[1] += support * recall;
            weighted[2] += support * f1;
        }
        let w = &report.weighted_macro;
        for (x, y) in [(w.precision, weighted[0]), (w.recall, weighted[1]), (w.f1, weighted[2])] {
            worst = worst.max((x - y).abs());
        }
        if report.weighted_macro.recall != report.accuracy() {
            recall_mismatch += 1;
        }
    }
    report(
        6,
        "metric oracle",
        check(
            worst <= 1e-12 && recall_mismatch == 0,
            format!("max diff vs counter {worst:.1e}; weighted recall ≠ accuracy in {recall_mismatch}/50 sets"),
        ),
    );
}

#[test]
fn c07_synthetic_end_to_end() {
    let start = Instant::now();
    let domain = clustered_domain(&ClusterSpec::default());
    let report_ = run_experiment(
        &domain.corpus,
        &domain.corpus,
        &domain.store,
        &ExperimentConfig::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let f = report_.weighted_macro.f1;
    report(
        7,
        "synthetic end-to-end",
        within(elapsed, 5.0).and_then(|_| {
            check(
                f == 1.0,
                format!(
                    "weighted F = {f:.4} on {} sentences, {:.2}s",
                    report_.evaluated,
                    elapsed.as_secs_f64()
                ),
            )
        }),
    );
}

fn topic_margin(store: &VectorStore) -> f64 {
    let words: Vec<String> = ["a", "b"]
        .iter()
        .flat_map(|t| (1..=5).map(move |i| format!("{t}{i}")))
        .collect();
    let cosine = |x: &str, y: &str| {
        let (u, v) = (store.lookup(x).unwrap(), store.lookup(y).unwrap());
        u.dot(&v) / (u.dot(&u).sqrt() * v.dot(&v).sqrt())
    };
    let (mut intra, mut cross) = (Vec::new(), Vec::new());
    for (i, x) in words.iter().enumerate() {
        for y in &words[i + 1..] {
            if x[..1] == y[..1] {
                intra.push(cosine(x, y))
            } else {
                cross.push(cosine(x, y))
            }
        }
    }
    intra.iter().sum::<f64>() / intra.len() as f64 - cross.iter().sum::<f64>() / cross.len() as f64
}

#[test]
fn c08_sgns_sanity() {
    let start = Instant::now();
    let corpus = two_topic_corpus(5_000, 8, 11);
    let config = |seed| TrainerConfig {
        dim: 50,
        epochs: 3,
        seed,
        workers: 1,
        ..Default::default()
    };
    let margins: Vec<f64> = (1..=5)
        .map(|seed| topic_margin(&sgns::train(&corpus, &config(seed)).unwrap()))
        .collect();
    let separated = margins.iter().filter(|&&m| m > 0.2).count();
    let identical = sgns::train(&corpus, &config(1)).unwrap() == sgns::train(&corpus, &config(1)).unwrap();
    let elapsed = start.elapsed();
    let margins: Vec<String> = margins.iter().map(|m| format!("{m:.3}")).collect();
    report(
        8,
        "SGNS sanity",
        within(elapsed, 60.0).and_then(|_| {
            check(
                separated >= 4 && identical,
                format!(
                    "margins [{}], {separated}/5 > 0.2, bit-identical rerun: {identical}, {:.2}s",
                    margins.join(", "),
                    elapsed.as_secs_f64()
                ),
            )
        }),
    );
}

struct Data {
    train: Corpus,
    test: Corpus,
    store: VectorStore,
    dir: PathBuf,
}

fn load_corpus(path: &PathBuf) -> std::result::Result<Corpus, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_conllu(BufReader::new(file), &path.display().to_string())
        .map(|c| c.map_labels(canonical_label))
        .map_err(|e| e.to_string())
}

fn load_data(dir: PathBuf) -> std::result::Result<Data, String> {
    let train = load_corpus(&dir.join("train.conllu"))?;
    let allowed: BTreeSet<String> = ["food", "staff", "ambience"].map(String::from).into();
    let (test, _) = prepare_eval_set(&load_corpus(&dir.join("test.conllu"))?, &allowed).map_err(|e| e.to_string())?;
    let vectors = dir.join("vectors.txt");
    let store = if vectors.exists() {
        let file = File::open(&vectors).map_err(|e| e.to_string())?;
        load_word2vec_text(BufReader::new(file)).map_err(|e| e.to_string())?
    } else {
        let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        sgns::train(
            &train,
            &TrainerConfig {
                workers,
                ..Default::default()
            },
        )
        .map_err(|e| e.to_string())?
    };
    Ok(Data {
        train,
        test,
        store,
        dir,
    })
}

/// `None` when `CAT_ASPECT_DATA` is unset.
fn data() -> Option<&'static std::result::Result<Data, String>> {
    static DATA: OnceLock<Option<std::result::Result<Data, String>>> = OnceLock::new();
    DATA.get_or_init(|| std::env::var_os("CAT_ASPECT_DATA").map(|d| load_data(PathBuf::from(d))))
        .as_ref()
}

const NO_DATA: &str = "CAT_ASPECT_DATA not set";

/// Runs `body` against the real data, or prints SKIP.
fn with_data(id: u32, name: &str, body: impl FnOnce(&Data) -> Outcome) {
    match data() {
        None => skip(id, name, NO_DATA),
        Some(Err(e)) => report(id, name, Err(format!("could not load data: {e}"))),
        Some(Ok(d)) => report(id, name, body(d)),
    }
}

fn experiment(
    d: &Data,
    store: &VectorStore,
    method: Method,
    n: usize,
    candidates: CandidateMode,
) -> std::result::Result<EvaluationReport, String> {
    let config = ExperimentConfig {
        method,
        candidate_count: n,
        candidates,
        ..Default::default()
    };
    run_experiment(&d.train, &d.test, store, &config).map_err(|e| e.to_string())
}

fn points(r: &EvaluationReport) -> f64 {
    100.0 * r.weighted_macro.f1
}

#[test]
fn c09_method_comparison() {
    with_data(9, "CAt / Mean / Attention F", |d| {
        let cat = points(&experiment(d, &d.store, Method::Cat, 200, CandidateMode::Nouns)?);
        let mean = points(&experiment(d, &d.store, Method::Mean, 200, CandidateMode::Nouns)?);
        let att = points(&experiment(d, &d.store, Method::Attention, 980, CandidateMode::Nouns)?);
        let ok = (cat - 86.4).abs() <= 2.0
            && (mean - 77.2).abs() <= 2.0
            && (att - 80.6).abs() <= 2.5
            && mean < att
            && att < cat;
        check(
            ok,
            format!("CAt {cat:.1} (86.4±2), Mean {mean:.1} (77.2±2), Attention {att:.1} (80.6±2.5)"),
        )
    });
}

#[test]
fn c10_per_aspect() {
    with_data(10, "per-aspect CAt F", |d| {
        let r = experiment(d, &d.store, Method::Cat, 200, CandidateMode::Nouns)?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, target) in [("food", 92.1), ("staff", 78.8), ("ambience", 76.6)] {
            let f = r.class(label).map_or(0.0, |c| 100.0 * c.f1);
            ok &= (f - target).abs() <= 3.0;
            parts.push(format!("{label} {f:.1} ({target}±3)"));
        }
        check(ok, parts.join(", "))
    });
}

#[test]
fn c11_ablations() {
    with_data(11, "candidate and embedding ablations", |d| {
        let glove_path = d.dir.join("glove.txt");
        let file = File::open(&glove_path).map_err(|e| format!("{}: {e}", glove_path.display()))?;
        let glove = load_glove_text(BufReader::new(file)).map_err(|e| e.to_string())?;
        let tokens = points(&experiment(d, &d.store, Method::Cat, 200, CandidateMode::Tokens)?);
        let adj = points(&experiment(
            d,
            &d.store,
            Method::Cat,
            200,
            CandidateMode::adj_noun_default(),
        )?);
        let nouns = points(&experiment(d, &d.store, Method::Cat, 200, CandidateMode::Nouns)?);
        let general = points(&experiment(d, &glove, Method::Cat, 200, CandidateMode::Nouns)?);
        check(
            tokens < adj && adj < nouns && nouns - general > 20.0,
            format!("tokens {tokens:.1} < adj-noun {adj:.1} < nouns {nouns:.1}; general-domain vectors {general:.1}"),
        )
    });
}

#[test]
fn c12_learning_curve() {
    with_data(12, "learning-curve saturation", |d| {
        let trainer = TrainerConfig::default();
        let curve = learning_curve_at(
            &d.train,
            &d.test,
            &trainer,
            &ExperimentConfig::default(),
            &[0.6, 1.0],
            5,
        )
        .map_err(|e| e.to_string())?;
        let (at60, at100) = (curve[0].mean_f(), curve[1].mean_f());
        match (at60, at100) {
            (Some(a), Some(b)) => check(
                (100.0 * (a - b)).abs() <= 2.0,
                format!("mean F {:.1} at 60%, {:.1} at 100%", 100.0 * a, 100.0 * b),
            ),
            _ => Err(format!("all seeds failed at some point: {curve:?}")),
        }
    });
}

#[test]
fn c13_throughput() {
    let name = "throughput";
    let (store, train, test, source) = match data() {
        Some(Err(e)) => return report(13, name, Err(format!("could not load data: {e}"))),
        Some(Ok(d)) => (d.store.clone(), d.train.clone(), d.test.clone(), "test set"),
        None => {
            let (store, corpus) = random_domain(20_000, 200, 1_490, 13, 13);
            (
                store,
                corpus.clone(),
                corpus,
                "synthetic 1,490 sentences, d=200 (no data)",
            )
        }
    };
    let start = Instant::now();
    let candidates = top_n_nouns(&train, &store, 200).unwrap();
    let labels = build_label_vectors(&store, &default_label_definitions()).unwrap();
    let pipeline = Pipeline::new(&store, &candidates, &labels, Method::Cat, AttentionConfig::default()).unwrap();
    let labeled = test
        .iter()
        .filter(|s| pipeline.label_sentence(s).unwrap().label.is_some())
        .count();
    let elapsed = start.elapsed();
    report(
        13,
        name,
        within(elapsed, 5.0).map(|_| {
            format!(
                "{} sentences ({labeled} labeled) in {:.3}s single-threaded, {source}",
                test.len(),
                elapsed.as_secs_f64()
            )
        }),
    );
}
