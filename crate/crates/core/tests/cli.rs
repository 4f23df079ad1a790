use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cat_aspect::corpus::write_conllu;
use cat_aspect::embeddings::save_word2vec_text;
use cat_aspect::synthetic::{clustered_domain, two_topic_corpus, ClusterSpec};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cat-aspect"));
    cmd.env_remove("CAT_ASPECT_CONFIG");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Fixture {
    dir: TempDir,
    vectors: PathBuf,
    corpus: PathBuf,
    sentences: usize,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let domain = clustered_domain(&ClusterSpec {
            dim: 8,
            words_per_cluster: 6,
            sentences: 30,
            ..Default::default()
        });
        let vectors = dir.path().join("vectors.txt");
        save_word2vec_text(&domain.store, fs::File::create(&vectors).unwrap()).unwrap();
        let corpus = dir.path().join("reviews.conllu");
        write_conllu(&domain.corpus, fs::File::create(&corpus).unwrap()).unwrap();
        Fixture {
            dir,
            vectors,
            corpus,
            sentences: domain.corpus.len(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn strip_timestamp(manifest: &str) -> String {
    manifest
        .lines()
        .filter(|l| !l.contains("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn two_topic_text(dir: &Path) -> PathBuf {
    let corpus = two_topic_corpus(300, 6, 4);
    let text: String = corpus.iter().map(|s| s.text() + "\n").collect();
    let path = dir.join("topics.txt");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn train_embeddings_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let corpus = two_topic_text(dir.path());
    let mut artifacts = Vec::new();
    for name in ["a.txt", "b.txt"] {
        let out = dir.path().join(name);
        let res = run(&[
            "train-embeddings",
            "--corpus",
            s(&corpus),
            "--output",
            s(&out),
            "--dim",
            "10",
            "--seed",
            "1",
            "--workers",
            "1",
            "--epochs",
            "2",
        ]);
        assert!(res.status.success(), "{}", stderr(&res));
        let manifest = fs::read_to_string(dir.path().join(format!("{name}.manifest.json"))).unwrap();
        artifacts.push((fs::read(&out).unwrap(), strip_timestamp(&manifest)));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0);
    assert_eq!(artifacts[0].1, artifacts[1].1);
    let header = String::from_utf8_lossy(&artifacts[0].0)
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "10 10");
    assert!(artifacts[0].1.contains("\"sha256\""));
    assert!(artifacts[0].1.contains("\"dim\": \"10\""));
}

#[test]
fn missing_input_is_data_error() {
    let dir = TempDir::new().unwrap();
    let res = run(&[
        "train-embeddings",
        "--corpus",
        "/nonexistent/corpus.txt",
        "--output",
        s(&dir.path().join("v.txt")),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("nonexistent"));
}

#[test]
fn zero_dim_is_rejected_before_work() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.txt");
    let res = run(&[
        "train-embeddings",
        "--corpus",
        "/nonexistent/corpus.txt",
        "--output",
        s(&out),
        "--dim",
        "0",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("dim"));
    assert!(!out.exists());
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(run(&["label", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn label_writes_one_record_per_sentence() {
    let fx = Fixture::new();
    let out = fx.path("pred.jsonl");
    let res = run(&[
        "label",
        "--vectors",
        s(&fx.vectors),
        "--corpus",
        s(&fx.corpus),
        "--method",
        "cat",
        "--gamma",
        "0.03",
        "--top-n",
        "200",
        "--show-attention",
        "--output",
        s(&out),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), fx.sentences);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["text", "gold", "predicted", "similarities", "weights"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    let manifest = fs::read_to_string(fx.path("pred.jsonl.manifest.json")).unwrap();
    assert!(manifest.contains("\"gamma\": \"0.03\""));
    assert!(manifest.contains("\"top-n\": \"200\""));
}

#[test]
fn label_mean_warns_about_gamma() {
    let fx = Fixture::new();
    let res = run(&[
        "label",
        "--vectors",
        s(&fx.vectors),
        "--corpus",
        s(&fx.corpus),
        "--method",
        "mean",
        "--gamma",
        "0.5",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert!(stderr(&res).contains("ignored"));
    assert_eq!(stdout(&res).lines().count(), fx.sentences);
    assert!(!stdout(&res).contains("weights"));
}

#[test]
fn label_with_oov_label_fails_naming_it() {
    let fx = Fixture::new();
    let res = run(&[
        "label",
        "--vectors",
        s(&fx.vectors),
        "--corpus",
        s(&fx.corpus),
        "--label",
        "zzzz",
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("zzzz"));
}

#[test]
fn evaluate_perfect_predictions() {
    let fx = Fixture::new();
    let preds = fx.path("perfect.jsonl");
    let lines = [
        r#"{"text":"a","gold":"food","predicted":"food","similarities":{}}"#,
        r#"{"text":"b","gold":"service","predicted":"staff","similarities":{}}"#,
        r#"{"text":"c","gold":"ambience","predicted":"ambience","similarities":{}}"#,
        r#"{"text":"d","gold":"price","predicted":"food","similarities":{}}"#,
    ];
    fs::write(&preds, lines.join("\n")).unwrap();
    let json = fx.path("report.json");
    let res = run(&["evaluate", "--predictions", s(&preds), "--json", s(&json)]);
    assert!(res.status.success(), "{}", stderr(&res));
    let weighted = stdout(&res)
        .lines()
        .find(|l| l.starts_with("weighted"))
        .unwrap()
        .to_string();
    assert!(weighted.contains("1.0000"), "{weighted}");
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["evaluated"], 3);
}

#[test]
fn evaluate_empty_set_fails() {
    let fx = Fixture::new();
    let preds = fx.path("none.jsonl");
    fs::write(
        &preds,
        r#"{"text":"a","gold":null,"predicted":"food","similarities":{}}"#,
    )
    .unwrap();
    assert_eq!(run(&["evaluate", "--predictions", s(&preds)]).status.code(), Some(2));
}

#[test]
fn label_then_evaluate_round_trip() {
    let fx = Fixture::new();
    let preds = fx.path("pred.jsonl");
    let res = run(&[
        "label",
        "--vectors",
        s(&fx.vectors),
        "--corpus",
        s(&fx.corpus),
        "--output",
        s(&preds),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let res = run(&["evaluate", "--predictions", s(&preds)]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert!(stdout(&res).contains("weighted"));
}

#[test]
fn grid_with_one_cell_reports_it() {
    let fx = Fixture::new();
    let res = run(&[
        "grid-search",
        "--vectors",
        s(&fx.vectors),
        "--dev",
        s(&fx.corpus),
        "--top-n",
        "5",
        "--gammas",
        "0.1",
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let out = stdout(&res);
    assert_eq!(out.lines().count(), 3, "{out}");
    assert!(out.contains("best\tn=5\tgamma=0.1000"), "{out}");
}

#[test]
fn learning_curve_single_point() {
    let fx = Fixture::new();
    let tsv = fx.path("curve.tsv");
    let res = run(&[
        "learning-curve",
        "--train",
        s(&fx.corpus),
        "--eval",
        s(&fx.corpus),
        "--increments",
        "1",
        "--seeds",
        "1",
        "--dim",
        "8",
        "--min-count",
        "1",
        "--epochs",
        "1",
        "--top-n",
        "10",
        "--output",
        s(&tsv),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    let text = fs::read_to_string(&tsv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert_eq!(lines[0], "fraction\tmean_f\tstd_f");
    assert!(lines[1].starts_with("1.0000\t"));
}

#[test]
fn config_file_from_environment_with_flag_override() {
    let fx = Fixture::new();
    let config = fx.path("cat.conf");
    fs::write(&config, "method = mean\ntop-n = 7\n").unwrap();
    let out = fx.path("cands.tsv");
    let res = bin()
        .env("CAT_ASPECT_CONFIG", &config)
        .args([
            "extract-candidates",
            "--corpus",
            s(&fx.corpus),
            "--vectors",
            s(&fx.vectors),
            "--output",
            s(&out),
        ])
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 7);

    let res = bin()
        .env("CAT_ASPECT_CONFIG", &config)
        .args([
            "extract-candidates",
            "--corpus",
            s(&fx.corpus),
            "--vectors",
            s(&fx.vectors),
            "--output",
            s(&out),
            "--top-n",
            "3",
        ])
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 3);
}

#[test]
fn label_accepts_precomputed_candidates() {
    let fx = Fixture::new();
    let cands = fx.path("cands.tsv");
    let res = run(&[
        "extract-candidates",
        "--corpus",
        s(&fx.corpus),
        "--vectors",
        s(&fx.vectors),
        "--candidate-mode",
        "adj-noun",
        "--seed-adjectives",
        "w1,w2,w3",
        "--output",
        s(&cands),
    ]);
    // filler words are DET-tagged, so they serve as "adjectives" before nouns here
    assert!(res.status.success(), "{}", stderr(&res));
    let res = run(&[
        "label",
        "--vectors",
        s(&fx.vectors),
        "--corpus",
        s(&fx.corpus),
        "--candidates",
        s(&cands),
    ]);
    assert!(res.status.success(), "{}", stderr(&res));
    assert_eq!(stdout(&res).lines().count(), fx.sentences);
}
