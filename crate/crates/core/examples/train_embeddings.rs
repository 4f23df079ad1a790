//! Trains skip-gram vectors on a two-topic toy corpus and shows that words
//! of the same topic end up close together.

use cat_aspect::sgns::{train_with_stats, TrainerConfig};
use cat_aspect::synthetic::two_topic_corpus;

fn cosine(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.dot(&b) / (a.dot(&a).sqrt() * b.dot(&b).sqrt())
}

fn main() -> cat_aspect::Result<()> {
    let corpus = two_topic_corpus(5000, 8, 11);
    let config = TrainerConfig {
        dim: 50,
        epochs: 3,
        ..Default::default()
    };
    let (store, stats) = train_with_stats(&corpus, &config)?;
    for (epoch, objective) in stats.epoch_objective.iter().enumerate() {
        println!("epoch {}: mean objective {objective:.4}", epoch + 1);
    }
    let v = |w: &str| store.lookup(w).expect("in vocabulary");
    println!("cos(a1, a2) = {:.3}", cosine(v("a1"), v("a2")));
    println!("cos(b1, b2) = {:.3}", cosine(v("b1"), v("b2")));
    println!("cos(a1, b1) = {:.3}", cosine(v("a1"), v("b1")));
    Ok(())
}
