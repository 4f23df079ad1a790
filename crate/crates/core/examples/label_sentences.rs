//! Labels a corpus and prints JSON-lines predictions, as `cat-aspect label`
//! does.

use cat_aspect::attention::AttentionConfig;
use cat_aspect::candidates::top_n_nouns;
use cat_aspect::labeler::{build_label_vectors, default_label_definitions, Method, Pipeline, PredictionRecord};
use cat_aspect::synthetic::{clustered_domain, ClusterSpec};

fn main() -> cat_aspect::Result<()> {
    let domain = clustered_domain(&ClusterSpec {
        sentences: 8,
        ..Default::default()
    });
    let candidates = top_n_nouns(&domain.corpus, &domain.store, 200)?;
    let labels = build_label_vectors(&domain.store, &default_label_definitions())?;
    let pipeline = Pipeline::new(
        &domain.store,
        &candidates,
        &labels,
        Method::Cat,
        AttentionConfig::default(),
    )?;

    let results = pipeline.label_corpus(&domain.corpus)?;
    for (sentence, result) in domain.corpus.iter().zip(&results) {
        let record = PredictionRecord::new(sentence, result, &labels, false);
        println!("{}", serde_json::to_string(&record).expect("serializable"));
    }
    Ok(())
}
