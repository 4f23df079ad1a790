//! Per-token attention weights for one sentence, contrastive vs softmax.
//!
//! The filler token `w0` sits near the origin, between all three clusters,
//! so it collects kernel mass from every candidate under `cat`.
//!
//! Run with `cargo run --example contrastive_attention`.

use cat_aspect::attention::{format_weights, AttentionConfig};
use cat_aspect::candidates::top_n_nouns;
use cat_aspect::labeler::{build_label_vectors, default_label_definitions, Method, Pipeline};
use cat_aspect::synthetic::{clustered_domain, ClusterSpec};

fn main() -> cat_aspect::Result<()> {
    let domain = clustered_domain(&ClusterSpec {
        separation: 4.0,
        ..Default::default()
    });
    let candidates = top_n_nouns(&domain.corpus, &domain.store, 60)?;
    let labels = build_label_vectors(&domain.store, &default_label_definitions())?;
    let sentence = &domain.corpus.sentences[0];
    println!("sentence: {}\ngold: {:?}\n", sentence.text(), sentence.gold_label());

    for method in [Method::Cat, Method::Attention, Method::Mean] {
        let pipeline = Pipeline::new(&domain.store, &candidates, &labels, method, AttentionConfig::default())?;
        let result = pipeline.label_sentence(sentence)?;
        println!("== {method} -> {:?}", result.label);
        if let Some(attention) = &result.attention {
            print!("{}", format_weights(sentence, attention));
        }
        println!();
    }
    Ok(())
}
