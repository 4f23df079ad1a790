//! The three candidate extractors side by side.

use cat_aspect::candidates::{adj_noun_candidates, top_n_nouns, top_n_tokens};
use cat_aspect::synthetic::{clustered_domain, ClusterSpec};

fn main() -> cat_aspect::Result<()> {
    let domain = clustered_domain(&ClusterSpec::default());
    let (corpus, store) = (&domain.corpus, &domain.store);

    let nouns = top_n_nouns(corpus, store, 10)?;
    let tokens = top_n_tokens(corpus, store, 10)?;
    // Filler words precede the nouns here, so they stand in for adjectives.
    let seeds = ["w0", "w1", "w2"].map(String::from).into();
    let adj = adj_noun_candidates(corpus, store, &seeds, 3, 10)?;

    for (name, set) in [("nouns", &nouns), ("tokens", &tokens), ("adj-noun", &adj)] {
        println!("== {name}");
        let mut out = Vec::new();
        set.write_tsv(&mut out)?;
        print!("{}", String::from_utf8_lossy(&out));
    }
    Ok(())
}
