//! Searches candidate count and gamma on a noisy synthetic dev set.

use cat_aspect::candidates::top_n_nouns;
use cat_aspect::eval::{grid_search, GridConfig};
use cat_aspect::labeler::{build_label_vectors, default_label_definitions, Method};
use cat_aspect::synthetic::{clustered_domain, ClusterSpec};

fn main() -> cat_aspect::Result<()> {
    let domain = clustered_domain(&ClusterSpec {
        separation: 3.0,
        spread: 1.5,
        ..Default::default()
    });
    let labels = build_label_vectors(&domain.store, &default_label_definitions())?;
    let pool = top_n_nouns(&domain.corpus, &domain.store, 90)?;
    let grid = GridConfig {
        candidate_counts: vec![10, 30, 90],
        ..GridConfig::default_for(Method::Cat)
    };
    let result = grid_search(&domain.corpus, &domain.store, &pool, &grid, &labels)?;
    print!("{}", result.to_table());
    let best = result.best();
    println!(
        "best: n={} gamma={} f1={:.4}",
        best.candidate_count, best.gamma, best.report.weighted_macro.f1
    );
    Ok(())
}
