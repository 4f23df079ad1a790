//! Weighted F as a function of embedding training data, several seeds per
//! point. Toy-sized; the real experiment uses millions of tokens.

use cat_aspect::eval::{curve_to_tsv, learning_curve, ExperimentConfig};
use cat_aspect::labeler::{default_label_definitions, LabelDefinition};
use cat_aspect::sgns::TrainerConfig;
use cat_aspect::synthetic::{clustered_domain, ClusterSpec};

fn main() -> cat_aspect::Result<()> {
    let domain = clustered_domain(&ClusterSpec {
        words_per_cluster: 10,
        sentences: 1500,
        ..Default::default()
    });
    let trainer = TrainerConfig {
        dim: 30,
        epochs: 3,
        min_count: 2,
        ..Default::default()
    };
    // Label words never occur in the synthetic text, so query through
    // cluster members instead.
    let labels: Vec<LabelDefinition> = default_label_definitions()
        .into_iter()
        .map(|d| LabelDefinition::with_terms(d.name.clone(), [format!("{}_0", d.name), format!("{}_1", d.name)]))
        .collect();
    let experiment = ExperimentConfig {
        candidate_count: 30,
        labels,
        ..Default::default()
    };
    let curve = learning_curve(&domain.corpus, &domain.corpus, &trainer, &experiment, 5, 3)?;
    print!("{}", curve_to_tsv(&curve));
    Ok(())
}
