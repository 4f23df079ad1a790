//! Reads labeled CoNLL-U and filters it down to a single-label eval set.

use std::collections::BTreeSet;

use cat_aspect::corpus::{parse_conllu, prepare_eval_set, DiscardReason};

const INPUT: &str = "\
# label = food
1\tThe\tthe\tDET\t_\t_\t_\t_\t_\t_
2\tpasta\tpasta\tNOUN\t_\t_\t_\t_\t_\t_
3\twas\tbe\tAUX\t_\t_\t_\t_\t_\t_
4\tgreat\tgreat\tADJ\t_\t_\t_\t_\t_\t_

# label = food
# label = staff
1\tGood\tgood\tADJ\t_\t_\t_\t_\t_\t_
2\tfood\tfood\tNOUN\t_\t_\t_\t_\t_\t_
3\t,\t,\tPUNCT\t_\t_\t_\t_\t_\t_
4\trude\trude\tADJ\t_\t_\t_\t_\t_\t_
5\twaiter\twaiter\tNOUN\t_\t_\t_\t_\t_\t_

# label = price
1\tCheap\tcheap\tADJ\t_\t_\t_\t_\t_\t_

1\tNo\tno\tDET\t_\t_\t_\t_\t_\t_
2\tlabel\tlabel\tNOUN\t_\t_\t_\t_\t_\t_
";

fn main() -> cat_aspect::Result<()> {
    let corpus = parse_conllu(INPUT.as_bytes(), "inline")?;
    println!("{} sentences, {} tokens", corpus.len(), corpus.token_count());
    for sentence in &corpus {
        let tags: Vec<String> = sentence
            .tokens
            .iter()
            .map(|t| format!("{}/{}", t.norm, t.upos))
            .collect();
        println!("  {:?} {}", sentence.gold_labels, tags.join(" "));
    }

    let allowed: BTreeSet<String> = ["food", "staff", "ambience"].map(String::from).into();
    let (eval_set, report) = prepare_eval_set(&corpus, &allowed)?;
    println!("kept {}", eval_set.len());
    for reason in [
        DiscardReason::NoLabel,
        DiscardReason::MultipleLabels,
        DiscardReason::DisallowedLabel,
    ] {
        println!("discarded ({reason:?}): {}", report.count(reason));
    }
    Ok(())
}
