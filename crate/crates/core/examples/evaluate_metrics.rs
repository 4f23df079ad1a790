//! Per-class and weighted-macro scores for a handful of predictions.

use cat_aspect::eval::evaluate;

fn main() -> cat_aspect::Result<()> {
    let gold = ["food", "food", "food", "staff", "staff", "ambience"];
    let pred = ["food", "food", "staff", "staff", "food", "ambience"];
    let report = evaluate(&pred, &gold, &["food", "staff", "ambience"])?;
    print!("{}", report.to_text());
    println!("accuracy: {:.4}", report.accuracy());
    println!("confusion (rows gold, columns predicted): {:?}", report.confusion);
    Ok(())
}
