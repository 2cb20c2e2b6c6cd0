//! Compute precision, recall, per-class F1, and macro-F1 from raw 2x2
//! confusion matrices, including the degenerate zero-denominator case.
//!
//! Run with: cargo run --example metrics_report

use gaitrel::{ConfusionMatrix2, EvalReport};

fn show(label: &str, counts: [[u64; 2]; 2]) {
    let report = EvalReport::from_matrix(ConfusionMatrix2::new(counts));
    println!("{label}: counts {counts:?}");
    println!("{}\n", report.to_json());
}

fn main() {
    // Rows are true Female/Male, columns predicted Female/Male.
    show("balanced validation run", [[191, 43], [56, 193]]);
    show("larger test run", [[319, 102], [100, 330]]);

    // A classifier that never predicts Female: the Female precision
    // denominator is zero, so the report flags itself as degenerate.
    show("degenerate all-Male predictor", [[0, 120], [0, 130]]);
}
