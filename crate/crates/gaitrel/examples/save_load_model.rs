//! Persist a network to the versioned JSON model format and reload it with
//! bit-exact weights, normalization statistics, and pipeline settings.
//!
//! Run with: cargo run --example save_load_model

use gaitrel::io::{HistorySummary, ModelFile, PipelineConfig};
use gaitrel::nn::{forward, DenseNetwork};
use gaitrel::signal::{FILTER_WINDOW, WINDOW_LEN};

fn main() {
    let net = DenseNetwork::paper_architecture(11);
    let pipeline = PipelineConfig {
        filter_window: FILTER_WINDOW,
        window_len: WINDOW_LEN,
        stride: WINDOW_LEN,
        split_ratios: (0.6, 0.2, 0.2),
        batch_size: 16,
        max_epochs: 200,
        patience: 10,
        lr: 1e-3,
        seed: 11,
    };
    let history = HistorySummary {
        epochs_run: 0,
        best_epoch: 0,
        best_val_loss: None,
        best_val_macro_f1: None,
    };

    let dir = std::env::temp_dir().join("gaitrel-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.json");
    ModelFile::from_network(&net, pipeline, history)
        .save(&path)
        .unwrap();
    println!("saved {} parameters to {}", net.param_count(), path.display());

    let reloaded = ModelFile::load(&path).unwrap().into_network().unwrap();
    let input: Vec<f64> = (0..600).map(|i| (i as f64 * 0.1).sin()).collect();
    let before = forward(&net, &input).unwrap().logits().to_vec();
    let after = forward(&reloaded, &input).unwrap().logits().to_vec();
    println!("logits before save: {before:?}");
    println!("logits after load:  {after:?}");
    assert_eq!(before, after, "round trip must be bit-exact");
    println!("round trip is bit-exact");
}
