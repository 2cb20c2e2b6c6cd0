//! Train the 600-500-250-50-20-4-2 dense classifier on a synthetic dataset
//! with a planted amplitude signal, with early stopping on validation loss.
//!
//! Run with: cargo run --release --example train_classifier

use gaitrel::cli::preprocess;
use gaitrel::datagen::{generate_dataset, GaitGenConfig};
use gaitrel::nn::{evaluate, train, DenseNetwork, TrainConfig};
use gaitrel::signal::{
    apply_normalizer, fit_normalizer, split_dataset, FILTER_WINDOW, WINDOW_LEN,
};
use gaitrel::DatasetSplit;

fn main() {
    let cfg = GaitGenConfig {
        n_subjects: 60,
        effect_size: 0.3,
        freq_effect: 0.0,
        seed: 7,
        ..GaitGenConfig::default()
    };
    let recordings = generate_dataset(&cfg).expect("valid config");
    let windows = preprocess(&recordings, FILTER_WINDOW, WINDOW_LEN, WINDOW_LEN).unwrap();
    let split = split_dataset(&windows, (0.6, 0.2, 0.2), cfg.seed).unwrap();

    let stats = fit_normalizer(&split.train).unwrap();
    let normalize = |part: &[gaitrel::FeatureWindow]| {
        part.iter()
            .map(|w| apply_normalizer(&stats, w).unwrap())
            .collect::<Vec<_>>()
    };
    let data = DatasetSplit {
        train: normalize(&split.train),
        validation: normalize(&split.validation),
        test: normalize(&split.test),
    };

    let mut net = DenseNetwork::paper_architecture(7);
    net.norm_stats = stats;
    println!("{} trainable parameters", net.param_count());

    let train_cfg = TrainConfig {
        batch_size: 16,
        max_epochs: 40,
        patience: 10,
        lr: 1e-3,
        seed: 7,
    };
    let (trained, history) = train(net, &data, &train_cfg).unwrap();
    for e in &history.epochs {
        println!(
            "epoch {:2}: train loss {:.4}  val loss {:.4}  val macro-F1 {:.3}",
            e.epoch, e.train_loss, e.val_loss, e.val_macro_f1
        );
    }
    println!("best epoch: {} (weights restored)", history.best_epoch);

    let report = evaluate(&trained, &data.test).unwrap();
    println!("test report:\n{}", report.to_json());
}
