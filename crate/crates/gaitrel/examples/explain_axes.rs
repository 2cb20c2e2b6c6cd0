//! Explain a trained classifier: per-window relevance maps under gradient
//! saliency, epsilon-LRP, and alpha-beta LRP, aggregated into the per-axis
//! relevance table. With a pure amplitude signal planted on AX, the Overall
//! ranking should put AX first for every method; at this small scale the
//! per-gender subgroup rows can be noisier.
//!
//! Run with: cargo run --release --example explain_axes

use gaitrel::cli::preprocess;
use gaitrel::datagen::{generate_dataset, GaitGenConfig};
use gaitrel::nn::{forward, train, DenseNetwork, TrainConfig};
use gaitrel::relevance::{explain, subgroup_relevance, Group, Method};
use gaitrel::signal::{
    apply_normalizer, fit_normalizer, split_dataset, FILTER_WINDOW, WINDOW_LEN,
};
use gaitrel::DatasetSplit;

fn main() {
    // Plant a strong amplitude effect on AX so training converges quickly.
    let cfg = GaitGenConfig {
        n_subjects: 40,
        effect_size: 0.5,
        freq_effect: 0.0,
        seed: 3,
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

    let mut net = DenseNetwork::paper_architecture(3);
    net.norm_stats = stats;
    let train_cfg = TrainConfig {
        batch_size: 16,
        max_epochs: 30,
        patience: 10,
        lr: 1e-3,
        seed: 3,
    };
    let (trained, history) = train(net, &data, &train_cfg).unwrap();
    println!("trained to epoch {} (best)\n", history.best_epoch);

    // One window in detail: decompose its predicted logit with epsilon-LRP.
    // For this bias-free-propagation rule the map sums to the logit.
    let window = &data.test[0];
    let trace = forward(&trained, &window.features).unwrap();
    let target = if trace.logits()[1] > trace.logits()[0] { 1 } else { 0 };
    let map = explain(
        &trained,
        &window.features,
        target,
        Method::LrpEpsilon,
        (&window.subject_id, window.window_index),
    )
    .unwrap();
    println!(
        "window {}/{}: target logit {:.4}, relevance sum {:.4}",
        window.subject_id,
        window.window_index,
        trace.logits()[target],
        map.values.iter().sum::<f64>()
    );

    // The full table: 3 groups x 3 methods, six signed axis scores each.
    let table = subgroup_relevance(&trained, &data.test, &Method::ALL, &Group::ALL).unwrap();
    println!("\n{}", table.to_csv());

    for row in &table.rows {
        let (axis, _) = row
            .scores
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .unwrap();
        println!(
            "{:7} / {:8} -> most influential axis: {}",
            row.group.to_string(),
            row.method.token(),
            gaitrel::signal::CHANNEL_NAMES[axis]
        );
    }
}
