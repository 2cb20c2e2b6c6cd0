//! Turn raw recordings into normalized, subject-disjoint feature windows:
//! moving-average smoothing, 1-second windowing, channel stacking, and
//! train-statistics normalization.
//!
//! Run with: cargo run --example preprocess_windows

use gaitrel::cli::preprocess;
use gaitrel::datagen::{generate_dataset, GaitGenConfig};
use gaitrel::signal::{
    apply_normalizer, fit_normalizer, split_dataset, FILTER_WINDOW, WINDOW_LEN,
};

fn main() {
    let cfg = GaitGenConfig {
        n_subjects: 10,
        seed: 7,
        ..GaitGenConfig::default()
    };
    let recordings = generate_dataset(&cfg).expect("valid config");

    // Smooth each channel (trailing window of 10 samples) and cut
    // non-overlapping 100-sample windows stacked as GX|GY|GZ|AX|AY|AZ.
    let windows = preprocess(&recordings, FILTER_WINDOW, WINDOW_LEN, WINDOW_LEN).unwrap();
    println!(
        "{} windows of {} features from {} recordings",
        windows.len(),
        windows[0].features.len(),
        recordings.len()
    );

    // Subject-disjoint 60/20/20 split: no subject appears in two parts.
    let split = split_dataset(&windows, (0.6, 0.2, 0.2), cfg.seed).unwrap();
    println!(
        "split: {} train / {} validation / {} test windows",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );
    let subjects = |part: &[gaitrel::FeatureWindow]| {
        let mut ids: Vec<&str> = part.iter().map(|w| w.subject_id.as_str()).collect();
        ids.dedup();
        ids.join(",")
    };
    println!("train subjects:      {}", subjects(&split.train));
    println!("validation subjects: {}", subjects(&split.validation));
    println!("test subjects:       {}", subjects(&split.test));

    // Normalization statistics come from the training part only.
    let stats = fit_normalizer(&split.train).unwrap();
    let normalized = apply_normalizer(&stats, &split.train[0]).unwrap();
    let mean: f64 =
        normalized.features.iter().sum::<f64>() / normalized.features.len() as f64;
    println!("first normalized window: mean {mean:.4} (near 0 by construction)");
}
