//! Signal preprocessing: smoothing, window extraction, feature stacking,
//! normalization, and subject-disjoint dataset splitting.
//!
//! Feature layout is fixed: a window of 100 samples per channel is stacked in
//! channel order GX, GY, GZ, AX, AY, AZ into a single 600-dimensional vector.

use crate::error::{GaitError, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Samples per second for all recordings.
pub const SAMPLE_RATE_HZ: u32 = 100;
/// Samples per extracted window (1 second).
pub const WINDOW_LEN: usize = 100;
/// Number of sensor channels.
pub const NUM_CHANNELS: usize = 6;
/// Stacked feature vector length.
pub const FEATURE_LEN: usize = WINDOW_LEN * NUM_CHANNELS;
/// Smoothing filter width used by the standard pipeline.
pub const FILTER_WINDOW: usize = 10;

/// Canonical channel order for stacking and reporting.
pub const CHANNEL_NAMES: [&str; NUM_CHANNELS] = ["GX", "GY", "GZ", "AX", "AY", "AZ"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "F")]
    Female,
    #[serde(rename = "M")]
    Male,
}

impl Gender {
    /// Class index used by the classifier head (Female = 0, Male = 1).
    pub fn class_index(self) -> usize {
        match self {
            Gender::Female => 0,
            Gender::Male => 1,
        }
    }

    pub fn from_class_index(idx: usize) -> Result<Self> {
        match idx {
            0 => Ok(Gender::Female),
            1 => Ok(Gender::Male),
            other => Err(GaitError::invalid(format!("class index {other} out of range"))),
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Gender::Female => "F",
            Gender::Male => "M",
        }
    }
}

/// One subject's 6-channel IMU capture at 100 Hz.
///
/// Channels are ordered GX, GY, GZ (gyroscope, rad/s) then AX, AY, AZ
/// (accelerometer, g). The order is fixed and never permuted.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesRecording {
    pub subject_id: String,
    pub gender: Gender,
    pub sample_rate: u32,
    pub channels: [Vec<f64>; NUM_CHANNELS],
}

impl TimeSeriesRecording {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate != SAMPLE_RATE_HZ {
            return Err(GaitError::invalid(format!(
                "sample rate must be {SAMPLE_RATE_HZ} Hz, got {}",
                self.sample_rate
            )));
        }
        let len = self.channels[0].len();
        if self.channels.iter().any(|c| c.len() != len) {
            return Err(GaitError::invalid("channels have unequal lengths"));
        }
        if len < WINDOW_LEN {
            return Err(GaitError::invalid(format!(
                "recording shorter than one window ({len} < {WINDOW_LEN} samples)"
            )));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.channels[0].len()
    }
}

/// A 600-dimensional stacked feature vector with label and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureWindow {
    pub subject_id: String,
    pub gender: Gender,
    pub window_index: usize,
    pub features: Vec<f64>,
}

/// Per-feature mean and standard deviation fit on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    /// Identity statistics (mean 0, std 1) for a given dimensionality.
    pub fn identity(dim: usize) -> Self {
        NormStats {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }
}

/// Subject-disjoint train/validation/test partition of windows.
#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<FeatureWindow>,
    pub validation: Vec<FeatureWindow>,
    pub test: Vec<FeatureWindow>,
}

impl DatasetSplit {
    pub fn part(&self, name: &str) -> Result<&[FeatureWindow]> {
        match name {
            "train" => Ok(&self.train),
            "validation" => Ok(&self.validation),
            "test" => Ok(&self.test),
            other => Err(GaitError::Usage(format!("unknown dataset part '{other}'"))),
        }
    }
}

/// Trailing moving average with an expanding warm-up.
///
/// `out[i]` is the mean of `series[max(0, i-window+1) ..= i]`, so the output
/// has the same length as the input and uses no future samples.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(GaitError::invalid("moving_average: empty series"));
    }
    if window == 0 {
        return Err(GaitError::invalid("moving_average: window must be >= 1"));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for i in 0..series.len() {
        sum += series[i];
        if i >= window {
            sum -= series[i - window];
        }
        let n = (i + 1).min(window);
        out.push(sum / n as f64);
    }
    Ok(out)
}

/// Stacks six 100-sample channel slices into one 600-feature vector.
///
/// Index ranges per axis: GX 0-99, GY 100-199, GZ 200-299, AX 300-399,
/// AY 400-499, AZ 500-599.
pub fn stack_features(slices: &[&[f64]]) -> Result<Vec<f64>> {
    if slices.len() != NUM_CHANNELS {
        return Err(GaitError::invalid(format!(
            "stack_features: expected {NUM_CHANNELS} slices, got {}",
            slices.len()
        )));
    }
    let mut features = Vec::with_capacity(FEATURE_LEN);
    for slice in slices {
        if slice.len() != WINDOW_LEN {
            return Err(GaitError::invalid(format!(
                "stack_features: slice length {} != {WINDOW_LEN}",
                slice.len()
            )));
        }
        features.extend_from_slice(slice);
    }
    Ok(features)
}

/// Extracts non-overlapping (by default) windows and stacks each into a
/// FeatureWindow. A trailing partial window is discarded; a recording shorter
/// than `window_len` yields an empty list.
pub fn segment_windows(
    recording: &TimeSeriesRecording,
    window_len: usize,
    stride: usize,
) -> Result<Vec<FeatureWindow>> {
    if stride == 0 {
        return Err(GaitError::invalid("segment_windows: stride must be >= 1"));
    }
    if window_len == 0 {
        return Err(GaitError::invalid("segment_windows: window_len must be >= 1"));
    }
    let n = recording.num_samples();
    let mut windows = Vec::new();
    let mut start = 0usize;
    let mut index = 0usize;
    while start + window_len <= n {
        let slices: Vec<&[f64]> = recording
            .channels
            .iter()
            .map(|c| &c[start..start + window_len])
            .collect();
        let features = stack_features(&slices)?;
        windows.push(FeatureWindow {
            subject_id: recording.subject_id.clone(),
            gender: recording.gender,
            window_index: index,
            features,
        });
        start += stride;
        index += 1;
    }
    Ok(windows)
}

/// Fits per-feature mean and population standard deviation on training
/// windows. Zero-variance features get std 1.0 so normalization stays finite.
pub fn fit_normalizer(train_windows: &[FeatureWindow]) -> Result<NormStats> {
    if train_windows.len() < 2 {
        return Err(GaitError::invalid(
            "fit_normalizer: need at least 2 training windows",
        ));
    }
    let dim = train_windows[0].features.len();
    let n = train_windows.len() as f64;
    let mut mean = vec![0.0; dim];
    for w in train_windows {
        if w.features.len() != dim {
            return Err(GaitError::invalid("fit_normalizer: inconsistent feature length"));
        }
        for (m, x) in mean.iter_mut().zip(&w.features) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; dim];
    for w in train_windows {
        for ((v, x), m) in var.iter_mut().zip(&w.features).zip(&mean) {
            let d = x - m;
            *v += d * d;
        }
    }
    let std = var
        .into_iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s < 1e-12 {
                1.0
            } else {
                s
            }
        })
        .collect();
    Ok(NormStats { mean, std })
}

/// Applies `(x - mean) / std` per feature; label and provenance unchanged.
pub fn apply_normalizer(stats: &NormStats, window: &FeatureWindow) -> Result<FeatureWindow> {
    if stats.mean.len() != window.features.len() || stats.std.len() != window.features.len() {
        return Err(GaitError::invalid(format!(
            "apply_normalizer: stats dimension {} != window dimension {}",
            stats.mean.len(),
            window.features.len()
        )));
    }
    let features = window
        .features
        .iter()
        .zip(stats.mean.iter().zip(&stats.std))
        .map(|(x, (m, s))| (x - m) / s)
        .collect();
    Ok(FeatureWindow {
        subject_id: window.subject_id.clone(),
        gender: window.gender,
        window_index: window.window_index,
        features,
    })
}

/// Splits windows into train/validation/test by subject, not by window.
///
/// Subjects (in order of first appearance) are shuffled with a seeded RNG and
/// partitioned by cumulative ratio over subject count, so the partition is
/// subject-disjoint and deterministic for a fixed seed.
pub fn split_dataset(
    windows: &[FeatureWindow],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<DatasetSplit> {
    let (r1, r2, r3) = ratios;
    if r1 <= 0.0 || r2 <= 0.0 || r3 <= 0.0 || (r1 + r2 + r3 - 1.0).abs() > 1e-9 {
        return Err(GaitError::invalid(format!(
            "split_dataset: ratios must be positive and sum to 1, got ({r1}, {r2}, {r3})"
        )));
    }
    let mut subjects: Vec<&str> = Vec::new();
    for w in windows {
        if !subjects.contains(&w.subject_id.as_str()) {
            subjects.push(&w.subject_id);
        }
    }
    if subjects.len() < 3 {
        return Err(GaitError::invalid(format!(
            "split_dataset: need at least 3 distinct subjects, got {}",
            subjects.len()
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    subjects.shuffle(&mut rng);

    let n = subjects.len();
    let mut cut1 = (n as f64 * r1).round() as usize;
    let mut cut2 = (n as f64 * (r1 + r2)).round() as usize;
    // Every part must be non-empty.
    cut1 = cut1.clamp(1, n - 2);
    cut2 = cut2.clamp(cut1 + 1, n - 1);

    let train_set: Vec<&str> = subjects[..cut1].to_vec();
    let val_set: Vec<&str> = subjects[cut1..cut2].to_vec();

    let mut split = DatasetSplit::default();
    for w in windows {
        let id = w.subject_id.as_str();
        if train_set.contains(&id) {
            split.train.push(w.clone());
        } else if val_set.contains(&id) {
            split.validation.push(w.clone());
        } else {
            split.test.push(w.clone());
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(subject: &str, gender: Gender, index: usize, features: Vec<f64>) -> FeatureWindow {
        FeatureWindow {
            subject_id: subject.to_string(),
            gender,
            window_index: index,
            features,
        }
    }

    fn recording(subject: &str, gender: Gender, len: usize) -> TimeSeriesRecording {
        let channels = std::array::from_fn(|c| (0..len).map(|i| (c * len + i) as f64).collect());
        TimeSeriesRecording {
            subject_id: subject.to_string(),
            gender,
            sample_rate: SAMPLE_RATE_HZ,
            channels,
        }
    }

    #[test]
    fn moving_average_constant_signal_is_fixed_point() {
        let out = moving_average(&[5.0, 5.0, 5.0, 5.0], 10).unwrap();
        assert_eq!(out, vec![5.0, 5.0, 5.0, 5.0]);
    }

    #[test]
    fn moving_average_hand_computed() {
        let out = moving_average(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(out, vec![1.0, 1.5, 2.5, 3.5]);
    }

    #[test]
    fn moving_average_warmup_prefix_means() {
        let out = moving_average(&[0.0, 10.0], 10).unwrap();
        assert_eq!(out, vec![0.0, 5.0]);
    }

    #[test]
    fn moving_average_window_one_is_identity() {
        let series = [3.0, -1.0, 7.5, 0.25];
        assert_eq!(moving_average(&series, 1).unwrap(), series);
    }

    #[test]
    fn moving_average_rejects_bad_input() {
        assert!(moving_average(&[], 3).is_err());
        assert!(moving_average(&[1.0], 0).is_err());
    }

    #[test]
    fn segment_windows_counts() {
        let rec = recording("s1", Gender::Female, 250);
        assert_eq!(segment_windows(&rec, 100, 100).unwrap().len(), 2);
        let rec = recording("s1", Gender::Female, 100);
        assert_eq!(segment_windows(&rec, 100, 100).unwrap().len(), 1);
        let rec = recording("s1", Gender::Female, 99);
        assert_eq!(segment_windows(&rec, 100, 100).unwrap().len(), 0);
    }

    #[test]
    fn segment_windows_offsets_reconstruct_samples() {
        let rec = recording("s1", Gender::Male, 250);
        let windows = segment_windows(&rec, 100, 100).unwrap();
        for (k, w) in windows.iter().enumerate() {
            for (c, _) in CHANNEL_NAMES.iter().enumerate() {
                for i in 0..WINDOW_LEN {
                    assert_eq!(w.features[c * WINDOW_LEN + i], rec.channels[c][k * 100 + i]);
                }
            }
        }
    }

    #[test]
    fn stack_features_layout() {
        let ones = [1.0; WINDOW_LEN];
        let zeros = [0.0; WINDOW_LEN];
        let gx_only = stack_features(&[&ones, &zeros, &zeros, &zeros, &zeros, &zeros]).unwrap();
        assert!(gx_only[..100].iter().all(|&x| x == 1.0));
        assert!(gx_only[100..].iter().all(|&x| x == 0.0));

        let ax_only = stack_features(&[&zeros, &zeros, &zeros, &ones, &zeros, &zeros]).unwrap();
        assert!(ax_only[300..400].iter().all(|&x| x == 1.0));
        assert!(ax_only[..300].iter().all(|&x| x == 0.0));
        assert!(ax_only[400..].iter().all(|&x| x == 0.0));
        assert_eq!(ax_only.len(), FEATURE_LEN);
    }

    #[test]
    fn stack_features_rejects_bad_shapes() {
        let ones = [1.0; WINDOW_LEN];
        assert!(stack_features(&[&ones, &ones]).is_err());
        let short = [1.0; 50];
        assert!(stack_features(&[&short, &ones, &ones, &ones, &ones, &ones]).is_err());
    }

    #[test]
    fn fit_normalizer_two_point_std() {
        let a = window("a", Gender::Female, 0, vec![0.0, 4.0]);
        let b = window("a", Gender::Female, 1, vec![2.0, 4.0]);
        let stats = fit_normalizer(&[a, b]).unwrap();
        assert_eq!(stats.mean[0], 1.0);
        assert_eq!(stats.std[0], 1.0);
        // Constant column: zero-variance guard.
        assert_eq!(stats.mean[1], 4.0);
        assert_eq!(stats.std[1], 1.0);
    }

    #[test]
    fn fit_normalizer_rejects_single_window() {
        let a = window("a", Gender::Female, 0, vec![0.0]);
        assert!(fit_normalizer(&[a]).is_err());
    }

    #[test]
    fn normalized_training_set_has_zero_mean_unit_std() {
        let windows: Vec<FeatureWindow> = (0..7)
            .map(|i| {
                window(
                    "s",
                    Gender::Male,
                    i,
                    vec![i as f64, 2.0 * i as f64 - 3.0, 0.5],
                )
            })
            .collect();
        let stats = fit_normalizer(&windows).unwrap();
        let normalized: Vec<FeatureWindow> = windows
            .iter()
            .map(|w| apply_normalizer(&stats, w).unwrap())
            .collect();
        let n = normalized.len() as f64;
        for j in 0..2 {
            let mean: f64 = normalized.iter().map(|w| w.features[j]).sum::<f64>() / n;
            let var: f64 = normalized
                .iter()
                .map(|w| (w.features[j] - mean).powi(2))
                .sum::<f64>()
                / n;
            assert!(mean.abs() < 1e-9, "feature {j} mean {mean}");
            assert!((var.sqrt() - 1.0).abs() < 1e-9, "feature {j} std {}", var.sqrt());
        }
        // Guarded constant column passes through shifted by its mean.
        assert!(normalized.iter().all(|w| w.features[2] == 0.0));
    }

    #[test]
    fn apply_normalizer_arithmetic() {
        let stats = NormStats {
            mean: vec![1.0],
            std: vec![2.0],
        };
        let w = window("a", Gender::Female, 0, vec![3.0]);
        let out = apply_normalizer(&stats, &w).unwrap();
        assert_eq!(out.features[0], 1.0);
        assert_eq!(out.subject_id, "a");
        assert_eq!(out.window_index, 0);
    }

    #[test]
    fn apply_normalizer_identity_stats() {
        let stats = NormStats::identity(3);
        let w = window("a", Gender::Male, 2, vec![3.0, -1.0, 0.0]);
        assert_eq!(apply_normalizer(&stats, &w).unwrap().features, w.features);
    }

    fn toy_windows(n_subjects: usize, windows_each: usize) -> Vec<FeatureWindow> {
        let mut out = Vec::new();
        for s in 0..n_subjects {
            let gender = if s % 2 == 0 { Gender::Female } else { Gender::Male };
            for i in 0..windows_each {
                out.push(window(&format!("S{s:03}"), gender, i, vec![s as f64, i as f64]));
            }
        }
        out
    }

    #[test]
    fn split_exact_ratio_subject_counts() {
        let windows = toy_windows(10, 3);
        let split = split_dataset(&windows, (0.6, 0.2, 0.2), 42).unwrap();
        let subjects = |part: &[FeatureWindow]| {
            let mut ids: Vec<&str> = part.iter().map(|w| w.subject_id.as_str()).collect();
            ids.sort();
            ids.dedup();
            ids.len()
        };
        assert_eq!(subjects(&split.train), 6);
        assert_eq!(subjects(&split.validation), 2);
        assert_eq!(subjects(&split.test), 2);
    }

    #[test]
    fn split_deterministic_and_disjoint() {
        let windows = toy_windows(9, 2);
        for seed in [0u64, 1, 7, 99] {
            let a = split_dataset(&windows, (0.6, 0.2, 0.2), seed).unwrap();
            let b = split_dataset(&windows, (0.6, 0.2, 0.2), seed).unwrap();
            assert_eq!(a.train, b.train);
            assert_eq!(a.validation, b.validation);
            assert_eq!(a.test, b.test);

            let ids = |part: &[FeatureWindow]| {
                part.iter()
                    .map(|w| w.subject_id.clone())
                    .collect::<std::collections::HashSet<_>>()
            };
            let (t, v, e) = (ids(&a.train), ids(&a.validation), ids(&a.test));
            assert!(t.is_disjoint(&v) && t.is_disjoint(&e) && v.is_disjoint(&e));

            // Union preserves all windows (multiset equality on provenance).
            let mut all: Vec<(String, usize)> = a
                .train
                .iter()
                .chain(&a.validation)
                .chain(&a.test)
                .map(|w| (w.subject_id.clone(), w.window_index))
                .collect();
            all.sort();
            let mut expected: Vec<(String, usize)> = windows
                .iter()
                .map(|w| (w.subject_id.clone(), w.window_index))
                .collect();
            expected.sort();
            assert_eq!(all, expected);
        }
    }

    #[test]
    fn split_rejects_degenerate_input() {
        let windows = toy_windows(2, 2);
        assert!(split_dataset(&windows, (0.6, 0.2, 0.2), 1).is_err());
        let windows = toy_windows(5, 2);
        assert!(split_dataset(&windows, (0.5, 0.5, 0.5), 1).is_err());
        assert!(split_dataset(&windows, (1.0, 0.0, 0.0), 1).is_err());
    }
}
