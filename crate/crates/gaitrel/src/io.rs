//! File formats: recording CSV + sidecar metadata JSON, windowed-dataset
//! JSONL, and the versioned JSON model file.
//!
//! Floats are written with Rust's shortest round-trip formatting, so saving
//! and reloading reproduces every f64 bit-exactly and reruns with identical
//! inputs produce byte-identical files.

use crate::error::{GaitError, Result};
use crate::nn::{DenseNetwork, TrainingHistory};
use crate::signal::{
    FeatureWindow, Gender, NormStats, TimeSeriesRecording, NUM_CHANNELS, SAMPLE_RATE_HZ,
};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const MODEL_FORMAT_VERSION: u32 = 1;
const RECORDING_HEADER: &str = "t,gx,gy,gz,ax,ay,az";

/// Sidecar metadata for one recording CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub gender: Gender,
    pub sample_rate_hz: u32,
}

fn io_err(path: &Path, source: std::io::Error) -> GaitError {
    GaitError::io(path.display().to_string(), source)
}

/// Writes `<subject_id>.csv` and `<subject_id>.json` into `dir`.
pub fn write_recording(dir: &Path, recording: &TimeSeriesRecording) -> Result<(PathBuf, PathBuf)> {
    recording.validate()?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let csv_path = dir.join(format!("{}.csv", recording.subject_id));
    let file = fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{RECORDING_HEADER}").map_err(|e| io_err(&csv_path, e))?;
    for i in 0..recording.num_samples() {
        let t = i as f64 / SAMPLE_RATE_HZ as f64;
        write!(w, "{t}").map_err(|e| io_err(&csv_path, e))?;
        for channel in &recording.channels {
            write!(w, ",{}", channel[i]).map_err(|e| io_err(&csv_path, e))?;
        }
        writeln!(w).map_err(|e| io_err(&csv_path, e))?;
    }
    w.flush().map_err(|e| io_err(&csv_path, e))?;

    let meta = RecordingMeta {
        subject_id: recording.subject_id.clone(),
        gender: recording.gender,
        sample_rate_hz: recording.sample_rate,
    };
    let meta_path = dir.join(format!("{}.json", recording.subject_id));
    fs::write(&meta_path, serde_json::to_string_pretty(&meta).expect("meta serializes"))
        .map_err(|e| io_err(&meta_path, e))?;
    Ok((csv_path, meta_path))
}

/// Reads one recording from its CSV and sidecar metadata.
pub fn read_recording(csv_path: &Path, meta_path: &Path) -> Result<TimeSeriesRecording> {
    let meta_text = fs::read_to_string(meta_path).map_err(|e| io_err(meta_path, e))?;
    let meta: RecordingMeta = serde_json::from_str(&meta_text).map_err(|e| GaitError::Parse {
        file: meta_path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;

    let file = fs::File::open(csv_path).map_err(|e| io_err(csv_path, e))?;
    let reader = BufReader::new(file);
    let file_name = csv_path.display().to_string();
    let mut channels: [Vec<f64>; NUM_CHANNELS] = Default::default();
    let mut lines = reader.lines().enumerate();

    match lines.next() {
        Some((_, Ok(header))) if header.trim() == RECORDING_HEADER => {}
        Some((_, Ok(header))) => {
            return Err(GaitError::Parse {
                file: file_name,
                line: 1,
                message: format!("expected header '{RECORDING_HEADER}', got '{header}'"),
            })
        }
        Some((_, Err(e))) => return Err(io_err(csv_path, e)),
        None => {
            return Err(GaitError::Parse {
                file: file_name,
                line: 1,
                message: "empty file".to_string(),
            })
        }
    }

    for (idx, line) in lines {
        let line = line.map_err(|e| io_err(csv_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(GaitError::Parse {
                file: file_name,
                line: idx + 1,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        for (c, field) in fields[1..].iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| GaitError::Parse {
                file: file_name.clone(),
                line: idx + 1,
                message: format!("invalid number '{field}'"),
            })?;
            channels[c].push(value);
        }
    }

    let recording = TimeSeriesRecording {
        subject_id: meta.subject_id,
        gender: meta.gender,
        sample_rate: meta.sample_rate_hz,
        channels,
    };
    recording.validate()?;
    Ok(recording)
}

/// Loads every `<id>.csv` + `<id>.json` pair in a directory, sorted by file
/// name for a deterministic order.
pub fn load_dataset_dir(dir: &Path) -> Result<Vec<TimeSeriesRecording>> {
    let entries = fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    let mut csv_paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    csv_paths.sort();
    if csv_paths.is_empty() {
        return Err(GaitError::io(
            dir.display().to_string(),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no recording CSVs found"),
        ));
    }
    csv_paths
        .iter()
        .map(|csv| {
            let meta = csv.with_extension("json");
            read_recording(csv, &meta)
        })
        .collect()
}

/// Writes windows as JSON Lines: one object per window.
pub fn write_windows_jsonl(path: &Path, windows: &[FeatureWindow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for window in windows {
        let line = serde_json::to_string(window).expect("window serializes");
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_windows_jsonl(path: &Path) -> Result<Vec<FeatureWindow>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut windows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let window: FeatureWindow = serde_json::from_str(&line).map_err(|e| GaitError::Parse {
            file: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        windows.push(window);
    }
    Ok(windows)
}

/// Pipeline settings persisted with the model so evaluation and explanation
/// can rebuild the exact split the model was trained on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub filter_window: usize,
    pub window_len: usize,
    pub stride: usize,
    pub split_ratios: (f64, f64, f64),
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub lr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistorySummary {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_loss: Option<f64>,
    pub best_val_macro_f1: Option<f64>,
}

impl HistorySummary {
    pub fn from_history(history: &TrainingHistory) -> Self {
        let best = history
            .epochs
            .get(history.best_epoch.saturating_sub(1));
        HistorySummary {
            epochs_run: history.epochs.len(),
            best_epoch: history.best_epoch,
            best_val_loss: best.map(|e| e.val_loss).filter(|v| v.is_finite()),
            best_val_macro_f1: best.map(|e| e.val_macro_f1).filter(|v| v.is_finite()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelLayer {
    weights: Vec<f64>,
    biases: Vec<f64>,
    activation: crate::nn::Activation,
}

/// Versioned JSON persistence format for a trained network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub layer_dims: Vec<usize>,
    layers: Vec<ModelLayer>,
    pub norm_stats: NormStats,
    pub channel_order: Vec<String>,
    pub seed: u64,
    pub pipeline: PipelineConfig,
    pub history: HistorySummary,
}

impl ModelFile {
    pub fn from_network(
        net: &DenseNetwork,
        pipeline: PipelineConfig,
        history: HistorySummary,
    ) -> Self {
        let mut layer_dims = vec![net.input_dim()];
        layer_dims.extend(net.layers.iter().map(|l| l.out_dim));
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            layer_dims,
            layers: net
                .layers
                .iter()
                .map(|l| ModelLayer {
                    weights: l.weights.clone(),
                    biases: l.biases.clone(),
                    activation: l.activation,
                })
                .collect(),
            norm_stats: net.norm_stats.clone(),
            channel_order: net.channel_order.clone(),
            seed: net.seed,
            pipeline,
            history,
        }
    }

    pub fn into_network(self) -> Result<DenseNetwork> {
        if self.format_version != MODEL_FORMAT_VERSION {
            return Err(GaitError::Format(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.layer_dims.len() != self.layers.len() + 1 {
            return Err(GaitError::Format(
                "layer_dims does not match layer count".to_string(),
            ));
        }
        let layers = self
            .layers
            .into_iter()
            .enumerate()
            .map(|(l, layer)| {
                let (in_dim, out_dim) = (self.layer_dims[l], self.layer_dims[l + 1]);
                if layer.weights.len() != in_dim * out_dim || layer.biases.len() != out_dim {
                    return Err(GaitError::Format(format!(
                        "layer {l}: array lengths do not match declared dims {in_dim}x{out_dim}"
                    )));
                }
                Ok(crate::nn::LayerParams {
                    in_dim,
                    out_dim,
                    weights: layer.weights,
                    biases: layer.biases,
                    activation: layer.activation,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DenseNetwork {
            layers,
            norm_stats: self.norm_stats,
            channel_order: self.channel_order,
            seed: self.seed,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self).expect("model serializes");
        fs::write(path, json).map_err(|e| io_err(path, e))
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        // Check the version before strict parsing so old/new formats fail
        // with a format error rather than a parse error.
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| GaitError::Parse {
                file: path.display().to_string(),
                line: e.line(),
                message: e.to_string(),
            })?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(GaitError::Format(format!(
                    "unsupported model format version {v} (expected {MODEL_FORMAT_VERSION})"
                )))
            }
            None => {
                return Err(GaitError::Format(
                    "model file has no format_version field".to_string(),
                ))
            }
        }
        serde_json::from_value(value).map_err(|e| GaitError::Format(e.to_string()))
    }
}
