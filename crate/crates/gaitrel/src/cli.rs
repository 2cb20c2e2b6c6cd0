//! Command-line orchestration: synthetic data generation, training,
//! evaluation, and relevance explanation over the recording-directory and
//! model-file formats.

use crate::datagen::{generate_dataset, GaitGenConfig};
use crate::error::{GaitError, Result};
use crate::io::{
    load_dataset_dir, write_recording, HistorySummary, ModelFile, PipelineConfig,
};
use crate::metrics::{macro_f1, ConfusionMatrix2, EvalReport};
use crate::nn::{evaluate, train, DenseNetwork, TrainConfig};
use crate::relevance::{explain_windows, subgroup_relevance, Group, Method};
use crate::signal::{
    apply_normalizer, fit_normalizer, moving_average, segment_windows, split_dataset,
    DatasetSplit, FeatureWindow, Gender, TimeSeriesRecording, FILTER_WINDOW, WINDOW_LEN,
};
use clap::{Args, Parser, Subcommand};
use std::fs;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "gaitrel", about = "Gait-based gender classification with relevance explanations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic gait dataset with a planted gender signal.
    GenData(GenDataArgs),
    /// Preprocess a dataset and train the dense classifier.
    Train(TrainArgs),
    /// Evaluate a trained model (or recompute metrics from a raw matrix).
    Evaluate(EvaluateArgs),
    /// Produce the per-axis relevance table for a trained model.
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Number of subjects (genders alternate, balanced within one).
    #[arg(long)]
    pub subjects: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Multiplicative amplitude offset planted on Female AX.
    #[arg(long, default_value_t = 0.3)]
    pub effect_size: f64,
    /// Gaussian noise standard deviation.
    #[arg(long = "noise", default_value_t = 0.05)]
    pub noise_std: f64,
    /// Female stride-frequency offset in Hz (0 plants a pure amplitude effect).
    #[arg(long, default_value_t = -0.05, allow_hyphen_values = true)]
    pub freq_effect: f64,
    /// Recording duration per subject, in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub duration: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory of recording CSVs with sidecar metadata.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long = "batch", default_value_t = 16)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 200)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    /// Train/validation/test ratios, comma separated.
    #[arg(long, default_value = "0.6,0.2,0.2")]
    pub split: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Window stride in samples (window length is fixed at 100).
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, required_unless_present = "from_matrix")]
    pub model: Option<PathBuf>,
    #[arg(long, required_unless_present = "from_matrix")]
    pub data: Option<PathBuf>,
    /// Dataset part to evaluate: train, validation, or test.
    #[arg(long, default_value = "test")]
    pub part: String,
    /// Write the JSON report here in addition to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Metric-oracle mode: four comma-separated confusion counts
    /// (true-F/pred-F, true-F/pred-M, true-M/pred-F, true-M/pred-M).
    #[arg(long)]
    pub from_matrix: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "test")]
    pub part: String,
    /// Comma-separated method tokens: gradient, lrp-eps, lrp-a2b1.
    #[arg(long, default_value = "gradient,lrp-eps,lrp-a2b1")]
    pub methods: String,
    /// Comma-separated group tokens: overall, male, female.
    #[arg(long, default_value = "overall,male,female")]
    pub groups: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Also dump every per-window relevance map as JSON Lines.
    #[arg(long)]
    pub dump_maps: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData(args) => cmd_gen_data(&args),
        Command::Train(args) => cmd_train(&args),
        Command::Evaluate(args) => cmd_evaluate(&args).map(|_| ()),
        Command::Explain(args) => cmd_explain(&args),
    }
}

pub fn cmd_gen_data(args: &GenDataArgs) -> Result<()> {
    let cfg = GaitGenConfig {
        n_subjects: args.subjects,
        duration_s: args.duration,
        effect_size: args.effect_size,
        noise_std: args.noise_std,
        freq_effect: args.freq_effect,
        seed: args.seed,
        ..GaitGenConfig::default()
    };
    let recordings = generate_dataset(&cfg)?;
    let mut females = 0usize;
    for rec in &recordings {
        write_recording(&args.out, rec)?;
        if rec.gender == Gender::Female {
            females += 1;
        }
    }
    println!(
        "wrote {} recordings ({} female, {} male, {} samples each) to {}",
        recordings.len(),
        females,
        recordings.len() - females,
        recordings[0].num_samples(),
        args.out.display()
    );
    Ok(())
}

/// Smooths every channel and extracts stacked windows from each recording.
pub fn preprocess(
    recordings: &[TimeSeriesRecording],
    filter_window: usize,
    window_len: usize,
    stride: usize,
) -> Result<Vec<FeatureWindow>> {
    let mut windows = Vec::new();
    for rec in recordings {
        rec.validate()?;
        let mut filtered = rec.clone();
        for channel in &mut filtered.channels {
            *channel = moving_average(channel, filter_window)?;
        }
        windows.extend(segment_windows(&filtered, window_len, stride)?);
    }
    Ok(windows)
}

fn parse_ratios(text: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| GaitError::Usage(format!("invalid split ratios '{text}'")))?;
    if parts.len() != 3 {
        return Err(GaitError::Usage(format!(
            "expected 3 split ratios, got {}",
            parts.len()
        )));
    }
    Ok((parts[0], parts[1], parts[2]))
}

/// Rebuilds the normalized split for a stored pipeline configuration.
fn rebuild_split(data_dir: &std::path::Path, pipeline: &PipelineConfig) -> Result<DatasetSplit> {
    let recordings = load_dataset_dir(data_dir)?;
    let windows = preprocess(
        &recordings,
        pipeline.filter_window,
        pipeline.window_len,
        pipeline.stride,
    )?;
    split_dataset(&windows, pipeline.split_ratios, pipeline.seed)
}

fn normalize_part(stats: &crate::signal::NormStats, part: &[FeatureWindow]) -> Result<Vec<FeatureWindow>> {
    part.iter().map(|w| apply_normalizer(stats, w)).collect()
}

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let ratios = parse_ratios(&args.split)?;
    let pipeline = PipelineConfig {
        filter_window: FILTER_WINDOW,
        window_len: WINDOW_LEN,
        stride: args.stride,
        split_ratios: ratios,
        batch_size: args.batch_size,
        max_epochs: args.max_epochs,
        patience: args.patience,
        lr: args.lr,
        seed: args.seed,
    };
    let split = rebuild_split(&args.data, &pipeline)?;
    println!(
        "windows: {} train / {} validation / {} test",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );

    let stats = fit_normalizer(&split.train)?;
    let normalized = DatasetSplit {
        train: normalize_part(&stats, &split.train)?,
        validation: normalize_part(&stats, &split.validation)?,
        test: normalize_part(&stats, &split.test)?,
    };

    let mut net = DenseNetwork::paper_architecture(args.seed);
    net.norm_stats = stats;
    let cfg = TrainConfig {
        batch_size: args.batch_size,
        max_epochs: args.max_epochs,
        patience: args.patience,
        lr: args.lr,
        seed: args.seed,
    };
    let (trained, history) = train(net, &normalized, &cfg)?;
    for epoch in &history.epochs {
        println!(
            "epoch {:3}: train loss {:.6}  val loss {:.6}  val macro-F1 {:.4}",
            epoch.epoch, epoch.train_loss, epoch.val_loss, epoch.val_macro_f1
        );
    }
    println!("best epoch: {}", history.best_epoch);

    let report = evaluate(&trained, &normalized.validation)?;
    println!("validation report:\n{}", report.to_json());

    let model = ModelFile::from_network(&trained, pipeline, HistorySummary::from_history(&history));
    model.save(&args.out)?;
    println!("model written to {}", args.out.display());
    Ok(())
}

fn parse_matrix(text: &str) -> Result<ConfusionMatrix2> {
    let counts: Vec<u64> = text
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| GaitError::Usage(format!("invalid matrix counts '{text}'")))?;
    if counts.len() != 4 {
        return Err(GaitError::Usage(format!(
            "expected 4 matrix counts, got {}",
            counts.len()
        )));
    }
    Ok(ConfusionMatrix2::new([
        [counts[0], counts[1]],
        [counts[2], counts[3]],
    ]))
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let report = if let Some(matrix_text) = &args.from_matrix {
        let matrix = parse_matrix(matrix_text)?;
        let report = EvalReport::from_matrix(matrix);
        println!("macro_f1: {:.6}", macro_f1(&matrix));
        report
    } else {
        let model_path = args.model.as_ref().expect("clap enforces presence");
        let data_dir = args.data.as_ref().expect("clap enforces presence");
        let model = ModelFile::load(model_path)?;
        let pipeline = model.pipeline.clone();
        let net = model.into_network()?;
        let split = rebuild_split(data_dir, &pipeline)?;
        let part = normalize_part(&net.norm_stats, split.part(&args.part)?)?;
        if part.is_empty() {
            return Err(GaitError::invalid(format!("part '{}' has no windows", args.part)));
        }
        evaluate(&net, &part)?
    };
    let json = report.to_json();
    println!("{json}");
    if let Some(path) = &args.report {
        fs::write(path, &json).map_err(|e| GaitError::io(path.display().to_string(), e))?;
    }
    Ok(report)
}

fn parse_tokens<T>(text: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',').map(|t| parse(t.trim())).collect()
}

pub fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let methods = parse_tokens(&args.methods, Method::parse)?;
    let groups = parse_tokens(&args.groups, Group::parse)?;

    let model = ModelFile::load(&args.model)?;
    let pipeline = model.pipeline.clone();
    let net = model.into_network()?;
    let split = rebuild_split(&args.data, &pipeline)?;
    let part = normalize_part(&net.norm_stats, split.part(&args.part)?)?;
    if part.is_empty() {
        return Err(GaitError::invalid(format!("part '{}' has no windows", args.part)));
    }

    let table = subgroup_relevance(&net, &part, &methods, &groups)?;
    for warning in &table.warnings {
        eprintln!("warning: {warning}");
    }
    fs::write(&args.out, table.to_csv())
        .map_err(|e| GaitError::io(args.out.display().to_string(), e))?;
    println!("relevance table written to {}", args.out.display());

    if let Some(path) = &args.dump_maps {
        let mut lines = Vec::new();
        for &method in &methods {
            for map in explain_windows(&net, &part, method)? {
                lines.push(serde_json::to_string(&map).expect("map serializes"));
            }
        }
        fs::write(path, lines.join("\n") + "\n")
            .map_err(|e| GaitError::io(path.display().to_string(), e))?;
        println!("{} relevance maps written to {}", lines.len(), path.display());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_and_matrix_parsing() {
        assert_eq!(parse_ratios("0.6,0.2,0.2").unwrap(), (0.6, 0.2, 0.2));
        assert!(parse_ratios("0.6,0.4").is_err());
        assert!(parse_ratios("a,b,c").is_err());

        let m = parse_matrix("191,43,56,193").unwrap();
        assert_eq!(m.counts, [[191, 43], [56, 193]]);
        assert!(parse_matrix("1,2,3").is_err());
        let err = parse_matrix("x").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn unknown_method_or_group_is_usage_error() {
        assert_eq!(Method::parse("shap").unwrap_err().exit_code(), 1);
        assert_eq!(Group::parse("children").unwrap_err().exit_code(), 1);
    }
}
