//! Gender classification from 6-axis inertial gait windows, with
//! relevance-propagation explanations of the trained classifier.
//!
//! The pipeline: smooth each channel with a moving average, cut 1-second
//! windows, stack the six channels into 600-dimensional feature vectors,
//! normalize with training-set statistics, train a dense ReLU network with
//! Adam, then decompose its decisions with gradient saliency and two LRP
//! rules to rank sensor axes by influence. A parametric synthetic generator
//! plants a known gender signal so the attribution ranking can be verified
//! against ground truth.
//!
//! See the crate examples for runnable walkthroughs of each capability, and
//! the `gaitrel` binary for the end-to-end command-line pipeline.

pub mod cli;
pub mod datagen;
pub mod error;
pub mod io;
pub mod metrics;
pub mod nn;
pub mod relevance;
pub mod signal;
mod util;

pub use error::{GaitError, Result};
pub use metrics::{macro_f1, ConfusionMatrix2, EvalReport};
pub use nn::{DenseNetwork, TrainConfig};
pub use relevance::{AxisRelevanceTable, Group, Method, RelevanceMap};
pub use signal::{DatasetSplit, FeatureWindow, Gender, NormStats, TimeSeriesRecording};
