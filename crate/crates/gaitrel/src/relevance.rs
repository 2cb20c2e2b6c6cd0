//! Attribution engine: raw-gradient saliency, epsilon-stabilized LRP, and the
//! alpha-beta LRP rule, plus per-axis and subgroup aggregation.
//!
//! All three methods decompose the pre-softmax logit of a chosen class. For
//! bias-free ReLU networks LRP is conservative: the input relevance sums to
//! the decomposed logit.

use crate::error::{GaitError, Result};
use crate::nn::{forward, Activation, DenseNetwork};
use crate::signal::{FeatureWindow, Gender, CHANNEL_NAMES, NUM_CHANNELS, WINDOW_LEN};
use crate::util::par_map;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Gradient,
    LrpEpsilon,
    LrpAlphaBeta,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gradient, Method::LrpEpsilon, Method::LrpAlphaBeta];

    /// CLI token for this method.
    pub fn token(self) -> &'static str {
        match self {
            Method::Gradient => "gradient",
            Method::LrpEpsilon => "lrp-eps",
            Method::LrpAlphaBeta => "lrp-a2b1",
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "gradient" => Ok(Method::Gradient),
            "lrp-eps" => Ok(Method::LrpEpsilon),
            "lrp-a2b1" => Ok(Method::LrpAlphaBeta),
            other => Err(GaitError::Usage(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Overall,
    Male,
    Female,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::Overall, Group::Male, Group::Female];

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "overall" => Ok(Group::Overall),
            "male" => Ok(Group::Male),
            "female" => Ok(Group::Female),
            other => Err(GaitError::Usage(format!("unknown group '{other}'"))),
        }
    }

    fn matches(self, gender: Gender) -> bool {
        match self {
            Group::Overall => true,
            Group::Male => gender == Gender::Male,
            Group::Female => gender == Gender::Female,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Group::Overall => "Overall",
            Group::Male => "Male",
            Group::Female => "Female",
        };
        f.write_str(s)
    }
}

/// Per-input-feature signed relevance for one window under one method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelevanceMap {
    pub method: Method,
    pub target_class: usize,
    pub subject_id: String,
    pub window_index: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisRelevanceRow {
    pub group: Group,
    pub method: Method,
    pub scores: [f64; NUM_CHANNELS],
}

/// The per-axis relevance table: one row per requested (group, method), six
/// signed axis scores per row in channel order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AxisRelevanceTable {
    pub rows: Vec<AxisRelevanceRow>,
    pub warnings: Vec<String>,
}

impl AxisRelevanceTable {
    /// CSV with columns `group,method,GX,GY,GZ,AX,AY,AZ`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,method");
        for name in CHANNEL_NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.group, row.method.token()));
            for score in row.scores {
                out.push_str(&format!(",{score}"));
            }
            out.push('\n');
        }
        out
    }
}

fn check_target(net: &DenseNetwork, target: usize) -> Result<()> {
    if target >= net.output_dim() {
        return Err(GaitError::invalid(format!(
            "target class {target} out of range for {}-way output",
            net.output_dim()
        )));
    }
    Ok(())
}

/// Raw gradient of the pre-softmax target logit with respect to the input,
/// computed by backprop with the output seeded at onehot(target). The softmax
/// derivative is deliberately not applied.
pub fn explain_gradient(
    net: &DenseNetwork,
    input: &[f64],
    target: usize,
    provenance: (&str, usize),
) -> Result<RelevanceMap> {
    check_target(net, target)?;
    let trace = forward(net, input)?;
    let n_layers = net.layers.len();
    let mut delta = vec![0.0; net.output_dim()];
    delta[target] = 1.0;

    for l in (0..n_layers).rev() {
        let layer = &net.layers[l];
        let mut next = vec![0.0; layer.in_dim];
        for (k, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let row = &layer.weights[k * layer.in_dim..(k + 1) * layer.in_dim];
            for (n, w) in next.iter_mut().zip(row) {
                *n += w * d;
            }
        }
        if l > 0 && net.layers[l - 1].activation == Activation::ReLU {
            for (n, &z) in next.iter_mut().zip(&trace.pre_activations[l - 1]) {
                if z <= 0.0 {
                    *n = 0.0;
                }
            }
        }
        delta = next;
    }
    Ok(RelevanceMap {
        method: Method::Gradient,
        target_class: target,
        subject_id: provenance.0.to_string(),
        window_index: provenance.1,
        values: delta,
    })
}

fn sign_or_one(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Epsilon-stabilized z-rule LRP. Relevance starts at the target logit and is
/// redistributed proportionally to the contributions `a_j * w_jk`; bias
/// relevance is absorbed, not redistributed.
pub fn explain_lrp_epsilon(
    net: &DenseNetwork,
    input: &[f64],
    target: usize,
    eps: f64,
    provenance: (&str, usize),
) -> Result<RelevanceMap> {
    check_target(net, target)?;
    let trace = forward(net, input)?;
    let n_layers = net.layers.len();

    let mut relevance = vec![0.0; net.output_dim()];
    relevance[target] = trace.logits()[target];

    for l in (0..n_layers).rev() {
        let layer = &net.layers[l];
        let activ_in = &trace.activations[l];
        let mut prev = vec![0.0; layer.in_dim];
        for (k, &r_k) in relevance.iter().enumerate() {
            if r_k == 0.0 {
                continue;
            }
            let z_k = trace.pre_activations[l][k];
            let denom = z_k + eps * sign_or_one(z_k);
            let row = &layer.weights[k * layer.in_dim..(k + 1) * layer.in_dim];
            let factor = r_k / denom;
            for ((p, w), a) in prev.iter_mut().zip(row).zip(activ_in) {
                *p += a * w * factor;
            }
        }
        relevance = prev;
    }
    Ok(RelevanceMap {
        method: Method::LrpEpsilon,
        target_class: target,
        subject_id: provenance.0.to_string(),
        window_index: provenance.1,
        values: relevance,
    })
}

/// Alpha-beta LRP (default alpha=2, beta=1). Positive and negative
/// contributions are redistributed through separate pools; an empty pool
/// contributes zero. Requires `alpha - beta = 1`.
pub fn explain_lrp_alphabeta(
    net: &DenseNetwork,
    input: &[f64],
    target: usize,
    alpha: f64,
    beta: f64,
    provenance: (&str, usize),
) -> Result<RelevanceMap> {
    check_target(net, target)?;
    if (alpha - beta - 1.0).abs() > 1e-12 {
        return Err(GaitError::invalid(format!(
            "alpha - beta must equal 1, got alpha={alpha}, beta={beta}"
        )));
    }
    let trace = forward(net, input)?;
    let n_layers = net.layers.len();

    let mut relevance = vec![0.0; net.output_dim()];
    relevance[target] = trace.logits()[target];

    for l in (0..n_layers).rev() {
        let layer = &net.layers[l];
        let activ_in = &trace.activations[l];
        let mut prev = vec![0.0; layer.in_dim];
        for (k, &r_k) in relevance.iter().enumerate() {
            if r_k == 0.0 {
                continue;
            }
            let row = &layer.weights[k * layer.in_dim..(k + 1) * layer.in_dim];
            let bias = layer.biases[k];
            let mut pos_sum = if bias > 0.0 { bias } else { 0.0 };
            let mut neg_sum = if bias < 0.0 { bias } else { 0.0 };
            for (w, a) in row.iter().zip(activ_in) {
                let z = a * w;
                if z > 0.0 {
                    pos_sum += z;
                } else {
                    neg_sum += z;
                }
            }
            for ((p, w), a) in prev.iter_mut().zip(row).zip(activ_in) {
                let z = a * w;
                if z > 0.0 && pos_sum != 0.0 {
                    *p += alpha * (z / pos_sum) * r_k;
                } else if z < 0.0 && neg_sum != 0.0 {
                    *p -= beta * (z / neg_sum) * r_k;
                }
            }
        }
        relevance = prev;
    }
    Ok(RelevanceMap {
        method: Method::LrpAlphaBeta,
        target_class: target,
        subject_id: provenance.0.to_string(),
        window_index: provenance.1,
        values: relevance,
    })
}

/// Dispatches to the method's explainer with its default parameters.
pub fn explain(
    net: &DenseNetwork,
    input: &[f64],
    target: usize,
    method: Method,
    provenance: (&str, usize),
) -> Result<RelevanceMap> {
    match method {
        Method::Gradient => explain_gradient(net, input, target, provenance),
        Method::LrpEpsilon => explain_lrp_epsilon(net, input, target, 1e-9, provenance),
        Method::LrpAlphaBeta => explain_lrp_alphabeta(net, input, target, 2.0, 1.0, provenance),
    }
}

/// Mean signed relevance per axis, averaged over maps and over each axis's
/// 100 time frames. Summation order is fixed for bit reproducibility.
pub fn aggregate_axis_relevance(maps: &[RelevanceMap]) -> Result<[f64; NUM_CHANNELS]> {
    if maps.is_empty() {
        return Err(GaitError::invalid("aggregate_axis_relevance: empty list"));
    }
    let mut scores = [0.0; NUM_CHANNELS];
    for map in maps {
        if map.values.len() != NUM_CHANNELS * WINDOW_LEN {
            return Err(GaitError::invalid(format!(
                "aggregate_axis_relevance: map length {} != {}",
                map.values.len(),
                NUM_CHANNELS * WINDOW_LEN
            )));
        }
        for (axis, score) in scores.iter_mut().enumerate() {
            let slice = &map.values[axis * WINDOW_LEN..(axis + 1) * WINDOW_LEN];
            *score += slice.iter().sum::<f64>();
        }
    }
    let denom = (maps.len() * WINDOW_LEN) as f64;
    for score in &mut scores {
        *score /= denom;
    }
    Ok(scores)
}

/// Computes per-window relevance maps for a set of normalized windows. The
/// explanation target is the predicted class of each window.
pub fn explain_windows(
    net: &DenseNetwork,
    windows: &[FeatureWindow],
    method: Method,
) -> Result<Vec<RelevanceMap>> {
    let results = par_map(windows, |w| {
        let (predicted, _) = crate::nn::predict(net, w, true)?;
        explain(
            net,
            &w.features,
            predicted.class_index(),
            method,
            (&w.subject_id, w.window_index),
        )
    });
    results.into_iter().collect()
}

/// Builds the per-axis relevance table for the requested groups and methods.
/// A group with zero windows is omitted and recorded as a warning.
pub fn subgroup_relevance(
    net: &DenseNetwork,
    test: &[FeatureWindow],
    methods: &[Method],
    groups: &[Group],
) -> Result<AxisRelevanceTable> {
    if test.is_empty() {
        return Err(GaitError::invalid("subgroup_relevance: empty test set"));
    }
    let mut table = AxisRelevanceTable::default();
    for &group in groups {
        let members: Vec<FeatureWindow> = test
            .iter()
            .filter(|w| group.matches(w.gender))
            .cloned()
            .collect();
        if members.is_empty() {
            table
                .warnings
                .push(format!("group {group} has no windows; row omitted"));
            continue;
        }
        for &method in methods {
            let maps = explain_windows(net, &members, method)?;
            let scores = aggregate_axis_relevance(&maps)?;
            table.rows.push(AxisRelevanceRow {
                group,
                method,
                scores,
            });
        }
    }
    Ok(table)
}
