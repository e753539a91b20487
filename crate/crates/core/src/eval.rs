//! Top-of-the-list ranking metrics and feature-selection scores.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Weights with magnitude at or below this are treated as unselected.
pub const NONZERO_THRESHOLD: f64 = 1e-8;

/// Scores assigned to the positive and negative examples of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RankScores {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl RankScores {
    pub fn new(pos_scores: Vec<f64>, neg_scores: Vec<f64>) -> Result<Self> {
        if pos_scores.is_empty() {
            return Err(Error::EmptyClass("positive"));
        }
        if neg_scores.is_empty() {
            return Err(Error::EmptyClass("negative"));
        }
        if pos_scores.iter().chain(&neg_scores).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("score".into()));
        }
        Ok(RankScores {
            pos: pos_scores,
            neg: neg_scores,
        })
    }

    pub fn pos_scores(&self) -> &[f64] {
        &self.pos
    }

    pub fn neg_scores(&self) -> &[f64] {
        &self.neg
    }

    fn max_negative(&self) -> f64 {
        self.neg.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Worst-case count over negatives of positives scored at or below it.
pub fn infinite_push_loss(scores: &RankScores) -> usize {
    let mut pos = scores.pos.clone();
    pos.sort_unstable_by(f64::total_cmp);
    scores
        .neg
        .iter()
        .map(|&t| pos.partition_point(|&p| p <= t))
        .max()
        .unwrap_or(0)
}

/// Fraction of positives scored strictly above every negative.
pub fn pos_at_top_rate(scores: &RankScores) -> f64 {
    let top = scores.max_negative();
    let count = scores.pos.iter().filter(|&&p| p > top).count();
    count as f64 / scores.pos.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

pub fn feature_metrics(selected: &BTreeSet<usize>, relevant: &BTreeSet<usize>) -> FeatureMetrics {
    let hits = selected.intersection(relevant).count() as f64;
    let ratio = |den: usize| if den == 0 { 0.0 } else { hits / den as f64 };
    let precision = ratio(selected.len());
    let recall = ratio(relevant.len());
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    FeatureMetrics {
        precision,
        recall,
        f_measure,
    }
}

/// Indices of weights above [`NONZERO_THRESHOLD`] in magnitude.
pub fn selected_features(weights: &[f64]) -> BTreeSet<usize> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > NONZERO_THRESHOLD)
        .map(|(i, _)| i)
        .collect()
}
