//! Component-identification and condition-interpretation metrics.
//!
//! Objects align by greedy descending IoU (strictly above 0.5, injective).
//! A predicted reaction matches a ground-truth reaction under the hard
//! criterion when every slot aligns exactly, and under the soft criterion
//! when the molecule objects agree with reactants and conditions pooled.
//! Precision counts predictions that match some ground truth, recall counts
//! ground truths matched by some prediction, both micro-averaged across
//! images.

mod align;
mod cri;
mod matching;
mod score;

pub use align::{align_objects, iou, AlignmentMap, IOU_THRESHOLD};
pub use cri::{
    cri_evaluate, cri_evaluate_corpus, levenshtein, ocr_accuracy, CriReport, CriTally,
    OCR_THRESHOLD,
};
pub use matching::{hard_match, soft_match};
pub use score::{
    image_counts, score_images, EvaluationReport, ImageCounts, MatchCounts, MatchMode, ModeScores,
    PatternReport,
};

use alloc::string::String;
use serde::{Deserialize, Serialize};

/// Precision, recall, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreTriple {
    /// F1 is `2PR / (P + R)`, or 0 when both are 0.
    pub fn new(precision: f64, recall: f64) -> Self {
        let sum = precision + recall;
        let f1 = if sum > 0.0 { 2.0 * precision * recall / sum } else { 0.0 };
        Self { precision, recall, f1 }
    }
}

/// Ratio that reads as 1.0 when there is nothing to count.
pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("prediction for unknown image {0:?}")]
    UnknownImage(String),
    #[error("image {0:?} appears more than once")]
    DuplicateImage(String),
    #[error("ground-truth text is empty")]
    EmptyGroundTruth,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_definition() {
        let s = ScoreTriple::new(0.5, 1.0 / 3.0);
        assert!((s.f1 - 0.4).abs() < 1e-15);
        assert_eq!(ScoreTriple::new(0.0, 0.0).f1, 0.0);
        assert_eq!(ScoreTriple::new(1.0, 1.0).f1, 1.0);
    }
}
