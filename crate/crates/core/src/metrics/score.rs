use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::ops::AddAssign;

use serde::{Deserialize, Serialize};

use super::{align_objects, hard_match, ratio, soft_match, MetricsError, ScoreTriple};
use crate::model::{ImageAnnotation, Pattern, Prediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MatchMode {
    Hard,
    Soft,
    #[default]
    Both,
}

impl MatchMode {
    pub fn hard(self) -> bool {
        matches!(self, Self::Hard | Self::Both)
    }

    pub fn soft(self) -> bool {
        matches!(self, Self::Soft | Self::Both)
    }
}

/// Numerators and denominators behind precision and recall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchCounts {
    /// Predictions that match at least one ground-truth reaction.
    pub matched_predictions: usize,
    pub predictions: usize,
    /// Ground-truth reactions matched by at least one prediction.
    pub matched_ground_truth: usize,
    pub ground_truth: usize,
}

impl AddAssign for MatchCounts {
    fn add_assign(&mut self, o: Self) {
        self.matched_predictions += o.matched_predictions;
        self.predictions += o.predictions;
        self.matched_ground_truth += o.matched_ground_truth;
        self.ground_truth += o.ground_truth;
    }
}

impl MatchCounts {
    /// Precision and recall read 1.0 when their denominator is zero.
    pub fn scores(&self) -> ScoreTriple {
        ScoreTriple::new(
            ratio(self.matched_predictions, self.predictions),
            ratio(self.matched_ground_truth, self.ground_truth),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: MatchCounts,
}

impl ModeScores {
    pub fn from_counts(counts: MatchCounts) -> Self {
        let s = counts.scores();
        Self { precision: s.precision, recall: s.recall, f1: s.f1, counts }
    }

    pub fn triple(&self) -> ScoreTriple {
        ScoreTriple { precision: self.precision, recall: self.recall, f1: self.f1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub image_count: usize,
    pub hard: Option<ModeScores>,
    pub soft: Option<ModeScores>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub image_count: usize,
    pub hard: Option<ModeScores>,
    pub soft: Option<ModeScores>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_pattern: BTreeMap<Pattern, PatternReport>,
}

/// Match counts for one image under both criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageCounts {
    pub pattern: Pattern,
    pub hard: MatchCounts,
    pub soft: MatchCounts,
}

/// Scores one image. Each prediction is compared with every ground-truth
/// reaction; a reaction counts once however many partners it matches.
pub fn image_counts(pred: &Prediction, gt: &ImageAnnotation) -> ImageCounts {
    let align = align_objects(&pred.objects, &gt.objects);
    let m = pred.reactions.len();
    let n = gt.reactions.len();
    let mut hard = [Vec::from_iter(core::iter::repeat_n(false, m)), Vec::from_iter(core::iter::repeat_n(false, n))];
    let mut soft = hard.clone();
    for (j, p) in pred.reactions.iter().enumerate() {
        for (i, g) in gt.reactions.iter().enumerate() {
            if hard_match(p, g, &align) {
                hard[0][j] = true;
                hard[1][i] = true;
            }
            if soft_match(p, g, &align, &pred.objects, &gt.objects) {
                soft[0][j] = true;
                soft[1][i] = true;
            }
        }
    }
    let count = |flags: &[Vec<bool>; 2]| MatchCounts {
        matched_predictions: flags[0].iter().filter(|b| **b).count(),
        predictions: m,
        matched_ground_truth: flags[1].iter().filter(|b| **b).count(),
        ground_truth: n,
    };
    ImageCounts { pattern: gt.pattern, hard: count(&hard), soft: count(&soft) }
}

impl EvaluationReport {
    /// Micro-averaged report: numerators and denominators summed over images.
    pub fn from_image_counts(counts: impl IntoIterator<Item = ImageCounts>, mode: MatchMode) -> Self {
        let mut total = (0usize, MatchCounts::default(), MatchCounts::default());
        let mut by_pattern: BTreeMap<Pattern, (usize, MatchCounts, MatchCounts)> = BTreeMap::new();
        for c in counts {
            for acc in [&mut total, by_pattern.entry(c.pattern).or_default()] {
                acc.0 += 1;
                acc.1 += c.hard;
                acc.2 += c.soft;
            }
        }
        let pick = |on: bool, c: MatchCounts| on.then(|| ModeScores::from_counts(c));
        Self {
            image_count: total.0,
            hard: pick(mode.hard(), total.1),
            soft: pick(mode.soft(), total.2),
            per_pattern: by_pattern
                .into_iter()
                .map(|(p, (k, h, s))| {
                    (p, PatternReport { image_count: k, hard: pick(mode.hard(), h), soft: pick(mode.soft(), s) })
                })
                .collect(),
        }
    }
}

/// Scores predictions against ground truth over a corpus. Ground-truth
/// images without a prediction count as predicting nothing.
pub fn score_images(
    preds: &[Prediction],
    gts: &[ImageAnnotation],
    mode: MatchMode,
) -> Result<EvaluationReport, MetricsError> {
    let mut gt_ids = BTreeMap::new();
    for g in gts {
        if gt_ids.insert(g.image_id.as_str(), ()).is_some() {
            return Err(MetricsError::DuplicateImage(g.image_id.clone()));
        }
    }
    let mut by_id: BTreeMap<&str, &Prediction> = BTreeMap::new();
    for p in preds {
        if !gt_ids.contains_key(p.image_id.as_str()) {
            return Err(MetricsError::UnknownImage(p.image_id.clone()));
        }
        if by_id.insert(p.image_id.as_str(), p).is_some() {
            return Err(MetricsError::DuplicateImage(p.image_id.to_string()));
        }
    }
    let counts = gts.iter().map(|g| match by_id.get(g.image_id.as_str()) {
        Some(p) => image_counts(p, g),
        None => image_counts(
            &Prediction { image_id: g.image_id.clone(), objects: Vec::new(), reactions: Vec::new() },
            g,
        ),
    });
    Ok(EvaluationReport::from_image_counts(counts, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BBox, DetectedObject, ObjectClass, ObjectId, ReactionAnnotation};
    use alloc::string::String;
    use alloc::vec;

    fn ids(v: &[u32]) -> Vec<ObjectId> {
        v.iter().copied().map(ObjectId).collect()
    }

    fn rxn(r: &[u32], c: &[u32], p: &[u32]) -> ReactionAnnotation {
        ReactionAnnotation { reactants: ids(r), conditions: ids(c), products: ids(p) }
    }

    /// Seven molecules spaced along one row.
    fn gt_image(id: &str, reactions: Vec<ReactionAnnotation>) -> ImageAnnotation {
        let objects = (0..7u32)
            .map(|i| DetectedObject {
                id: ObjectId(i),
                class: ObjectClass::Str,
                bbox: BBox::new(i as u16 * 120, 100, i as u16 * 120 + 100, 200).unwrap(),
            })
            .collect();
        ImageAnnotation {
            image_id: String::from(id),
            width_px: 1000,
            height_px: 500,
            pattern: Pattern::SingleLine,
            objects,
            reactions,
            condition_texts: Default::default(),
            smiles: Default::default(),
        }
    }

    #[test]
    fn identity_is_all_ones() {
        let g = gt_image("a", vec![rxn(&[0], &[1], &[2]), rxn(&[2], &[], &[3])]);
        let r = score_images(&[g.to_prediction()], &[g], MatchMode::Both).unwrap();
        for m in [r.hard.unwrap(), r.soft.unwrap()] {
            assert_eq!(m.triple(), ScoreTriple { precision: 1.0, recall: 1.0, f1: 1.0 });
        }
    }

    #[test]
    fn one_of_two_predictions_matches_three_truths() {
        let g = gt_image("a", vec![rxn(&[0], &[], &[1]), rxn(&[2], &[], &[3]), rxn(&[4], &[], &[5])]);
        let mut p = g.to_prediction();
        p.reactions = vec![rxn(&[0], &[], &[1]), rxn(&[1], &[], &[6])];
        let r = score_images(&[p], &[g], MatchMode::Hard).unwrap();
        let h = r.hard.unwrap();
        assert_eq!(h.precision, 0.5);
        assert_eq!(h.recall, 1.0 / 3.0);
        assert!((h.f1 - 0.4).abs() < 1e-15);
        assert!(r.soft.is_none());
    }

    #[test]
    fn duplicate_prediction_counts_twice() {
        let g = gt_image("a", vec![rxn(&[0], &[], &[1])]);
        let mut p = g.to_prediction();
        p.reactions.push(p.reactions[0].clone());
        let r = score_images(&[p], &[g], MatchMode::Both).unwrap();
        let h = r.hard.unwrap();
        assert_eq!((h.precision, h.recall), (1.0, 1.0));
        assert_eq!(h.counts.predictions, 2);
    }

    #[test]
    fn micro_average_and_missing_predictions() {
        let a = gt_image("a", vec![rxn(&[0], &[], &[1])]);
        let mut b = gt_image("b", vec![rxn(&[0], &[], &[1]), rxn(&[1], &[], &[2]), rxn(&[2], &[], &[3])]);
        b.pattern = Pattern::Cycle;
        let r = score_images(&[a.to_prediction()], &[a, b], MatchMode::Both).unwrap();
        let h = r.hard.unwrap();
        assert_eq!(h.counts, MatchCounts { matched_predictions: 1, predictions: 1, matched_ground_truth: 1, ground_truth: 4 });
        assert_eq!(h.recall, 0.25);
        assert_eq!(r.per_pattern[&Pattern::Cycle].hard.unwrap().recall, 0.0);
        assert_eq!(r.per_pattern[&Pattern::SingleLine].hard.unwrap().recall, 1.0);
        let mut sum = MatchCounts::default();
        for pr in r.per_pattern.values() {
            sum += pr.hard.unwrap().counts;
        }
        assert_eq!(sum, h.counts);
    }

    #[test]
    fn unknown_and_duplicate_ids() {
        let a = gt_image("a", vec![]);
        let mut p = a.to_prediction();
        p.image_id = "zzz".into();
        assert_eq!(score_images(&[p], core::slice::from_ref(&a), MatchMode::Both), Err(MetricsError::UnknownImage("zzz".into())));
        let q = a.to_prediction();
        assert!(matches!(
            score_images(&[q.clone(), q], &[a], MatchMode::Both),
            Err(MetricsError::DuplicateImage(_))
        ));
    }
}
