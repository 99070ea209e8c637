//! Predictions manufactured from ground truth, with defects whose effect on
//! the reaction scores is known in advance.
//!
//! Perturbations never rename objects, so a prediction lives in the ground
//! truth's id space. When boxes stay close enough to their sources that
//! alignment is forced to the identity, the expected scores follow from set
//! comparisons in that id space alone, with no IoU involved.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::metrics::{EvaluationReport, ImageCounts, MatchCounts, MatchMode};
use crate::model::{BBox, DetectedObject, ImageAnnotation, ObjectClass, ObjectId, ReactionAnnotation, MAX_BIN};
use crate::seed::{derive_seed, hash_str, Rng};

/// Largest total translation, as a fraction of box size, for which scores
/// stay analytic.
pub const MAX_ANALYTIC_JITTER: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    /// Translates every box by up to this fraction of its width and height.
    JitterBoxes { max_shift_fraction: f64 },
    /// Removes reactions, and objects no surviving reaction references.
    DropReactions { count: usize },
    /// Appends a copy of the reaction at `index`.
    DuplicateReaction { index: usize },
    /// Moves one molecule condition into the reactants, in `count` reactions.
    RelabelConditionAsReactant { count: usize },
    /// Substitutes condition-text characters independently at this rate.
    CorruptText { char_error_rate: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationPlan {
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PerturbError {
    #[error("step {step}: fraction must lie in [0, 1)")]
    InvalidFraction { step: usize },
    #[error("image {image:?}, step {step}: {reason}")]
    Inapplicable { image: String, step: usize, reason: &'static str },
    #[error("scores are not analytic: {0}")]
    NotAnalytic(String),
}

impl PerturbationPlan {
    pub fn new(seed: u64, steps: Vec<Step>) -> Self {
        Self { steps, seed }
    }

    pub fn validate(&self) -> Result<(), PerturbError> {
        for (step, s) in self.steps.iter().enumerate() {
            let f = match *s {
                Step::JitterBoxes { max_shift_fraction: f } | Step::CorruptText { char_error_rate: f } => f,
                _ => continue,
            };
            if !(0.0..1.0).contains(&f) {
                return Err(PerturbError::InvalidFraction { step });
            }
        }
        Ok(())
    }

    fn total_jitter(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| match s {
                Step::JitterBoxes { max_shift_fraction } => *max_shift_fraction,
                _ => 0.0,
            })
            .sum()
    }
}

fn jitter(b: BBox, f: f64, rng: &mut Rng) -> BBox {
    let shift = |lo: u16, hi: u16, size: u32, rng: &mut Rng| {
        let s = libm::floor(f * f64::from(size)) as i32;
        let d = if s == 0 { 0 } else { rng.gen_range(-s..=s) };
        d.clamp(-i32::from(lo), i32::from(MAX_BIN) - i32::from(hi))
    };
    let dx = shift(b.x_min(), b.x_max(), b.width(), rng);
    let dy = shift(b.y_min(), b.y_max(), b.height(), rng);
    let mv = |v: u16, d: i32| (i32::from(v) + d) as u32;
    BBox::from_u32(mv(b.x_min(), dx), mv(b.y_min(), dy), mv(b.x_max(), dx), mv(b.y_max(), dy))
        .expect("translation inside the bin range keeps the box valid")
}

const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

fn corrupt(text: &str, rate: f64, rng: &mut Rng) -> String {
    text.chars()
        .map(|c| {
            if !rng.gen_bool(rate) {
                return c;
            }
            loop {
                let r = char::from(*ALPHABET.choose(rng).expect("alphabet is non-empty"));
                if r != c {
                    return r;
                }
            }
        })
        .collect()
}

fn str_condition(r: &ReactionAnnotation, objects: &[DetectedObject]) -> Option<usize> {
    r.conditions.iter().position(|id| objects.iter().any(|o| o.id == *id && o.class == ObjectClass::Str))
}

fn prune(a: &mut ImageAnnotation) {
    let live: BTreeSet<ObjectId> = a.reactions.iter().flat_map(|r| r.ids()).collect();
    a.objects.retain(|o| live.contains(&o.id));
    a.condition_texts.retain(|id, _| live.contains(id));
    a.smiles.retain(|id, _| live.contains(id));
}

/// Applies `plan` to one image. Each image draws from its own RNG, derived
/// from the plan seed and the image id.
pub fn apply(plan: &PerturbationPlan, gt: &ImageAnnotation) -> Result<ImageAnnotation, PerturbError> {
    plan.validate()?;
    let mut rng = Rng::seed_from_u64(derive_seed(plan.seed, hash_str(&gt.image_id)));
    let mut a = gt.clone();
    let fail = |step, reason| PerturbError::Inapplicable { image: gt.image_id.clone(), step, reason };
    for (step, s) in plan.steps.iter().enumerate() {
        match *s {
            Step::JitterBoxes { max_shift_fraction } => {
                for o in &mut a.objects {
                    o.bbox = jitter(o.bbox, max_shift_fraction, &mut rng);
                }
            }
            Step::DropReactions { count } => {
                if count > a.reactions.len() {
                    return Err(fail(step, "fewer reactions than the drop count"));
                }
                let drop: BTreeSet<usize> = index::sample(&mut rng, a.reactions.len(), count).into_iter().collect();
                let mut i = 0;
                a.reactions.retain(|_| {
                    i += 1;
                    !drop.contains(&(i - 1))
                });
                prune(&mut a);
            }
            Step::DuplicateReaction { index } => {
                let r = a.reactions.get(index).cloned().ok_or_else(|| fail(step, "no reaction at that index"))?;
                a.reactions.push(r);
            }
            Step::RelabelConditionAsReactant { count } => {
                let eligible: Vec<usize> =
                    (0..a.reactions.len()).filter(|&i| str_condition(&a.reactions[i], &a.objects).is_some()).collect();
                if count > eligible.len() {
                    return Err(fail(step, "too few reactions with a molecule condition"));
                }
                for k in index::sample(&mut rng, eligible.len(), count) {
                    let r = &mut a.reactions[eligible[k]];
                    let pos = str_condition(r, &a.objects).expect("eligible reactions have one");
                    let id = r.conditions.remove(pos);
                    r.reactants.push(id);
                }
            }
            Step::CorruptText { char_error_rate } => {
                for words in a.condition_texts.values_mut() {
                    for w in words {
                        w.text = corrupt(&w.text, char_error_rate, &mut rng);
                    }
                }
            }
        }
    }
    Ok(a)
}

/// [`apply`] over a corpus.
pub fn apply_corpus(plan: &PerturbationPlan, gts: &[ImageAnnotation]) -> Result<Vec<ImageAnnotation>, PerturbError> {
    gts.iter().map(|g| apply(plan, g)).collect()
}

fn overlap_area(a: &BBox, b: &BBox, dx: u32, dy: u32) -> u64 {
    let x0 = u32::from(a.x_min()).saturating_sub(dx).max(u32::from(b.x_min()));
    let x1 = (u32::from(a.x_max()) + dx).min(u32::from(b.x_max()));
    let y0 = u32::from(a.y_min()).saturating_sub(dy).max(u32::from(b.y_min()));
    let y1 = (u32::from(a.y_max()) + dy).min(u32::from(b.y_max()));
    u64::from(x1.saturating_sub(x0)) * u64::from(y1.saturating_sub(y0))
}

/// Checks that a prediction derived from `gt` with total jitter `f` can only
/// align each object with its own source: any translate of one box overlaps
/// every other box on at most half its area, so every cross pair has IoU at
/// most 0.5, while a translate by at most a tenth per axis keeps IoU above 0.68
/// with its source.
fn identity_forced(gt: &ImageAnnotation, f: f64) -> Result<(), PerturbError> {
    for a in &gt.objects {
        let dx = libm::floor(f * f64::from(a.bbox.width())) as u32;
        let dy = libm::floor(f * f64::from(a.bbox.height())) as u32;
        for b in &gt.objects {
            if a.id != b.id && 2 * overlap_area(&a.bbox, &b.bbox, dx, dy) > u64::from(a.bbox.area()) {
                return Err(PerturbError::NotAnalytic(alloc::format!(
                    "objects {} and {} of {:?} overlap too much for alignment to be forced",
                    a.id.0,
                    b.id.0,
                    gt.image_id
                )));
            }
        }
    }
    Ok(())
}

type Key = (BTreeSet<ObjectId>, BTreeSet<ObjectId>, BTreeSet<ObjectId>);

fn hard_key(r: &ReactionAnnotation) -> Key {
    let set = |v: &[ObjectId]| v.iter().copied().collect();
    (set(&r.reactants), set(&r.conditions), set(&r.products))
}

fn soft_key(r: &ReactionAnnotation, structures: &BTreeSet<ObjectId>) -> Key {
    let pick = |v: &mut dyn Iterator<Item = &ObjectId>| v.filter(|id| structures.contains(id)).copied().collect();
    (pick(&mut r.reactants.iter().chain(&r.conditions)), BTreeSet::new(), pick(&mut r.products.iter()))
}

fn counts(pred: &[Key], gt: &[Key]) -> MatchCounts {
    MatchCounts {
        matched_predictions: pred.iter().filter(|p| gt.contains(p)).count(),
        predictions: pred.len(),
        matched_ground_truth: gt.iter().filter(|g| pred.contains(g)).count(),
        ground_truth: gt.len(),
    }
}

/// Counts for a prediction in `gt`'s id space, assuming identity alignment.
pub fn id_space_counts(pred: &ImageAnnotation, gt: &ImageAnnotation) -> ImageCounts {
    let classes: BTreeMap<ObjectId, ObjectClass> = gt.objects.iter().map(|o| (o.id, o.class)).collect();
    let structures: BTreeSet<ObjectId> =
        classes.iter().filter(|(_, c)| **c == ObjectClass::Str).map(|(id, _)| *id).collect();
    let hard = |rs: &[ReactionAnnotation]| rs.iter().map(hard_key).collect::<Vec<_>>();
    let soft = |rs: &[ReactionAnnotation]| rs.iter().map(|r| soft_key(r, &structures)).collect::<Vec<_>>();
    ImageCounts {
        pattern: gt.pattern,
        hard: counts(&hard(&pred.reactions), &hard(&gt.reactions)),
        soft: counts(&soft(&pred.reactions), &soft(&gt.reactions)),
    }
}

/// The report that scoring `apply_corpus(plan, gts)` must produce.
///
/// Only plans made of drops, duplicates, relabels, and a total jitter of at
/// most [`MAX_ANALYTIC_JITTER`] qualify, and ground-truth boxes must be
/// separated enough that no perturbed box can align with a neighbour.
pub fn expected_report(
    plan: &PerturbationPlan,
    gts: &[ImageAnnotation],
    mode: MatchMode,
) -> Result<EvaluationReport, PerturbError> {
    plan.validate()?;
    if plan.steps.iter().any(|s| matches!(s, Step::CorruptText { .. })) {
        return Err(PerturbError::NotAnalytic("text corruption has no closed-form effect".into()));
    }
    let f = plan.total_jitter();
    if f > MAX_ANALYTIC_JITTER {
        return Err(PerturbError::NotAnalytic(alloc::format!("total jitter {f} exceeds {MAX_ANALYTIC_JITTER}")));
    }
    let mut all = Vec::with_capacity(gts.len());
    for g in gts {
        identity_forced(g, f)?;
        all.push(id_space_counts(&apply(plan, g)?, g));
    }
    Ok(EvaluationReport::from_image_counts(all, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{iou, score_images};
    use crate::model::{ConditionRole, ConditionWord, Pattern, Prediction};
    use alloc::vec;
    use proptest::prelude::*;

    fn obj(id: u32, class: ObjectClass) -> DetectedObject {
        let x = (id % 9) as u16 * 110;
        let y = (id / 9) as u16 * 110;
        DetectedObject { id: ObjectId(id), class, bbox: BBox::new(x, y, x + 100, y + 100).unwrap() }
    }

    fn ids(v: &[u32]) -> Vec<ObjectId> {
        v.iter().copied().map(ObjectId).collect()
    }

    /// `n` one-step reactions; reaction `i` uses molecules 3i and 3i+2 and
    /// a molecule condition 3i+1 when `agents` is set.
    fn image(id: &str, n: u32, agents: bool) -> ImageAnnotation {
        let mut objects = Vec::new();
        let mut reactions = Vec::new();
        for i in 0..n {
            objects.push(obj(3 * i, ObjectClass::Str));
            objects.push(obj(3 * i + 1, if agents { ObjectClass::Str } else { ObjectClass::Txt }));
            objects.push(obj(3 * i + 2, ObjectClass::Str));
            reactions.push(ReactionAnnotation {
                reactants: ids(&[3 * i]),
                conditions: ids(&[3 * i + 1]),
                products: ids(&[3 * i + 2]),
            });
        }
        let smiles = objects.iter().filter(|o| o.class == ObjectClass::Str).map(|o| (o.id, "C".into())).collect();
        let condition_texts = objects
            .iter()
            .filter(|o| o.class == ObjectClass::Txt)
            .map(|o| (o.id, vec![ConditionWord::new("THF", ConditionRole::Svt)]))
            .collect();
        ImageAnnotation {
            image_id: id.into(),
            width_px: 1000,
            height_px: 1000,
            pattern: Pattern::SingleLine,
            objects,
            reactions,
            condition_texts,
            smiles,
        }
    }

    fn preds(v: &[ImageAnnotation]) -> Vec<Prediction> {
        v.iter().map(ImageAnnotation::to_prediction).collect()
    }

    #[test]
    fn empty_plan_is_identity() {
        let g = image("a", 3, true);
        assert_eq!(apply(&PerturbationPlan::default(), &g).unwrap(), g);
        let r = expected_report(&PerturbationPlan::default(), &[g], MatchMode::Both).unwrap();
        for m in [r.hard.unwrap(), r.soft.unwrap()] {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn drop_one_of_four() {
        let g = image("a", 4, false);
        let plan = PerturbationPlan::new(1, vec![Step::DropReactions { count: 1 }]);
        let p = apply(&plan, &g).unwrap();
        assert_eq!(p.reactions.len(), 3);
        assert_eq!(p.objects.len(), 9);
        let r = expected_report(&plan, &[g], MatchMode::Both).unwrap();
        for m in [r.hard.unwrap(), r.soft.unwrap()] {
            assert_eq!(m.precision, 1.0);
            assert_eq!(m.recall, 0.75);
            assert!((m.f1 - 6.0 / 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn drop_three_of_three() {
        let g = image("a", 3, false);
        let plan = PerturbationPlan::new(1, vec![Step::DropReactions { count: 3 }]);
        let p = apply(&plan, &g).unwrap();
        assert!(p.reactions.is_empty() && p.objects.is_empty() && p.smiles.is_empty());
        let plan = PerturbationPlan::new(1, vec![Step::DropReactions { count: 4 }]);
        assert!(matches!(apply(&plan, &g), Err(PerturbError::Inapplicable { step: 0, .. })));
    }

    #[test]
    fn duplicate_keeps_all_ones() {
        let g = image("a", 2, false);
        let plan = PerturbationPlan::new(1, vec![Step::DuplicateReaction { index: 1 }]);
        let p = apply(&plan, &g).unwrap();
        assert_eq!(p.reactions.len(), 3);
        assert_eq!(p.reactions[2], p.reactions[1]);
        let r = expected_report(&plan, core::slice::from_ref(&g), MatchMode::Both).unwrap();
        assert_eq!(r.hard.unwrap().f1, 1.0);
        let bad = PerturbationPlan::new(1, vec![Step::DuplicateReaction { index: 2 }]);
        assert!(apply(&bad, &g).is_err());
    }

    #[test]
    fn relabel_one_of_two() {
        let g = image("a", 2, true);
        let plan = PerturbationPlan::new(3, vec![Step::RelabelConditionAsReactant { count: 1 }]);
        let p = apply(&plan, &g).unwrap();
        let moved: Vec<_> = p.reactions.iter().filter(|r| r.reactants.len() == 2).collect();
        assert_eq!(moved.len(), 1);
        assert!(moved[0].conditions.is_empty());
        let r = expected_report(&plan, core::slice::from_ref(&g), MatchMode::Both).unwrap();
        let (h, s) = (r.hard.unwrap(), r.soft.unwrap());
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        assert_eq!((h.precision, h.recall), (0.5, 0.5));
        // the metric itself agrees
        let got = score_images(&preds(&[p]), &[g], MatchMode::Both).unwrap();
        assert_eq!(got, r);
    }

    #[test]
    fn relabel_needs_molecule_conditions() {
        let g = image("a", 2, false);
        let plan = PerturbationPlan::new(3, vec![Step::RelabelConditionAsReactant { count: 1 }]);
        assert!(matches!(apply(&plan, &g), Err(PerturbError::Inapplicable { .. })));
    }

    #[test]
    fn corrupt_text_is_not_analytic() {
        let g = image("a", 2, false);
        let plan = PerturbationPlan::new(3, vec![Step::CorruptText { char_error_rate: 0.5 }]);
        let p = apply(&plan, &g).unwrap();
        assert_eq!(p.reactions, g.reactions);
        assert!(p.condition_texts.values().flatten().all(|w| w.is_valid() && w.text.chars().count() == 3));
        assert!(matches!(expected_report(&plan, &[g], MatchMode::Both), Err(PerturbError::NotAnalytic(_))));
        let never = PerturbationPlan::new(3, vec![Step::CorruptText { char_error_rate: 0.0 }]);
        let g = image("b", 2, false);
        assert_eq!(apply(&never, &g).unwrap(), g);
    }

    #[test]
    fn large_jitter_is_not_analytic() {
        let g = image("a", 2, false);
        let plan = PerturbationPlan::new(3, vec![Step::JitterBoxes { max_shift_fraction: 0.2 }]);
        assert!(matches!(expected_report(&plan, core::slice::from_ref(&g), MatchMode::Both), Err(PerturbError::NotAnalytic(_))));
        let split = PerturbationPlan::new(
            3,
            vec![Step::JitterBoxes { max_shift_fraction: 0.06 }, Step::JitterBoxes { max_shift_fraction: 0.06 }],
        );
        assert!(expected_report(&split, &[g], MatchMode::Both).is_err());
    }

    #[test]
    fn crowded_boxes_are_not_analytic() {
        let mut g = image("a", 2, false);
        g.objects[1].bbox = g.objects[0].bbox;
        let plan = PerturbationPlan::new(3, vec![Step::JitterBoxes { max_shift_fraction: 0.05 }]);
        assert!(matches!(expected_report(&plan, &[g], MatchMode::Both), Err(PerturbError::NotAnalytic(_))));
    }

    #[test]
    fn invalid_fractions() {
        for f in [1.0, -0.1, f64::NAN] {
            let plan = PerturbationPlan::new(0, vec![Step::JitterBoxes { max_shift_fraction: f }]);
            assert_eq!(plan.validate(), Err(PerturbError::InvalidFraction { step: 0 }));
        }
    }

    #[test]
    fn plan_json_shape() {
        let plan = PerturbationPlan::new(7, vec![Step::DropReactions { count: 1 }]);
        let s = serde_json::to_string(&plan).unwrap();
        assert_eq!(s, r#"{"steps":[{"op":"drop_reactions","count":1}],"seed":7}"#);
        let back: PerturbationPlan = serde_json::from_str(&s).unwrap();
        assert_eq!(back, plan);
    }

    proptest! {
        #[test]
        fn jitter_keeps_iou_above_half(
            x in 0u16..900, y in 0u16..900, w in 10u16..100, h in 10u16..100,
            f in 0.0f64..=0.1, seed: u64,
        ) {
            let b = BBox::new(x, y, (x + w).min(999), (y + h).min(999)).unwrap();
            let mut rng = crate::seed::rng_for(seed, 0);
            let j = jitter(b, f, &mut rng);
            prop_assert_eq!((j.width(), j.height()), (b.width(), b.height()));
            prop_assert!(iou(&b, &j) > 0.5);
            prop_assert!(u32::from(j.x_min()).abs_diff(u32::from(b.x_min())) <= (f * f64::from(b.width())) as u32);
        }

        #[test]
        fn oracle_agrees_with_metric(n in 1u32..6, agents: bool, seed: u64, drop in 0usize..3, dup: bool, relabel in 0usize..3, f in 0.0f64..=0.1) {
            let gts = vec![image("a", n, agents), image("b", n + 1, agents)];
            let mut steps = vec![Step::JitterBoxes { max_shift_fraction: f }];
            if agents {
                steps.push(Step::RelabelConditionAsReactant { count: relabel.min(n as usize) });
            }
            steps.push(Step::DropReactions { count: drop.min(n as usize) });
            if dup && n > (drop as u32) {
                steps.push(Step::DuplicateReaction { index: 0 });
            }
            let plan = PerturbationPlan::new(seed, steps);
            let predicted = apply_corpus(&plan, &gts).unwrap();
            let got = score_images(&preds(&predicted), &gts, MatchMode::Both).unwrap();
            prop_assert_eq!(got, expected_report(&plan, &gts, MatchMode::Both).unwrap());
        }

        #[test]
        fn dropping_more_never_raises_recall(n in 1u32..8, seed: u64) {
            let g = image("a", n, false);
            let mut last = f64::INFINITY;
            for k in 0..=n as usize {
                let plan = PerturbationPlan::new(seed, vec![Step::DropReactions { count: k }]);
                let r = expected_report(&plan, core::slice::from_ref(&g), MatchMode::Both).unwrap();
                let rec = r.hard.unwrap().recall;
                prop_assert!(rec <= last);
                prop_assert_eq!(rec, (n as usize - k) as f64 / n as f64);
                last = rec;
            }
        }
    }
}
