use alloc::collections::BTreeSet;

use super::AlignmentMap;
use crate::model::{DetectedObject, ObjectClass, ObjectId, ReactionAnnotation};

/// Aligned image of `ids`, or `None` if any id has no counterpart.
fn aligned<'a>(
    ids: impl Iterator<Item = &'a ObjectId>,
    align: &AlignmentMap,
) -> Option<BTreeSet<ObjectId>> {
    ids.map(|id| align.get(*id)).collect()
}

/// Every slot of `pred` aligns onto exactly the same id set as in `gt`.
pub fn hard_match(pred: &ReactionAnnotation, gt: &ReactionAnnotation, align: &AlignmentMap) -> bool {
    let same = |p: &[ObjectId], g: &[ObjectId]| {
        aligned(p.iter(), align).is_some_and(|set| set == g.iter().copied().collect())
    };
    same(&pred.reactants, &gt.reactants)
        && same(&pred.conditions, &gt.conditions)
        && same(&pred.products, &gt.products)
}

fn structures<'a>(
    ids: impl Iterator<Item = &'a ObjectId> + 'a,
    objs: &'a [DetectedObject],
) -> impl Iterator<Item = &'a ObjectId> + 'a {
    ids.filter(move |id| objs.iter().any(|o| o.id == **id && o.class == ObjectClass::Str))
}

/// Molecule objects only, reactants and conditions pooled; text ignored.
pub fn soft_match(
    pred: &ReactionAnnotation,
    gt: &ReactionAnnotation,
    align: &AlignmentMap,
    pred_objs: &[DetectedObject],
    gt_objs: &[DetectedObject],
) -> bool {
    let gt_left: BTreeSet<ObjectId> =
        structures(gt.reactants.iter().chain(&gt.conditions), gt_objs).copied().collect();
    let gt_right: BTreeSet<ObjectId> = structures(gt.products.iter(), gt_objs).copied().collect();
    let pred_left = structures(pred.reactants.iter().chain(&pred.conditions), pred_objs);
    let pred_right = structures(pred.products.iter(), pred_objs);
    aligned(pred_left, align).is_some_and(|s| s == gt_left)
        && aligned(pred_right, align).is_some_and(|s| s == gt_right)
}
