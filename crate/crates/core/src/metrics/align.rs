use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::model::{BBox, DetectedObject, ObjectId};

/// A pair aligns only when its IoU is strictly greater than this.
pub const IOU_THRESHOLD: f64 = 0.5;

/// Intersection over union on bin areas.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let w = a.x_max().min(b.x_max()).saturating_sub(a.x_min().max(b.x_min()));
    let h = a.y_max().min(b.y_max()).saturating_sub(a.y_min().max(b.y_min()));
    let inter = u64::from(w) * u64::from(h);
    let union = u64::from(a.area()) + u64::from(b.area()) - inter;
    inter as f64 / union as f64
}

/// Injective map from predicted to ground-truth object ids.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AlignmentMap {
    pairs: BTreeMap<ObjectId, (ObjectId, f64)>,
}

impl AlignmentMap {
    pub fn get(&self, pred: ObjectId) -> Option<ObjectId> {
        self.pairs.get(&pred).map(|&(g, _)| g)
    }

    pub fn iou_of(&self, pred: ObjectId) -> Option<f64> {
        self.pairs.get(&pred).map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `(pred, gt, iou)` in predicted-id order.
    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, ObjectId, f64)> + '_ {
        self.pairs.iter().map(|(&p, &(g, v))| (p, g, v))
    }
}

/// Greedy matching: all cross pairs above the threshold, taken in
/// descending IoU order (ties by pred id, then gt id), each endpoint used once.
pub fn align_objects(pred: &[DetectedObject], gt: &[DetectedObject]) -> AlignmentMap {
    let mut cands: Vec<(f64, ObjectId, ObjectId)> = Vec::new();
    for p in pred {
        for g in gt {
            let v = iou(&p.bbox, &g.bbox);
            if v > IOU_THRESHOLD {
                cands.push((v, p.id, g.id));
            }
        }
    }
    cands.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let mut used_gt = BTreeSet::new();
    let mut map = AlignmentMap::default();
    for (v, p, g) in cands {
        if map.pairs.contains_key(&p) || used_gt.contains(&g) {
            continue;
        }
        used_gt.insert(g);
        map.pairs.insert(p, (g, v));
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ObjectClass;
    use alloc::vec;
    use proptest::prelude::*;

    fn b(x0: u16, y0: u16, x1: u16, y1: u16) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn o(id: u32, bb: BBox) -> DetectedObject {
        DetectedObject { id: ObjectId(id), class: ObjectClass::Str, bbox: bb }
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&b(0, 0, 10, 10), &b(0, 0, 10, 10)), 1.0);
        assert_eq!(iou(&b(0, 0, 10, 10), &b(20, 20, 30, 30)), 0.0);
        assert_eq!(iou(&b(0, 0, 10, 10), &b(10, 0, 20, 10)), 0.0);
        assert_eq!(iou(&b(0, 0, 10, 10), &b(5, 0, 15, 10)), 50.0 / 150.0);
    }

    #[test]
    fn identity_alignment() {
        let objs = vec![o(0, b(0, 0, 10, 10)), o(1, b(50, 50, 90, 90)), o(2, b(200, 0, 300, 40))];
        let m = align_objects(&objs, &objs);
        assert_eq!(m.len(), 3);
        for (p, g, v) in m.iter() {
            assert_eq!(p, g);
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn exactly_half_does_not_align() {
        // inter 100, union 200
        let m = align_objects(&[o(0, b(0, 0, 10, 10))], &[o(0, b(0, 0, 10, 20))]);
        assert_eq!(iou(&b(0, 0, 10, 10), &b(0, 0, 10, 20)), 0.5);
        assert!(m.is_empty());
        // one more bin of overlap tips it over
        let m = align_objects(&[o(0, b(0, 0, 10, 11))], &[o(0, b(0, 0, 10, 20))]);
        assert_eq!(m.len(), 1);
    }

    /// Best total-IoU injective matching by exhaustive search.
    fn brute_force(pred: &[DetectedObject], gt: &[DetectedObject]) -> (f64, Vec<Option<usize>>) {
        fn go(
            i: usize,
            pred: &[DetectedObject],
            gt: &[DetectedObject],
            used: &mut Vec<bool>,
            cur: &mut Vec<Option<usize>>,
            best: &mut (f64, Vec<Option<usize>>),
            score: f64,
        ) {
            if i == pred.len() {
                if score > best.0 {
                    *best = (score, cur.clone());
                }
                return;
            }
            cur.push(None);
            go(i + 1, pred, gt, used, cur, best, score);
            cur.pop();
            for j in 0..gt.len() {
                let v = iou(&pred[i].bbox, &gt[j].bbox);
                if !used[j] && v > IOU_THRESHOLD {
                    used[j] = true;
                    cur.push(Some(j));
                    go(i + 1, pred, gt, used, cur, best, score + v);
                    cur.pop();
                    used[j] = false;
                }
            }
        }
        let mut best = (-1.0, Vec::new());
        go(0, pred, gt, &mut vec![false; gt.len()], &mut Vec::new(), &mut best, 0.0);
        best
    }

    #[test]
    fn picks_the_higher_overlap() {
        // pred (0,0,100,100); gt A overlaps at 0.8, gt B at 0.6
        let pred = vec![o(0, b(0, 0, 100, 100))];
        let gt = vec![o(10, b(0, 0, 100, 80)), o(11, b(0, 0, 100, 60))];
        assert_eq!(iou(&pred[0].bbox, &gt[0].bbox), 0.8);
        assert_eq!(iou(&pred[0].bbox, &gt[1].bbox), 0.6);
        let m = align_objects(&pred, &gt);
        assert_eq!(m.get(ObjectId(0)), Some(ObjectId(10)));
        let (score, assign) = brute_force(&pred, &gt);
        assert_eq!(assign, vec![Some(0)]);
        assert_eq!(score, 0.8);
    }

    fn any_box() -> impl Strategy<Value = BBox> {
        (0u16..900, 0u16..900, 1u16..100, 1u16..100).prop_map(|(x, y, w, h)| b(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_properties(a in any_box(), c in any_box()) {
            let v = iou(&a, &c);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, iou(&c, &a));
            prop_assert_eq!(iou(&a, &a), 1.0);
        }

        #[test]
        fn alignment_injective_above_threshold(
            pb in proptest::collection::vec(any_box(), 0..8),
            gb in proptest::collection::vec(any_box(), 0..8),
        ) {
            let pred: Vec<_> = pb.into_iter().enumerate().map(|(i, bb)| o(i as u32, bb)).collect();
            let gt: Vec<_> = gb.into_iter().enumerate().map(|(i, bb)| o(i as u32, bb)).collect();
            let m = align_objects(&pred, &gt);
            let mut seen = BTreeSet::new();
            for (p, g, v) in m.iter() {
                prop_assert!(v > IOU_THRESHOLD);
                prop_assert!(seen.insert(g));
                let pb = pred.iter().find(|x| x.id == p).unwrap().bbox;
                let gb = gt.iter().find(|x| x.id == g).unwrap().bbox;
                prop_assert_eq!(iou(&pb, &gb), v);
            }
        }
    }
}
