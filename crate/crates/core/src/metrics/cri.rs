use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ratio, MetricsError, ScoreTriple};
use crate::model::{ConditionRecord, ConditionRole, ConditionWord, ObjectId};

/// A word enters role scoring only when its OCR accuracy is strictly above this.
pub const OCR_THRESHOLD: f64 = 0.8;

/// Character-level edit distance.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = diag + usize::from(ca != *cb);
            diag = row[j + 1];
            row[j + 1] = sub.min(row[j] + 1).min(diag + 1);
        }
    }
    row[b.len()]
}

fn strip(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Characters credited to `pred` against `gt`: `max(0, |gt| - lev)`.
fn correct_chars(pred: &str, gt: &str) -> (usize, usize) {
    let (p, g) = (strip(pred), strip(gt));
    let len = g.chars().count();
    (len.saturating_sub(levenshtein(&p, &g)), len)
}

/// `max(0, 1 - lev(pred, gt) / |gt|)`, whitespace removed, case kept.
pub fn ocr_accuracy(pred: &str, gt: &str) -> Result<f64, MetricsError> {
    match correct_chars(pred, gt) {
        (_, 0) => Err(MetricsError::EmptyGroundTruth),
        (c, n) => Ok(c as f64 / n as f64),
    }
}

fn word_accuracy(pred: &str, gt: &str) -> f64 {
    ocr_accuracy(pred, gt).unwrap_or(0.0)
}

/// In-order alignment maximizing summed word accuracy. Entry `i` is the
/// predicted word paired with ground-truth word `i`, if any.
fn align_words(pred: &[ConditionWord], gt: &[ConditionWord]) -> Vec<Option<usize>> {
    let (n, m) = (gt.len(), pred.len());
    let acc: Vec<Vec<f64>> =
        gt.iter().map(|g| pred.iter().map(|p| word_accuracy(&p.text, &g.text)).collect()).collect();
    let mut dp = vec![vec![0.0f64; m + 1]; n + 1];
    for i in 1..=n {
        for j in 1..=m {
            dp[i][j] = (dp[i - 1][j - 1] + acc[i - 1][j - 1]).max(dp[i - 1][j]).max(dp[i][j - 1]);
        }
    }
    let mut out = vec![None; n];
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        let diag = dp[i - 1][j - 1] + acc[i - 1][j - 1];
        if acc[i - 1][j - 1] > 0.0 && dp[i][j] == diag {
            out[i - 1] = Some(j - 1);
            i -= 1;
            j -= 1;
        } else if dp[i][j] == dp[i - 1][j] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    out
}

/// Running counts; merge tallies from several texts, then call [`CriTally::report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CriTally {
    pub correct_chars: usize,
    pub total_chars: usize,
    /// Rows are ground-truth roles, columns predicted roles.
    pub confusion: [[u64; 5]; 5],
    pub included: usize,
    pub excluded: usize,
}

impl CriTally {
    pub fn add(&mut self, pred: &[ConditionWord], gt: &[ConditionWord]) {
        let pairs = align_words(pred, gt);
        for (g, p) in gt.iter().zip(pairs) {
            let (c, n) = p.map_or((0, strip(&g.text).chars().count()), |j| correct_chars(&pred[j].text, &g.text));
            self.correct_chars += c;
            self.total_chars += n;
            match p {
                Some(j) if n > 0 && c as f64 / n as f64 > OCR_THRESHOLD => {
                    self.included += 1;
                    self.confusion[g.role.index()][pred[j].role.index()] += 1;
                }
                _ => self.excluded += 1,
            }
        }
    }

    pub fn merge(&mut self, o: &Self) {
        self.correct_chars += o.correct_chars;
        self.total_chars += o.total_chars;
        self.included += o.included;
        self.excluded += o.excluded;
        for (row, orow) in self.confusion.iter_mut().zip(&o.confusion) {
            for (a, b) in row.iter_mut().zip(orow) {
                *a += b;
            }
        }
    }

    pub fn report(&self) -> CriReport {
        let cm = &self.confusion;
        let trace: u64 = (0..5).map(|k| cm[k][k]).sum();
        let per_role = ConditionRole::ALL
            .iter()
            .map(|r| {
                let k = r.index();
                let tp = cm[k][k] as usize;
                let predicted: u64 = (0..5).map(|g| cm[g][k]).sum();
                let actual: u64 = cm[k].iter().sum();
                (*r, ScoreTriple::new(ratio(tp, predicted as usize), ratio(tp, actual as usize)))
            })
            .collect();
        CriReport {
            ocr_accuracy: ratio(self.correct_chars, self.total_chars),
            cri_accuracy: ratio(trace as usize, self.included),
            per_role,
            confusion: self.confusion,
            included_word_count: self.included,
            excluded_word_count: self.excluded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriReport {
    pub ocr_accuracy: f64,
    pub cri_accuracy: f64,
    pub per_role: BTreeMap<ConditionRole, ScoreTriple>,
    pub confusion: [[u64; 5]; 5],
    pub included_word_count: usize,
    pub excluded_word_count: usize,
}

pub fn cri_evaluate(pred: &[ConditionWord], gt: &[ConditionWord]) -> CriReport {
    let mut t = CriTally::default();
    t.add(pred, gt);
    t.report()
}

/// Pairs records by `(image_id, object_id)`. Ground-truth texts without a
/// prediction are scored against an empty word list.
pub fn cri_evaluate_corpus(
    preds: &[ConditionRecord],
    gts: &[ConditionRecord],
) -> Result<CriReport, MetricsError> {
    let key = |r: &ConditionRecord| format!("{}#{}", r.image_id, r.object_id);
    let mut gt_map: BTreeMap<(&str, ObjectId), &ConditionRecord> = BTreeMap::new();
    for g in gts {
        if gt_map.insert((&g.image_id, g.object_id), g).is_some() {
            return Err(MetricsError::DuplicateImage(key(g)));
        }
    }
    let mut pred_map: BTreeMap<(&str, ObjectId), &ConditionRecord> = BTreeMap::new();
    for p in preds {
        let k = (p.image_id.as_str(), p.object_id);
        if !gt_map.contains_key(&k) {
            return Err(MetricsError::UnknownImage(key(p)));
        }
        if pred_map.insert(k, p).is_some() {
            return Err(MetricsError::DuplicateImage(key(p)));
        }
    }
    let mut t = CriTally::default();
    for (k, g) in &gt_map {
        let words = pred_map.get(k).map_or(&[][..], |p| &p.words[..]);
        t.add(words, &g.words);
    }
    Ok(t.report())
}
