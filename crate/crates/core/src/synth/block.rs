use alloc::vec::Vec;

use super::glyph::{text_width, Glyph, GlyphKind, PlacedWord, Primitive, LINE_HEIGHT};
use crate::model::{split_words, ConditionRole, ConditionWord, ReactionRecord};

/// Condition items grouped for drawing: agents above the arrow, then
/// solvent, temperature, time, and yield below it. Each item is one record
/// entry split into words.
pub fn condition_items(record: &ReactionRecord) -> [Vec<Vec<ConditionWord>>; 2] {
    let item = |t: &str, role| split_words(t, role).collect::<Vec<_>>();
    let above = record.agents.iter().map(|a| item(a, ConditionRole::Agt)).collect();
    let mut below: Vec<_> = record.solvents.iter().map(|s| item(s, ConditionRole::Svt)).collect();
    let scalars = [
        (&record.temperature, ConditionRole::Tem),
        (&record.time, ConditionRole::Time),
        (&record.yield_pct, ConditionRole::Yld),
    ];
    for (v, role) in scalars {
        if let Some(t) = v {
            below.push(item(t, role));
        }
    }
    [above, below]
}

struct Line {
    /// `(word, comma follows)`
    tokens: Vec<(ConditionWord, bool)>,
    width: f64,
}

/// Greedy wrap at word boundaries. Items are comma-separated; a word wider
/// than `max_width` gets a line to itself.
fn wrap(items: &[Vec<ConditionWord>], font: f64, max_width: f64) -> Vec<Line> {
    let space = text_width(" ", font);
    let comma = text_width(",", font);
    let mut lines: Vec<Line> = Vec::new();
    let mut cur = Line { tokens: Vec::new(), width: 0.0 };
    for (i, item) in items.iter().enumerate() {
        for (j, w) in item.iter().enumerate() {
            let tail = j + 1 == item.len() && i + 1 < items.len();
            let adv = text_width(&w.text, font) + if tail { comma } else { 0.0 };
            if !cur.tokens.is_empty() && cur.width + space + adv > max_width {
                lines.push(core::mem::replace(&mut cur, Line { tokens: Vec::new(), width: 0.0 }));
            }
            if !cur.tokens.is_empty() {
                cur.width += space;
            }
            cur.width += adv;
            cur.tokens.push((w.clone(), tail));
        }
    }
    if !cur.tokens.is_empty() {
        lines.push(cur);
    }
    lines
}

/// Lays out a record's condition text as one block: agent lines above the
/// arrow centerline, the remaining roles below. Lines are centered in a
/// block at least `min_width` wide.
pub fn compose_condition_block(record: &ReactionRecord, font: f64, max_line: f64, min_width: f64) -> Glyph {
    let [above, below] = condition_items(record);
    let (above, below) = (wrap(&above, font, max_line), wrap(&below, font, max_line));
    let pad = 4.0 + 0.2 * font;
    let gap = 0.35 * font + 2.0;
    let lh = LINE_HEIGHT * font;
    let widest = above.iter().chain(&below).map(|l| l.width).fold(0.0, f64::max);
    let width = (widest + 2.0 * pad).max(min_width);
    let above_h = above.len() as f64 * lh;
    let centerline = if above.is_empty() { pad - gap } else { pad + above_h + gap };
    let height = match (above.is_empty(), below.is_empty()) {
        (false, false) => centerline + gap + below.len() as f64 * lh + pad,
        (false, true) => pad + above_h + pad,
        (true, _) => pad + below.len() as f64 * lh + pad,
    };
    let below_top = if above.is_empty() { pad } else { centerline + gap };

    let space = text_width(" ", font);
    let mut words = Vec::new();
    let mut primitives = Vec::new();
    let tops = (0..above.len()).map(|i| pad + i as f64 * lh).chain((0..below.len()).map(|i| below_top + i as f64 * lh));
    for (line, top) in above.iter().chain(&below).zip(tops) {
        let mut x = (width - line.width) / 2.0;
        let y = top + (lh - font) / 2.0;
        let baseline = y + 0.8 * font;
        for (w, comma) in &line.tokens {
            let ww = text_width(&w.text, font);
            primitives.push(Primitive::Text { x, y: baseline, size: font, text: w.text.clone(), middle: false });
            words.push(PlacedWord { word: w.clone(), x, y, width: ww, height: font });
            x += ww;
            if *comma {
                primitives.push(Primitive::Text { x, y: baseline, size: font, text: ",".into(), middle: false });
                x += text_width(",", font);
            }
            x += space;
        }
    }
    Glyph { kind: GlyphKind::TextBlock { words, centerline }, width, height, primitives }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConditionRole::*;
    use alloc::string::String;
    use alloc::vec;

    fn words_of(g: &Glyph) -> (Vec<PlacedWord>, f64) {
        match &g.kind {
            GlyphKind::TextBlock { words, centerline } => (words.clone(), *centerline),
            _ => panic!("not a block"),
        }
    }

    fn line_texts(g: &Glyph) -> Vec<String> {
        // rebuild each rendered line from the text primitives, in order
        let mut lines: Vec<(f64, String)> = Vec::new();
        for p in &g.primitives {
            if let Primitive::Text { y, text, .. } = p {
                match lines.last_mut() {
                    Some((ly, s)) if *ly == *y => {
                        if text != "," {
                            s.push(' ');
                        }
                        s.push_str(text);
                    }
                    _ => lines.push((*y, text.clone())),
                }
            }
        }
        lines.into_iter().map(|(_, s)| s).collect()
    }

    #[test]
    fn full_record_splits_above_and_below() {
        let r = ReactionRecord {
            reactant_smiles: vec!["C".into()],
            product_smiles: vec!["CO".into()],
            agents: vec!["Pd".into(), "H2".into()],
            solvents: vec!["THF".into()],
            temperature: Some("25C".into()),
            time: Some("2h".into()),
            yield_pct: Some("90%".into()),
        };
        let g = compose_condition_block(&r, 12.0, 400.0, 0.0);
        assert_eq!(line_texts(&g), vec!["Pd, H2", "THF, 25C, 2h, 90%"]);
        let (words, cl) = words_of(&g);
        assert_eq!(words.len(), 6);
        for w in &words {
            let above = w.center().1 < cl;
            assert_eq!(above, w.word.role == Agt, "{:?}", w.word);
        }
    }

    #[test]
    fn empty_record_gives_empty_block() {
        let r = ReactionRecord { reactant_smiles: vec!["C".into()], product_smiles: vec!["C".into()], ..Default::default() };
        let g = compose_condition_block(&r, 12.0, 400.0, 80.0);
        assert!(words_of(&g).0.is_empty());
        assert!(!g.is_object());
        assert!(g.width > 0.0 && g.height > 0.0);
    }

    #[test]
    fn temperature_only_sits_below() {
        let r = ReactionRecord { temperature: Some("reflux".into()), ..Default::default() };
        let g = compose_condition_block(&r, 12.0, 400.0, 0.0);
        let (words, cl) = words_of(&g);
        assert_eq!(words.len(), 1);
        assert_eq!(words[0].word, ConditionWord::new("reflux", Tem));
        assert!(words[0].center().1 > cl);
        assert!(cl < 0.0 + 4.0 + 0.2 * 12.0);
    }

    #[test]
    fn wraps_to_width_and_keeps_words_inside() {
        let r = ReactionRecord {
            agents: vec!["10% Pd/C".into(), "AcOH".into(), "NEt3".into()],
            solvents: vec!["MeOH".into()],
            ..Default::default()
        };
        let g = compose_condition_block(&r, 10.0, 60.0, 0.0);
        assert_eq!(line_texts(&g), vec!["10% Pd/C,", "AcOH, NEt3", "MeOH"]);
        let (words, cl) = words_of(&g);
        for w in &words {
            assert!(w.x >= 0.0 && w.x + w.width <= g.width + 1e-9);
            assert!(w.y >= 0.0 && w.y + w.height <= g.height + 1e-9);
            assert_eq!(w.center().1 < cl, w.word.role == Agt);
        }
    }
}
