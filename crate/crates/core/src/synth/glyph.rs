use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};

use super::smiles::{element_counts, hill_formula, is_smiles};
use super::SynthError;
use crate::model::ConditionWord;

/// Monospace advance as a fraction of the font size.
pub const CHAR_WIDTH: f64 = 0.6;
/// Line pitch as a fraction of the font size.
pub const LINE_HEIGHT: f64 = 1.3;

pub fn text_width(s: &str, font: f64) -> f64 {
    s.chars().count() as f64 * CHAR_WIDTH * font
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadStyle {
    Filled,
    Open,
}

/// Drawing instruction in glyph-local coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    Rect { x: f64, y: f64, w: f64, h: f64, rx: f64, stroke: f64 },
    /// `y` is the baseline.
    Text { x: f64, y: f64, size: f64, text: String, middle: bool },
    Line { x1: f64, y1: f64, x2: f64, y2: f64, stroke: f64 },
    Polyline { points: Vec<(f64, f64)>, stroke: f64 },
    Polygon { points: Vec<(f64, f64)>, fill: bool, stroke: f64 },
}

/// A condition word and its box inside a text block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedWord {
    pub word: ConditionWord,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl PlacedWord {
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GlyphKind {
    Molecule { smiles: String },
    /// Words above `centerline` belong over the arrow, the rest under it.
    /// `centerline` may lie outside the block when one side is empty.
    TextBlock { words: Vec<PlacedWord>, centerline: f64 },
    Plus,
    /// `anchor` is where a condition block's centerline attaches.
    Arrow { points: Vec<(f64, f64)>, head: HeadStyle, anchor: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Glyph {
    pub kind: GlyphKind,
    pub width: f64,
    pub height: f64,
    pub primitives: Vec<Primitive>,
}

impl Glyph {
    pub fn is_object(&self) -> bool {
        match &self.kind {
            GlyphKind::Molecule { .. } => true,
            GlyphKind::TextBlock { words, .. } => !words.is_empty(),
            _ => false,
        }
    }

    pub fn plus(font: f64, stroke: f64) -> Self {
        let s = font;
        let m = s / 2.0;
        Glyph {
            kind: GlyphKind::Plus,
            width: s,
            height: s,
            primitives: vec![
                Primitive::Line { x1: 0.0, y1: m, x2: s, y2: m, stroke },
                Primitive::Line { x1: m, y1: 0.0, x2: m, y2: s, stroke },
            ],
        }
    }

    /// Arrow along `points` given in layout space. Returns the glyph and the
    /// layout position of its local origin, the corner of the box around the
    /// shaft and head.
    pub fn arrow(points: &[(f64, f64)], anchor: (f64, f64), head: HeadStyle, stroke: f64) -> (Self, (f64, f64)) {
        let n = points.len();
        let (tip, from) = (points[n - 1], points[n - 2]);
        let (dx, dy) = (tip.0 - from.0, tip.1 - from.1);
        let len = libm::hypot(dx, dy).max(1e-9);
        let (ux, uy) = (dx / len, dy / len);
        let size = 4.0 + 2.0 * stroke;
        let base = (tip.0 - ux * size * 1.6, tip.1 - uy * size * 1.6);
        let wing = |side: f64| (base.0 - uy * size * side, base.1 + ux * size * side);
        let head_pts = [wing(1.0), tip, wing(-1.0)];
        let all = || points.iter().chain(&head_pts);
        let pad = stroke / 2.0;
        let x0 = all().map(|p| p.0).fold(f64::INFINITY, f64::min) - pad;
        let y0 = all().map(|p| p.1).fold(f64::INFINITY, f64::min) - pad;
        let x1 = all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max) + pad;
        let y1 = all().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max) + pad;
        let loc = |&(x, y): &(f64, f64)| (x - x0, y - y0);
        let shaft: Vec<_> = points.iter().map(loc).collect();
        let head_local: Vec<_> = head_pts.iter().map(loc).collect();
        let head_prim = match head {
            HeadStyle::Filled => Primitive::Polygon { points: head_local, fill: true, stroke },
            HeadStyle::Open => Primitive::Polyline { points: head_local, stroke },
        };
        let g = Glyph {
            kind: GlyphKind::Arrow { points: shaft.clone(), head, anchor: loc(&anchor) },
            width: x1 - x0,
            height: y1 - y0,
            primitives: vec![Primitive::Polyline { points: shaft, stroke }, head_prim],
        };
        (g, (x0, y0))
    }
}

/// Turns a SMILES string into a molecule glyph.
pub trait Depictor: Sync {
    /// Whether `depict` would succeed; decides which agents are drawn as structures.
    fn accepts(&self, smiles: &str) -> bool;

    /// Must be deterministic for a fixed `(smiles, scale, rng state)`.
    fn depict(&self, smiles: &str, scale: f64, rng: &mut dyn RngCore) -> Result<Glyph, SynthError>;
}

/// Rounded box labelled with the Hill formula. Size grows with atom count.
#[derive(Debug, Clone, Copy, Default)]
pub struct FormulaDepictor;

const FORMULA_FONT: f64 = 14.0;

impl Depictor for FormulaDepictor {
    fn accepts(&self, smiles: &str) -> bool {
        is_smiles(smiles)
    }

    fn depict(&self, smiles: &str, scale: f64, rng: &mut dyn RngCore) -> Result<Glyph, SynthError> {
        let formula = hill_formula(smiles).map_err(|e| SynthError::Depict(smiles.into(), e))?;
        let heavy: u32 = element_counts(smiles)
            .map_err(|e| SynthError::Depict(smiles.into(), e))?
            .iter()
            .filter(|(k, _)| k.as_str() != "H")
            .map(|(_, v)| *v)
            .sum();
        let bulk = libm::sqrt(f64::from(heavy.min(60)));
        let jitter = rng.gen_range(0.95..1.05);
        let font = FORMULA_FONT * scale;
        let w = (text_width(&formula, font) + 24.0 * scale).max((50.0 + 14.0 * bulk) * scale) * jitter;
        let h = (40.0 + 8.0 * bulk) * scale * jitter;
        let stroke = 1.5 * scale;
        Ok(Glyph {
            kind: GlyphKind::Molecule { smiles: smiles.into() },
            width: w,
            height: h,
            primitives: vec![
                Primitive::Rect { x: 0.0, y: 0.0, w, h, rx: 8.0 * scale, stroke },
                Primitive::Text { x: w / 2.0, y: h / 2.0 + font * 0.35, size: font, text: formula, middle: true },
            ],
        })
    }
}
