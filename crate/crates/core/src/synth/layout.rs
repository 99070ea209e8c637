use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::glyph::{Depictor, Glyph, GlyphKind, HeadStyle};
use super::SynthError;
use crate::geometry::{pixel_to_bins, ImageDims, PixelRect};
use crate::model::{
    DetectedObject, ImageAnnotation, ObjectClass, ObjectId, Pattern, ReactionAnnotation, ReactionRecord,
    ReactionRole, StyleConfig,
};
use crate::validate::validate_annotation;

/// Smallest uniform shrink applied when fitting a scheme to the canvas.
pub const MIN_SCALE: f64 = 0.55;

/// Style values drawn for one image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageStyle {
    pub font_px: f64,
    pub line_width_px: f64,
    pub molecule_scale: f64,
    pub head: HeadStyle,
}

impl ImageStyle {
    pub fn sample(cfg: &StyleConfig, rng: &mut impl rand::Rng) -> Self {
        let f = cfg.font_size_px;
        let l = cfg.line_width_px;
        let m = cfg.molecule_scale;
        Self {
            font_px: f64::from(rng.gen_range(f.min..=f.max)),
            line_width_px: f64::from(rng.gen_range(l.min..=l.max)),
            molecule_scale: if m.min < m.max { rng.gen_range(m.min..=m.max) } else { m.min },
            head: if rng.gen_bool(0.5) { HeadStyle::Filled } else { HeadStyle::Open },
        }
    }
}

impl Default for ImageStyle {
    fn default() -> Self {
        Self { font_px: 14.0, line_width_px: 2.0, molecule_scale: 1.0, head: HeadStyle::Filled }
    }
}

/// Everything a planner needs besides the records.
#[derive(Clone, Copy)]
pub struct PlanContext<'a> {
    pub style: ImageStyle,
    pub depictor: &'a dyn Depictor,
    pub canvas: ImageDims,
    pub padding: f64,
    /// Line budget for wrapping; the padded canvas width when `None`.
    pub wrap_width: Option<f64>,
    /// Chance that an agent the depictor accepts is drawn as a structure.
    pub structure_agent_prob: f64,
}

impl<'a> PlanContext<'a> {
    pub fn new(depictor: &'a dyn Depictor, canvas: ImageDims) -> Self {
        Self {
            style: ImageStyle::default(),
            depictor,
            canvas,
            padding: 20.0,
            wrap_width: None,
            structure_agent_prob: 0.0,
        }
    }

    pub fn line_budget(&self) -> f64 {
        self.wrap_width.unwrap_or(f64::from(self.canvas.width) - 2.0 * self.padding)
    }
}

/// Which record field a glyph was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    Reactant(usize),
    Agent(usize),
    Product(usize),
    /// The record's condition text.
    Conditions,
}

impl Source {
    fn order(self) -> usize {
        match self {
            Self::Reactant(k) | Self::Agent(k) | Self::Product(k) => k,
            Self::Conditions => usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub reaction: usize,
    pub role: ReactionRole,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    /// Molecules and text blocks; shared glyphs belong to several reactions.
    Component(Vec<Membership>),
    Arrow { reaction: usize },
    Decoration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedGlyph {
    pub glyph: Glyph,
    pub x: f64,
    pub y: f64,
    pub scale: f64,
    pub provenance: Provenance,
}

impl PlacedGlyph {
    pub fn new(glyph: Glyph, x: f64, y: f64, provenance: Provenance) -> Self {
        Self { glyph, x, y, scale: 1.0, provenance }
    }

    pub fn extent(&self) -> PixelRect {
        PixelRect::new(
            self.x,
            self.y,
            self.x + self.glyph.width * self.scale,
            self.y + self.glyph.height * self.scale,
        )
    }

    /// Maps a glyph-local point into layout space.
    pub fn to_layout(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (self.x + x * self.scale, self.y + y * self.scale)
    }

    pub fn memberships(&self) -> &[Membership] {
        match &self.provenance {
            Provenance::Component(m) => m,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub width: u32,
    pub height: u32,
    pub pattern: Pattern,
    pub glyphs: Vec<PlacedGlyph>,
    /// The records as drawn, one per reaction.
    pub records: Vec<ReactionRecord>,
}

fn overlaps(a: &PixelRect, b: &PixelRect) -> bool {
    a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max
}

/// Indices of the first pair of overlapping molecule, text, or plus glyphs.
pub(crate) fn first_overlap(glyphs: &[PlacedGlyph]) -> Option<(usize, usize)> {
    let solid: Vec<(usize, PixelRect)> = glyphs
        .iter()
        .enumerate()
        .filter(|(_, g)| !matches!(g.glyph.kind, GlyphKind::Arrow { .. }))
        .map(|(i, g)| (i, g.extent()))
        .collect();
    for (n, (i, a)) in solid.iter().enumerate() {
        for (j, b) in &solid[n + 1..] {
            if overlaps(a, b) {
                return Some((*i, *j));
            }
        }
    }
    None
}

pub(crate) fn bounds(glyphs: &[PlacedGlyph]) -> Option<PixelRect> {
    glyphs.iter().map(PlacedGlyph::extent).reduce(|a, b| a.union(&b))
}

impl Layout {
    pub fn empty(canvas: ImageDims, pattern: Pattern) -> Self {
        Self { width: canvas.width, height: canvas.height, pattern, glyphs: Vec::new(), records: Vec::new() }
    }

    /// Scales free-space glyphs uniformly (never enlarging) to fit inside the
    /// padded canvas and centers them.
    pub(crate) fn fit(
        mut glyphs: Vec<PlacedGlyph>,
        records: Vec<ReactionRecord>,
        pattern: Pattern,
        ctx: &PlanContext<'_>,
    ) -> Result<Self, SynthError> {
        let (w, h) = (f64::from(ctx.canvas.width), f64::from(ctx.canvas.height));
        let Some(b) = bounds(&glyphs) else {
            return Ok(Self::empty(ctx.canvas, pattern));
        };
        let s = 1.0f64.min((w - 2.0 * ctx.padding) / b.width()).min((h - 2.0 * ctx.padding) / b.height());
        if s.is_nan() || s < MIN_SCALE {
            return Err(SynthError::LayoutOverflow { scale: s });
        }
        let ox = (w - b.width() * s) / 2.0;
        let oy = (h - b.height() * s) / 2.0;
        for g in &mut glyphs {
            g.x = ox + (g.x - b.x_min) * s;
            g.y = oy + (g.y - b.y_min) * s;
            g.scale *= s;
        }
        let layout = Self { width: ctx.canvas.width, height: ctx.canvas.height, pattern, glyphs, records };
        layout.check()?;
        Ok(layout)
    }

    /// Inside the canvas, no overlapping solid glyphs, full provenance.
    pub fn check(&self) -> Result<(), SynthError> {
        let (w, h) = (f64::from(self.width), f64::from(self.height));
        for (i, g) in self.glyphs.iter().enumerate() {
            let e = g.extent();
            if e.x_min < -1e-6 || e.y_min < -1e-6 || e.x_max > w + 1e-6 || e.y_max > h + 1e-6 {
                return Err(SynthError::OutOfCanvas { glyph: i });
            }
            let ok = match (&g.glyph.kind, &g.provenance) {
                (GlyphKind::Molecule { .. } | GlyphKind::TextBlock { .. }, Provenance::Component(m)) => {
                    !m.is_empty() && m.iter().all(|m| m.reaction < self.records.len())
                }
                (GlyphKind::Arrow { .. }, Provenance::Arrow { reaction }) => *reaction < self.records.len(),
                (GlyphKind::Plus, Provenance::Decoration) => true,
                _ => false,
            };
            if !ok {
                return Err(SynthError::ProvenanceGap { glyph: i });
            }
        }
        if let Some((a, b)) = first_overlap(&self.glyphs) {
            return Err(SynthError::Overlap { a, b });
        }
        Ok(())
    }

    /// Object id per glyph: molecules and non-empty text blocks are numbered
    /// in drawing order.
    pub fn object_ids(&self) -> Vec<Option<ObjectId>> {
        let mut next = 0;
        self.glyphs
            .iter()
            .map(|g| {
                g.glyph.is_object().then(|| {
                    next += 1;
                    ObjectId(next - 1)
                })
            })
            .collect()
    }

    pub fn arrow_for(&self, reaction: usize) -> Option<&PlacedGlyph> {
        self.glyphs.iter().find(|g| matches!(g.provenance, Provenance::Arrow { reaction: r } if r == reaction))
    }
}

/// Ground truth for a checked layout.
pub fn annotate(layout: &Layout, image_id: &str) -> Result<ImageAnnotation, SynthError> {
    let dims = ImageDims::new(layout.width, layout.height);
    let ids = layout.object_ids();
    let mut objects = Vec::new();
    let mut slots: BTreeMap<(usize, ReactionRole), Vec<(usize, ObjectId)>> = BTreeMap::new();
    let mut condition_texts = BTreeMap::new();
    let mut smiles = BTreeMap::new();
    for (i, (g, id)) in layout.glyphs.iter().zip(&ids).enumerate() {
        let Some(id) = *id else { continue };
        let e = g.extent();
        let clamped = PixelRect::new(
            e.x_min.max(0.0),
            e.y_min.max(0.0),
            e.x_max.min(f64::from(dims.width)),
            e.y_max.min(f64::from(dims.height)),
        );
        let bbox = pixel_to_bins(&clamped, dims)?;
        let class = match &g.glyph.kind {
            GlyphKind::Molecule { smiles: s } => {
                smiles.insert(id, s.clone());
                ObjectClass::Str
            }
            GlyphKind::TextBlock { words, .. } => {
                condition_texts.insert(id, words.iter().map(|w| w.word.clone()).collect::<Vec<_>>());
                ObjectClass::Txt
            }
            _ => unreachable!("only molecules and text blocks are objects"),
        };
        objects.push(DetectedObject { id, class, bbox });
        let members = g.memberships();
        if members.is_empty() {
            return Err(SynthError::ProvenanceGap { glyph: i });
        }
        for m in members {
            slots.entry((m.reaction, m.role)).or_default().push((m.source.order(), id));
        }
    }
    let mut reactions: Vec<ReactionAnnotation> = (0..layout.records.len()).map(|_| Default::default()).collect();
    for ((r, role), mut list) in slots {
        let rxn = reactions.get_mut(r).ok_or(SynthError::ProvenanceGap { glyph: usize::MAX })?;
        list.sort();
        rxn.role_mut(role).extend(list.into_iter().map(|(_, id)| id));
    }
    let ann = ImageAnnotation {
        image_id: String::from(image_id),
        width_px: layout.width,
        height_px: layout.height,
        pattern: layout.pattern,
        objects,
        reactions,
        condition_texts,
        smiles,
    };
    let violations = validate_annotation(&ann);
    if violations.is_empty() {
        Ok(ann)
    } else {
        Err(SynthError::InvalidAnnotation(violations))
    }
}

/// A condition word drawn on the wrong side of its arrow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misplaced {
    pub reaction: usize,
    pub word: String,
    pub center_y: f64,
    pub centerline_y: f64,
}

/// Words whose vertical side disagrees with their role: agents must sit
/// above their arrow's centerline, every other role below it.
pub fn role_placement_violations(layout: &Layout) -> Vec<Misplaced> {
    let mut out = Vec::new();
    for g in &layout.glyphs {
        let GlyphKind::TextBlock { words, .. } = &g.glyph.kind else { continue };
        for m in g.memberships() {
            let Some(arrow) = layout.arrow_for(m.reaction) else {
                out.extend(words.iter().map(|w| Misplaced {
                    reaction: m.reaction,
                    word: w.word.text.clone(),
                    center_y: f64::NAN,
                    centerline_y: f64::NAN,
                }));
                continue;
            };
            let GlyphKind::Arrow { anchor, .. } = &arrow.glyph.kind else { continue };
            let line = arrow.to_layout(*anchor).1;
            for w in words {
                let cy = g.to_layout(w.center()).1;
                let above = cy < line;
                if above != (w.word.role == crate::model::ConditionRole::Agt) {
                    out.push(Misplaced { reaction: m.reaction, word: w.word.text.clone(), center_y: cy, centerline_y: line });
                }
            }
        }
    }
    out
}
