//! Shared domain types: boxes, objects, reactions, condition words, and the
//! per-image annotation that every other module consumes or produces.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Largest coordinate bin. Coordinates are quantized into `0..=MAX_BIN`.
pub const MAX_BIN: u16 = 999;

/// Axis-aligned box in coordinate bins, normalized to the image extent.
///
/// Always satisfies `x_min < x_max <= 999` and `y_min < y_max <= 999`;
/// construction and deserialization both go through [`BBox::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "[u16; 4]", try_from = "[u16; 4]")]
pub struct BBox {
    x_min: u16,
    y_min: u16,
    x_max: u16,
    y_max: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("invalid box [{x_min},{y_min},{x_max},{y_max}]: need min < max <= 999 on both axes")]
pub struct InvalidBox {
    pub x_min: u32,
    pub y_min: u32,
    pub x_max: u32,
    pub y_max: u32,
}

impl BBox {
    pub fn new(x_min: u16, y_min: u16, x_max: u16, y_max: u16) -> Result<Self, InvalidBox> {
        if x_min < x_max && y_min < y_max && x_max <= MAX_BIN && y_max <= MAX_BIN {
            Ok(Self { x_min, y_min, x_max, y_max })
        } else {
            Err(InvalidBox {
                x_min: x_min.into(),
                y_min: y_min.into(),
                x_max: x_max.into(),
                y_max: y_max.into(),
            })
        }
    }

    /// Like [`BBox::new`] but takes wide integers, rejecting anything past 999.
    pub fn from_u32(x_min: u32, y_min: u32, x_max: u32, y_max: u32) -> Result<Self, InvalidBox> {
        let err = InvalidBox { x_min, y_min, x_max, y_max };
        let narrow = |v: u32| u16::try_from(v).map_err(|_| err);
        Self::new(narrow(x_min)?, narrow(y_min)?, narrow(x_max)?, narrow(y_max)?)
    }

    pub fn x_min(&self) -> u16 {
        self.x_min
    }
    pub fn y_min(&self) -> u16 {
        self.y_min
    }
    pub fn x_max(&self) -> u16 {
        self.x_max
    }
    pub fn y_max(&self) -> u16 {
        self.y_max
    }

    pub fn width(&self) -> u32 {
        u32::from(self.x_max - self.x_min)
    }

    pub fn height(&self) -> u32 {
        u32::from(self.y_max - self.y_min)
    }

    pub fn area(&self) -> u32 {
        self.width() * self.height()
    }

    pub fn to_array(self) -> [u16; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }
}

impl From<BBox> for [u16; 4] {
    fn from(b: BBox) -> Self {
        b.to_array()
    }
}

impl TryFrom<[u16; 4]> for BBox {
    type Error = InvalidBox;

    fn try_from(v: [u16; 4]) -> Result<Self, Self::Error> {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

/// Object identifier, unique within one image.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for ObjectId {
    fn from(v: u32) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectClass {
    /// Molecular structure drawing.
    Str,
    /// Text region.
    Txt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectedObject {
    pub id: ObjectId,
    pub class: ObjectClass,
    pub bbox: BBox,
}

/// The three slots a reaction groups its objects into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReactionRole {
    Reactant,
    Condition,
    Product,
}

impl ReactionRole {
    pub const ALL: [ReactionRole; 3] = [Self::Reactant, Self::Condition, Self::Product];

    pub fn name(self) -> &'static str {
        match self {
            Self::Reactant => "reactants",
            Self::Condition => "conditions",
            Self::Product => "products",
        }
    }
}

/// One reaction as ordered lists of object ids per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ReactionAnnotation {
    pub reactants: Vec<ObjectId>,
    pub conditions: Vec<ObjectId>,
    pub products: Vec<ObjectId>,
}

impl ReactionAnnotation {
    pub fn role(&self, role: ReactionRole) -> &[ObjectId] {
        match role {
            ReactionRole::Reactant => &self.reactants,
            ReactionRole::Condition => &self.conditions,
            ReactionRole::Product => &self.products,
        }
    }

    pub fn role_mut(&mut self, role: ReactionRole) -> &mut Vec<ObjectId> {
        match role {
            ReactionRole::Reactant => &mut self.reactants,
            ReactionRole::Condition => &mut self.conditions,
            ReactionRole::Product => &mut self.products,
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.reactants
            .iter()
            .chain(&self.conditions)
            .chain(&self.products)
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConditionRole {
    Agt,
    Svt,
    Tem,
    Time,
    Yld,
}

impl ConditionRole {
    pub const ALL: [ConditionRole; 5] = [Self::Agt, Self::Svt, Self::Tem, Self::Time, Self::Yld];

    pub fn name(self) -> &'static str {
        match self {
            Self::Agt => "Agt",
            Self::Svt => "Svt",
            Self::Tem => "Tem",
            Self::Time => "Time",
            Self::Yld => "Yld",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }

    /// Row/column index in confusion matrices.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ConditionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One whitespace-free word of condition text and its role.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConditionWord {
    pub text: String,
    pub role: ConditionRole,
}

impl ConditionWord {
    pub fn new(text: impl Into<String>, role: ConditionRole) -> Self {
        Self { text: text.into(), role }
    }

    pub fn is_valid(&self) -> bool {
        !self.text.is_empty() && !self.text.chars().any(char::is_whitespace)
    }
}

/// Splits free text into condition words, one per whitespace-separated run.
/// Punctuation stays attached to its word.
pub fn split_words(text: &str, role: ConditionRole) -> impl Iterator<Item = ConditionWord> + '_ {
    text.split_whitespace().map(move |w| ConditionWord::new(w, role))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pattern {
    SingleLine,
    MultipleLine,
    Branch,
    Cycle,
}

impl Pattern {
    pub const ALL: [Pattern; 4] = [Self::SingleLine, Self::MultipleLine, Self::Branch, Self::Cycle];
}

/// Ground truth (or a full prediction) for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageAnnotation {
    pub image_id: String,
    pub width_px: u32,
    pub height_px: u32,
    pub pattern: Pattern,
    pub objects: Vec<DetectedObject>,
    pub reactions: Vec<ReactionAnnotation>,
    #[serde(default)]
    pub condition_texts: BTreeMap<ObjectId, Vec<ConditionWord>>,
    #[serde(default)]
    pub smiles: BTreeMap<ObjectId, String>,
}

impl ImageAnnotation {
    pub fn object(&self, id: ObjectId) -> Option<&DetectedObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn to_prediction(&self) -> Prediction {
        Prediction {
            image_id: self.image_id.clone(),
            objects: self.objects.clone(),
            reactions: self.reactions.clone(),
        }
    }
}

/// Component-identification output for one image: the annotation schema
/// without the text and SMILES maps. Annotation files parse as predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub image_id: String,
    pub objects: Vec<DetectedObject>,
    pub reactions: Vec<ReactionAnnotation>,
}

impl Prediction {
    pub fn object(&self, id: ObjectId) -> Option<&DetectedObject> {
        self.objects.iter().find(|o| o.id == id)
    }
}

impl From<&ImageAnnotation> for Prediction {
    fn from(a: &ImageAnnotation) -> Self {
        a.to_prediction()
    }
}

/// Condition-interpretation output (or ground truth) for one text object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub image_id: String,
    pub object_id: ObjectId,
    pub words: Vec<ConditionWord>,
}

impl ImageAnnotation {
    /// The annotation's condition texts as one record per text object.
    pub fn condition_records(&self) -> impl Iterator<Item = ConditionRecord> + '_ {
        self.condition_texts.iter().map(|(id, words)| ConditionRecord {
            image_id: self.image_id.clone(),
            object_id: *id,
            words: words.clone(),
        })
    }
}

/// A structured source reaction, as consumed by the generator.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub reactant_smiles: Vec<String>,
    pub product_smiles: Vec<String>,
    #[serde(default)]
    pub agents: Vec<String>,
    #[serde(default)]
    pub solvents: Vec<String>,
    #[serde(default)]
    pub temperature: Option<String>,
    #[serde(default)]
    pub time: Option<String>,
    #[serde(default)]
    pub yield_pct: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("record has no reactant SMILES")]
    NoReactants,
    #[error("record has no product SMILES")]
    NoProducts,
    #[error("SMILES {0:?} is empty or contains whitespace or '>'")]
    BadSmiles(String),
    #[error("condition field {0} has no words")]
    EmptyCondition(&'static str),
}

impl ReactionRecord {
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.reactant_smiles.is_empty() {
            return Err(RecordError::NoReactants);
        }
        if self.product_smiles.is_empty() {
            return Err(RecordError::NoProducts);
        }
        for s in self.reactant_smiles.iter().chain(&self.product_smiles) {
            if s.is_empty() || s.contains('>') || s.chars().any(char::is_whitespace) {
                return Err(RecordError::BadSmiles(s.clone()));
            }
        }
        let lists = [("agents", &self.agents), ("solvents", &self.solvents)];
        for (name, list) in lists {
            if list.iter().any(|t| t.split_whitespace().next().is_none()) {
                return Err(RecordError::EmptyCondition(name));
            }
        }
        let scalars = [
            ("temperature", &self.temperature),
            ("time", &self.time),
            ("yield_pct", &self.yield_pct),
        ];
        for (name, v) in scalars {
            if v.as_deref().is_some_and(|t| t.split_whitespace().next().is_none()) {
                return Err(RecordError::EmptyCondition(name));
            }
        }
        Ok(())
    }

    /// Condition words in drawing order: agents, then solvent, temperature,
    /// time, and yield.
    pub fn condition_words(&self) -> Vec<ConditionWord> {
        let mut out = Vec::new();
        for a in &self.agents {
            out.extend(split_words(a, ConditionRole::Agt));
        }
        for s in &self.solvents {
            out.extend(split_words(s, ConditionRole::Svt));
        }
        let scalars = [
            (&self.temperature, ConditionRole::Tem),
            (&self.time, ConditionRole::Time),
            (&self.yield_pct, ConditionRole::Yld),
        ];
        for (v, role) in scalars {
            if let Some(t) = v {
                out.extend(split_words(t, role));
            }
        }
        out
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: u32,
    pub max: u32,
}

/// Inclusive real range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRange {
    pub min: f64,
    pub max: f64,
}

/// Style augmentation bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleConfig {
    pub font_size_px: IntRange,
    pub line_width_px: IntRange,
    pub molecule_scale: RealRange,
    pub canvas_width_px: u32,
    pub canvas_height_px: u32,
    pub padding_px: u32,
}

impl Default for StyleConfig {
    fn default() -> Self {
        Self {
            font_size_px: IntRange { min: 10, max: 18 },
            line_width_px: IntRange { min: 1, max: 3 },
            molecule_scale: RealRange { min: 0.7, max: 1.3 },
            canvas_width_px: 1200,
            canvas_height_px: 800,
            padding_px: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StyleError {
    #[error("style range {0} is empty or has a non-positive lower bound")]
    BadRange(&'static str),
    #[error("canvas must be positive and larger than twice the padding")]
    BadCanvas,
}

impl StyleConfig {
    pub fn validate(&self) -> Result<(), StyleError> {
        let ints = [("font_size_px", self.font_size_px), ("line_width_px", self.line_width_px)];
        for (name, r) in ints {
            if r.min == 0 || r.min > r.max {
                return Err(StyleError::BadRange(name));
            }
        }
        let m = self.molecule_scale;
        if !(m.min > 0.0 && m.min <= m.max && m.max.is_finite()) {
            return Err(StyleError::BadRange("molecule_scale"));
        }
        let pad2 = self.padding_px.saturating_mul(2);
        if self.canvas_width_px <= pad2 || self.canvas_height_px <= pad2 {
            return Err(StyleError::BadCanvas);
        }
        Ok(())
    }
}
