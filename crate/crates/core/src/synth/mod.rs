//! Synthetic reaction-scheme images with exact ground truth.
//!
//! Records are depicted as glyphs, arranged by one of four planners (single
//! line, multiple line, branch, cycle), fitted to the canvas, rendered as
//! SVG, and annotated from the provenance each glyph carries. Agents sit
//! above their arrow; solvent, temperature, time, and yield sit below.
//! Every image draws from its own RNG, derived from the master seed and the
//! image index, so images can be produced in any order.

mod block;
mod dataset;
mod glyph;
mod layout;
mod plan;
pub mod smiles;
mod svg;

pub use block::{compose_condition_block, condition_items};
pub use dataset::{
    check_ratios, generate_dataset, generate_image, min_reactions, plan_jobs, sample_records, split_dataset,
    split_sizes, stitch, GenConfig, GeneratedImage, ImageJob, ManifestEntry,
};
pub use glyph::{text_width, Depictor, FormulaDepictor, Glyph, GlyphKind, HeadStyle, PlacedWord, Primitive};
pub use layout::{
    annotate, role_placement_violations, ImageStyle, Layout, Membership, Misplaced, PlacedGlyph, PlanContext,
    Provenance, Source, MIN_SCALE,
};
pub use plan::{cycle_angle, plan_branch, plan_chain, plan_cycle, plan_multiple_line, plan_single_line};
pub use svg::render_svg;

use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::GeometryError;
use crate::model::{Pattern, RecordError, StyleError};
use crate::validate::Violation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("record {index}: {source}")]
    InvalidRecord { index: usize, source: RecordError },
    #[error("no records to draw")]
    EmptyRecords,
    #[error("record {index} does not start from the previous record's products")]
    InvalidChain { index: usize },
    #[error("branch records do not share a first reactant")]
    InvalidBranch,
    #[error("record {index} breaks the cycle: each step needs one reactant and one product, chained around")]
    InvalidCycle { index: usize },
    #[error("{pattern:?} cannot be drawn with {count} reactions")]
    UnsupportedSize { pattern: Pattern, count: usize },
    #[error("layout needs scale {scale:.3}, below the minimum {MIN_SCALE}")]
    LayoutOverflow { scale: f64 },
    #[error("glyphs {a} and {b} overlap")]
    Overlap { a: usize, b: usize },
    #[error("glyph {glyph} lies outside the canvas")]
    OutOfCanvas { glyph: usize },
    #[error("glyph {glyph} has missing or inconsistent provenance")]
    ProvenanceGap { glyph: usize },
    #[error("cannot depict {0:?}: {1}")]
    Depict(String, smiles::SmilesError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("generated annotation is invalid ({} violations)", .0.len())]
    InvalidAnnotation(Vec<Violation>),
    #[error("records exhausted: need {needed}, have {available}")]
    RecordExhaustion { needed: usize, available: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Style(StyleError),
    #[error("split ratios must be non-negative and sum to 1")]
    InvalidRatios,
}
