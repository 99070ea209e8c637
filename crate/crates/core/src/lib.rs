//! Data and evaluation substrate for reaction-scheme image parsing.
//!
//! The crate is `no_std` (it needs `alloc`) and free of IO: annotation types,
//! the reaction-sequence and condition-role grammars, the synthetic scheme
//! generator (layout, SVG, ground truth), hard/soft match and OCR/role
//! metrics, reaction assembly, and a perturbation oracle for the metrics.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assemble;
pub mod geometry;
pub mod grammar;
pub mod metrics;
pub mod model;
pub mod perturb;
pub mod seed;
pub mod synth;
pub mod validate;

pub use geometry::{bins_to_pixels, pixel_to_bins, GeometryError, ImageDims, PixelRect};
pub use model::*;
pub use validate::{validate_annotation, Violation};
