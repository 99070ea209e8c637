//! Files, datasets, and the command line around `rxnscheme-core`.

pub mod cli;
pub mod dataset;
pub mod io;
pub mod selfcheck;

pub use rxnscheme_core as core;
