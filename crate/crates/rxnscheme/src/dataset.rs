//! Writing generated datasets and their splits to disk.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rxnscheme_core::synth::{generate_image, plan_jobs, split_dataset, Depictor, GenConfig, ManifestEntry, SynthError};
use rxnscheme_core::ReactionRecord;

use crate::io::{to_json_string, write_json, DataError};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("image {index}: {source}")]
    Image { index: usize, source: SynthError },
    #[error(transparent)]
    Data(#[from] DataError),
}

fn write_file(path: &Path, text: &str) -> Result<(), DataError> {
    fs::write(path, text).map_err(|e| DataError::Io { path: path.to_path_buf(), source: e })
}

/// Generates `cfg.count` images into `out`: `img_{i}.svg`, `img_{i}.json`,
/// and `manifest.json`. Images render in parallel; every file is a pure
/// function of the records and the configuration.
pub fn write_dataset(
    records: &[ReactionRecord],
    cfg: &GenConfig,
    depictor: &dyn Depictor,
    out: &Path,
) -> Result<Vec<ManifestEntry>, DatasetError> {
    let jobs = plan_jobs(records.len(), cfg)?;
    fs::create_dir_all(out).map_err(|e| DataError::Io { path: out.to_path_buf(), source: e })?;
    let entries = jobs
        .par_iter()
        .map(|job| {
            let img = generate_image(records, job, cfg, depictor)
                .map_err(|source| DatasetError::Image { index: job.index, source })?;
            write_file(&out.join(&img.entry.image), &img.svg)?;
            write_file(&out.join(&img.entry.annotation), &to_json_string(&img.annotation))?;
            Ok(img.entry)
        })
        .collect::<Result<Vec<_>, DatasetError>>()?;
    write_json(&out.join("manifest.json"), &entries)?;
    Ok(entries)
}

pub const SPLIT_NAMES: [&str; 3] = ["train.json", "val.json", "test.json"];

/// Writes `train.json`, `val.json`, and `test.json` into `out`.
pub fn write_splits(
    entries: &[ManifestEntry],
    ratios: &[f64; 3],
    seed: u64,
    out: &Path,
) -> Result<[Vec<ManifestEntry>; 3], DatasetError> {
    let parts = split_dataset(entries, ratios, seed)?;
    for (name, part) in SPLIT_NAMES.iter().zip(&parts) {
        write_json(&out.join(name), part)?;
    }
    Ok(parts)
}
