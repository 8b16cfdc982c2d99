//! Dataset generation to disk.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use traceforge_core::dataset::{plan, realize, DatasetError, JobOutput};
use traceforge_core::task::{DatasetConfig, DatasetManifest};

use crate::io::{write_manifest, write_png, IoError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Builds the manifest without rendering any image.
pub fn build_manifest(cfg: &DatasetConfig) -> Result<DatasetManifest, DatasetError> {
    let outputs: Vec<JobOutput> = plan(cfg)
        .par_iter()
        .map(|job| realize(job, cfg, false))
        .collect::<Result<_, _>>()?;
    Ok(DatasetManifest::new(cfg.clone(), outputs.into_iter().flat_map(|o| o.tasks).collect()))
}

/// Renders every image into `out_dir` and writes `manifest.json` there.
///
/// Jobs run in parallel; output is identical to a sequential run.
pub fn generate_dataset(cfg: &DatasetConfig, out_dir: &Path) -> Result<DatasetManifest, GenerateError> {
    fs::create_dir_all(out_dir).map_err(|source| IoError::Io { path: out_dir.to_path_buf(), source })?;
    let tasks = plan(cfg)
        .par_iter()
        .map(|job| -> Result<_, GenerateError> {
            let out = realize(job, cfg, true)?;
            for (name, img) in &out.images {
                write_png(img, &out_dir.join(name))?;
            }
            Ok(out.tasks)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = DatasetManifest::new(cfg.clone(), tasks.into_iter().flatten().collect());
    write_manifest(&manifest, &out_dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}
