//! Dataset planning: which scenes to generate, their seeds and task ids.
//!
//! A plan is a flat list of independent jobs, so callers can realize them in
//! any order (or in parallel) and still get identical records and images.

use alloc::string::String;
use alloc::vec::Vec;

use crate::circuit::{gen_circuit, CircuitError};
use crate::condition::{gen_condition, gen_mask_variants, ConditionKind, MaskError, MaskTarget};
use crate::prompt::PromptError;
use crate::raster::{apply_mask, render_circuit, render_condition, render_swirl, CanvasImage};
use crate::rng::derive_seed;
use crate::swirl::{gen_swirl, level_params, LevelName};
use crate::task::{circuit_tasks, condition_task, swirl_task, DatasetConfig, TaskRecord};

const SWIRL_TAG: u64 = 0x5357_4952;
const CIRCUIT_TAG: u64 = 0x4349_5243;
const CONDITION_TAG: u64 = 0x434f_4e44;

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Swirl { level: LevelName, seed: u64, task_id: String },
    Circuit { seed: u64, n_wires: usize, scene_id: String },
    /// One condition scene plus, optionally, its three masked variants.
    Condition { kind: ConditionKind, seed: u64, task_id: String, masks: bool },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

fn kind_slug(kind: ConditionKind) -> &'static str {
    match kind {
        ConditionKind::SharedSegment => "shared",
        ConditionKind::DifferentSegment => "diffseg",
        ConditionKind::DifferentAngle => "diffangle",
        ConditionKind::DifferentAll => "diffall",
    }
}

fn mask_slug(t: MaskTarget) -> &'static str {
    match t {
        MaskTarget::OnDistractor => "mask_distractor",
        MaskTarget::OnQueriedPath => "mask_queried",
        MaskTarget::Random => "mask_random",
    }
}

pub fn plan(cfg: &DatasetConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for level in LevelName::ALL {
        let base = derive_seed(derive_seed(cfg.seed, SWIRL_TAG), level as u64);
        for i in 0..cfg.swirl_per_level {
            jobs.push(Job::Swirl {
                level,
                seed: derive_seed(base, i as u64),
                task_id: alloc::format!("swirl_{}_{i:03}", level.as_str().to_ascii_lowercase()),
            });
        }
    }
    let base = derive_seed(cfg.seed, CIRCUIT_TAG);
    for (i, &n) in cfg.circuit_wires.iter().enumerate() {
        jobs.push(Job::Circuit {
            seed: derive_seed(base, i as u64),
            n_wires: n,
            scene_id: alloc::format!("circuit_{i:02}"),
        });
    }
    // The same seed across kinds keeps the queried path fixed per index.
    let base = derive_seed(cfg.seed, CONDITION_TAG);
    for i in 0..cfg.condition_per_kind {
        for kind in ConditionKind::ALL {
            jobs.push(Job::Condition {
                kind,
                seed: derive_seed(base, i as u64),
                task_id: alloc::format!("cond_{}_{i:03}", kind_slug(kind)),
                masks: cfg.condition_masks,
            });
        }
    }
    jobs
}

/// Records and images produced by one job. Images are keyed by file name.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub tasks: Vec<TaskRecord>,
    pub images: Vec<(String, CanvasImage)>,
}

/// Generates records only; `render` adds the images.
pub fn realize(job: &Job, cfg: &DatasetConfig, render: bool) -> Result<JobOutput, DatasetError> {
    let mut out = JobOutput { tasks: Vec::new(), images: Vec::new() };
    match job {
        Job::Swirl { level, seed, task_id } => {
            let scene = gen_swirl(level_params(*level), *seed);
            let t = swirl_task(&scene, task_id, cfg.swirl_prompt)?;
            if render {
                out.images.push((t.image.clone(), render_swirl(&scene)));
            }
            out.tasks.push(t);
        }
        Job::Circuit { seed, n_wires, scene_id } => {
            let scene = gen_circuit(*seed, *n_wires)?;
            let image = alloc::format!("{scene_id}.png");
            out.tasks = circuit_tasks(&scene, scene_id, &image)?;
            if render {
                out.images.push((image, render_circuit(&scene)));
            }
        }
        Job::Condition { kind, seed, task_id, masks } => {
            let scene = gen_condition(*kind, *seed);
            let base = condition_task(&scene, task_id, None)?;
            let img = render.then(|| render_condition(&scene));
            if *masks {
                for m in gen_mask_variants(&scene, cfg.patch_px)? {
                    let id = alloc::format!("{task_id}_{}", mask_slug(m.target));
                    let t = condition_task(&scene, &id, Some(m.clone()))?;
                    if let Some(img) = &img {
                        out.images.push((t.image.clone(), apply_mask(img, &m)));
                    }
                    out.tasks.push(t);
                }
            }
            if let Some(img) = img {
                out.images.insert(0, (base.image.clone(), img));
            }
            out.tasks.insert(0, base);
        }
    }
    Ok(out)
}
