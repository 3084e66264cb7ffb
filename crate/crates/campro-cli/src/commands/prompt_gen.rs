//! Inference-time boundary generation from external edge maps: binarize
//! at the histogram mode plus offset, mask by the box prompt, weight by
//! the image gradient.

use std::path::Path;

use campro::boundary::{extract_box, generate_inference_boundary, ThresholdSpec};
use campro::cache::{lookup, store, ArrayRecord, CacheKey};
use campro::raster::io::{load_gray, load_mask, save_float};
use campro::raster::canny_with;

use super::{run_pool, BatchSummary, ItemOutcome, ItemStatus};
use crate::config::RunConfig;
use crate::manifest::{DatasetManifest, PairedEntry};

pub(crate) const STAGE_GEN: &str = "gen-boundary";

enum GenResult {
    Outcome(ItemOutcome),
    Done { stem: String, empty: bool, cached: bool },
}

fn process(
    entry: &PairedEntry,
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    png_out: Option<&Path>,
) -> GenResult {
    let Some(edge_path) = &entry.edge else {
        return GenResult::Outcome(ItemOutcome {
            stem: entry.stem.clone(),
            status: ItemStatus::Skipped("missing edge map".into()),
        });
    };
    let key = CacheKey::new(
        &manifest.name,
        STAGE_GEN,
        &entry.stem,
        cfg.boundary_gen_fingerprint(),
    );
    if let Some(rec) = lookup(&key, &cfg.cache_root) {
        let empty = rec
            .to_f32()
            .map(|v| v.iter().all(|&x| x == 0.0))
            .unwrap_or(true);
        return GenResult::Done {
            stem: entry.stem.clone(),
            empty,
            cached: true,
        };
    }

    let result = (|| -> anyhow::Result<bool> {
        let edge_map = load_gray(edge_path)?;
        let gt = load_mask(&entry.gt)?;
        let img = load_gray(&entry.image)?;
        let bbox = extract_box(&gt, cfg.box_jitter)?;
        let (_, gradient) = canny_with(&img, &cfg.canny)?;
        let spec = ThresholdSpec::resolve(&edge_map, cfg.offset)?;
        let prompt = generate_inference_boundary(&edge_map, &bbox, &gradient, &spec)?;

        let values: Vec<f32> = prompt.data().iter().map(|&v| v as f32).collect();
        store(
            &key,
            &ArrayRecord::from_f32(&entry.stem, vec![prompt.height(), prompt.width()], &values)?,
            &cfg.cache_root,
        )?;
        if let Some(dir) = png_out {
            std::fs::create_dir_all(dir)?;
            save_float(&prompt, &dir.join(format!("{}.png", entry.stem)))?;
        }
        Ok(values.iter().all(|&v| v == 0.0))
    })();

    match result {
        Ok(empty) => GenResult::Done {
            stem: entry.stem.clone(),
            empty,
            cached: false,
        },
        Err(e) => GenResult::Outcome(ItemOutcome {
            stem: entry.stem.clone(),
            status: ItemStatus::Failed(format!("{e:#}")),
        }),
    }
}

/// Generate the thresholded boundary prompt for every pair with an edge
/// map. The summary flags how many generated prompts came out empty
/// (a constant edge map produces nothing by construction).
pub fn cmd_prompt_gen(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    png_out: Option<&Path>,
) -> anyhow::Result<(BatchSummary, usize)> {
    let entries = manifest.scan()?;
    let results = run_pool(cfg.workers, &entries, |e| {
        process(e, manifest, cfg, png_out)
    });
    let mut summary = BatchSummary {
        dataset: manifest.name.clone(),
        seed: cfg.seed,
        ..Default::default()
    };
    let mut empty_prompts = 0usize;
    for r in &results {
        match r {
            GenResult::Outcome(outcome) => summary.absorb(outcome),
            GenResult::Done { stem, empty, cached } => {
                summary.absorb(&ItemOutcome {
                    stem: stem.clone(),
                    status: if *cached {
                        ItemStatus::Cached
                    } else {
                        ItemStatus::Produced
                    },
                });
                if *empty {
                    empty_prompts += 1;
                }
            }
        }
    }
    if empty_prompts > 0 {
        let total = summary.produced + summary.cached;
        summary.notes.push(format!(
            "empty prompts: {empty_prompts}/{total} ({:.0}%)",
            100.0 * empty_prompts as f64 / total.max(1) as f64
        ));
    }
    Ok((summary, empty_prompts))
}
