//! Prompt precomputation: gradient-boundary prompts and box prompts for
//! every pair, cached under stage-specific fingerprints.

use std::path::Path;

use anyhow::Context;

use campro::boundary::{egem_with, extract_box};
use campro::cache::{lookup, store, ArrayRecord, CacheKey};
use campro::raster::io::{load_gray, load_mask, save_float};
use campro::raster::FloatMap;

use super::{run_pool, BatchSummary, ItemOutcome, ItemStatus};
use crate::config::RunConfig;
use crate::manifest::{DatasetManifest, PairedEntry};

pub(crate) const STAGE_PROMPT: &str = "egem-prompt";
pub(crate) const STAGE_BOX: &str = "box-prompt";

fn float_map_record(name: &str, map: &FloatMap) -> ArrayRecord {
    let values: Vec<f32> = map.data().iter().map(|&v| v as f32).collect();
    ArrayRecord::from_f32(name, vec![map.height(), map.width()], &values)
        .expect("shape matches data")
}

fn process(
    entry: &PairedEntry,
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    png_out: Option<&Path>,
) -> ItemOutcome {
    let prompt_key = CacheKey::new(
        &manifest.name,
        STAGE_PROMPT,
        &entry.stem,
        cfg.egem_fingerprint(),
    );
    let box_key = CacheKey::new(&manifest.name, STAGE_BOX, &entry.stem, cfg.box_fingerprint());
    let root = &cfg.cache_root;
    if lookup(&prompt_key, root).is_some() && lookup(&box_key, root).is_some() {
        return ItemOutcome {
            stem: entry.stem.clone(),
            status: ItemStatus::Cached,
        };
    }

    let result = (|| -> anyhow::Result<()> {
        let gt = load_mask(&entry.gt)?;
        let img = load_gray(&entry.image)?;
        let pair = cfg.dilate_pair()?;
        let prompt = egem_with(&gt, &img, pair, cfg.egem_mode, &cfg.canny)?;
        let bbox = extract_box(&gt, cfg.box_jitter)?;

        store(&prompt_key, &float_map_record(&entry.stem, &prompt), root)?;
        let (x0, y0, x1, y1) = bbox.corners();
        let corners = [x0 as f32, y0 as f32, x1 as f32, y1 as f32];
        store(
            &box_key,
            &ArrayRecord::from_f32(&entry.stem, vec![4], &corners)?,
            root,
        )?;

        if let Some(dir) = png_out {
            std::fs::create_dir_all(dir)?;
            save_float(&prompt, &dir.join(format!("{}.png", entry.stem)))
                .context("write prompt png")?;
        }
        Ok(())
    })();

    ItemOutcome {
        stem: entry.stem.clone(),
        status: match result {
            Ok(()) => ItemStatus::Produced,
            Err(e) => ItemStatus::Failed(format!("{e:#}")),
        },
    }
}

/// Compute and cache the gradient-boundary prompt and box prompt for
/// every pair. Already-cached items are counted, not recomputed.
pub fn cmd_precompute(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    png_out: Option<&Path>,
) -> anyhow::Result<BatchSummary> {
    let entries = manifest.scan()?;
    let outcomes = run_pool(cfg.workers, &entries, |e| {
        process(e, manifest, cfg, png_out)
    });
    let mut summary = BatchSummary {
        dataset: manifest.name.clone(),
        seed: cfg.seed,
        ..Default::default()
    };
    for outcome in &outcomes {
        summary.absorb(outcome);
    }
    Ok(summary)
}
