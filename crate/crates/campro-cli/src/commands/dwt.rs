//! Subband extraction over a dataset: one selected Haar subband per
//! image, cached raw and optionally dumped as a viewable PNG.

use std::path::Path;

use campro::cache::{lookup, store, ArrayRecord, CacheKey};
use campro::raster::io::{load_gray, save_gray};
use campro::raster::GrayImage;
use campro::wavelet::{dwt2_haar, Plane};

use super::{run_pool, BatchSummary, ItemOutcome, ItemStatus};
use crate::config::RunConfig;
use crate::manifest::{DatasetManifest, PairedEntry};

pub(crate) const STAGE_DWT: &str = "dwt-subband";

/// Affine-normalize a plane for viewing: min maps to 0, max to 255, a
/// constant plane to 0.
fn plane_to_view(plane: &Plane) -> GrayImage {
    let (lo, hi) = plane
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    GrayImage::from_fn(plane.width(), plane.height(), |x, y| {
        if span <= 0.0 {
            0
        } else {
            (((plane.get(x, y) - lo) / span) * 255.0).round() as u8
        }
    })
}

fn process(
    entry: &PairedEntry,
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    png_out: Option<&Path>,
) -> ItemOutcome {
    let key = CacheKey::new(
        &manifest.name,
        STAGE_DWT,
        &entry.stem,
        cfg.dwt_fingerprint(),
    );
    if lookup(&key, &cfg.cache_root).is_some() && png_out.is_none() {
        return ItemOutcome {
            stem: entry.stem.clone(),
            status: ItemStatus::Cached,
        };
    }
    let result = (|| -> anyhow::Result<()> {
        let img = load_gray(&entry.image)?;
        let plane = Plane::from_fn(img.width(), img.height(), |x, y| {
            f64::from(img.get(x, y)) / 255.0
        });
        let sb = dwt2_haar(&plane)?;
        let band = sb.select(cfg.subband);
        store(
            &key,
            &ArrayRecord::from_f64(
                &entry.stem,
                vec![band.height(), band.width()],
                band.data(),
            )?,
            &cfg.cache_root,
        )?;
        if let Some(dir) = png_out {
            std::fs::create_dir_all(dir)?;
            save_gray(
                &plane_to_view(band),
                &dir.join(format!("{}_{}.png", entry.stem, cfg.subband)),
            )?;
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

/// Extract and cache the configured subband for every image.
pub fn cmd_dwt(
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
