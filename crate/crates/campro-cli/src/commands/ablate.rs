//! Ablation sweeps over the published grids: dilation pairs D1–D5,
//! threshold offsets +5..+25, and the four subbands. One row per grid
//! point with everything else held fixed.

use campro::boundary::{
    egem_with, extract_box, generate_inference_boundary, DilatePair, EgemMode, ThresholdSpec,
};
use campro::raster::canny_with;
use campro::raster::io::{load_gray, load_mask};
use campro::wavelet::{dwt2_haar, Plane, Subband};

use super::run_pool;
use crate::config::RunConfig;
use crate::manifest::{DatasetManifest, PairedEntry};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblateAxis {
    Dilate,
    Offset,
    Subband,
}

impl std::str::FromStr for AblateAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dilate" => Ok(AblateAxis::Dilate),
            "offset" => Ok(AblateAxis::Offset),
            "subband" => Ok(AblateAxis::Subband),
            other => Err(format!("unknown axis {other:?} (dilate|offset|subband)")),
        }
    }
}

/// Per-image statistics of one generated raster.
struct MapStats {
    pixels: usize,
    active: usize,
    sum: f64,
    sum_sq: f64,
}

impl MapStats {
    fn of(data: &[f64]) -> Self {
        let mut active = 0usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for &v in data {
            if v != 0.0 {
                active += 1;
            }
            sum += v.abs();
            sum_sq += v * v;
        }
        Self {
            pixels: data.len(),
            active,
            sum,
            sum_sq,
        }
    }
}

#[derive(Default)]
struct GridAccum {
    images: usize,
    errors: usize,
    pixels: usize,
    active: usize,
    sum: f64,
    sum_sq: f64,
}

impl GridAccum {
    fn fold(results: Vec<Result<MapStats, String>>) -> Self {
        let mut acc = GridAccum::default();
        for r in results {
            match r {
                Ok(s) => {
                    acc.images += 1;
                    acc.pixels += s.pixels;
                    acc.active += s.active;
                    acc.sum += s.sum;
                    acc.sum_sq += s.sum_sq;
                }
                Err(_) => acc.errors += 1,
            }
        }
        acc
    }

    fn active_fraction(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            self.active as f64 / self.pixels as f64
        }
    }

    fn mean_abs(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            self.sum / self.pixels as f64
        }
    }

    fn rms(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            (self.sum_sq / self.pixels as f64).sqrt()
        }
    }
}

fn egem_stats(entry: &PairedEntry, cfg: &RunConfig, pair: DilatePair, mode: EgemMode) -> Result<MapStats, String> {
    (|| -> anyhow::Result<MapStats> {
        let gt = load_mask(&entry.gt)?;
        let img = load_gray(&entry.image)?;
        let prompt = egem_with(&gt, &img, pair, mode, &cfg.canny)?;
        Ok(MapStats::of(prompt.data()))
    })()
    .map_err(|e| format!("{e:#}"))
}

fn offset_stats(entry: &PairedEntry, cfg: &RunConfig, offset: i32) -> Result<MapStats, String> {
    (|| -> anyhow::Result<MapStats> {
        let edge_path = entry
            .edge
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("missing edge map"))?;
        let edge_map = load_gray(edge_path)?;
        let gt = load_mask(&entry.gt)?;
        let img = load_gray(&entry.image)?;
        let bbox = extract_box(&gt, cfg.box_jitter)?;
        let (_, gradient) = canny_with(&img, &cfg.canny)?;
        let spec = ThresholdSpec::resolve(&edge_map, offset)?;
        let prompt = generate_inference_boundary(&edge_map, &bbox, &gradient, &spec)?;
        Ok(MapStats::of(prompt.data()))
    })()
    .map_err(|e| format!("{e:#}"))
}

fn subband_stats(entry: &PairedEntry, band: Subband) -> Result<MapStats, String> {
    (|| -> anyhow::Result<MapStats> {
        let img = load_gray(&entry.image)?;
        let plane = Plane::from_fn(img.width(), img.height(), |x, y| {
            f64::from(img.get(x, y)) / 255.0
        });
        let sb = dwt2_haar(&plane)?;
        Ok(MapStats::of(sb.select(band).data()))
    })()
    .map_err(|e| format!("{e:#}"))
}

/// Sweep one axis of the published ablation grids and emit a table with
/// one row per grid point.
pub fn cmd_ablate(
    manifest: &DatasetManifest,
    cfg: &RunConfig,
    axis: AblateAxis,
) -> anyhow::Result<Table> {
    let entries = manifest.scan()?;
    let mut table = Table::default();
    table.push_meta("dataset", &manifest.name);
    table.push_meta("seed", cfg.seed);

    match axis {
        AblateAxis::Dilate => {
            table.push_meta("axis", "dilate");
            table.push_meta("mode", cfg.egem_mode);
            table.columns = ["setting", "d1", "d2", "images", "errors", "active_fraction", "mean_value"]
                .map(String::from)
                .to_vec();
            for (i, (d1, d2)) in DilatePair::ABLATION_GRID.iter().enumerate() {
                let pair = DilatePair::from_sizes(*d1, *d2)?;
                let results = run_pool(cfg.workers, &entries, |e| {
                    egem_stats(e, cfg, pair, cfg.egem_mode)
                });
                let acc = GridAccum::fold(results);
                table.rows.push(vec![
                    Cell::Text(format!("D{}", i + 1)),
                    Cell::Int(*d1 as u64),
                    Cell::Int(*d2 as u64),
                    Cell::Int(acc.images as u64),
                    Cell::Int(acc.errors as u64),
                    Cell::Float(acc.active_fraction()),
                    Cell::Float(acc.mean_abs()),
                ]);
            }
        }
        AblateAxis::Offset => {
            table.push_meta("axis", "offset");
            table.columns = ["offset", "images", "errors", "active_fraction", "mean_value"]
                .map(String::from)
                .to_vec();
            for offset in ThresholdSpec::OFFSET_GRID {
                let results = run_pool(cfg.workers, &entries, |e| offset_stats(e, cfg, offset));
                let acc = GridAccum::fold(results);
                table.rows.push(vec![
                    Cell::Text(format!("+{offset}")),
                    Cell::Int(acc.images as u64),
                    Cell::Int(acc.errors as u64),
                    Cell::Float(acc.active_fraction()),
                    Cell::Float(acc.mean_abs()),
                ]);
            }
        }
        AblateAxis::Subband => {
            table.push_meta("axis", "subband");
            table.columns = ["subband", "images", "errors", "mean_abs", "rms"]
                .map(String::from)
                .to_vec();
            for band in Subband::ALL {
                let results = run_pool(cfg.workers, &entries, |e| subband_stats(e, band));
                let acc = GridAccum::fold(results);
                table.rows.push(vec![
                    Cell::Text(band.to_string()),
                    Cell::Int(acc.images as u64),
                    Cell::Int(acc.errors as u64),
                    Cell::Float(acc.mean_abs()),
                    Cell::Float(acc.rms()),
                ]);
            }
        }
    }
    Ok(table)
}
