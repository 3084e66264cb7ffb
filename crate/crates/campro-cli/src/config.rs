//! Run configuration and the per-stage parameter records that feed cache
//! fingerprints.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use campro::boundary::{DilatePair, EgemMode, ThresholdSpec};
use campro::cache::fingerprint_params;
use campro::metrics::MetricConfig;
use campro::raster::CannyParams;
use campro::wavelet::Subband;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    #[default]
    Csv,
    Md,
}

impl std::str::FromStr for TableFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "md" => Ok(TableFormat::Md),
            other => Err(format!("unknown format {other:?} (csv|md)")),
        }
    }
}

impl TableFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Md => "md",
        }
    }
}

/// Which metric columns the report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// S, weighted F, mean E, MAE.
    #[default]
    Cod,
    /// The COD columns plus mean Dice and mean IoU.
    Polyp,
}

impl std::str::FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cod" => Ok(Protocol::Cod),
            "polyp" => Ok(Protocol::Polyp),
            other => Err(format!("unknown protocol {other:?} (cod|polyp)")),
        }
    }
}

/// Everything a batch command depends on. Serializes canonically, so any
/// slice of it can be fingerprinted for the cache.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub egem_mode: EgemMode,
    pub dilate: (usize, usize),
    pub canny: CannyParams,
    pub offset: i32,
    pub box_jitter: usize,
    pub subband: Subband,
    pub metrics: MetricConfig,
    pub cache_root: PathBuf,
    pub workers: usize,
    pub seed: u64,
    pub format: TableFormat,
    pub protocol: Protocol,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            egem_mode: EgemMode::Binary,
            dilate: (3, 5),
            canny: CannyParams::default(),
            offset: ThresholdSpec::DEFAULT_OFFSET,
            box_jitter: 0,
            subband: Subband::HH,
            metrics: MetricConfig::default(),
            cache_root: PathBuf::from("cache"),
            workers: 1,
            seed: 0,
            format: TableFormat::Csv,
            protocol: Protocol::Cod,
        }
    }
}

impl RunConfig {
    pub fn dilate_pair(&self) -> Result<DilatePair, campro::boundary::BoundaryError> {
        DilatePair::from_sizes(self.dilate.0, self.dilate.1)
    }

    /// Fingerprint of the gradient-boundary prompt stage.
    pub fn egem_fingerprint(&self) -> String {
        fingerprint_params(&EgemStageParams {
            d1: self.dilate.0,
            d2: self.dilate.1,
            mode: self.egem_mode,
            canny: self.canny,
        })
    }

    /// Fingerprint of the box-prompt stage.
    pub fn box_fingerprint(&self) -> String {
        fingerprint_params(&BoxStageParams {
            jitter: self.box_jitter,
        })
    }

    /// Fingerprint of the generated-boundary stage.
    pub fn boundary_gen_fingerprint(&self) -> String {
        fingerprint_params(&BoundaryGenParams {
            offset: self.offset,
            canny: self.canny,
        })
    }

    /// Fingerprint of the subband-extraction stage.
    pub fn dwt_fingerprint(&self) -> String {
        fingerprint_params(&DwtStageParams {
            subband: self.subband,
        })
    }
}

#[derive(Serialize)]
struct EgemStageParams {
    d1: usize,
    d2: usize,
    mode: EgemMode,
    canny: CannyParams,
}

#[derive(Serialize)]
struct BoxStageParams {
    jitter: usize,
}

#[derive(Serialize)]
struct BoundaryGenParams {
    offset: i32,
    canny: CannyParams,
}

#[derive(Serialize)]
struct DwtStageParams {
    subband: Subband,
}
