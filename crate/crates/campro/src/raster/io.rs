//! Image file ingestion and emission.
//!
//! PNG and JPEG are the production formats; PGM is accepted because it is
//! trivially hand-writable in tests. Color inputs reduce to luma with the
//! Rec.601 weights (299, 587, 114)/1000 regardless of what the decoder
//! would pick.

use std::path::Path;

use image::ImageReader;
use thiserror::Error;

use super::{BinaryMask, FloatMap, GrayImage};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Image {
        path: String,
        source: image::ImageError,
    },
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: zero-sized image")]
    Empty { path: String },
}

fn rec601_luma(r: u8, g: u8, b: u8) -> u8 {
    ((299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500) / 1000) as u8
}

/// Load any supported image as 8-bit grayscale.
pub fn load_gray(path: &Path) -> Result<GrayImage, IoError> {
    let display = path.display().to_string();
    let reader = ImageReader::open(path)
        .map_err(|source| IoError::File {
            path: display.clone(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| IoError::File {
            path: display.clone(),
            source,
        })?;
    let img = reader.decode().map_err(|source| IoError::Image {
        path: display.clone(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(IoError::Empty { path: display });
    }
    let data = match img {
        image::DynamicImage::ImageLuma8(luma) => luma.into_raw(),
        other => {
            let rgb = other.to_rgb8();
            rgb.pixels().map(|p| rec601_luma(p[0], p[1], p[2])).collect()
        }
    };
    Ok(GrayImage::new(w, h, data).expect("decoder length matches dims"))
}

/// Load a mask: nonzero-ish intensities (>127) are foreground.
pub fn load_mask(path: &Path) -> Result<BinaryMask, IoError> {
    Ok(load_gray(path)?.to_mask(127))
}

/// Load a prediction map: intensities scaled into [0,1].
pub fn load_float(path: &Path) -> Result<FloatMap, IoError> {
    Ok(load_gray(path)?.to_float())
}

pub fn save_gray(img: &GrayImage, path: &Path) -> Result<(), IoError> {
    let buf = image::GrayImage::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().to_vec(),
    )
    .expect("length matches dims");
    buf.save(path).map_err(|source| IoError::Image {
        path: path.display().to_string(),
        source,
    })
}

/// Save a [0,1] map as an 8-bit image.
pub fn save_float(map: &FloatMap, path: &Path) -> Result<(), IoError> {
    save_gray(&map.to_gray(), path)
}
