//! Image and depth rasters plus their PNG encodings.
//!
//! Depths are stored as 16-bit grayscale with `value = round(depth_m * 100)`
//! and `0` meaning invalid, which caps representable depth at 655.35 m.

use std::path::Path;

use image::{ImageBuffer, Luma, Rgb};

use crate::error::{Result, SynthError};

pub const DEPTH_SCALE: f64 = 100.0;
pub const MAX_ENCODED_DEPTH: f64 = u16::MAX as f64 / DEPTH_SCALE;

/// 8-bit interleaved RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        RgbImage { width, height, data: vec![0; width * height * 3] }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn crop(&self, left: usize, top: usize, width: usize, height: usize) -> RgbImage {
        let mut out = RgbImage::new(width, height);
        for y in 0..height {
            let s = ((top + y) * self.width + left) * 3;
            out.data[y * width * 3..(y + 1) * width * 3].copy_from_slice(&self.data[s..s + width * 3]);
        }
        out
    }
}

/// Per-pixel depth in meters with a validity mask.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    pub width: usize,
    pub height: usize,
    pub depth: Vec<f64>,
    pub valid: Vec<bool>,
}

impl DepthMap {
    pub fn invalid(width: usize, height: usize) -> Self {
        DepthMap { width, height, depth: vec![0.0; width * height], valid: vec![false; width * height] }
    }

    pub fn constant(width: usize, height: usize, depth: f64) -> Self {
        DepthMap { width, height, depth: vec![depth; width * height], valid: vec![true; width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        self.valid[i].then_some(self.depth[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Minimum and maximum valid depth.
    pub fn range(&self) -> Option<(f64, f64)> {
        self.depth
            .iter()
            .zip(&self.valid)
            .filter(|(_, &v)| v)
            .fold(None, |acc, (&d, _)| match acc {
                None => Some((d, d)),
                Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
            })
    }

    pub fn crop(&self, left: usize, top: usize, width: usize, height: usize) -> DepthMap {
        let mut out = DepthMap::invalid(width, height);
        for y in 0..height {
            let s = (top + y) * self.width + left;
            out.depth[y * width..(y + 1) * width].copy_from_slice(&self.depth[s..s + width]);
            out.valid[y * width..(y + 1) * width].copy_from_slice(&self.valid[s..s + width]);
        }
        out
    }

    /// The 16-bit code of every pixel.
    pub fn encode(&self) -> Result<Vec<u16>> {
        self.depth
            .iter()
            .zip(&self.valid)
            .map(|(&d, &v)| if v { encode_depth(d) } else { Ok(0) })
            .collect()
    }

    pub fn decode(width: usize, height: usize, codes: &[u16]) -> DepthMap {
        let depth = codes.iter().map(|&c| c as f64 / DEPTH_SCALE).collect();
        let valid = codes.iter().map(|&c| c != 0).collect();
        DepthMap { width, height, depth, valid }
    }
}

pub fn encode_depth(depth_m: f64) -> Result<u16> {
    let code = (depth_m * DEPTH_SCALE).round();
    if !(code >= 1.0 && code <= u16::MAX as f64) {
        return Err(SynthError::Contract(format!(
            "depth {depth_m} m cannot be encoded (valid range 0.01..={MAX_ENCODED_DEPTH} m)"
        )));
    }
    Ok(code as u16)
}

fn image_err(path: &Path, e: image::ImageError) -> SynthError {
    match e {
        image::ImageError::IoError(io) => SynthError::io(path, io),
        other => SynthError::format(path, other.to_string()),
    }
}

pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let buf: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(img.width as u32, img.height as u32, img.data.clone())
        .ok_or_else(|| SynthError::Contract("image buffer size mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| image_err(path, e))
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let image::DynamicImage::ImageRgb8(rgb) = img else {
        return Err(SynthError::format(path, "expected 8-bit RGB PNG"));
    };
    Ok(RgbImage { width: rgb.width() as usize, height: rgb.height() as usize, data: rgb.into_raw() })
}

pub fn save_depth(depth: &DepthMap, path: &Path) -> Result<()> {
    let codes = depth.encode()?;
    let buf: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(depth.width as u32, depth.height as u32, codes)
        .ok_or_else(|| SynthError::Contract("depth buffer size mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| image_err(path, e))
}

pub fn load_depth(path: &Path) -> Result<DepthMap> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let image::DynamicImage::ImageLuma16(gray) = img else {
        return Err(SynthError::format(path, "expected 16-bit grayscale PNG"));
    };
    let (w, h) = (gray.width() as usize, gray.height() as usize);
    Ok(DepthMap::decode(w, h, gray.as_raw()))
}

pub fn save_mask(mask: &[bool], width: usize, height: usize, path: &Path) -> Result<()> {
    let raw: Vec<u8> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
    let buf: ImageBuffer<Luma<u8>, _> = ImageBuffer::from_raw(width as u32, height as u32, raw)
        .ok_or_else(|| SynthError::Contract("mask buffer size mismatch".into()))?;
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|e| image_err(path, e))
}

pub fn load_mask(path: &Path) -> Result<Vec<bool>> {
    let img = image::open(path).map_err(|e| image_err(path, e))?;
    let image::DynamicImage::ImageLuma8(gray) = img else {
        return Err(SynthError::format(path, "expected 8-bit grayscale mask PNG"));
    };
    Ok(gray.as_raw().iter().map(|&v| v != 0).collect())
}
