//! Network inputs for one multi-view unit.

use skysweep_diffcore::{Element, Tensor};
use skysweep_planesweep::CameraModel;

use crate::error::{ModelError, Result};

/// Standardizes each channel of an interleaved 8-bit RGB image to zero mean
/// and unit variance, returning a planar `[1,3,H,W]` tensor.
pub fn normalize_image<T: Element>(rgb: &[u8], width: usize, height: usize) -> Result<Tensor<T>> {
    let n = width * height;
    if rgb.len() != 3 * n || n == 0 {
        return Err(ModelError::Contract(format!("RGB buffer of {} bytes for {width}x{height}", rgb.len())));
    }
    let mut out = vec![T::zero(); 3 * n];
    for c in 0..3 {
        let vals = || rgb.iter().skip(c).step_by(3).map(|&v| v as f64);
        let mean = vals().sum::<f64>() / n as f64;
        let var = vals().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let inv = if var > 1e-12 { 1.0 / var.sqrt() } else { 0.0 };
        for (o, v) in out[c * n..(c + 1) * n].iter_mut().zip(vals()) {
            *o = T::lit((v - mean) * inv);
        }
    }
    Ok(Tensor::from_vec(&[1, 3, height, width], out)?)
}

/// Normalized images and cameras of one unit.
#[derive(Clone)]
pub struct UnitInput<T> {
    pub images: Vec<Tensor<T>>,
    pub cameras: Vec<CameraModel>,
    /// Position of the reference view in `images`.
    pub reference: usize,
}

impl<T: Element> UnitInput<T> {
    pub fn new(images: Vec<Tensor<T>>, cameras: Vec<CameraModel>, reference: usize) -> Result<Self> {
        if images.len() != cameras.len() || images.len() < 2 {
            return Err(ModelError::Contract(format!(
                "{} images with {} cameras; need at least 2 matching views",
                images.len(),
                cameras.len()
            )));
        }
        if reference >= images.len() {
            return Err(ModelError::Contract(format!("reference {reference} outside {} views", images.len())));
        }
        let dims = images[0].dims().to_vec();
        for (img, cam) in images.iter().zip(&cameras) {
            if img.dims() != dims.as_slice() || dims.len() != 4 || dims[1] != 3 {
                return Err(ModelError::Contract(format!("view images must share one [1,3,H,W] shape, got {:?}", img.dims())));
            }
            if (cam.height(), cam.width()) != (dims[2], dims[3]) {
                return Err(ModelError::Contract(format!(
                    "camera {}x{} does not match image {}x{}",
                    cam.width(),
                    cam.height(),
                    dims[3],
                    dims[2]
                )));
            }
        }
        Ok(UnitInput { images, cameras, reference })
    }

    /// From interleaved RGB buffers.
    pub fn from_rgb(views: &[(&[u8], &CameraModel)], reference: usize) -> Result<Self> {
        let mut images = Vec::with_capacity(views.len());
        for (rgb, cam) in views {
            images.push(normalize_image(rgb, cam.width(), cam.height())?);
        }
        Self::new(images, views.iter().map(|(_, c)| (*c).clone()).collect(), reference)
    }

    pub fn height(&self) -> usize {
        self.images[0].dims()[2]
    }

    pub fn width(&self) -> usize {
        self.images[0].dims()[3]
    }

    pub fn views(&self) -> usize {
        self.images.len()
    }
}
