//! Differentiable bilinear warping of feature maps through a homography.
//!
//! A feature map produced at `feature_scale` times the image resolution has
//! feature pixel `(x, y)` centered on image pixel `(x, y) / feature_scale`.
//! Samples falling outside the source map contribute zero.

use skysweep_diffcore::{Element, Result, Shape, Tape, Tensor, Var};

use crate::homography::Homography;

const NONE: u32 = u32::MAX;

/// Precomputed bilinear taps (up to four per output pixel).
#[derive(Clone, Debug)]
pub struct WarpPlan {
    height: usize,
    width: usize,
    index: Vec<[u32; 4]>,
    weight: Vec<[f64; 4]>,
}

impl WarpPlan {
    /// Taps for an `height x width` feature grid warped by `hom` (image pixels).
    pub fn new(hom: &Homography, feature_scale: f64, height: usize, width: usize) -> Self {
        let h = hom.rescaled(feature_scale);
        let mut index = Vec::with_capacity(height * width);
        let mut weight = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let mut idx = [NONE; 4];
                let mut wt = [0.0; 4];
                if let Some((sx, sy)) = h.apply(x as f64, y as f64) {
                    let (fx0, fy0) = (sx.floor(), sy.floor());
                    let (ax, ay) = (sx - fx0, sy - fy0);
                    let taps = [
                        (fx0, fy0, (1.0 - ax) * (1.0 - ay)),
                        (fx0 + 1.0, fy0, ax * (1.0 - ay)),
                        (fx0, fy0 + 1.0, (1.0 - ax) * ay),
                        (fx0 + 1.0, fy0 + 1.0, ax * ay),
                    ];
                    for (k, &(tx, ty, w)) in taps.iter().enumerate() {
                        if w != 0.0 && tx >= 0.0 && ty >= 0.0 && tx < width as f64 && ty < height as f64 {
                            idx[k] = (ty as usize * width + tx as usize) as u32;
                            wt[k] = w;
                        }
                    }
                }
                index.push(idx);
                weight.push(wt);
            }
        }
        WarpPlan { height, width, index, weight }
    }

    /// Applies the taps to every channel of `src` (`channels` planes of `height*width`).
    pub fn apply<T: Element>(&self, src: &[T], channels: usize, out: &mut [T]) {
        let plane = self.height * self.width;
        let weights: Vec<[T; 4]> = self.weight.iter().map(|w| w.map(T::lit)).collect();
        for c in 0..channels {
            let s = &src[c * plane..(c + 1) * plane];
            let o = &mut out[c * plane..(c + 1) * plane];
            for ((dst, idx), w) in o.iter_mut().zip(&self.index).zip(&weights) {
                let mut acc = T::zero();
                for k in 0..4 {
                    if idx[k] != NONE {
                        acc = acc + w[k] * s[idx[k] as usize];
                    }
                }
                *dst = acc;
            }
        }
    }

    fn apply_adjoint<T: Element>(&self, g: &[T], channels: usize, out: &mut [T]) {
        let plane = self.height * self.width;
        let weights: Vec<[T; 4]> = self.weight.iter().map(|w| w.map(T::lit)).collect();
        for c in 0..channels {
            let gc = &g[c * plane..(c + 1) * plane];
            let o = &mut out[c * plane..(c + 1) * plane];
            for ((&gv, idx), w) in gc.iter().zip(&self.index).zip(&weights) {
                for k in 0..4 {
                    if idx[k] != NONE {
                        let i = idx[k] as usize;
                        o[i] = o[i] + w[k] * gv;
                    }
                }
            }
        }
    }
}

/// Warps `src [1,C,h,w]` into the reference view through `hom`.
pub fn warp_bilinear<T: Element>(tape: &Tape<T>, src: &Var<T>, hom: &Homography, feature_scale: f64) -> Result<Var<T>> {
    let (n, c, h, w) = src.value().nchw().ok_or_else(|| {
        skysweep_diffcore::Error::contract("warp_bilinear", format!("expected [1,C,h,w], got {:?}", src.dims()))
    })?;
    if n != 1 {
        return Err(skysweep_diffcore::Error::contract("warp_bilinear", "batch size must be 1"));
    }
    let plan = WarpPlan::new(hom, feature_scale, h, w);
    warp_with_plan(tape, src, plan, c)
}

/// Warps with precomputed taps; `plan` must match the spatial extents of `src`.
pub fn warp_with_plan<T: Element>(tape: &Tape<T>, src: &Var<T>, plan: WarpPlan, channels: usize) -> Result<Var<T>> {
    let mut out = vec![T::zero(); src.value().len()];
    plan.apply(src.value().data(), channels, &mut out);
    let shape: Shape = src.value().shape().clone();
    let out = Tensor::from_vec(shape.dims(), out)?;
    tape.record("warp_bilinear", out, &[src], move |g, _| {
        let mut d = vec![T::zero(); g.len()];
        plan.apply_adjoint(g.data(), channels, &mut d);
        Ok(vec![Some(Tensor::from_vec(shape.dims(), d)?)])
    })
}
