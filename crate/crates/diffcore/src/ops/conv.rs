//! 2D convolution and its transpose, via im2col and a strided GEMM.
//!
//! Padding is zero padding. With [`Padding::Same`] the output extent is
//! `ceil(in / stride)` and `(k - 1) / 2` pixels are padded before the first
//! row and column, so output pixel `j` is centered on input pixel
//! `stride * j`. The transposed convolution is the exact adjoint of the
//! same-padded convolution that maps `stride * n` pixels to `n`.

use std::sync::Arc;

use crate::element::{gemm, Element, MatRef};
use crate::error::{Error, Result};
use crate::memory::Buffer;
use crate::ops::direct::{self, PlaneGeom};
use crate::tape::{Tape, Var};
use crate::tensor::{Shape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    Same,
    Valid,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ConvGeom {
    pub in_c: usize,
    pub in_h: usize,
    pub in_w: usize,
    pub k_h: usize,
    pub k_w: usize,
    pub stride: usize,
    pub pad_h: usize,
    pub pad_w: usize,
    pub out_h: usize,
    pub out_w: usize,
}

impl ConvGeom {
    pub fn new(in_c: usize, in_h: usize, in_w: usize, k_h: usize, k_w: usize, stride: usize, padding: Padding) -> Result<Self> {
        let (pad_h, pad_w, out_h, out_w) = match padding {
            Padding::Same => ((k_h - 1) / 2, (k_w - 1) / 2, in_h.div_ceil(stride), in_w.div_ceil(stride)),
            Padding::Valid => {
                if k_h > in_h || k_w > in_w {
                    return Err(Error::contract("conv2d", "kernel larger than input with valid padding"));
                }
                (0, 0, (in_h - k_h) / stride + 1, (in_w - k_w) / stride + 1)
            }
        };
        Ok(ConvGeom { in_c, in_h, in_w, k_h, k_w, stride, pad_h, pad_w, out_h, out_w })
    }

    pub fn col_rows(&self) -> usize {
        self.in_c * self.k_h * self.k_w
    }

    pub fn col_cols(&self) -> usize {
        self.out_h * self.out_w
    }

    fn input_len(&self) -> usize {
        self.in_c * self.in_h * self.in_w
    }
}

/// Unfolds one image `[in_c, in_h, in_w]` into `[in_c*k_h*k_w, out_h*out_w]`.
pub(crate) fn im2col<T: Element>(g: &ConvGeom, x: &[T], cols: &mut [T]) {
    debug_assert_eq!(x.len(), g.input_len());
    debug_assert_eq!(cols.len(), g.col_rows() * g.col_cols());
    let plane = g.in_h * g.in_w;
    let n_cols = g.col_cols();
    let mut row = 0;
    for c in 0..g.in_c {
        let xc = &x[c * plane..(c + 1) * plane];
        for ki in 0..g.k_h {
            for kj in 0..g.k_w {
                let dst = &mut cols[row * n_cols..(row + 1) * n_cols];
                for oy in 0..g.out_h {
                    let out_row = &mut dst[oy * g.out_w..(oy + 1) * g.out_w];
                    let iy = (oy * g.stride + ki) as isize - g.pad_h as isize;
                    if iy < 0 || iy >= g.in_h as isize {
                        out_row.iter_mut().for_each(|v| *v = T::zero());
                        continue;
                    }
                    let src = &xc[iy as usize * g.in_w..(iy as usize + 1) * g.in_w];
                    let off = kj as isize - g.pad_w as isize;
                    if g.stride == 1 {
                        // valid ox range: 0 <= ox + off < in_w
                        let lo = (-off).clamp(0, g.out_w as isize) as usize;
                        let hi = (g.in_w as isize - off).clamp(0, g.out_w as isize) as usize;
                        out_row[..lo].iter_mut().for_each(|v| *v = T::zero());
                        out_row[hi.max(lo)..].iter_mut().for_each(|v| *v = T::zero());
                        if hi > lo {
                            let s0 = (lo as isize + off) as usize;
                            out_row[lo..hi].copy_from_slice(&src[s0..s0 + (hi - lo)]);
                        }
                    } else {
                        for (ox, v) in out_row.iter_mut().enumerate() {
                            let ix = (ox * g.stride) as isize + off;
                            *v = if ix >= 0 && ix < g.in_w as isize { src[ix as usize] } else { T::zero() };
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatters (adds) columns back into an image.
pub(crate) fn col2im<T: Element>(g: &ConvGeom, cols: &[T], x: &mut [T]) {
    debug_assert_eq!(x.len(), g.input_len());
    let plane = g.in_h * g.in_w;
    let n_cols = g.col_cols();
    let mut row = 0;
    for c in 0..g.in_c {
        let xc = &mut x[c * plane..(c + 1) * plane];
        for ki in 0..g.k_h {
            for kj in 0..g.k_w {
                let src = &cols[row * n_cols..(row + 1) * n_cols];
                for oy in 0..g.out_h {
                    let iy = (oy * g.stride + ki) as isize - g.pad_h as isize;
                    if iy < 0 || iy >= g.in_h as isize {
                        continue;
                    }
                    let dst = &mut xc[iy as usize * g.in_w..(iy as usize + 1) * g.in_w];
                    let src_row = &src[oy * g.out_w..(oy + 1) * g.out_w];
                    let off = kj as isize - g.pad_w as isize;
                    // valid ox range: 0 <= stride * ox + off < in_w
                    let s = g.stride as isize;
                    let lo = ((-off).max(0) + s - 1) / s;
                    let hi = ((g.in_w as isize - off + s - 1) / s).clamp(0, g.out_w as isize);
                    if hi <= lo {
                        continue;
                    }
                    let (lo, hi) = (lo as usize, hi as usize);
                    let i0 = (lo as isize * s + off) as usize;
                    if g.stride == 1 {
                        let d = &mut dst[i0..i0 + (hi - lo)];
                        for (a, &v) in d.iter_mut().zip(&src_row[lo..hi]) {
                            *a = *a + v;
                        }
                    } else {
                        for (j, &v) in src_row[lo..hi].iter().enumerate() {
                            let ix = i0 + j * g.stride;
                            dst[ix] = dst[ix] + v;
                        }
                    }
                }
                row += 1;
            }
        }
    }
}

fn kernel_dims<T: Element>(w: &Tensor<T>, op: &'static str) -> Result<(usize, usize, usize, usize)> {
    w.nchw()
        .ok_or_else(|| Error::contract(op, format!("kernel must be rank 4, got {:?}", w.dims())))
}

fn input_dims<T: Element>(x: &Tensor<T>, op: &'static str) -> Result<(usize, usize, usize, usize)> {
    x.nchw()
        .ok_or_else(|| Error::contract(op, format!("input must be [n,c,h,w], got {:?}", x.dims())))
}

fn add_bias<T: Element>(out: &mut [T], bias: &[T], plane: usize) {
    for (c, &b) in bias.iter().enumerate() {
        out[c * plane..(c + 1) * plane].iter_mut().for_each(|v| *v = *v + b);
    }
}

fn bias_grad<T: Element>(g: &[T], n: usize, channels: usize, plane: usize) -> Vec<T> {
    let mut db = vec![T::zero(); channels];
    for bi in 0..n {
        for (c, acc) in db.iter_mut().enumerate() {
            let s = (bi * channels + c) * plane;
            *acc = *acc + g[s..s + plane].iter().copied().sum::<T>();
        }
    }
    db
}

/// Cross-correlation of `x [n,in_c,h,w]` with `w [out_c,in_c,k_h,k_w]` plus `b [out_c]`.
pub fn conv2d<T: Element>(
    tape: &Tape<T>,
    x: &Var<T>,
    w: &Var<T>,
    b: &Var<T>,
    stride: usize,
    padding: Padding,
) -> Result<Var<T>> {
    const OP: &str = "conv2d";
    let (n, in_c, h, wd) = input_dims(x.value(), OP)?;
    let (out_c, k_in, k_h, k_w) = kernel_dims(w.value(), OP)?;
    if stride == 0 {
        return Err(Error::contract(OP, "stride must be positive"));
    }
    if k_in != in_c {
        return Err(Error::contract(OP, format!("input has {in_c} channels, kernel expects {k_in}")));
    }
    if k_h % 2 == 0 || k_w % 2 == 0 {
        return Err(Error::contract(OP, format!("kernel extents {k_h}x{k_w} must be odd")));
    }
    if b.dims() != [out_c] {
        return Err(Error::contract(OP, format!("bias shape {:?} != [{out_c}]", b.dims())));
    }
    let geom = ConvGeom::new(in_c, h, wd, k_h, k_w, stride, padding)?;
    let k = geom.col_rows();
    let p = geom.col_cols();
    if let Some(pg) = direct_geom(&geom) {
        let xs = x.value().data();
        let mut out = vec![T::zero(); n * out_c * p];
        for (bi, dst) in out.chunks_exact_mut(out_c * p).enumerate() {
            let xp = direct::pad(pg, in_c, &xs[bi * in_c * p..(bi + 1) * in_c * p]);
            direct::correlate(pg, in_c, out_c, &xp, w.value().data(), Some(b.value().data()), dst);
        }
        let out = Tensor::from_parts(Shape::new(&[n, out_c, h, wd])?, out);
        let xv = x.value_arc();
        let wv = w.value_arc();
        return tape.record(OP, out, &[x, w, b], move |g, needs| {
            direct_backward(pg, n, in_c, out_c, &xv, &wv, g, needs)
        });
    }
    let mut cols = Buffer::filled(k * p, T::zero());
    let mut out = vec![T::zero(); n * out_c * p];
    let xs = x.value().data();
    let ws = w.value().data();
    for bi in 0..n {
        im2col(&geom, &xs[bi * geom.input_len()..(bi + 1) * geom.input_len()], &mut cols);
        let dst = &mut out[bi * out_c * p..(bi + 1) * out_c * p];
        gemm(MatRef::row_major(ws, out_c, k), MatRef::row_major(&cols, k, p), dst, false);
        add_bias(dst, b.value().data(), p);
    }
    drop(cols);
    let out = Tensor::from_parts(Shape::new(&[n, out_c, geom.out_h, geom.out_w])?, out);

    let xv = x.value_arc();
    let wv = w.value_arc();
    tape.record(OP, out, &[x, w, b], move |g, needs| {
        conv_backward(&geom, n, out_c, &xv, &wv, g, needs)
    })
}

/// Stride-1 same-padded 3x3 kernels take the direct path.
fn direct_geom(g: &ConvGeom) -> Option<PlaneGeom> {
    (g.stride == 1 && g.k_h == 3 && g.k_w == 3 && g.pad_h == 1 && g.pad_w == 1)
        .then_some(PlaneGeom { h: g.in_h, w: g.in_w })
}

#[allow(clippy::too_many_arguments)]
fn direct_backward<T: Element>(
    pg: PlaneGeom,
    n: usize,
    in_c: usize,
    out_c: usize,
    x: &Arc<Tensor<T>>,
    w: &Arc<Tensor<T>>,
    g: &Tensor<T>,
    needs: &[bool],
) -> Result<Vec<Option<Tensor<T>>>> {
    let p = pg.h * pg.w;
    let gs = g.data();
    let dx = needs[0].then(|| {
        let flipped = direct::adjoint_kernel(w.data(), out_c, in_c);
        let mut dx = vec![T::zero(); n * in_c * p];
        for (bi, dst) in dx.chunks_exact_mut(in_c * p).enumerate() {
            let gp = direct::pad(pg, out_c, &gs[bi * out_c * p..(bi + 1) * out_c * p]);
            direct::correlate(pg, out_c, in_c, &gp, &flipped, None, dst);
        }
        dx
    });
    let dw = needs[1].then(|| {
        let geom = ConvGeom::new(in_c, pg.h, pg.w, 3, 3, 1, Padding::Same).expect("3x3 same geometry");
        let k = geom.col_rows();
        let mut cols = Buffer::filled(k * p, T::zero());
        let mut dw = vec![T::zero(); w.len()];
        for bi in 0..n {
            im2col(&geom, &x.data()[bi * in_c * p..(bi + 1) * in_c * p], &mut cols);
            let gb = &gs[bi * out_c * p..(bi + 1) * out_c * p];
            gemm(MatRef::row_major(gb, out_c, p), MatRef::row_major(&cols, k, p).t(), &mut dw, true);
        }
        dw
    });
    let db = needs[2].then(|| bias_grad(gs, n, out_c, p));
    Ok(vec![
        dx.map(|d| Tensor::from_parts(x.shape().clone(), d)),
        dw.map(|d| Tensor::from_parts(w.shape().clone(), d)),
        db.map(|d| Tensor::from_parts(Shape(vec![out_c]), d)),
    ])
}

fn conv_backward<T: Element>(
    geom: &ConvGeom,
    n: usize,
    out_c: usize,
    x: &Arc<Tensor<T>>,
    w: &Arc<Tensor<T>>,
    g: &Tensor<T>,
    needs: &[bool],
) -> Result<Vec<Option<Tensor<T>>>> {
    let k = geom.col_rows();
    let p = geom.col_cols();
    let in_len = geom.input_len();
    let gs = g.data();
    let ws = w.data();
    let mut dx = needs[0].then(|| vec![T::zero(); n * in_len]);
    let mut dw = needs[1].then(|| vec![T::zero(); out_c * k]);
    let mut cols = Buffer::filled(k * p, T::zero());
    for bi in 0..n {
        let gb = &gs[bi * out_c * p..(bi + 1) * out_c * p];
        if let Some(dw) = dw.as_mut() {
            im2col(geom, &x.data()[bi * in_len..(bi + 1) * in_len], &mut cols);
            gemm(MatRef::row_major(gb, out_c, p), MatRef::row_major(&cols, k, p).t(), dw, true);
        }
        if let Some(dx) = dx.as_mut() {
            gemm(MatRef::row_major(ws, out_c, k).t(), MatRef::row_major(gb, out_c, p), &mut cols, false);
            col2im(geom, &cols, &mut dx[bi * in_len..(bi + 1) * in_len]);
        }
    }
    let db = needs[2].then(|| bias_grad(gs, n, out_c, p));
    Ok(vec![
        dx.map(|d| Tensor::from_parts(x.shape().clone(), d)),
        dw.map(|d| Tensor::from_parts(w.shape().clone(), d)),
        db.map(|d| Tensor::from_parts(Shape(vec![out_c]), d)),
    ])
}

/// Transposed convolution upsampling by `stride`: `x [n,in_c,h,w]`,
/// `w [in_c,out_c,k,k]`, `b [out_c]` to `[n,out_c,stride*h,stride*w]`.
pub fn transposed_conv2d<T: Element>(tape: &Tape<T>, x: &Var<T>, w: &Var<T>, b: &Var<T>, stride: usize) -> Result<Var<T>> {
    const OP: &str = "transposed_conv2d";
    let (n, in_c, h, wd) = input_dims(x.value(), OP)?;
    let (k_in, out_c, k_h, k_w) = kernel_dims(w.value(), OP)?;
    if stride == 0 {
        return Err(Error::contract(OP, "stride must be positive"));
    }
    if k_h != k_w || k_h % 2 == 0 {
        return Err(Error::contract(OP, format!("kernel must be square and odd, got {k_h}x{k_w}")));
    }
    if k_in != in_c {
        return Err(Error::contract(OP, format!("input has {in_c} channels, kernel expects {k_in}")));
    }
    if b.dims() != [out_c] {
        return Err(Error::contract(OP, format!("bias shape {:?} != [{out_c}]", b.dims())));
    }
    // Geometry of the adjoint convolution: [out_c, s*h, s*w] -> [in_c, h, w].
    let geom = ConvGeom::new(out_c, stride * h, stride * wd, k_h, k_w, stride, Padding::Same)?;
    debug_assert_eq!((geom.out_h, geom.out_w), (h, wd));
    let k = geom.col_rows();
    let p = geom.col_cols();
    let out_len = geom.input_len();
    let mut cols = Buffer::filled(k * p, T::zero());
    let mut out = vec![T::zero(); n * out_len];
    let xs = x.value().data();
    let ws = w.value().data();
    for bi in 0..n {
        let xb = &xs[bi * in_c * p..(bi + 1) * in_c * p];
        gemm(MatRef::row_major(ws, in_c, k).t(), MatRef::row_major(xb, in_c, p), &mut cols, false);
        let dst = &mut out[bi * out_len..(bi + 1) * out_len];
        col2im(&geom, &cols, dst);
        add_bias(dst, b.value().data(), geom.in_h * geom.in_w);
    }
    drop(cols);
    let out = Tensor::from_parts(Shape::new(&[n, out_c, geom.in_h, geom.in_w])?, out);

    let xv = x.value_arc();
    let wv = w.value_arc();
    tape.record(OP, out, &[x, w, b], move |g, needs| {
        let gs = g.data();
        let mut dx = needs[0].then(|| vec![T::zero(); n * in_c * p]);
        let mut dw = needs[1].then(|| vec![T::zero(); in_c * k]);
        if dx.is_some() || dw.is_some() {
            let mut cols = Buffer::filled(k * p, T::zero());
            for bi in 0..n {
                im2col(&geom, &gs[bi * out_len..(bi + 1) * out_len], &mut cols);
                if let Some(dx) = dx.as_mut() {
                    gemm(
                        MatRef::row_major(wv.data(), in_c, k),
                        MatRef::row_major(&cols, k, p),
                        &mut dx[bi * in_c * p..(bi + 1) * in_c * p],
                        false,
                    );
                }
                if let Some(dw) = dw.as_mut() {
                    let xb = &xv.data()[bi * in_c * p..(bi + 1) * in_c * p];
                    gemm(MatRef::row_major(xb, in_c, p), MatRef::row_major(&cols, k, p).t(), dw, true);
                }
            }
        }
        let db = needs[2].then(|| bias_grad(gs, n, out_c, geom.in_h * geom.in_w));
        Ok(vec![
            dx.map(|d| Tensor::from_parts(xv.shape().clone(), d)),
            dw.map(|d| Tensor::from_parts(wv.shape().clone(), d)),
            db.map(|d| Tensor::from_parts(Shape(vec![out_c]), d)),
        ])
    })
}
