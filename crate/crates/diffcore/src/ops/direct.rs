//! Direct kernels for stride-1, same-padded 3x3 convolution.
//!
//! The input is copied once into a zero-bordered buffer, then each output
//! tile of a few channels by a run of pixels is accumulated in registers.
//! Summation order is fixed by the code. Hosts with AVX2 and FMA use fused
//! multiply-adds, so results are reproducible per host but may differ in
//! the last bits between hosts.

use crate::element::Element;
use crate::memory::Buffer;

const K: usize = 3;
const TAPS: usize = K * K;
const CO_BLOCK: usize = 4;

#[derive(Clone, Copy, Debug)]
pub(crate) struct PlaneGeom {
    pub h: usize,
    pub w: usize,
}

impl PlaneGeom {
    fn plane(&self) -> usize {
        self.h * self.w
    }

    fn padded_w(&self) -> usize {
        self.w + K - 1
    }

    fn padded_plane(&self) -> usize {
        (self.h + K - 1) * self.padded_w()
    }
}

/// Copies `[c,h,w]` into `[c,h+2,w+2]` with a zero border.
pub(crate) fn pad<T: Element>(g: PlaneGeom, channels: usize, x: &[T]) -> Buffer<T> {
    let pw = g.padded_w();
    let mut out = Buffer::filled(channels * g.padded_plane(), T::zero());
    for (c, src) in x.chunks_exact(g.plane()).enumerate().take(channels) {
        let dst = &mut out[c * g.padded_plane()..(c + 1) * g.padded_plane()];
        for (y, row) in src.chunks_exact(g.w).enumerate() {
            dst[(y + 1) * pw + 1..(y + 1) * pw + 1 + g.w].copy_from_slice(row);
        }
    }
    out
}

/// `out[co] = bias[co] + sum_ci w[co,ci] * x[ci]` (cross-correlation), with
/// `xp` the padded `[in_c,h+2,w+2]`, `w [out_c,in_c,3,3]` and `out [out_c,h,w]`.
pub(crate) fn correlate<T: Element>(
    g: PlaneGeom,
    in_c: usize,
    out_c: usize,
    xp: &[T],
    w: &[T],
    bias: Option<&[T]>,
    out: &mut [T],
) {
    debug_assert_eq!(xp.len(), in_c * g.padded_plane());
    debug_assert_eq!(w.len(), out_c * in_c * TAPS);
    debug_assert_eq!(out.len(), out_c * g.plane());
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
        // SAFETY: the required features were detected at runtime.
        unsafe { correlate_fma(g, in_c, out_c, xp, w, bias, out) };
        return;
    }
    correlate_body::<T, false>(g, in_c, out_c, xp, w, bias, out)
}

/// Kernel for the input gradient: `w [out_c,in_c,3,3]` to `[in_c,out_c,3,3]`,
/// transposed in channels and flipped in both spatial axes.
pub(crate) fn adjoint_kernel<T: Element>(w: &[T], out_c: usize, in_c: usize) -> Vec<T> {
    let mut flipped = vec![T::zero(); w.len()];
    for co in 0..out_c {
        for ci in 0..in_c {
            let src = &w[(co * in_c + ci) * TAPS..(co * in_c + ci + 1) * TAPS];
            let dst = &mut flipped[(ci * out_c + co) * TAPS..(ci * out_c + co + 1) * TAPS];
            for (d, s) in dst.iter_mut().zip(src.iter().rev()) {
                *d = *s;
            }
        }
    }
    flipped
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn correlate_fma<T: Element>(
    g: PlaneGeom,
    in_c: usize,
    out_c: usize,
    xp: &[T],
    w: &[T],
    bias: Option<&[T]>,
    out: &mut [T],
) {
    correlate_body::<T, true>(g, in_c, out_c, xp, w, bias, out)
}

#[inline(always)]
fn madd<T: Element, const FUSED: bool>(a: T, b: T, acc: T) -> T {
    if FUSED {
        a.mul_add(b, acc)
    } else {
        acc + a * b
    }
}

#[inline(always)]
fn correlate_body<T: Element, const FUSED: bool>(
    g: PlaneGeom,
    in_c: usize,
    out_c: usize,
    xp: &[T],
    w: &[T],
    bias: Option<&[T]>,
    out: &mut [T],
) {
    let full = out_c / CO_BLOCK * CO_BLOCK;
    for co in (0..full).step_by(CO_BLOCK) {
        channel_block::<T, CO_BLOCK, FUSED>(g, in_c, co, xp, w, bias, out);
    }
    for co in full..out_c {
        channel_block::<T, 1, FUSED>(g, in_c, co, xp, w, bias, out);
    }
}

#[inline(always)]
fn channel_block<T: Element, const CB: usize, const FUSED: bool>(
    g: PlaneGeom,
    in_c: usize,
    co: usize,
    xp: &[T],
    w: &[T],
    bias: Option<&[T]>,
    out: &mut [T],
) {
    // weights as [ci][tap][CB]
    let mut wb = vec![T::zero(); in_c * TAPS * CB];
    for c in 0..CB {
        for ci in 0..in_c {
            for t in 0..TAPS {
                wb[(ci * TAPS + t) * CB + c] = w[((co + c) * in_c + ci) * TAPS + t];
            }
        }
    }
    let mut init = [T::zero(); CB];
    if let Some(b) = bias {
        init.copy_from_slice(&b[co..co + CB]);
    }
    let plane = g.plane();
    for oy in 0..g.h {
        let mut ox = 0;
        while ox + 16 <= g.w {
            let acc = tile::<T, CB, 16, FUSED>(g, in_c, xp, &wb, oy, ox, init);
            store(out, plane, co, oy * g.w + ox, &acc);
            ox += 16;
        }
        while ox + 8 <= g.w {
            let acc = tile::<T, CB, 8, FUSED>(g, in_c, xp, &wb, oy, ox, init);
            store(out, plane, co, oy * g.w + ox, &acc);
            ox += 8;
        }
        while ox < g.w {
            let acc = tile::<T, CB, 1, FUSED>(g, in_c, xp, &wb, oy, ox, init);
            store(out, plane, co, oy * g.w + ox, &acc);
            ox += 1;
        }
    }
}

#[inline(always)]
fn store<T: Element, const CB: usize, const PX: usize>(out: &mut [T], plane: usize, co: usize, at: usize, acc: &[[T; PX]; CB]) {
    for (c, a) in acc.iter().enumerate() {
        let s = (co + c) * plane + at;
        out[s..s + PX].copy_from_slice(a);
    }
}

#[inline(always)]
fn tile<T: Element, const CB: usize, const PX: usize, const FUSED: bool>(
    g: PlaneGeom,
    in_c: usize,
    xp: &[T],
    wb: &[T],
    oy: usize,
    ox: usize,
    init: [T; CB],
) -> [[T; PX]; CB] {
    let pw = g.padded_w();
    let pplane = g.padded_plane();
    let mut acc = [[T::zero(); PX]; CB];
    for c in 0..CB {
        acc[c] = [init[c]; PX];
    }
    for ci in 0..in_c {
        let wc = &wb[ci * TAPS * CB..(ci + 1) * TAPS * CB];
        for ky in 0..K {
            let s = ci * pplane + (oy + ky) * pw + ox;
            let row = &xp[s..s + PX + K - 1];
            for kx in 0..K {
                let src: &[T; PX] = row[kx..kx + PX].try_into().unwrap();
                let wv: &[T; CB] = wc[(ky * K + kx) * CB..(ky * K + kx + 1) * CB].try_into().unwrap();
                for c in 0..CB {
                    for j in 0..PX {
                        acc[c][j] = madd::<T, FUSED>(wv[c], src[j], acc[c][j]);
                    }
                }
            }
        }
    }
    acc
}
