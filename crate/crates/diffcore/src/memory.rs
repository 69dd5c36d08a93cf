//! Live-byte accounting for tensor storage.
//!
//! Every [`Buffer`] reports its allocation and release to a counter owned by
//! the current thread. The counter keeps the high-water mark since the last
//! [`reset_peak`]. Buffers released on another thread than the one that
//! allocated them are credited to the releasing thread.

use std::cell::Cell;
use std::mem::size_of;
use std::ops::{Deref, DerefMut};

thread_local! {
    static LIVE: Cell<isize> = const { Cell::new(0) };
    static PEAK: Cell<isize> = const { Cell::new(0) };
}

fn on_alloc(bytes: usize) {
    LIVE.with(|live| {
        let now = live.get() + bytes as isize;
        live.set(now);
        PEAK.with(|peak| {
            if now > peak.get() {
                peak.set(now);
            }
        });
    });
}

fn on_release(bytes: usize) {
    LIVE.with(|live| live.set(live.get() - bytes as isize));
}

/// Bytes currently held by live buffers on this thread.
pub fn live_bytes() -> usize {
    LIVE.with(|l| l.get().max(0) as usize)
}

/// High-water mark of [`live_bytes`] since the last [`reset_peak`].
pub fn peak_bytes() -> usize {
    PEAK.with(|p| p.get().max(0) as usize)
}

/// Starts a new measurement window: the peak drops to the current live count.
pub fn reset_peak() {
    let live = LIVE.with(|l| l.get());
    PEAK.with(|p| p.set(live));
}

/// Heap storage whose size is reported to the live-byte counter.
pub struct Buffer<T> {
    data: Vec<T>,
    bytes: usize,
}

impl<T> Buffer<T> {
    pub fn from_vec(data: Vec<T>) -> Self {
        let bytes = data.capacity() * size_of::<T>();
        on_alloc(bytes);
        Buffer { data, bytes }
    }

    pub fn into_vec(mut self) -> Vec<T> {
        on_release(self.bytes);
        self.bytes = 0;
        std::mem::take(&mut self.data)
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }
}

impl<T: Clone> Buffer<T> {
    pub fn filled(len: usize, value: T) -> Self {
        Self::from_vec(vec![value; len])
    }
}

impl<T: Clone> Clone for Buffer<T> {
    fn clone(&self) -> Self {
        Self::from_vec(self.data.clone())
    }
}

impl<T> Drop for Buffer<T> {
    fn drop(&mut self) {
        on_release(self.bytes);
    }
}

impl<T> Deref for Buffer<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.data
    }
}

impl<T> DerefMut for Buffer<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for Buffer<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.data.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_tracks_largest_allocation_and_resets() {
        reset_peak();
        let base = live_bytes();
        {
            let a = Buffer::filled(1000, 0f32);
            let _b = Buffer::filled(250, 0f64);
            assert_eq!(live_bytes(), base + 4000 + 2000);
            drop(a);
            assert_eq!(live_bytes(), base + 2000);
        }
        assert_eq!(live_bytes(), base);
        assert_eq!(peak_bytes(), base + 6000);
        reset_peak();
        assert_eq!(peak_bytes(), base);
    }

    #[test]
    fn into_vec_releases_accounting() {
        let base = live_bytes();
        let buf = Buffer::filled(16, 1u8);
        let v = buf.into_vec();
        assert_eq!(v.len(), 16);
        assert_eq!(live_bytes(), base);
    }
}
