use crate::error::{GeometryError, Result};

/// Evenly spaced fronto-parallel depth hypotheses `d_min + i * interval`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthPlan {
    d_min: f64,
    interval: f64,
    count: usize,
}

impl DepthPlan {
    pub fn new(d_min: f64, interval: f64, count: usize) -> Result<Self> {
        if !(d_min > 0.0 && d_min.is_finite()) {
            return Err(GeometryError::Contract(format!("d_min must be positive, got {d_min}")));
        }
        if !(interval > 0.0 && interval.is_finite()) {
            return Err(GeometryError::Contract(format!("interval must be positive, got {interval}")));
        }
        if count < 2 {
            return Err(GeometryError::Contract(format!("need at least 2 depth samples, got {count}")));
        }
        Ok(DepthPlan { d_min, interval, count })
    }

    /// Smallest plan with the given interval that covers `[lo, hi]` padded by `pad` intervals.
    pub fn covering(lo: f64, hi: f64, interval: f64, pad: usize) -> Result<Self> {
        let d_min = lo - pad as f64 * interval;
        let span = hi + pad as f64 * interval - d_min;
        let count = ((span / interval).ceil() as usize + 1).max(2);
        Self::new(d_min, interval, count)
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn d_max(&self) -> f64 {
        self.depth(self.count - 1)
    }

    pub fn depth(&self, index: usize) -> f64 {
        self.d_min + index as f64 * self.interval
    }

    /// Nearest plane to `depth`, or `None` when it rounds outside the plan.
    pub fn nearest_index(&self, depth: f64) -> Option<usize> {
        let k = ((depth - self.d_min) / self.interval).round();
        (k >= 0.0 && k <= (self.count - 1) as f64).then_some(k as usize)
    }

    /// Same span `[d_min, d_max]` sampled with `count` planes.
    pub fn resampled(&self, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(GeometryError::Contract(format!("need at least 2 depth samples, got {count}")));
        }
        let span = self.d_max() - self.d_min;
        Self::new(self.d_min, span / (count - 1) as f64, count)
    }
}

/// The plan's depths in increasing order.
pub fn depth_planes(plan: &DepthPlan) -> Vec<f64> {
    (0..plan.count).map(|i| plan.depth(i)).collect()
}
