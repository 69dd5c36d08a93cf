//! Depth-map accuracy metrics.
//!
//! For pixels where both maps are valid: the MAE counts only errors within
//! 100 depth intervals, while the two threshold percentages are taken over
//! all such pixels, so an excluded gross error fails both thresholds.
//! Completeness is the share of valid ground-truth pixels with a prediction.

use skysweep_synthgen::DepthMap;

use crate::error::{HarnessError, Result};

pub const METRICS_HEADER: &str = "mae_m,pct_lt_3interval,pct_lt_0p6m,completeness,n_pixels";
pub const ABSOLUTE_THRESHOLD_M: f64 = 0.6;
pub const INTERVAL_THRESHOLD: f64 = 3.0;
pub const MAE_CUTOFF_INTERVALS: f64 = 100.0;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    /// Mean absolute error in meters; NaN when no pixel is within the cutoff.
    pub mae_m: f64,
    pub pct_lt_3interval: f64,
    pub pct_lt_0p6m: f64,
    pub completeness: f64,
    /// Pixels valid in both maps.
    pub n_pixels: usize,
    pub n_mae: usize,
    pub n_lt_3interval: usize,
    pub n_lt_0p6m: usize,
    pub n_truth: usize,
}

impl MetricsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{:?},{:?},{:?},{:?},{}",
            self.mae_m, self.pct_lt_3interval, self.pct_lt_0p6m, self.completeness, self.n_pixels
        )
    }
}

/// Sums over any number of depth maps; pooled metrics come from [`finish`](Self::finish).
#[derive(Clone, Debug, Default)]
pub struct MetricsAccumulator {
    abs_sum: f64,
    n_mae: usize,
    n_both: usize,
    n_lt_interval: usize,
    n_lt_abs: usize,
    n_truth: usize,
}

impl MetricsAccumulator {
    pub fn add(&mut self, pred: &DepthMap, truth: &DepthMap, interval: f64) -> Result<()> {
        if (pred.width, pred.height) != (truth.width, truth.height) {
            return Err(HarnessError::Contract(format!(
                "prediction {}x{} vs ground truth {}x{}",
                pred.width, pred.height, truth.width, truth.height
            )));
        }
        if !(interval > 0.0) {
            return Err(HarnessError::Contract(format!("depth interval must be positive, got {interval}")));
        }
        let cutoff = MAE_CUTOFF_INTERVALS * interval;
        let near = INTERVAL_THRESHOLD * interval;
        for i in 0..truth.depth.len() {
            if !truth.valid[i] {
                continue;
            }
            self.n_truth += 1;
            if !pred.valid[i] {
                continue;
            }
            self.n_both += 1;
            let err = (pred.depth[i] - truth.depth[i]).abs();
            if err <= cutoff {
                self.abs_sum += err;
                self.n_mae += 1;
            }
            if err < near {
                self.n_lt_interval += 1;
            }
            if err < ABSOLUTE_THRESHOLD_M {
                self.n_lt_abs += 1;
            }
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<MetricsReport> {
        if self.n_both == 0 {
            return Err(HarnessError::Degenerate("no pixel is valid in both prediction and ground truth".into()));
        }
        let pct = |n: usize, of: usize| 100.0 * n as f64 / of as f64;
        Ok(MetricsReport {
            mae_m: if self.n_mae == 0 { f64::NAN } else { self.abs_sum / self.n_mae as f64 },
            pct_lt_3interval: pct(self.n_lt_interval, self.n_both),
            pct_lt_0p6m: pct(self.n_lt_abs, self.n_both),
            completeness: pct(self.n_both, self.n_truth),
            n_pixels: self.n_both,
            n_mae: self.n_mae,
            n_lt_3interval: self.n_lt_interval,
            n_lt_0p6m: self.n_lt_abs,
            n_truth: self.n_truth,
        })
    }
}

/// Metrics of one predicted depth map against ground truth.
pub fn evaluate_depth(pred: &DepthMap, truth: &DepthMap, interval: f64) -> Result<MetricsReport> {
    let mut acc = MetricsAccumulator::default();
    acc.add(pred, truth, interval)?;
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[f64]) -> DepthMap {
        DepthMap { width: values.len(), height: 1, depth: values.to_vec(), valid: vec![true; values.len()] }
    }

    #[test]
    fn perfect_prediction() {
        let gt = row(&[10.0, 11.0, 12.5]);
        let m = evaluate_depth(&gt, &gt, 0.15).unwrap();
        assert_eq!((m.mae_m, m.pct_lt_3interval, m.pct_lt_0p6m, m.completeness), (0.0, 100.0, 100.0, 100.0));
        assert!(m.csv_row().starts_with("0.0,100.0,100.0,100.0,"));
    }

    #[test]
    fn hand_enumerated_errors() {
        let gt = row(&[10.0, 10.0, 10.0]);
        let m = evaluate_depth(&row(&[10.1, 9.8, 10.9]), &gt, 0.15).unwrap();
        assert!((m.mae_m - 0.4).abs() < 1e-12);
        assert!((m.pct_lt_0p6m - 200.0 / 3.0).abs() < 1e-9);
        assert!((m.pct_lt_3interval - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn gross_error_leaves_mae_but_fails_thresholds() {
        let gt = row(&[10.0, 10.0]);
        let m = evaluate_depth(&row(&[10.0, 30.0]), &gt, 0.15).unwrap();
        assert_eq!(m.mae_m, 0.0);
        assert_eq!(m.n_mae, 1);
        assert_eq!(m.pct_lt_0p6m, 50.0);
        assert_eq!(m.pct_lt_3interval, 50.0);
    }

    #[test]
    fn completeness_over_valid_truth() {
        let mut gt = row(&[10.0, 10.0, 10.0, 10.0]);
        gt.valid[3] = false;
        let mut pred = row(&[10.0, 10.0, 10.0, 10.0]);
        pred.valid[0] = false;
        let m = evaluate_depth(&pred, &gt, 0.15).unwrap();
        assert!((m.completeness - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(m.n_pixels, 2);
    }

    #[test]
    fn no_overlap_is_degenerate() {
        let gt = row(&[10.0]);
        let mut pred = row(&[10.0]);
        pred.valid[0] = false;
        assert!(matches!(evaluate_depth(&pred, &gt, 0.15), Err(HarnessError::Degenerate(_))));
    }
}
